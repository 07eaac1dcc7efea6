#include <doctest.h>

#include <cmath>

#include "hsto/generators.hpp"
#include "hsto/ops.hpp"
#include "hsto/projection.hpp"

using namespace hsto;

namespace {

ScalarField sample(const Grid& g, double (*fn)(double, double, double)) {
  ScalarField f = ScalarField::full(g);
  for (int k = 0; k < g.n3; ++k)
    for (int i = 0; i < g.n1; ++i)
      for (int j = 0; j < g.n2; ++j) f.at(i, j, k) = fn(g.x1(i), g.x2(j), g.z(k));
  return f;
}

HVectorField random_u(const Grid& g, std::uint64_t seed) {
  return {make_scalar_field(g, "random_smooth 3 2 0.6", seed, false),
          make_scalar_field(g, "random_smooth 3 2 0.6", seed + 1, false)};
}

double max_err(const ScalarField& a, const ScalarField& b) { return (a - b).max_abs(); }

}  // namespace

TEST_CASE("Q_H closed forms") {
  Grid g(16, 16, 5, 1.0);
  Projector proj(g);

  // divergence-free input has no gradient part
  HVectorField df{sample(g, [](double, double x2, double) { return std::sin(x2); }),
                  ScalarField::full(g)};
  HVectorField q = proj.apply_qh(df);
  CHECK(q.u1.max_abs() < 1e-12);
  CHECK(q.u2.max_abs() < 1e-12);

  // a pure gradient is a fixed point
  HVectorField pg{sample(g, [](double x1, double, double) { return std::cos(x1); }),
                  ScalarField::full(g)};
  HVectorField qpg = proj.apply_qh(pg);
  CHECK(max_err(qpg.u1, pg.u1) < 1e-12);
  CHECK(qpg.u2.max_abs() < 1e-12);

  // oracle: Psi = -cos(x1+x2)/2 solves Delta Psi = cos(x1+x2) = div(sin(x1+x2), 0)
  HVectorField mixed{sample(g, [](double x1, double x2, double) { return std::sin(x1 + x2); }),
                     ScalarField::full(g)};
  HVectorField qm = proj.apply_qh(mixed);
  ScalarField half =
      sample(g, [](double x1, double x2, double) { return 0.5 * std::sin(x1 + x2); });
  CHECK(max_err(qm.u1, half) < 1e-12);
  CHECK(max_err(qm.u2, half) < 1e-12);

  // and the complement
  HVectorField pm = proj.apply_ph(mixed);
  CHECK(max_err(pm.u1, half) < 1e-12);
  CHECK(max_err(pm.u2, -1.0 * half) < 1e-12);
}

TEST_CASE("P_H output is divergence-free, complements behave") {
  Grid g(16, 16, 5, 1.0);
  Projector proj(g);
  HVectorField u = random_u(g, 21);
  HVectorField pu = proj.apply_ph(u);
  CHECK(div_h(pu).max_abs() < 1e-11);

  HVectorField df{sample(g, [](double, double x2, double) { return std::sin(2 * x2); }),
                  sample(g, [](double x1, double, double) { return std::cos(x1); })};
  HVectorField pdf = proj.apply_ph(df);
  CHECK(max_err(pdf.u1, df.u1) < 1e-12);
  CHECK(max_err(pdf.u2, df.u2) < 1e-12);

  HVectorField grad = grad_h(sample(g, [](double x1, double x2, double) {
    return std::sin(2 * x1) + std::cos(x1 + x2);
  }));
  HVectorField pgrad = proj.apply_ph(grad);
  CHECK(pgrad.u1.max_abs() < 1e-12);
  CHECK(pgrad.u2.max_abs() < 1e-12);
}

TEST_CASE("hydrostatic projection") {
  Grid g(16, 16, 9, 1.0);
  Projector proj(g);

  SUBCASE("baroclinic fields are untouched") {
    HVectorField u = random_u(g, 33);
    HVectorField bc{vtilde(u.u1), vtilde(u.u2)};  // vanishing vertical average
    HVectorField pbc = proj.apply_p(bc);
    CHECK(max_err(pbc.u1, bc.u1) < 1e-11);
    CHECK(max_err(pbc.u2, bc.u2) < 1e-11);
  }

  SUBCASE("x3-independent input reduces to the horizontal projection") {
    HVectorField u{sample(g, [](double x1, double x2, double) { return std::sin(x1 + x2); }),
                   ScalarField::full(g)};
    HVectorField pu = proj.apply_p(u);
    ScalarField half =
        sample(g, [](double x1, double x2, double) { return 0.5 * std::sin(x1 + x2); });
    CHECK(max_err(pu.u1, half) < 1e-12);
    CHECK(max_err(pu.u2, -1.0 * half) < 1e-12);
    // the removed part is an x3-independent slab
    HVectorField q = proj.apply_q(u);
    CHECK(q.u1.is_slab());
  }

  SUBCASE("idempotency and integral incompressibility on random fields") {
    for (std::uint64_t seed : {40u, 41u, 42u, 43u}) {
      HVectorField u = random_u(g, seed);
      HVectorField pu = proj.apply_p(u);
      HVectorField ppu = proj.apply_p(pu);
      CHECK(max_err(ppu.u1, pu.u1) < 1e-12);
      CHECK(max_err(ppu.u2, pu.u2) < 1e-12);
      CHECK(div_h(vbar(pu)).max_abs() < 1e-11);
    }
  }

  SUBCASE("orthogonality of P and Q") {
    HVectorField u = random_u(g, 55);
    HVectorField pu = proj.apply_p(u);
    HVectorField qu = proj.apply_q(u);
    HVectorField quf{broadcast_full(qu.u1), broadcast_full(qu.u2)};
    CHECK(std::abs(l2_inner(pu, quf)) < 1e-11);
  }

  SUBCASE("surface pressure gradients are annihilated") {
    ScalarField p = make_scalar_field(g, "random_smooth 4 0 1.0", 60, true);
    HVectorField gp = grad_h(broadcast_full(p));
    HVectorField pgp = proj.apply_p(gp);
    CHECK(pgp.u1.max_abs() < 1e-11);
    CHECK(pgp.u2.max_abs() < 1e-11);
  }

  SUBCASE("d3 commutes: the removed part is x3-independent") {
    HVectorField u = random_u(g, 70);
    HVectorField pu = proj.apply_p(u);
    CHECK(max_err(dz(pu.u1, Bc::Interior), dz(u.u1, Bc::Interior)) < 1e-11);
    CHECK(max_err(dz(pu.u2, Bc::Interior), dz(u.u2, Bc::Interior)) < 1e-11);
  }
}

TEST_CASE("gradient part: curl-free, divergence preserved") {
  Grid g(16, 16, 5, 1.0);
  Projector proj(g);
  HVectorField u = random_u(g, 91);
  HVectorField q = proj.apply_qh(u);
  ScalarField curl = grad_h(q.u2).u1 - grad_h(q.u1).u2;
  CHECK(curl.max_abs() < 1e-11);
  CHECK((div_h(q) - div_h(u)).max_abs() < 1e-11);
}
