#include "hsto/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hsto {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

Grid::Grid(int n1_, int n2_, int n3_, double h_, double alpha_)
    : n1(n1_), n2(n2_), n3(n3_), h(h_), alpha(alpha_) {
  if (n1 < 4 || n1 % 2 != 0) throw std::invalid_argument("Grid: n1 must be even and >= 4");
  if (n2 < 4 || n2 % 2 != 0) throw std::invalid_argument("Grid: n2 must be even and >= 4");
  if (n3 < 4) throw std::invalid_argument("Grid: n3 must be >= 4");
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("Grid: depth h must be positive");
  if (!std::isfinite(alpha)) throw std::invalid_argument("Grid: alpha must be finite");
}

double Grid::x1(int i) const { return kTwoPi * i / n1; }
double Grid::x2(int j) const { return kTwoPi * j / n2; }
double Grid::cell_area() const { return (kTwoPi / n1) * (kTwoPi / n2); }

}  // namespace hsto
