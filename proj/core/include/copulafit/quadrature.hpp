#pragma once

#include <functional>

namespace copulafit {

// Composite Simpson over [lo, hi] with `cells` equal cells (each cell gets the
// 3-point rule, so the function is evaluated at 2*cells + 1 points).
double simpson(const std::function<double(double)>& f, double lo, double hi, int cells);

// Iterated composite Simpson on a box, innermost axis first. dims is 2 or 3;
// cells applies per axis.
double simpson_2d(const std::function<double(double, double)>& f,
                  double x0, double x1, double y0, double y1, int cells);
double simpson_3d(const std::function<double(double, double, double)>& f,
                  double x0, double x1, double y0, double y1, double z0, double z1, int cells);

}  // namespace copulafit
