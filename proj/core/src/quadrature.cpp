#include "copulafit/quadrature.hpp"

#include <stdexcept>

namespace copulafit {

double simpson(const std::function<double(double)>& f, double lo, double hi, int cells) {
    if (cells < 1) throw std::invalid_argument("simpson: need at least one cell");
    const double h = (hi - lo) / cells;
    double ends = f(lo) + f(hi);
    double mids = 0.0, interior = 0.0;
    for (int k = 0; k < cells; ++k) {
        mids += f(lo + (k + 0.5) * h);
        if (k > 0) interior += f(lo + k * h);
    }
    return h / 6.0 * (ends + 2.0 * interior + 4.0 * mids);
}

double simpson_2d(const std::function<double(double, double)>& f,
                  double x0, double x1, double y0, double y1, int cells) {
    return simpson([&](double y) {
        return simpson([&](double x) { return f(x, y); }, x0, x1, cells);
    }, y0, y1, cells);
}

double simpson_3d(const std::function<double(double, double, double)>& f,
                  double x0, double x1, double y0, double y1, double z0, double z1, int cells) {
    return simpson([&](double z) {
        return simpson_2d([&](double x, double y) { return f(x, y, z); }, x0, x1, y0, y1, cells);
    }, z0, z1, cells);
}

}  // namespace copulafit
