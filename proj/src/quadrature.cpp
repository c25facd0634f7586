#include "neckflow/quadrature.hpp"

namespace neckflow {

std::vector<double> geometric_breaks(double lo, double hi, double scale, int k_min)
{
    std::vector<double> breaks{lo};
    if (scale > 0.0) {
        for (int k = k_min;; ++k) {
            const double x = lo + std::ldexp(scale, k);
            if (!(x < hi))
                break;
            breaks.push_back(x);
        }
    }
    breaks.push_back(hi);
    return breaks;
}

} // namespace neckflow
