#ifndef PHONET_TESTS_STATS_SUPPORT_HPP
#define PHONET_TESTS_STATS_SUPPORT_HPP

#include <cmath>

namespace testing_support {

// Regularized upper incomplete gamma Q(a, x) by series / continued fraction,
// for chi-square p-values: p = Q(df / 2, chi2 / 2).
inline double gamma_q(double a, double x) {
    if (x <= 0.0)
        return 1.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int n = 0; n < 1000; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15)
                break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
    }
    double b = x + 1.0 - a, c = 1.0 / 1e-300, d = 1.0 / b, h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300)
            d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300)
            c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15)
            break;
    }
    return std::exp(-x + a * std::log(x) - gln) * h;
}

inline double chi_square_p(double chi2, double df) { return gamma_q(df / 2.0, chi2 / 2.0); }

} // namespace testing_support

#endif
