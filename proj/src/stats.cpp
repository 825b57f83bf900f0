#include "qcl/stats.hpp"

#include <cmath>
#include <stdexcept>

#include "qcl/rng.hpp"
#include "qcl/simd.hpp"

namespace qcl {

namespace {

// Lower incomplete gamma by series (x < a + 1).
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper incomplete gamma by continued fraction (x >= a + 1).
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
    if (x < 0 || a <= 0) throw std::invalid_argument("gamma_q: bad arguments");
    if (x == 0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi_square_pvalue(double chi2, int dof) {
    if (dof <= 0) throw std::invalid_argument("chi_square_pvalue: dof <= 0");
    return gamma_q(0.5 * dof, 0.5 * chi2);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_slope: need >= 2 matching points");
    const std::size_t n = x.size();
    double mx = simd::pairwise_sum(x.data(), n) / n;
    double my = simd::pairwise_sum(y.data(), n) / n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

MeanStderr mean_stderr(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean_stderr: empty sample");
    const std::size_t n = v.size();
    double m = simd::pairwise_sum(v.data(), n) / n;
    if (n == 1) return {m, 0.0};
    double s2 = 0;
    for (double x : v) s2 += (x - m) * (x - m);
    s2 /= (n - 1);
    return {m, std::sqrt(s2 / n)};
}

double CounterRng::normal() {
    double u1 = next_double();
    double u2 = next_double();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace qcl
