#pragma once

#include <cstddef>
#include <vector>

namespace qcl {

// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

// p-value of a chi-square statistic with the given degrees of freedom.
double chi_square_pvalue(double chi2, int dof);

// Least-squares slope of y vs x (used for log-log order fits).
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

struct MeanStderr {
    double mean;
    double stderr_;
};

// Sample mean and standard error of the mean.
MeanStderr mean_stderr(const std::vector<double>& v);

}  // namespace qcl
