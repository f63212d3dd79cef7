#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace stabclt {

struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased, (m-1) denominator
  double skewness = 0.0;  // g1 = m3 / m2^{3/2}
  double kurtosis = 0.0;  // excess, g2 = m4 / m2^2 - 3
};

/// Throws InputError on an empty sample. Variance is 0 for a single value.
Moments moments(std::span<const double> sample);

/// Standard error of the unbiased sample variance,
/// sqrt((m4 - s^4 (m-3)/(m-1)) / m).
double variance_standard_error(std::span<const double> sample);

/// (x - mean) / sd with the empirical mean and standard deviation. A
/// zero-variance sample maps to all zeros.
std::vector<double> standardize(std::span<const double> sample);

double standard_normal_cdf(double x);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// sup |F_n - F| for a continuous reference CDF (both sides of every jump).
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);

/// Asymptotic Kolmogorov survival function Q(t) = 2 sum (-1)^{k-1} exp(-2 k^2 t^2).
double kolmogorov_survival(double t);

/// One-sample KS with the asymptotic p-value (Stephens' small-sample
/// correction on the argument).
TestResult ks_test(std::span<const double> sample, const std::function<double(double)>& cdf);

/// Two-sample KS statistic and asymptotic p-value.
TestResult two_sample_ks(std::span<const double> a, std::span<const double> b);

/// Pearson chi-square goodness of fit. Requires every expected count >= 5;
/// degrees of freedom = bins - 1 - fitted_parameters.
TestResult chi_square_gof(std::span<const double> observed, std::span<const double> expected,
                          std::size_t fitted_parameters = 0);

/// Pearson chi-square test of independence on a rows x cols contingency
/// table of counts. Rows/columns with zero total are dropped.
TestResult chi_square_independence(const std::vector<std::vector<double>>& table);

/// Pitman-Morgan test on paired samples: statistic is the t value of the
/// correlation between sums and differences; p-value is one-sided for
/// Var[a] > Var[b].
TestResult pitman_morgan_greater(std::span<const double> a, std::span<const double> b);

/// Upper-tail probability of the standard normal.
double normal_upper_tail(double z);

}  // namespace stabclt
