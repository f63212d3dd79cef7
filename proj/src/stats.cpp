#include "stabclt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "stabclt/error.hpp"

namespace stabclt {

namespace {

void require_nonempty(std::span<const double> sample, const char* what) {
  if (sample.empty()) throw InputError(std::string(what) + ": empty sample");
}

double central_moment(std::span<const double> sample, double mean, int power) {
  double sum = 0.0;
  for (double x : sample) sum += std::pow(x - mean, power);
  return sum / static_cast<double>(sample.size());
}

}  // namespace

Moments moments(std::span<const double> sample) {
  require_nonempty(sample, "moments");
  Moments m;
  m.count = sample.size();
  double sum = 0.0;
  for (double x : sample) sum += x;
  m.mean = sum / static_cast<double>(m.count);
  const double m2 = central_moment(sample, m.mean, 2);
  if (m.count > 1) m.variance = m2 * static_cast<double>(m.count) / static_cast<double>(m.count - 1);
  if (m2 > 0.0) {
    m.skewness = central_moment(sample, m.mean, 3) / std::pow(m2, 1.5);
    m.kurtosis = central_moment(sample, m.mean, 4) / (m2 * m2) - 3.0;
  }
  return m;
}

double variance_standard_error(std::span<const double> sample) {
  require_nonempty(sample, "variance_standard_error");
  const auto m = static_cast<double>(sample.size());
  if (sample.size() < 4) return 0.0;
  const Moments mo = moments(sample);
  const double m4 = central_moment(sample, mo.mean, 4);
  const double s4 = mo.variance * mo.variance;
  return std::sqrt(std::max(0.0, (m4 - s4 * (m - 3.0) / (m - 1.0)) / m));
}

std::vector<double> standardize(std::span<const double> sample) {
  require_nonempty(sample, "standardize");
  const Moments m = moments(sample);
  std::vector<double> out(sample.size(), 0.0);
  if (!(m.variance > 0.0)) return out;
  const double sd = std::sqrt(m.variance);
  for (std::size_t i = 0; i < sample.size(); ++i) out[i] = (sample[i] - m.mean) / sd;
  return out;
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
  require_nonempty(sample, "ks_statistic");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::ranges::sort(sorted);
  const auto n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double kolmogorov_survival(double t) {
  if (t <= 0.0) return 1.0;
  if (t < 0.2) return 1.0;  // series converges slowly; the value is 1 to double precision
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult ks_test(std::span<const double> sample, const std::function<double(double)>& cdf) {
  TestResult result;
  result.statistic = ks_statistic(sample, cdf);
  const double root_n = std::sqrt(static_cast<double>(sample.size()));
  result.p_value = kolmogorov_survival((root_n + 0.12 + 0.11 / root_n) * result.statistic);
  return result;
}

TestResult two_sample_ks(std::span<const double> a, std::span<const double> b) {
  require_nonempty(a, "two_sample_ks");
  require_nonempty(b, "two_sample_ks");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::ranges::sort(x);
  std::ranges::sort(y);
  const auto nx = static_cast<double>(x.size());
  const auto ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  TestResult result;
  result.statistic = d;
  const double root_ne = std::sqrt(nx * ny / (nx + ny));
  result.p_value = kolmogorov_survival((root_ne + 0.12 + 0.11 / root_ne) * d);
  return result;
}

TestResult chi_square_gof(std::span<const double> observed, std::span<const double> expected,
                          std::size_t fitted_parameters) {
  if (observed.size() != expected.size()) throw InputError("chi_square_gof: observed/expected size mismatch");
  if (observed.size() < 2 + fitted_parameters) throw InputError("chi_square_gof: too few bins");
  TestResult result;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] < 5.0) {
      throw InputError("chi_square_gof: expected count " + std::to_string(expected[i]) + " in bin " +
                       std::to_string(i) + " is below 5");
    }
    const double diff = observed[i] - expected[i];
    result.statistic += diff * diff / expected[i];
  }
  const boost::math::chi_squared dist(static_cast<double>(observed.size() - 1 - fitted_parameters));
  result.p_value = boost::math::cdf(boost::math::complement(dist, result.statistic));
  return result;
}

TestResult chi_square_independence(const std::vector<std::vector<double>>& table) {
  if (table.empty()) throw InputError("chi_square_independence: empty table");
  const std::size_t cols = table.front().size();
  std::vector<double> row_sum(table.size(), 0.0);
  std::vector<double> col_sum(cols, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i].size() != cols) throw InputError("chi_square_independence: ragged table");
    for (std::size_t j = 0; j < cols; ++j) {
      row_sum[i] += table[i][j];
      col_sum[j] += table[i][j];
      total += table[i][j];
    }
  }
  const auto live_rows = std::ranges::count_if(row_sum, [](double s) { return s > 0.0; });
  const auto live_cols = std::ranges::count_if(col_sum, [](double s) { return s > 0.0; });
  if (live_rows < 2 || live_cols < 2) throw InputError("chi_square_independence: table needs 2x2 nonzero margins");
  TestResult result;
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double e = row_sum[i] * col_sum[j] / total;
      if (e > 0.0) result.statistic += (table[i][j] - e) * (table[i][j] - e) / e;
    }
  }
  const boost::math::chi_squared dist(static_cast<double>((live_rows - 1) * (live_cols - 1)));
  result.p_value = boost::math::cdf(boost::math::complement(dist, result.statistic));
  return result;
}

TestResult pitman_morgan_greater(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("pitman_morgan: samples must be paired");
  if (a.size() < 4) throw InputError("pitman_morgan: need at least 4 pairs");
  const std::size_t m = a.size();
  std::vector<double> sums(m);
  std::vector<double> diffs(m);
  for (std::size_t i = 0; i < m; ++i) {
    sums[i] = a[i] + b[i];
    diffs[i] = a[i] - b[i];
  }
  const Moments ms = moments(sums);
  const Moments md = moments(diffs);
  TestResult result;
  if (!(ms.variance > 0.0) || !(md.variance > 0.0)) return result;
  double cov = 0.0;
  for (std::size_t i = 0; i < m; ++i) cov += (sums[i] - ms.mean) * (diffs[i] - md.mean);
  cov /= static_cast<double>(m - 1);
  const double rho = std::clamp(cov / std::sqrt(ms.variance * md.variance), -1.0 + 1e-15, 1.0 - 1e-15);
  const auto df = static_cast<double>(m - 2);
  result.statistic = rho * std::sqrt(df) / std::sqrt(1.0 - rho * rho);
  const boost::math::students_t dist(df);
  result.p_value = boost::math::cdf(boost::math::complement(dist, result.statistic));
  return result;
}

}  // namespace stabclt
