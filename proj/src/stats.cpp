#include "copula_forge/stats.hpp"

#include <algorithm>
#include <cmath>

#include "copula_forge/errors.hpp"

namespace copula_forge {

double ks_uniform(std::span<const double> sample) {
  if (sample.empty()) throw DomainError("ks_uniform: empty sample");
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double v = std::clamp(s[i], 0.0, 1.0);
    d = std::max({d, (i + 1) / n - v, v - i / n});
  }
  return d;
}

double ks_critical_value(std::size_t n, double alpha) {
  double c = 1.628;  // 1%
  if (alpha >= 0.05) c = 1.358;
  else if (alpha >= 0.01) c = 1.628;
  const double sn = std::sqrt(static_cast<double>(n));
  return c / (sn + 0.12 + 0.11 / sn);
}

double wasserstein1(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("wasserstein1: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  // Integrate |F_x - F_y| over the merged support.
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double prev = std::min(x[0], y[0]);
  double total = 0.0;
  while (i < x.size() || j < y.size()) {
    double next;
    if (j >= y.size() || (i < x.size() && x[i] <= y[j])) next = x[i];
    else next = y[j];
    total += std::abs(i / nx - j / ny) * (next - prev);
    prev = next;
    if (j >= y.size() || (i < x.size() && x[i] <= y[j])) ++i;
    else ++j;
  }
  return total;
}

double empirical_copula(const Matrix& data, std::span<const double> p) {
  if (data.empty()) throw DomainError("empirical_copula: no data");
  if (p.size() != data.cols()) throw ContractError("empirical_copula: dimension mismatch");
  std::size_t hits = 0;
  for (std::size_t k = 0; k < data.rows(); ++k) {
    auto row = data.row(k);
    bool below = true;
    for (std::size_t c = 0; c < row.size() && below; ++c) below = row[c] <= p[c];
    hits += below;
  }
  return static_cast<double>(hits) / static_cast<double>(data.rows());
}

double cvm_distance(std::span<const double> model_values, std::span<const double> empirical_values) {
  if (model_values.size() != empirical_values.size()) throw ContractError("cvm: length mismatch");
  if (model_values.empty()) throw DomainError("cvm: no observations");
  double s = 0.0;
  for (std::size_t i = 0; i < model_values.size(); ++i) {
    const double d = model_values[i] - empirical_values[i];
    s += d * d;
  }
  return s / static_cast<double>(model_values.size());
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ContractError("fit_line: need >= 2 paired points");
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

std::vector<double> block_means(std::span<const double> v, std::size_t block) {
  std::vector<double> out;
  if (block == 0) return out;
  for (std::size_t start = 0; start + block <= v.size(); start += block) out.push_back(mean(v.subspan(start, block)));
  return out;
}

}  // namespace copula_forge
