#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "qflow/errors.hpp"

namespace qflow {

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
inline double ks_statistic(std::span<const double> samples,
                           const std::function<double(double)>& cdf) {
  if (samples.empty()) fail(errc::insufficient_sample, "ks: no samples");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double n = double(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max(d, std::abs(f - double(i) / n));
    d = std::max(d, std::abs(double(i + 1) / n - f));
  }
  return d;
}

inline double ks_vs_exponential(std::span<const double> samples, double rate) {
  return ks_statistic(samples, [rate](double x) {
    return x <= 0.0 ? 0.0 : 1.0 - std::exp(-rate * x);
  });
}

inline double pearson_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) fail(errc::config, "pearson: size mismatch");
  const double n = double(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) fail(errc::config, "pearson: degenerate variance");
  return sab / std::sqrt(saa * sbb);
}

/// Gaussian-kernel smoothing with reflection at the ends; sigma in bins.
inline std::vector<double> smooth_gaussian(std::span<const double> f, double sigma_bins) {
  const long n = long(f.size());
  const long half = std::max(1L, long(std::ceil(3.0 * sigma_bins)));
  std::vector<double> kernel(2 * half + 1);
  double ksum = 0.0;
  for (long k = -half; k <= half; ++k) {
    kernel[k + half] = std::exp(-0.5 * (double(k) / sigma_bins) * (double(k) / sigma_bins));
    ksum += kernel[k + half];
  }
  for (auto& w : kernel) w /= ksum;
  std::vector<double> out(n, 0.0);
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    for (long k = -half; k <= half; ++k) {
      long j = i + k;
      if (j < 0) j = -j;
      if (j >= n) j = 2 * (n - 1) - j;
      acc += kernel[k + half] * f[j];
    }
    out[i] = acc;
  }
  return out;
}

/// Indices of strict local maxima above `floor`.
inline std::vector<long> local_maxima(std::span<const double> f, double floor) {
  std::vector<long> out;
  for (long i = 1; i + 1 < long(f.size()); ++i)
    if (f[i] > floor && f[i] >= f[i - 1] && f[i] > f[i + 1]) out.push_back(i);
  return out;
}

inline double sample_mean(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / double(v.size());
}

inline double sample_variance(std::span<const double> v) {
  const double m = sample_mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / double(v.size());
}

}  // namespace qflow
