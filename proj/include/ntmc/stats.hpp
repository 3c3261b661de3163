// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ntmc::stats {

// Pairwise (tree) summation. Result depends only on the input order.
double pairwise_sum(std::span<const double> x);

struct MeanSe {
  double mean = 0.0;
  double std_error = 0.0;
  double variance = 0.0;  // unbiased sample variance
};

MeanSe mean_se(std::span<const double> x);

// Mean and standard error of exp(logs[i]); entries may be -inf (zero).
// Returned as logs to survive overflow: log_mean, and std_error relative
// to the mean.
struct LogMeanSe {
  double log_mean = 0.0;   // -inf when every entry is zero
  double rel_std_error = 0.0;
  double log_std_error = 0.0;  // log of the absolute SE (may be -inf)
};

LogMeanSe log_mean_se(std::span<const double> logs);

double log_sum_exp(std::span<const double> logs);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LineFit ols(std::span<const double> x, std::span<const double> y);

double pearson(std::span<const double> x, std::span<const double> y);

// Kolmogorov-Smirnov distance between samples and a CDF.
template <class Cdf>
double ks_statistic(std::vector<double> samples, Cdf cdf);

// Asymptotic 1% critical value of the one-sample KS statistic.
double ks_critical_1pct(std::size_t n);

// Pearson chi-square statistic and its 99% quantile.
double chi_square(std::span<const double> observed, std::span<const double> expected);
double chi_square_critical(double dof, double level = 0.99);

}  // namespace ntmc::stats

#include <algorithm>

template <class Cdf>
double ntmc::stats::ks_statistic(std::vector<double> samples, Cdf cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}
