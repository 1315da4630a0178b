#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "wdiv/error.hpp"

namespace wdiv {

/// SplitMix64 finaliser; used to hash (seed, T, replication) into
/// independent generator seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31U);
}

/// Generator for one (T, replication) cell. Streams depend only on their
/// coordinates, so any split of replications over threads gives the same
/// draws.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t t, std::uint64_t rep) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ t);
  h = mix64(h ^ rep);
  std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32U),
                    static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(rep)};
  return std::mt19937_64(seq);
}

/// Median of the finite values; NaN when there are none.
inline double median(std::vector<double> values) {
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

struct LinearFit {
  double slope{0};
  double intercept{0};
  double slope_stderr{0};
};

/// Ordinary least squares y = intercept + slope·x.
inline LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "least squares needs at least two paired points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0;
  double my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0;
  double sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) throw Error(ErrorCode::invalid_argument, "least squares needs distinct x values");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    fit.slope_stderr = std::sqrt(rss / (n - 2) / sxx);
  }
  return fit;
}

/// Slope of log(y) on log(x).
inline LinearFit log_log_fit(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw Error(ErrorCode::invalid_argument, "log-log fit needs positive data");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return least_squares(lx, ly);
}

/// Median of the χ² distribution with q degrees of freedom.
inline double chi_squared_median(unsigned q) {
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(static_cast<double>(q)), 0.5);
}

}  // namespace wdiv
