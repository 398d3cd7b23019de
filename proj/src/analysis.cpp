#include "dsc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dsc/error.hpp"

namespace dsc::analysis {

Plateau extract_plateau(std::span<const double> trajectory, double tail_fraction, bool stationarity_guard) {
  if (trajectory.size() < 10) {
    throw InsufficientDataError("plateau extraction needs at least 10 points, got " +
                                std::to_string(trajectory.size()));
  }
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw DomainError("tail_fraction must lie in (0, 1]");

  const auto window = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(trajectory.size()) - 1e-9)));
  const auto tail = trajectory.last(window);
  const double n = static_cast<double>(window);

  double mean = 0.0;
  for (double v : tail) mean += v;
  mean /= n;
  double sq = 0.0;
  for (double v : tail) sq += (v - mean) * (v - mean);
  const double std = std::sqrt(sq / n);

  if (stationarity_guard && window >= 3) {
    const double mid = 0.5 * (n - 1.0);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < window; ++k) {
      const double x = static_cast<double>(k) - mid;
      sxy += x * (tail[k] - mean);
      sxx += x * x;
    }
    const double trend = std::abs(sxy / sxx) * (n - 1.0);
    if (trend > 2.0 * std) {
      throw NonStationaryError("tail trend " + std::to_string(trend) + " exceeds twice the tail std " +
                               std::to_string(std));
    }
  }
  return {mean, std};
}

double alpha_from_sim(double plateau, double tau_star, double n) {
  if (!(plateau > 0.0 && plateau < 1.0)) {
    throw DegenerateInputError("plateau must lie strictly inside (0, 1), got " + std::to_string(plateau));
  }
  return 1.0 / (tau_star * n * (1.0 - plateau));
}

double calibrate_g(std::span<const CalibrationPair> pairs) {
  if (pairs.empty()) throw InsufficientDataError("calibration needs at least one pair");
  double num = 0.0, den = 0.0;
  for (const auto& pr : pairs) {
    if (!(pr.alpha_sim > 0.0 && pr.alpha_theory_unit > 0.0)) {
      throw DomainError("calibration pairs must be positive");
    }
    num += pr.alpha_sim * pr.alpha_theory_unit;
    den += pr.alpha_theory_unit * pr.alpha_theory_unit;
  }
  return num / den;
}

FitResult fit_power_law(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DomainError("xs and ys differ in length");
  if (xs.size() < 3) throw InsufficientDataError("power-law fit needs at least 3 points");
  std::vector<double> lx(xs.size()), ly(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0 && ys[i] > 0.0)) throw DomainError("power-law fit needs strictly positive data");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw DegenerateInputError("power-law fit needs at least two distinct x values");

  FitResult fit;
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  if (syy == 0.0) {
    fit.r_squared = 1.0;
  } else {
    double ss_res = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const double r = ly[i] - (fit.intercept + fit.exponent * lx[i]);
      ss_res += r * r;
    }
    fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
  return fit;
}

double ks_distance(std::span<const double> samples, const environment::ConcentrationModel& model) {
  if (samples.empty()) throw InsufficientDataError("KS distance needs at least one sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());

  double worst = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double v = sorted[i];
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == v) ++j;
    const double below = static_cast<double>(i) / n;  // empirical cdf just left of v
    const double at = static_cast<double>(j) / n;     // empirical cdf at v
    // Model cdf just left of v: the atom at zero makes F jump at 0.
    const double model_left = v <= 0.0 ? 0.0 : environment::cdf(model, v);
    const double model_at = v < 0.0 ? 0.0 : environment::cdf(model, v);
    worst = std::max({worst, std::abs(below - model_left), std::abs(at - model_at)});
    i = j;
  }
  return worst;
}

}  // namespace dsc::analysis
