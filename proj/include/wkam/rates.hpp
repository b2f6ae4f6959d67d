#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wkam/errors.hpp"

namespace wkam {

struct SeriesPoint {
  int n = 0;
  double error = 0.0;
};

struct ExpFit {
  double rho = 0.0;  // per period
  double intercept = 0.0;
  double r2 = 0.0;
};

struct PowFit {
  double p = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

namespace detail {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

inline LineFit least_squares(std::span<const double> xs, std::span<const double> ys) {
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  LineFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  if (syy <= 1e-300 * std::max(1.0, my * my)) {
    f.r2 = 1.0;  // constant data is fitted exactly by a flat line
  } else {
    double ss = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = ys[i] - (f.intercept + f.slope * xs[i]);
      ss += r * r;
    }
    f.r2 = std::clamp(1.0 - ss / syy, 0.0, 1.0);
  }
  return f;
}

inline void require_fit_input(std::span<const SeriesPoint> pts, bool positive_n) {
  if (pts.size() < 5) throw ArgumentError("fit window has fewer than 5 points");
  for (const auto& p : pts) {
    if (!(p.error > 0.0) || !std::isfinite(p.error)) throw ArgumentError("fit window contains a non-positive error");
    if (positive_n && p.n < 1) throw ArgumentError("power fit needs n >= 1");
  }
}

}  // namespace detail

/// Least squares of log e_n on n; rho = -slope.
inline ExpFit fit_exponential(std::span<const SeriesPoint> pts) {
  detail::require_fit_input(pts, false);
  std::vector<double> x, y;
  for (const auto& p : pts) x.push_back(p.n), y.push_back(std::log(p.error));
  const auto f = detail::least_squares(x, y);
  return {-f.slope, f.intercept, f.r2};
}

/// Least squares of log e_n on log n; p = -slope.
inline PowFit fit_power(std::span<const SeriesPoint> pts) {
  detail::require_fit_input(pts, true);
  std::vector<double> x, y;
  for (const auto& p : pts) x.push_back(std::log(static_cast<double>(p.n))), y.push_back(std::log(p.error));
  const auto f = detail::least_squares(x, y);
  return {-f.slope, f.intercept, f.r2};
}

/// Median of the last 10 errors.
inline double floor_estimate(std::span<const SeriesPoint> series) {
  if (series.size() < 10) throw ArgumentError("floor_estimate: need at least 10 points");
  std::vector<double> tail;
  for (std::size_t i = series.size() - 10; i < series.size(); ++i) tail.push_back(series[i].error);
  std::sort(tail.begin(), tail.end());
  return 0.5 * (tail[4] + tail[5]);
}

/// Points with n >= 1, e_n > 0 and e_n >= 3 floor.
inline std::vector<SeriesPoint> select_fit_points(std::span<const SeriesPoint> series, double floor) {
  std::vector<SeriesPoint> out;
  for (const auto& p : series)
    if (p.n >= 1 && p.error > 0.0 && p.error >= 3.0 * floor) out.push_back(p);
  return out;
}

struct ConvergenceReport {
  std::string system;
  std::string op;
  int n_per_axis = 0;
  int steps_per_period = 0;
  double c_est = 0.0;
  std::vector<SeriesPoint> series;
  std::optional<ExpFit> exp_fit;
  std::optional<PowFit> pow_fit;
  double floor = 0.0;
  int window_lo = 0;
  int window_hi = -1;
  std::size_t fit_points = 0;
  std::string fit_note;
  int ubar_iterations = 0;
  /// Probe node, if the error was measured at one node.
  std::optional<std::size_t> probe;
  double ubar_probe = 0.0;
  double mu = 0.0;  // monodromy exponent of the reference orbit, 0 if not hyperbolic
};

/// Fills floor, fit window and both fits from `r.series`.
inline void fit_report(ConvergenceReport& r) {
  if (r.series.size() < 10) {
    r.floor = r.series.empty() ? 0.0 : r.series.back().error;
    r.fit_note = "series shorter than 10 points";
    return;
  }
  r.floor = floor_estimate(r.series);
  const auto pts = select_fit_points(r.series, r.floor);
  r.fit_points = pts.size();
  if (!pts.empty()) r.window_lo = pts.front().n, r.window_hi = pts.back().n;
  try {
    r.exp_fit = fit_exponential(pts);
    r.pow_fit = fit_power(pts);
  } catch (const ArgumentError& e) {
    r.fit_note = e.what();
  }
}

}  // namespace wkam
