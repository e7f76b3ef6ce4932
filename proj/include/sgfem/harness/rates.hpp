#pragma once

// Log-log rate fits and the admissibility rules applied before fitting.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace sgfem::harness {

struct RatePoint {
  double h;      // refinement parameter, decreasing as the discretization is refined
  double error;
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;      // rms of log residuals
  double ci95 = 0.0;          // half-width of the 95% interval of the slope (0 when 3 points fit exactly)
  std::size_t points = 0;
};

/// Least-squares slope of log(error) against log(h).
inline FitResult fit_rate(const std::vector<RatePoint>& pts) {
  if (pts.size() < 3) throw std::invalid_argument("fit_rate: need at least 3 admissible points");
  for (const auto& p : pts)
    if (!(p.h > 0) || !(p.error > 0)) throw std::invalid_argument("fit_rate: h and error must be positive");
  const double n = static_cast<double>(pts.size());
  double sx = 0, sy = 0;
  for (const auto& p : pts) {
    sx += std::log(p.h);
    sy += std::log(p.error);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& p : pts) {
    const double dx = std::log(p.h) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(p.error) - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_rate: all h values coincide");
  FitResult r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  r.points = pts.size();
  double ss = 0;
  for (const auto& p : pts) {
    const double e = std::log(p.error) - (r.intercept + r.slope * std::log(p.h));
    ss += e * e;
  }
  r.residual = std::sqrt(ss / n);
  const double dof = n - 2;
  const boost::math::students_t dist(dof);
  const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
  r.ci95 = t * std::sqrt(ss / dof / sxx);
  return r;
}

/// Slopes between consecutive points.
inline std::vector<double> pairwise_slopes(const std::vector<RatePoint>& pts) {
  std::vector<double> s;
  for (std::size_t i = 1; i < pts.size(); ++i)
    s.push_back(std::log(pts[i].error / pts[i - 1].error) / std::log(pts[i].h / pts[i - 1].h));
  return s;
}

/// Least-squares slopes over sliding windows of `window` consecutive points.
inline std::vector<double> local_slopes(const std::vector<RatePoint>& pts, std::size_t window = 3) {
  std::vector<double> s;
  if (window < 2) throw std::invalid_argument("local_slopes: window must be >= 2");
  for (std::size_t i = 0; i + window <= pts.size(); ++i) {
    std::vector<RatePoint> w(pts.begin() + static_cast<std::ptrdiff_t>(i),
                             pts.begin() + static_cast<std::ptrdiff_t>(i + window));
    if (window == 2) {
      s.push_back(pairwise_slopes(w).front());
      continue;
    }
    s.push_back(fit_rate(w).slope);
  }
  return s;
}

inline constexpr double kErrorFloor = 100 * std::numeric_limits<double>::epsilon();

/// Why a point was left out of a fit ("" when admitted).
struct Admission {
  bool admitted = false;
  std::string reason;
};

/// Admissibility: error above 100 eps, above 10x the reference error estimate,
/// and part of the longest run of strictly decreasing errors (points ordered
/// from coarse to fine). Returns one entry per point.
inline std::vector<Admission> admissible_points(const std::vector<RatePoint>& pts, double reference_error) {
  std::vector<Admission> a(pts.size());
  std::vector<bool> ok(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!(pts[i].error > kErrorFloor)) a[i].reason = "below 100 eps";
    else if (pts[i].error < 10.0 * reference_error) a[i].reason = "within 10x of reference error";
    ok[i] = a[i].reason.empty();
  }
  std::size_t best_start = 0, best_len = 0;
  for (std::size_t i = 0; i < pts.size();) {
    if (!ok[i]) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < pts.size() && ok[j] && pts[j].error < pts[j - 1].error) ++j;
    if (j - i > best_len) {
      best_start = i;
      best_len = j - i;
    }
    i = j;
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!ok[i]) continue;
    if (i >= best_start && i < best_start + best_len) a[i].admitted = true;
    else a[i].reason = "outside the monotone segment";
  }
  return a;
}

}  // namespace sgfem::harness
