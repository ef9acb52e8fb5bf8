#pragma once

// Certified interval bounds on the epsilon-width wdim_eps of finite
// dimensional balls, the compression map that witnesses the upper bounds,
// and sweep checks of the elementary width properties.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "amenable/error.hpp"
#include "amenable/random.hpp"

namespace amenable {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct WidthInterval {
  std::int64_t lower = 0;
  std::int64_t upper = 0;
  double epsilon = 0.0;
  std::string context;

  bool exact() const { return lower == upper; }
};

using RealVector = std::vector<double>;

inline double pnorm(std::span<const double> x, double p) {
  require(p >= 1.0, Errc::parameter_domain, "norm exponent must be >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0.0;
  for (double v : x) s += std::pow(std::abs(v), p);
  return std::pow(s, 1.0 / p);
}

inline double pdistance(std::span<const double> x, std::span<const double> y, double p) {
  require(x.size() == y.size(), Errc::dimension_mismatch, "vectors of different length");
  RealVector d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
  return pnorm(d, p);
}

inline std::string exponent_name(double p) { return std::isinf(p) ? "inf" : std::to_string(p); }

// Ball of the given radius in an n-dimensional normed space, with the norm
// distance. Below the radius the width is n, from the diameter on it is 0;
// in between only [0, n] is known.
inline WidthInterval wdim_unit_ball(std::int64_t n, double epsilon, double radius = 1.0) {
  require(n >= 1, Errc::parameter_domain, "dimension n must be >= 1");
  require(epsilon > 0.0 && std::isfinite(epsilon), Errc::parameter_domain, "epsilon must be positive");
  require(radius > 0.0 && std::isfinite(radius), Errc::parameter_domain, "radius must be positive");
  WidthInterval w;
  w.epsilon = epsilon;
  w.context = "ball(n=" + std::to_string(n) + ",r=" + std::to_string(radius) + ")";
  // Rescale to the unit ball: wdim_eps(rB) = wdim_{eps/r}(B).
  const double e = epsilon / radius;
  if (e < 1.0) {
    w.lower = w.upper = n;
  } else if (e >= 2.0) {
    w.lower = w.upper = 0;
  } else {
    w.lower = 0;
    w.upper = n;
  }
  return w;
}

// Unit ball of l^q(n) measured with the l^p distance, 1 <= q < p <= inf.
// With beta = 1/q - 1/p:
//   upper = 0 if eps >= 2, else min(n, smallest k with 2 (k+1)^-beta <= eps)
//   lower = largest k <= n with eps < k^-beta (0 if none)
inline WidthInterval wdim_lq_ball_in_lp(std::int64_t n, double q, double p, double epsilon) {
  require(n >= 1, Errc::parameter_domain, "dimension n must be >= 1");
  require(q >= 1.0 && std::isfinite(q), Errc::parameter_domain, "q must be a finite exponent >= 1");
  require(q < p, Errc::parameter_domain, "q >= p: use wdim_unit_ball for that regime");
  require(epsilon > 0.0 && std::isfinite(epsilon), Errc::parameter_domain, "epsilon must be positive");
  const double beta = 1.0 / q - (std::isinf(p) ? 0.0 : 1.0 / p);
  WidthInterval w;
  w.epsilon = epsilon;
  w.context = "lq_ball_in_lp(n=" + std::to_string(n) + ",q=" + exponent_name(q) + ",p=" + exponent_name(p) + ")";

  auto upper_ok = [&](std::int64_t k) { return 2.0 * std::pow(static_cast<double>(k + 1), -beta) <= epsilon; };
  auto lower_ok = [&](std::int64_t k) { return epsilon < std::pow(static_cast<double>(k), -beta); };

  if (epsilon >= 2.0) {
    w.upper = 0;
  } else {
    // Start a little below the closed-form crossing and scan upwards.
    const double crossing = std::pow(2.0 / epsilon, 1.0 / beta) - 1.0;
    std::int64_t k = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::min(crossing, 1e15)) - 2);
    while (k < n && !upper_ok(k)) ++k;
    w.upper = std::min(k, n);
  }
  {
    const double crossing = std::pow(epsilon, -1.0 / beta);
    std::int64_t k = std::min<std::int64_t>(n, static_cast<std::int64_t>(std::min(crossing, 1e15)) + 2);
    while (k >= 1 && !lower_ok(k)) --k;
    w.lower = std::max<std::int64_t>(k, 0);
  }
  if (w.lower > w.upper)
    fail(Errc::invariant_violation, "width bounds crossed for " + w.context + " at eps=" + std::to_string(epsilon));
  return w;
}

// Keeps the k+1 largest-magnitude entries (ties: lowest index), then shrinks
// them towards 0 by the magnitude t of the smallest kept entry. Equivalently
// soft thresholding at the (k+1)-th largest magnitude, so at most k entries
// survive and the map is continuous.
inline RealVector compression_witness(std::span<const double> x, std::int64_t k) {
  const auto n = static_cast<std::int64_t>(x.size());
  require(k >= 1 && k + 1 <= n, Errc::parameter_domain, "need 1 <= k and k+1 <= n");
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(x[a]) > std::abs(x[b]); });
  const double t = std::abs(x[order[static_cast<std::size_t>(k)]]);
  RealVector out(x.size(), 0.0);
  for (std::int64_t j = 0; j <= k; ++j) {
    const std::size_t i = order[static_cast<std::size_t>(j)];
    const double mag = std::abs(x[i]) - t;
    out[i] = std::copysign(mag, x[i]);
    if (mag == 0.0) out[i] = 0.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fiber audit of the compression map on the unit ball of l^q(n).

struct FiberAuditReport {
  std::int64_t pairs = 0;
  std::int64_t violations = 0;
  double bound = 0.0;          // 2 (k+1)^-beta
  double max_distance = 0.0;   // largest l^p distance inside a sampled fiber
  double max_retraction = 0.0; // largest |x - f(x)|_p, bounded by (k+1)^-beta
};

namespace detail {

inline RealVector sample_lq_ball(std::int64_t n, double q, Rng& rng) {
  RealVector x(static_cast<std::size_t>(n));
  const bool sparse = rng.coin(0.3);
  for (auto& v : x) {
    double mag = std::pow(rng.exponential(), 2.0 * rng.uniform());
    if (sparse && rng.coin(0.6)) mag = 0.0;
    v = rng.sign() * mag;
  }
  const double norm = pnorm(x, q);
  if (norm == 0.0) return x;
  const double radius = std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
  for (auto& v : x) v *= radius / norm;
  return x;
}

}  // namespace detail

// Samples pairs x, x' in B^{l^q(n)}_1 with identical compression image and
// measures their l^p distance against the width upper-bound threshold.
inline FiberAuditReport fiber_audit(std::int64_t n, double q, double p, std::int64_t k, std::int64_t pairs,
                                    std::uint64_t seed) {
  require(q >= 1.0 && q < p, Errc::parameter_domain, "fiber audit needs 1 <= q < p");
  require(k >= 1 && k + 1 <= n, Errc::parameter_domain, "need 1 <= k and k+1 <= n");
  const double beta = 1.0 / q - (std::isinf(p) ? 0.0 : 1.0 / p);
  Rng rng(seed);
  FiberAuditReport r;
  r.bound = 2.0 * std::pow(static_cast<double>(k + 1), -beta);
  const double retraction_bound = std::pow(static_cast<double>(k + 1), -beta);
  for (std::int64_t s = 0; s < pairs; ++s) {
    const RealVector x = detail::sample_lq_ball(n, q, rng);
    const RealVector y = compression_witness(x, k);
    std::vector<std::size_t> support, rest;
    for (std::size_t i = 0; i < y.size(); ++i) (y[i] != 0.0 ? support : rest).push_back(i);

    // Largest threshold t' keeping x' in the ball even if every off-support
    // entry sits at magnitude t'.
    auto mass = [&](double t) {
      double m = 0.0;
      for (auto i : support) m += std::pow(std::abs(y[i]) + t, q);
      return m + static_cast<double>(rest.size()) * std::pow(t, q);
    };
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (mass(mid) <= 1.0 ? lo : hi) = mid;
    }
    const double t2 = lo * rng.uniform();

    RealVector x2(x.size(), 0.0);
    for (auto i : support) x2[i] = std::copysign(std::abs(y[i]) + t2, y[i]);
    // k+1-|S| off-support entries tie at t2 so that t2 is the threshold.
    for (std::size_t j = rest.size(); j > 1; --j)
      std::swap(rest[j - 1], rest[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(j) - 1))]);
    const std::size_t ties = static_cast<std::size_t>(k + 1) - support.size();
    for (std::size_t j = 0; j < rest.size(); ++j)
      x2[rest[j]] = j < ties ? rng.sign() * t2 : rng.uniform(-t2, t2);

    const RealVector y2 = compression_witness(x2, k);
    for (std::size_t i = 0; i < y.size(); ++i)
      if (std::abs(y2[i] - y[i]) > 1e-12)
        fail(Errc::invariant_violation, "fiber sampler produced a point outside the fiber");

    const double dist = pdistance(x, x2, p);
    r.max_distance = std::max(r.max_distance, dist);
    r.max_retraction = std::max({r.max_retraction, pdistance(x, y, p), pdistance(x2, y, p)});
    if (dist > r.bound * (1.0 + 1e-9) || r.max_retraction > retraction_bound * (1.0 + 1e-9)) ++r.violations;
    ++r.pairs;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Property sweeps

struct WidthContext {
  std::string name;
  std::function<WidthInterval(double)> bounds;
  double diameter = 0.0;
};

inline WidthContext unit_ball_context(std::int64_t n, double radius = 1.0) {
  return {"ball(n=" + std::to_string(n) + ")", [=](double e) { return wdim_unit_ball(n, e, radius); },
          2.0 * radius};
}

inline WidthContext lq_ball_context(std::int64_t n, double q, double p) {
  return {"lq_ball_in_lp(n=" + std::to_string(n) + ")", [=](double e) { return wdim_lq_ball_in_lp(n, q, p, e); },
          2.0};
}

struct MonotoneReport {
  bool valid_intervals = true;    // lower <= upper everywhere
  bool lower_monotone = true;
  bool upper_monotone = true;
  bool zero_iff_diameter = true;  // [0,0] exactly when eps >= diameter
  std::string first_failure;

  bool ok() const { return valid_intervals && lower_monotone && upper_monotone && zero_iff_diameter; }
};

inline MonotoneReport check_monotone_eps(const WidthContext& ctx, std::span<const double> eps_grid) {
  require(std::is_sorted(eps_grid.begin(), eps_grid.end()), Errc::parameter_domain, "eps grid must be ascending");
  MonotoneReport r;
  auto note = [&](bool& flag, const std::string& what) {
    if (flag) {
      flag = false;
      if (r.first_failure.empty()) r.first_failure = what;
    }
  };
  std::int64_t prev_lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t prev_hi = prev_lo;
  for (double e : eps_grid) {
    const WidthInterval w = ctx.bounds(e);
    const std::string at = ctx.name + " eps=" + std::to_string(e);
    if (w.lower > w.upper) note(r.valid_intervals, "lower > upper at " + at);
    if (w.lower > prev_lo) note(r.lower_monotone, "lower increases at " + at);
    if (w.upper > prev_hi) note(r.upper_monotone, "upper increases at " + at);
    const bool zero = w.lower == 0 && w.upper == 0;
    if (zero != (e >= ctx.diameter)) note(r.zero_iff_diameter, "zero/diameter mismatch at " + at);
    prev_lo = w.lower;
    prev_hi = w.upper;
  }
  return r;
}

// Two balls X1, X2 of the same radius and their product with the l^s
// combination of the norms. The product sits between the radius-r and the
// radius-2^{1/s} r ball of X1 (+)_s X2.
struct ProductSample {
  std::int64_t n1 = 1;
  std::int64_t n2 = 1;
  double radius = 1.0;
  double exponent = 2.0;  // s, may be infinite
  double epsilon = 1.0;
};

inline WidthInterval wdim_product_of_balls(const ProductSample& s, double epsilon) {
  const double stretch = std::isinf(s.exponent) ? 1.0 : std::pow(2.0, 1.0 / s.exponent);
  WidthInterval inner = wdim_unit_ball(s.n1 + s.n2, epsilon, s.radius);
  WidthInterval outer = wdim_unit_ball(s.n1 + s.n2, epsilon, stretch * s.radius);
  WidthInterval w;
  w.epsilon = epsilon;
  w.lower = inner.lower;
  w.upper = outer.upper;
  w.context = "product(" + std::to_string(s.n1) + "," + std::to_string(s.n2) + ",s=" + exponent_name(s.exponent) + ")";
  return w;
}

struct SubadditivityReport {
  std::int64_t checked = 0;
  std::int64_t violations = 0;
  std::string first_violation;
};

// upper(2^{1/s} eps, X1 x X2) <= upper(eps, X1) + upper(eps, X2)
inline SubadditivityReport check_product_subadditivity(std::span<const ProductSample> samples) {
  SubadditivityReport r;
  for (const auto& s : samples) {
    const double stretch = std::isinf(s.exponent) ? 1.0 : std::pow(2.0, 1.0 / s.exponent);
    const auto lhs = wdim_product_of_balls(s, stretch * s.epsilon).upper;
    const auto rhs = wdim_unit_ball(s.n1, s.epsilon, s.radius).upper + wdim_unit_ball(s.n2, s.epsilon, s.radius).upper;
    ++r.checked;
    if (lhs > rhs) {
      if (r.violations++ == 0)
        r.first_violation = "n1=" + std::to_string(s.n1) + " n2=" + std::to_string(s.n2) +
                            " eps=" + std::to_string(s.epsilon) + ": " + std::to_string(lhs) + " > " +
                            std::to_string(rhs);
    }
  }
  return r;
}

}  // namespace amenable
