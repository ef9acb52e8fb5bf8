#pragma once

// Epsilon-indexed set functions a(eps, Omega) on finite subsets of Z^d, the
// checkers for the four hypotheses of the generalized Ornstein-Weiss limit,
// and finite-data estimates of lim_{eps->0} lim_i a(eps, Omega_i)/|Omega_i|.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "amenable/error.hpp"
#include "amenable/group_geometry.hpp"
#include "amenable/parallel.hpp"
#include "amenable/random.hpp"
#include "amenable/spectral_vn.hpp"

namespace amenable {

using SetFunction = std::function<double(double, const FiniteSubset&)>;

struct OWFunction {
  std::string name;
  SetFunction evaluator;
  double K = 1.0;  // a(eps, Omega) <= K |Omega|
  double c = 1.0;  // a(eps, A u B) <= a(c eps, A) + a(c eps, B)

  double operator()(double eps, const FiniteSubset& omega) const {
    const double v = evaluator(eps, omega);
    require(std::isfinite(v) && v >= 0.0, Errc::evaluator_failure,
            name + " returned " + std::to_string(v) + " at eps=" + std::to_string(eps));
    return v;
  }
};

inline OWFunction volume_function() {
  return {"volume", [](double, const FiniteSubset& o) { return static_cast<double>(o.size()); }, 1.0, 1.0};
}

// |boundary_F Omega|; the outer part has at most (|F|-1)|Omega| points.
inline OWFunction boundary_function(FiniteSubset f) {
  const double k = static_cast<double>(f.size());
  return {"boundary",
          [f = std::move(f)](double, const FiniteSubset& o) {
            return o.empty() ? 0.0 : static_cast<double>(boundary_full(o, f).size());
          },
          k, 1.0};
}

// n_Omega[eps, 1] for the multiplier subspace of E. Eigenvalues are cached per
// Omega. The eigenvalues of the union are bounded by Weyl's inequality for a
// sum of two positive operators, which gives c = 1/2 on the eigenvalue scale.
inline OWFunction spectral_function(const MultiplierSet& e) {
  struct Cache {
    std::mutex mu;
    std::map<std::vector<Coord>, std::vector<double>> spectra;
  };
  auto cache = std::make_shared<Cache>();
  return {"spectral",
          [e, cache](double eps, const FiniteSubset& o) {
            if (o.empty()) return 0.0;
            std::vector<double> eig;
            {
              std::lock_guard lock(cache->mu);
              auto it = cache->spectra.find(o.flat());
              if (it != cache->spectra.end()) eig = it->second;
            }
            if (eig.empty()) {
              eig = spectral_report(e, o).eigenvalues;
              std::lock_guard lock(cache->mu);
              cache->spectra.emplace(o.flat(), eig);
            }
            return static_cast<double>(count_in(eig, eps, 1.0));
          },
          1.0, 0.5};
}

// ---------------------------------------------------------------------------
// Hypothesis checks

struct SamplePlan {
  std::size_t dim = 1;
  std::vector<double> eps_grid{0.5, 0.25, 0.1};
  Coord extent = 8;  // sampled sets live in [-extent, extent]^d
  std::size_t samples = 40;
  std::uint64_t seed = 1;
};

struct HypothesisViolation {
  char hypothesis = '?';  // 'a'..'d'
  std::string detail;
};

struct HypothesisReport {
  bool invariant = true;
  bool monotone = true;
  bool sublinear = true;
  bool subadditive = true;
  std::size_t checks = 0;
  std::vector<HypothesisViolation> counterexamples;

  bool all() const { return invariant && monotone && sublinear && subadditive; }
};

namespace detail {

// Half boxes, half random subsets; never empty.
inline FiniteSubset random_set(Rng& rng, std::size_t d, Coord extent) {
  std::vector<Coord> flat;
  if (rng.coin()) {
    std::vector<Coord> lo(d), hi(d);
    for (std::size_t k = 0; k < d; ++k) {
      Coord a = rng.uniform_int(-extent, extent), b = rng.uniform_int(-extent, extent);
      lo[k] = std::min(a, b);
      hi[k] = std::max(a, b);
    }
    return Box{lo, hi}.to_subset();
  }
  const double density = rng.uniform(0.1, 0.9);
  const FiniteSubset all = Box::cube(d, -extent, extent).to_subset();
  for (std::size_t i = 0; i < all.size(); ++i)
    if (rng.coin(density)) flat.insert(flat.end(), all[i].begin(), all[i].end());
  if (flat.empty()) flat.assign(all[0].begin(), all[0].end());
  return FiniteSubset::from_flat(d, std::move(flat));
}

inline LatticePoint random_point(Rng& rng, std::size_t d, Coord extent) {
  std::vector<Coord> c(d);
  for (auto& v : c) v = rng.uniform_int(-extent, extent);
  return LatticePoint(std::move(c));
}

inline constexpr double kSlack = 1e-9;

}  // namespace detail

inline HypothesisReport check_hypotheses(const OWFunction& f, const SamplePlan& plan) {
  require(plan.dim >= 1, Errc::parameter_domain, "sample plan dimension must be >= 1");
  require(!plan.eps_grid.empty(), Errc::parameter_domain, "sample plan needs an eps grid");
  for (double e : plan.eps_grid) require(e > 0.0, Errc::parameter_domain, "eps grid must be positive");
  std::vector<double> grid = plan.eps_grid;
  std::sort(grid.begin(), grid.end());
  HypothesisReport r;
  Rng rng(plan.seed);
  auto note = [&](char h, bool& flag, std::string what) {
    flag = false;
    if (r.counterexamples.size() < 32) r.counterexamples.push_back({h, std::move(what)});
  };
  auto fmt = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };
  for (std::size_t s = 0; s < plan.samples; ++s) {
    const FiniteSubset a = detail::random_set(rng, plan.dim, plan.extent);
    const FiniteSubset b = detail::random_set(rng, plan.dim, plan.extent);
    const LatticePoint g = detail::random_point(rng, plan.dim, 4 * plan.extent);
    const double n = static_cast<double>(a.size());
    std::vector<double> va(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double eps = grid[i];
      va[i] = f(eps, a);
      // (a) invariance
      const double vt = f(eps, a.translated(g));
      ++r.checks;
      if (std::abs(vt - va[i]) > detail::kSlack * std::max(1.0, va[i]))
        note('a', r.invariant,
             "eps=" + fmt(eps) + " omega=" + a.to_string() + " shift=" + g.to_string() + ": " + fmt(va[i]) +
                 " vs " + fmt(vt));
      // (c) sublinearity
      ++r.checks;
      if (va[i] > f.K * n * (1 + detail::kSlack))
        note('c', r.sublinear,
             "eps=" + fmt(eps) + " omega=" + a.to_string() + ": " + fmt(va[i]) + " > " + fmt(f.K * n));
      // (d) subadditivity
      const double lhs = f(eps, set_union(a, b));
      const double rhs = f(f.c * eps, a) + f(f.c * eps, b);
      ++r.checks;
      if (lhs > rhs + detail::kSlack * std::max(1.0, rhs))
        note('d', r.subadditive,
             "eps=" + fmt(eps) + " A=" + a.to_string() + " B=" + b.to_string() + ": " + fmt(lhs) + " > " + fmt(rhs));
    }
    // (b) non-increasing in eps
    for (std::size_t i = 1; i < grid.size(); ++i) {
      ++r.checks;
      if (va[i] > va[i - 1] + detail::kSlack * std::max(1.0, va[i - 1]))
        note('b', r.monotone,
             "omega=" + a.to_string() + ": a(" + fmt(grid[i - 1]) + ")=" + fmt(va[i - 1]) + " < a(" + fmt(grid[i]) +
                 ")=" + fmt(va[i]));
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Limit estimation

struct LimitRow {
  double eps = 0.0;
  std::int64_t index = 0;
  std::size_t size = 0;
  double value = 0.0;  // a(eps, Omega_i) / |Omega_i|
};

struct LimitEstimate {
  std::vector<double> eps;  // as given, descending
  std::vector<LimitRow> table;
  std::vector<double> limsup;  // over the tail window, per eps
  std::vector<double> liminf;
  double extrapolated = 0.0;  // limsup at the smallest eps
  double tail_oscillation = 0.0;
  bool converged = true;
};

inline constexpr double kTailTolerance = 0.05;

inline LimitEstimate estimate_limit(const OWFunction& f, const FolnerSpec& spec,
                                    const std::vector<std::int64_t>& indices, const std::vector<double>& eps_grid,
                                    double tolerance = kTailTolerance) {
  require(!indices.empty(), Errc::parameter_domain, "no Folner indices given");
  require(!eps_grid.empty(), Errc::parameter_domain, "empty eps grid");
  require(std::is_sorted(indices.begin(), indices.end()) &&
              std::adjacent_find(indices.begin(), indices.end()) == indices.end(),
          Errc::parameter_domain, "indices must be strictly ascending");
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    require(eps_grid[i] > 0.0, Errc::parameter_domain, "eps grid must be positive");
    if (i) require(eps_grid[i] < eps_grid[i - 1], Errc::parameter_domain, "eps grid must be strictly descending");
  }
  LimitEstimate est;
  est.eps = eps_grid;
  const std::size_t ne = eps_grid.size(), ni = indices.size();
  est.table.resize(ne * ni);
  // One task per set so each Omega is built (and possibly eigensolved) once.
  parallel_for(ni, [&](std::size_t i) {
    const FiniteSubset omega = folner_set(spec, indices[i]);
    for (std::size_t e = 0; e < ne; ++e) {
      double v = 0.0;
      try {
        v = f(eps_grid[e], omega);
      } catch (const Error& err) {
        fail(err.code() == Errc::size_cap ? Errc::size_cap : Errc::evaluator_failure,
             std::string(err.what()) + " (eps=" + std::to_string(eps_grid[e]) + ", i=" + std::to_string(indices[i]) +
                 ")");
      }
      est.table[e * ni + i] = {eps_grid[e], indices[i], omega.size(), v / static_cast<double>(omega.size())};
    }
  });
  const std::size_t tail = std::max<std::size_t>(1, (ni + 2) / 3);
  for (std::size_t e = 0; e < ne; ++e) {
    double hi = -std::numeric_limits<double>::infinity(), lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = ni - tail; i < ni; ++i) {
      hi = std::max(hi, est.table[e * ni + i].value);
      lo = std::min(lo, est.table[e * ni + i].value);
    }
    est.limsup.push_back(hi);
    est.liminf.push_back(lo);
    est.tail_oscillation = std::max(est.tail_oscillation, hi - lo);
  }
  est.extrapolated = est.limsup.back();
  est.converged = est.tail_oscillation <= tolerance;
  return est;
}

struct IndependenceReport {
  LimitEstimate first;
  LimitEstimate second;
  double difference = 0.0;
  bool agree = false;
};

inline IndependenceReport sequence_independence(const OWFunction& f, const FolnerSpec& spec1,
                                                const FolnerSpec& spec2, const std::vector<std::int64_t>& indices,
                                                const std::vector<double>& eps_grid,
                                                double tolerance = kTailTolerance) {
  require(!(spec1.family == spec2.family && spec1.dim == spec2.dim && spec1.ratio == spec2.ratio),
          Errc::parameter_domain, "the two Folner specs must differ");
  IndependenceReport r;
  r.first = estimate_limit(f, spec1, indices, eps_grid);
  r.second = estimate_limit(f, spec2, indices, eps_grid);
  r.difference = std::abs(r.first.extrapolated - r.second.extrapolated);
  r.agree = r.difference <= tolerance;
  return r;
}

// Omega inside Omega': a(Omega) <= a(Omega') <= a(Omega) + K |Omega' \ Omega|.
struct NestedReport {
  bool holds = true;
  std::vector<double> small;
  std::vector<double> large;
};

inline NestedReport check_nested(const OWFunction& f, const FiniteSubset& omega, const FiniteSubset& omega_big,
                                 const std::vector<double>& eps_grid) {
  require(omega.subset_of(omega_big), Errc::precondition_violation, "omega must be a subset of omega'");
  const double extra = static_cast<double>(omega_big.size() - omega.size());
  NestedReport r;
  for (double eps : eps_grid) {
    const double a = f(eps, omega), b = f(eps, omega_big);
    r.small.push_back(a);
    r.large.push_back(b);
    r.holds = r.holds && a <= b + detail::kSlack && b <= a + f.K * extra + detail::kSlack;
  }
  return r;
}

}  // namespace amenable
