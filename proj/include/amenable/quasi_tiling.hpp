#pragma once

// Epsilon-disjoint quasi-tilings of finite sets by translates of tiles, the
// multi-scale Ornstein-Weiss cover, and exact checkers for the boundary
// inequalities that drive both constructions.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "amenable/error.hpp"
#include "amenable/group_geometry.hpp"
#include "amenable/rational.hpp"

namespace amenable {

struct PlacedTile {
  LatticePoint translate;
  std::size_t shape = 0;  // index into QuasiTiling::shapes
};

// Translates gamma_j + shapes[shape_j] inside omega, together with pairwise
// disjoint cores certifying epsilon-disjointness.
struct QuasiTiling {
  FiniteSubset omega;
  std::vector<FiniteSubset> shapes;
  std::vector<PlacedTile> tiles;
  Rational epsilon;
  std::vector<FiniteSubset> cores;

  FiniteSubset placed(std::size_t j) const { return shapes.at(tiles.at(j).shape).translated(tiles[j].translate); }

  FiniteSubset covered() const {
    std::vector<Coord> flat;
    for (const auto& c : cores) flat.insert(flat.end(), c.flat().begin(), c.flat().end());
    return FiniteSubset::from_flat(omega.dim(), std::move(flat));
  }

  std::size_t covered_size() const {
    std::size_t n = 0;
    for (const auto& c : cores) n += c.size();
    return n;
  }
};

// Builds the canonical cores of a family of translates: every point is
// claimed by the earliest tile that contains it.
inline QuasiTiling make_quasi_tiling(FiniteSubset omega, std::vector<FiniteSubset> shapes,
                                     std::vector<PlacedTile> tiles, Rational epsilon) {
  QuasiTiling q{std::move(omega), std::move(shapes), std::move(tiles), epsilon, {}};
  FiniteSubset claimed(q.omega.dim());
  for (std::size_t j = 0; j < q.tiles.size(); ++j) {
    FiniteSubset t = q.placed(j);
    q.cores.push_back(set_difference(t, claimed));
    claimed = set_union(claimed, t);
  }
  return q;
}

struct AuditResult {
  bool ok = true;
  std::string reason;
};

// Checks every structural invariant of a quasi-tiling exactly.
inline AuditResult audit_quasi_tiling(const QuasiTiling& q) {
  auto bad = [](std::string why) { return AuditResult{false, std::move(why)}; };
  if (q.epsilon < Rational(0) || q.epsilon >= Rational(1)) return bad("epsilon outside [0,1)");
  if (q.cores.size() != q.tiles.size()) return bad("one core per tile required");
  std::vector<Coord> core_flat, tile_flat;
  std::size_t core_total = 0;
  for (std::size_t j = 0; j < q.tiles.size(); ++j) {
    if (q.tiles[j].shape >= q.shapes.size()) return bad("tile " + std::to_string(j) + " has no shape");
    FiniteSubset t = q.placed(j);
    if (!t.subset_of(q.omega)) return bad("tile " + std::to_string(j) + " leaves omega");
    const FiniteSubset& c = q.cores[j];
    if (!c.subset_of(t)) return bad("core " + std::to_string(j) + " not inside its tile");
    if (Rational(static_cast<std::int64_t>(c.size())) <
        (Rational(1) - q.epsilon) * static_cast<std::int64_t>(t.size()))
      return bad("core " + std::to_string(j) + " smaller than (1-eps)|tile|");
    core_total += c.size();
    core_flat.insert(core_flat.end(), c.flat().begin(), c.flat().end());
    tile_flat.insert(tile_flat.end(), t.flat().begin(), t.flat().end());
  }
  const FiniteSubset seen_cores = FiniteSubset::from_flat(q.omega.dim(), std::move(core_flat));
  const FiniteSubset seen_tiles = FiniteSubset::from_flat(q.omega.dim(), std::move(tile_flat));
  if (seen_cores.size() != core_total) return bad("cores are not pairwise disjoint");
  if (!(seen_cores == seen_tiles)) return bad("cores do not cover the union of tiles");
  return {};
}

// Greedy maximal epsilon-disjoint family of translates gamma + F with gamma
// scanned lexicographically over int_F Omega. A candidate is admitted iff it
// meets the union of earlier tiles in at most epsilon*|F| points. Overlaps
// only grow, so one scan already yields a maximal family.
inline QuasiTiling greedy_quasi_tiling(const FiniteSubset& omega, const FiniteSubset& f, const Rational& epsilon) {
  check_tile(omega, f);
  require(epsilon > Rational(0) && epsilon < Rational(1), Errc::parameter_domain,
          "epsilon must lie in (0,1), got " + to_string(epsilon));
  const std::size_t d = omega.dim();
  const auto fsize = static_cast<std::int64_t>(f.size());
  // admit iff overlap <= eps*|F|  <=>  overlap * den <= num * |F|
  const std::int64_t budget_num = epsilon.numerator() * fsize;
  const std::int64_t budget_den = epsilon.denominator();

  QuasiTiling q{omega, {f}, {}, epsilon, {}};
  std::vector<char> covered(omega.size(), 0);
  std::vector<std::size_t> idx(f.size());
  std::vector<Coord> c(d);
  for (std::size_t g = 0; g < omega.size(); ++g) {
    auto gamma = omega[g];
    bool inside = true;
    std::int64_t overlap = 0;
    for (std::size_t j = 0; j < f.size() && inside; ++j) {
      for (std::size_t k = 0; k < d; ++k) c[k] = gamma[k] + f[j][k];
      auto at = omega.index_of(c);
      if (!at) {
        inside = false;
        break;
      }
      idx[j] = *at;
      overlap += covered[*at];
    }
    if (!inside || overlap * budget_den > budget_num) continue;
    std::vector<Coord> core;
    for (std::size_t j = 0; j < f.size(); ++j) {
      if (!covered[idx[j]]) {
        auto p = omega[idx[j]];
        core.insert(core.end(), p.begin(), p.end());
        covered[idx[j]] = 1;
      }
    }
    q.tiles.push_back(PlacedTile{LatticePoint(gamma), 0});
    q.cores.push_back(FiniteSubset::from_flat(d, std::move(core)));
  }
  return q;
}

struct CoverageReport {
  Rational coverage;      // |U| / |Omega|
  Rational bound;         // eps * (1 - alpha(Omega;F))
  Rational alpha;         // alpha(Omega;F)
  Rational alpha_inner;   // |d^-_F Omega| / |Omega|, diagnostic
  bool holds = false;
};

inline CoverageReport coverage_report(const QuasiTiling& q, const FiniteSubset& f) {
  require(!q.omega.empty(), Errc::empty_set, "coverage of an empty omega");
  CoverageReport r;
  r.alpha = alpha(q.omega, f);
  r.alpha_inner = alpha_inner(q.omega, f);
  r.coverage = Rational(static_cast<std::int64_t>(q.covered_size()), static_cast<std::int64_t>(q.omega.size()));
  r.bound = q.epsilon * (Rational(1) - r.alpha);
  r.holds = r.coverage >= r.bound;
  return r;
}

// True iff no unselected gamma in int_F Omega could still be admitted
// against the final union.
inline bool is_maximal(const QuasiTiling& q, const FiniteSubset& f) {
  const FiniteSubset u = q.covered();
  const FiniteSubset inner = interior(q.omega, f);
  FiniteSubset chosen(q.omega.dim());
  {
    std::vector<LatticePoint> pts;
    for (const auto& t : q.tiles) pts.push_back(t.translate);
    chosen = FiniteSubset::from_points(q.omega.dim(), pts);
  }
  const Rational budget = q.epsilon * static_cast<std::int64_t>(f.size());
  for (std::size_t g = 0; g < inner.size(); ++g) {
    if (chosen.contains(inner[g])) continue;
    FiniteSubset t = f.translated(inner.point(g));
    if (Rational(static_cast<std::int64_t>(set_intersection(t, u).size())) <= budget) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Multi-scale cover

// Smallest N with (1 - delta(1 - (1+N) delta^(N+1)))^N < delta, N <= 64.
inline int ow_scale_count(double delta) {
  require(delta > 0.0 && delta < 0.5, Errc::parameter_domain, "delta must lie in (0,1/2)");
  for (int n = 1; n <= 64; ++n) {
    long double dl = delta;
    long double inner = 1.0L - dl * (1.0L - (1.0L + n) * std::pow(dl, static_cast<long double>(n + 1)));
    if (std::pow(inner, static_cast<long double>(n)) < dl) return n;
  }
  fail(Errc::parameter_domain, "no scale count N <= 64 for delta = " + std::to_string(delta));
}

struct OWCoverOptions {
  // Enforce the sufficient conditions on the scale chain and on omega.
  // When false the chain is built with the coarse thresholds delta and
  // 2*delta instead; the output invariants are still enforced.
  bool certify = true;
};

struct OWCover {
  Rational delta;
  int scale_count = 0;                 // N(delta)
  bool certified = false;
  double refine_threshold = 0.0;       // bound on alpha(F_{n_{i+1}}; F_{n_i})
  double omega_threshold = 0.0;        // bound on alpha(Omega; F_{n_N})
  std::vector<std::int64_t> scale_indices;  // n_1 < ... < n_k
  std::vector<std::size_t> tiles_per_scale;
  QuasiTiling placed;                  // shapes[i] is the scale with index scale_indices[i]
  FiniteSubset residual;
};

namespace detail {

inline Rational alpha_fast(const FiniteSubset& omega, const std::optional<Box>& omega_box, const Box& f) {
  if (omega_box) return alpha_boxes(*omega_box, f);
  return alpha(omega, f.to_subset());
}

inline bool contains_box(const FiniteSubset& omega, const std::optional<Box>& omega_box, const Box& f) {
  if (omega_box) return omega_box->contains(f);
  if (static_cast<std::int64_t>(omega.size()) < f.cardinality()) return false;
  return f.to_subset().subset_of(omega);
}

}  // namespace detail

inline OWCover ow_cover(const FiniteSubset& omega, const FolnerSpec& spec, const Rational& delta,
                        const OWCoverOptions& options = {}) {
  require(omega.dim() == spec.dim, Errc::dimension_mismatch, "omega and Folner family dimensions differ");
  require(!omega.empty(), Errc::empty_set, "cannot cover the empty set");
  require(delta > Rational(0) && delta < Rational(1, 2), Errc::parameter_domain,
          "delta must lie in (0,1/2), got " + to_string(delta));
  const double dd = to_double(delta);
  OWCover out;
  out.delta = delta;
  out.scale_count = ow_scale_count(dd);
  out.certified = options.certify;
  const int n_scales = out.scale_count;
  if (options.certify) {
    out.refine_threshold = std::pow(dd, 2.0 * n_scales);
    out.omega_threshold = 2.0 * out.refine_threshold;
  } else {
    out.refine_threshold = dd;
    out.omega_threshold = 2.0 * dd;
  }
  const std::optional<Box> omega_box = as_box(omega);

  // Scale chain: n_1 = 1, then the smallest admissible successor each time.
  std::vector<std::int64_t> chain{1};
  if (!options.certify)
    require(detail::contains_box(omega, omega_box, folner_box(spec, 1)), Errc::omega_too_small,
            "omega does not contain the smallest Folner set");
  while (static_cast<int>(chain.size()) < n_scales) {
    const Box prev = folner_box(spec, chain.back());
    std::optional<std::int64_t> next;
    double best = 1e300;
    for (std::int64_t m = chain.back() + 1; m <= spec.max_index; ++m) {
      const Box cand = folner_box(spec, m);
      if (!options.certify && !detail::contains_box(omega, omega_box, cand)) break;
      double a = to_double(alpha_boxes(cand, prev));
      best = std::min(best, a);
      if (a <= out.refine_threshold) {
        next = m;
        break;
      }
    }
    if (!next) {
      if (options.certify)
        fail(Errc::subsequence_not_found,
             "no Folner index in (" + std::to_string(chain.back()) + ", " + std::to_string(spec.max_index) +
                 "] has alpha(F_m; F_" + std::to_string(chain.back()) + ") <= " +
                 std::to_string(out.refine_threshold) + " (best " + std::to_string(best) + ")");
      break;
    }
    chain.push_back(*next);
  }
  if (options.certify) {
    const Box top = folner_box(spec, chain.back());
    const double a = to_double(detail::alpha_fast(omega, omega_box, top));
    require(detail::contains_box(omega, omega_box, top) && a <= out.omega_threshold, Errc::omega_too_small,
            "omega must contain F_" + std::to_string(chain.back()) + " and satisfy alpha(omega; F) <= " +
                std::to_string(out.omega_threshold) + " (got " + std::to_string(a) + ")");
  } else {
    while (!chain.empty() &&
           to_double(detail::alpha_fast(omega, omega_box, folner_box(spec, chain.back()))) > out.omega_threshold)
      chain.pop_back();
    require(!chain.empty(), Errc::omega_too_small,
            "alpha(omega; F_1) exceeds " + std::to_string(out.omega_threshold));
  }

  out.scale_indices = chain;
  out.tiles_per_scale.assign(chain.size(), 0);
  std::vector<FiniteSubset> shapes;
  for (auto i : chain) shapes.push_back(folner_set(spec, i));
  QuasiTiling placed{omega, shapes, {}, delta, {}};
  FiniteSubset residual = omega;
  const auto total = static_cast<std::int64_t>(omega.size());
  auto done = [&] { return Rational(static_cast<std::int64_t>(residual.size())) <= delta * total; };
  for (std::size_t s = chain.size(); s-- > 0;) {
    if (done()) break;
    QuasiTiling round = greedy_quasi_tiling(residual, shapes[s], delta);
    for (std::size_t j = 0; j < round.tiles.size(); ++j) {
      placed.tiles.push_back(PlacedTile{round.tiles[j].translate, s});
      placed.cores.push_back(round.cores[j]);
    }
    out.tiles_per_scale[s] = round.tiles.size();
    residual = set_difference(residual, round.covered());
  }
  if (!done())
    fail(Errc::invariant_violation, "residual " + std::to_string(residual.size()) + " exceeds delta*|omega| = " +
                                        std::to_string(to_double(delta * total)));
  out.placed = std::move(placed);
  out.residual = std::move(residual);
  return out;
}

// ---------------------------------------------------------------------------
// Boundary inequalities

struct InequalityReport {
  bool holds = false;
  Rational lhs;
  Rational rhs;
};

namespace detail {
inline Rational alpha_or_zero(const FiniteSubset& s, const FiniteSubset& f) {
  return s.empty() ? Rational(0) : alpha(s, f);
}
}  // namespace detail

// alpha(Omega \ Omega'; F) <= (alpha(Omega'; F) + alpha(Omega; F)) / eps,
// valid whenever Omega' is inside Omega and |Omega \ Omega'| >= eps |Omega|.
inline InequalityReport check_lowtek1(const FiniteSubset& omega, const FiniteSubset& omega_sub,
                                      const FiniteSubset& f, const Rational& epsilon) {
  check_tile(omega, f);
  detail::check_same_dim(omega, omega_sub, "check_lowtek1");
  require(!omega.empty(), Errc::precondition_violation, "omega must be nonempty");
  require(epsilon > Rational(0) && epsilon <= Rational(1), Errc::parameter_domain, "epsilon must lie in (0,1]");
  require(omega_sub.subset_of(omega), Errc::precondition_violation, "omega' must be a subset of omega");
  const FiniteSubset rest = set_difference(omega, omega_sub);
  require(Rational(static_cast<std::int64_t>(rest.size())) >= epsilon * static_cast<std::int64_t>(omega.size()),
          Errc::precondition_violation, "|omega \\ omega'| < eps |omega|");
  InequalityReport r;
  r.lhs = alpha(rest, f);
  r.rhs = (detail::alpha_or_zero(omega_sub, f) + alpha(omega, f)) / epsilon;
  r.holds = r.lhs <= r.rhs;
  return r;
}

// alpha(union D_i; F) <= max_i alpha(D_i; F) / (1 - eps) for an
// eps-disjoint family D_i.
inline InequalityReport check_lowtek2(const QuasiTiling& tiling, const FiniteSubset& f) {
  auto audit = audit_quasi_tiling(tiling);
  require(audit.ok, Errc::invalid_tiling, audit.reason);
  InequalityReport r;
  if (tiling.tiles.empty()) {
    r.holds = true;
    return r;
  }
  Rational worst(0);
  FiniteSubset all(tiling.omega.dim());
  for (std::size_t j = 0; j < tiling.tiles.size(); ++j) {
    FiniteSubset d = tiling.placed(j);
    worst = std::max(worst, alpha(d, f));
    all = set_union(all, d);
  }
  r.lhs = alpha(all, f);
  r.rhs = worst / (Rational(1) - tiling.epsilon);
  r.holds = r.lhs <= r.rhs;
  return r;
}

}  // namespace amenable
