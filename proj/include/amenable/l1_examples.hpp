#pragma once

// Positivity of the l^1 dimension for a nonzero invariant subspace, via
// disjoint translates of a truncated generator, and the residue-sum family
// on Z whose decreasing intersection is trivial.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "amenable/error.hpp"
#include "amenable/group_geometry.hpp"
#include "amenable/quasi_tiling.hpp"
#include "amenable/random.hpp"
#include "amenable/rational.hpp"

namespace amenable {

// Finitely supported vector on Z^d. Values may be double or Rational.
template <class T>
struct BasicSummableVector {
  FiniteSubset support;
  std::vector<T> values;  // aligned with support order
  double p = 1.0;

  BasicSummableVector() : support(1) {}
  BasicSummableVector(FiniteSubset s, std::vector<T> v, double exponent = 1.0)
      : support(std::move(s)), values(std::move(v)), p(exponent) {
    require(support.size() == values.size(), Errc::dimension_mismatch, "support and values differ in length");
  }

  // Builds from (point, value) pairs; repeated points add up, zeros drop.
  static BasicSummableVector from_entries(std::size_t dim, const std::vector<std::pair<LatticePoint, T>>& entries) {
    std::map<LatticePoint, T> acc;
    for (auto& [g, v] : entries) {
      require(g.dim() == dim, Errc::dimension_mismatch, "entry dimension");
      acc[g] += v;
    }
    std::vector<Coord> flat;
    std::vector<T> vals;
    for (auto& [g, v] : acc) {
      if (v == T(0)) continue;
      flat.insert(flat.end(), g.coords().begin(), g.coords().end());
      vals.push_back(v);
    }
    return BasicSummableVector(FiniteSubset::from_flat(dim, std::move(flat)), std::move(vals));
  }

  std::size_t dim() const { return support.dim(); }

  T at(std::span<const Coord> g) const {
    auto i = support.index_of(g);
    return i ? values[*i] : T(0);
  }

  T l1_norm() const {
    T s(0);
    for (const T& v : values) s += v < T(0) ? -v : v;
    return s;
  }

  bool normalized() const {
    if constexpr (std::is_floating_point_v<T>)
      return std::abs(l1_norm() - 1.0) <= 1e-12;
    else
      return l1_norm() == T(1);
  }

  BasicSummableVector translated(const LatticePoint& g) const {
    return BasicSummableVector(support.translated(g), values, p);
  }

  BasicSummableVector restricted(const FiniteSubset& omega) const {
    std::vector<std::pair<LatticePoint, T>> e;
    for (std::size_t i = 0; i < support.size(); ++i)
      if (omega.contains(support[i])) e.emplace_back(support.point(i), values[i]);
    return from_entries(dim(), e);
  }

  bool operator==(const BasicSummableVector& o) const { return support == o.support && values == o.values; }
};

using SummableVector = BasicSummableVector<double>;
using RationalVector = BasicSummableVector<Rational>;

inline SummableVector to_double(const RationalVector& v) {
  std::vector<double> d;
  for (auto& x : v.values) d.push_back(to_double(x));
  return SummableVector(v.support, std::move(d), v.p);
}

inline RationalVector delta_vector(const LatticePoint& g, Rational c = Rational(1)) {
  return RationalVector::from_entries(g.dim(), {{g, c}});
}

// (1/2)^{k+1} at k = 0..terms-2 with the tail mass put on the last point, so
// the l^1 norm is exactly 1.
inline RationalVector geometric_y(int terms = 40) {
  require(terms >= 1 && terms <= 62, Errc::parameter_domain, "geometric vector needs 1..62 terms");
  std::vector<std::pair<LatticePoint, Rational>> e;
  for (int k = 0; k < terms; ++k) {
    const int exp = k + 1 < terms ? k + 1 : k;
    e.emplace_back(LatticePoint({k}), Rational(1, std::int64_t{1} << exp));
  }
  return RationalVector::from_entries(1, e);
}

// Smallest prefix, in decreasing |value| order, carrying mass >= 1 - eps.
// Ties keep the lexicographic order of the support.
template <class T>
FiniteSubset truncate_support(const BasicSummableVector<T>& y, const T& epsilon) {
  require(y.normalized(), Errc::unnormalized_input, "truncate_support needs |y|_1 = 1");
  require(T(0) < epsilon && epsilon < T(1) / T(2), Errc::parameter_domain, "epsilon must lie in (0, 1/2)");
  std::vector<std::size_t> order(y.values.size());
  std::iota(order.begin(), order.end(), 0);
  auto mag = [&](std::size_t i) { return y.values[i] < T(0) ? -y.values[i] : y.values[i]; };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mag(a) > mag(b); });
  std::vector<Coord> flat;
  T mass(0);
  for (std::size_t i : order) {
    flat.insert(flat.end(), y.support[i].begin(), y.support[i].end());
    mass += mag(i);
    if (mass >= T(1) - epsilon) break;
  }
  return FiniteSubset::from_flat(y.dim(), std::move(flat));
}

struct DisjointTranslates {
  std::vector<LatticePoint> translates;  // gamma_j with gamma_j + F pairwise disjoint inside omega
  Rational alpha;                        // alpha(omega; F)
  Rational bound;                        // (1 - alpha) |omega| / (2|F|)
  bool count_bound_holds = false;        // #translates >= bound
  bool coverage_bound_holds = false;     // #translates * |F| >= bound
};

// Greedy quasi-tiling with eps = 1/(2|F|), which admits no overlap at all.
// F is shifted to contain the origin if needed; translates refer to F itself.
inline DisjointTranslates disjoint_translates(const FiniteSubset& omega, const FiniteSubset& f) {
  detail::check_same_dim(omega, f, "disjoint_translates");
  require(!omega.empty() && !f.empty(), Errc::empty_set, "omega and F must be nonempty");
  const LatticePoint shift = f.contains_origin() ? LatticePoint::origin(f.dim()) : f.point(0);
  const FiniteSubset f0 = f.translated(-shift);
  const auto fsize = static_cast<std::int64_t>(f.size());
  const QuasiTiling q = greedy_quasi_tiling(omega, f0, Rational(1, 2 * fsize));
  DisjointTranslates r;
  for (auto& t : q.tiles) r.translates.push_back(t.translate - shift);
  r.alpha = alpha(omega, f0);
  r.bound = (Rational(1) - r.alpha) * static_cast<std::int64_t>(omega.size()) / (2 * fsize);
  const auto count = static_cast<std::int64_t>(r.translates.size());
  r.count_bound_holds = Rational(count) >= r.bound;
  r.coverage_bound_holds = Rational(count * fsize) >= r.bound;
  return r;
}

struct SandwichCertificate {
  FiniteSubset f{1};
  double epsilon = 0.0;
  std::vector<LatticePoint> translates;
  std::vector<double> ratios;  // |pi(a)|_1 / |a|_1 per sample
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double lower_bound = 0.0;  // (1 - alpha(omega; F)) / (2|F|)
};

namespace detail {

inline double l1_of_combination(const SummableVector& y, const std::vector<LatticePoint>& translates,
                                const std::vector<double>& a) {
  std::map<std::vector<Coord>, double> acc;
  std::vector<Coord> g(y.dim());
  for (std::size_t j = 0; j < translates.size(); ++j) {
    if (a[j] == 0.0) continue;
    for (std::size_t i = 0; i < y.support.size(); ++i) {
      for (std::size_t k = 0; k < g.size(); ++k) g[k] = y.support[i][k] + translates[j][k];
      acc[g] += a[j] * y.values[i];
    }
  }
  double s = 0.0;
  for (auto& [_, v] : acc) s += std::abs(v);
  return s;
}

}  // namespace detail

// Samples pi(a) = sum_j a_j (gamma_j + y) for every basis vector a = e_j and
// n_samples random a on the l^1 sphere; a ratio outside [1-2eps, 1+eps] is
// an invariant violation.
inline SandwichCertificate sandwich_check(const SummableVector& y, double epsilon, const FiniteSubset& omega,
                                          std::size_t n_samples, std::uint64_t seed) {
  require(y.normalized(), Errc::unnormalized_input, "sandwich_check needs |y|_1 = 1");
  require(epsilon > 0.0 && epsilon < 0.5, Errc::parameter_domain, "epsilon must lie in (0, 1/2)");
  SandwichCertificate c;
  c.epsilon = epsilon;
  c.f = truncate_support(y, epsilon);
  const DisjointTranslates dt = disjoint_translates(omega, c.f);
  require(!dt.translates.empty(), Errc::omega_too_small, "omega holds no translate of F");
  c.translates = dt.translates;
  c.lower_bound = to_double(dt.bound) / static_cast<double>(omega.size());
  const std::size_t m = c.translates.size();
  const double lo = 1.0 - 2.0 * epsilon, hi = 1.0 + epsilon, tol = 1e-12;
  auto record = [&](const std::vector<double>& a) {
    double norm = 0.0;
    for (double v : a) norm += std::abs(v);
    const double ratio = detail::l1_of_combination(y, c.translates, a) / norm;
    if (ratio < lo - tol || ratio > hi + tol)
      fail(Errc::invariant_violation, "sandwich ratio " + std::to_string(ratio) + " outside [" + std::to_string(lo) +
                                          ", " + std::to_string(hi) + "]");
    c.ratios.push_back(ratio);
  };
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> a(m, 0.0);
    a[j] = 1.0;
    record(a);
  }
  Rng rng(seed);
  for (std::size_t s = 0; s < n_samples; ++s) {
    std::vector<double> a(m);
    for (auto& v : a) v = rng.sign() * rng.exponential();
    record(a);
  }
  c.min_ratio = *std::min_element(c.ratios.begin(), c.ratios.end());
  c.max_ratio = *std::max_element(c.ratios.begin(), c.ratios.end());
  return c;
}

// ---------------------------------------------------------------------------
// Residue sums on Z

template <class T>
std::vector<T> pi_k(const BasicSummableVector<T>& x, std::int64_t k) {
  require(x.dim() == 1, Errc::dimension_mismatch, "pi_k is defined on Z");
  require(k >= 1, Errc::parameter_domain, "k must be >= 1");
  std::vector<T> out(static_cast<std::size_t>(k), T(0));
  for (std::size_t i = 0; i < x.support.size(); ++i) {
    const std::int64_t r = ((x.support[i][0] % k) + k) % k;
    out[static_cast<std::size_t>(r)] += x.values[i];
  }
  return out;
}

// 1/2 at 0, -1/2 at N.
inline RationalVector y_N(std::int64_t n) {
  require(n >= 1, Errc::parameter_domain, "N must be >= 1");
  return RationalVector::from_entries(1, {{LatticePoint({0}), Rational(1, 2)}, {LatticePoint({n}), Rational(-1, 2)}});
}

// lcm(1, ..., j), with overflow detection.
inline std::int64_t lcm_upto(std::int64_t j) {
  require(j >= 1, Errc::parameter_domain, "j must be >= 1");
  std::int64_t l = 1;
  for (std::int64_t i = 2; i <= j; ++i) {
    const std::int64_t step = i / std::gcd(l, i);
    require(l <= std::numeric_limits<std::int64_t>::max() / step, Errc::parameter_domain,
            "lcm(1.." + std::to_string(j) + ") overflows 64 bits");
    l *= step;
  }
  return l;
}

// y^(m) = sum_n 2 y_{kN}(m - n) y(n) = y(m) - y(m - kN) with N = lcm(1..j)
// and the least k with kN > diam(omega), so the shifted copy misses omega.
template <class T>
BasicSummableVector<T> lift_to_Yj(const BasicSummableVector<T>& y, const FiniteSubset& omega, std::int64_t j) {
  require(y.dim() == 1 && omega.dim() == 1, Errc::dimension_mismatch, "lift is defined on Z");
  require(!omega.empty(), Errc::empty_set, "omega must be nonempty");
  require(y.l1_norm() <= T(1) / T(2), Errc::precondition_violation, "lift needs |y|_1 <= 1/2");
  require(y.support.subset_of(omega), Errc::precondition_violation, "support of y must lie in omega");
  const std::int64_t n = lcm_upto(j);
  const std::int64_t diam = omega[omega.size() - 1][0] - omega[0][0];
  const std::int64_t k = diam / n + 1;
  require(k <= std::numeric_limits<std::int64_t>::max() / n, Errc::parameter_domain, "shift overflows 64 bits");
  std::vector<std::pair<LatticePoint, T>> e;
  for (std::size_t i = 0; i < y.support.size(); ++i) {
    e.emplace_back(y.support.point(i), y.values[i]);
    e.emplace_back(LatticePoint({y.support[i][0] + k * n}), -y.values[i]);
  }
  return BasicSummableVector<T>::from_entries(1, e);
}

// Vectors supported in [-M, M] annihilated by pi_{2M+2}: the residue matrix
// has full column rank 2M+1, so only the zero vector survives.
inline bool intersection_triviality_check(std::int64_t m) {
  require(m >= 0, Errc::parameter_domain, "M must be >= 0");
  const std::int64_t k = 2 * m + 2, cols = 2 * m + 1;
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(k, cols);
  for (std::int64_t c = 0; c < cols; ++c) r((((c - m) % k) + k) % k, c) = 1.0;
  return Eigen::FullPivLU<Eigen::MatrixXd>(r).rank() == cols;
}

}  // namespace amenable
