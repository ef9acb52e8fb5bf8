#pragma once

// Exact set calculus on the lattice Z^d: F-boundaries, interiors, closures,
// the relative amenability function and concrete Folner families.
//
// Z^d is written additively, so the translate gamma*F is gamma + F and
// F^{-1} S = { s - f : s in S, f in F }. All sets are kept sorted
// lexicographically, which fixes every iteration order in the library.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amenable/error.hpp"
#include "amenable/rational.hpp"

namespace amenable {

using Coord = std::int64_t;

class LatticePoint {
 public:
  LatticePoint() = default;
  explicit LatticePoint(std::vector<Coord> coords) : c_(std::move(coords)) {}
  LatticePoint(std::initializer_list<Coord> coords) : c_(coords) {}
  explicit LatticePoint(std::span<const Coord> coords) : c_(coords.begin(), coords.end()) {}

  static LatticePoint origin(std::size_t dim) { return LatticePoint(std::vector<Coord>(dim, 0)); }

  std::size_t dim() const noexcept { return c_.size(); }
  Coord operator[](std::size_t i) const { return c_[i]; }
  Coord& operator[](std::size_t i) { return c_[i]; }
  std::span<const Coord> coords() const noexcept { return c_; }

  bool is_origin() const {
    return std::all_of(c_.begin(), c_.end(), [](Coord x) { return x == 0; });
  }

  friend auto operator<=>(const LatticePoint&, const LatticePoint&) = default;
  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;

  friend LatticePoint operator+(LatticePoint a, const LatticePoint& b) {
    require(a.dim() == b.dim(), Errc::dimension_mismatch, "point addition");
    for (std::size_t i = 0; i < a.dim(); ++i) a.c_[i] += b.c_[i];
    return a;
  }
  friend LatticePoint operator-(LatticePoint a, const LatticePoint& b) {
    require(a.dim() == b.dim(), Errc::dimension_mismatch, "point subtraction");
    for (std::size_t i = 0; i < a.dim(); ++i) a.c_[i] -= b.c_[i];
    return a;
  }
  LatticePoint operator-() const {
    LatticePoint r = *this;
    for (auto& x : r.c_) x = -x;
    return r;
  }

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(c_[i]);
    }
    return s + ")";
  }

 private:
  std::vector<Coord> c_;
};

namespace detail {

inline bool lex_less(std::span<const Coord> a, std::span<const Coord> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

inline bool lex_equal(std::span<const Coord> a, std::span<const Coord> b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace detail

// A finite set of lattice points of a fixed dimension. Points are stored
// flat (size() * dim() coordinates), sorted and without duplicates.
class FiniteSubset {
 public:
  explicit FiniteSubset(std::size_t dim = 1) : dim_(dim) {
    require(dim >= 1, Errc::parameter_domain, "dimension must be >= 1");
  }

  FiniteSubset(std::size_t dim, std::initializer_list<LatticePoint> pts)
      : FiniteSubset(from_points(dim, std::vector<LatticePoint>(pts))) {}

  static FiniteSubset from_points(std::size_t dim, const std::vector<LatticePoint>& pts) {
    std::vector<Coord> flat;
    flat.reserve(pts.size() * dim);
    for (const auto& p : pts) {
      require(p.dim() == dim, Errc::dimension_mismatch,
              "point " + p.to_string() + " in a set of dimension " + std::to_string(dim));
      flat.insert(flat.end(), p.coords().begin(), p.coords().end());
    }
    return from_flat(dim, std::move(flat));
  }

  // Sorts and deduplicates an arbitrary flat coordinate list.
  static FiniteSubset from_flat(std::size_t dim, std::vector<Coord> flat) {
    require(dim >= 1 && flat.size() % dim == 0, Errc::dimension_mismatch, "flat coordinate list");
    FiniteSubset s(dim);
    const std::size_t n = flat.size() / dim;
    auto at = [&](std::size_t i) { return std::span<const Coord>(flat.data() + i * dim, dim); };
    bool sorted = true;
    for (std::size_t i = 1; i < n && sorted; ++i) sorted = detail::lex_less(at(i - 1), at(i));
    if (sorted) {
      s.flat_ = std::move(flat);
      return s;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return detail::lex_less(at(a), at(b)); });
    s.flat_.reserve(flat.size());
    for (std::size_t k = 0; k < n; ++k) {
      if (k > 0 && detail::lex_equal(at(order[k]), at(order[k - 1]))) continue;
      auto p = at(order[k]);
      s.flat_.insert(s.flat_.end(), p.begin(), p.end());
    }
    return s;
  }

  // {a, ..., b} in Z.
  static FiniteSubset interval(Coord a, Coord b) {
    FiniteSubset s(1);
    for (Coord x = a; x <= b; ++x) s.flat_.push_back(x);
    return s;
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return flat_.size() / dim_; }
  bool empty() const noexcept { return flat_.empty(); }
  const std::vector<Coord>& flat() const noexcept { return flat_; }

  std::span<const Coord> operator[](std::size_t i) const {
    return std::span<const Coord>(flat_.data() + i * dim_, dim_);
  }
  LatticePoint point(std::size_t i) const { return LatticePoint((*this)[i]); }

  std::vector<LatticePoint> points() const {
    std::vector<LatticePoint> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(point(i));
    return out;
  }

  std::optional<std::size_t> index_of(std::span<const Coord> p) const {
    std::size_t lo = 0, hi = size();
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (detail::lex_less((*this)[mid], p))
        lo = mid + 1;
      else
        hi = mid;
    }
    if (lo < size() && detail::lex_equal((*this)[lo], p)) return lo;
    return std::nullopt;
  }

  bool contains(std::span<const Coord> p) const { return index_of(p).has_value(); }
  bool contains(const LatticePoint& p) const {
    require(p.dim() == dim_, Errc::dimension_mismatch, "membership test");
    return contains(p.coords());
  }
  bool contains_origin() const { return contains(LatticePoint::origin(dim_)); }

  FiniteSubset translated(const LatticePoint& g) const {
    require(g.dim() == dim_, Errc::dimension_mismatch, "translation");
    FiniteSubset s(dim_);
    s.flat_ = flat_;
    for (std::size_t i = 0; i < s.flat_.size(); ++i) s.flat_[i] += g[i % dim_];
    return s;  // translation preserves lexicographic order
  }

  FiniteSubset negated() const {
    std::vector<Coord> f = flat_;
    for (auto& x : f) x = -x;
    return from_flat(dim_, std::move(f));
  }

  bool subset_of(const FiniteSubset& other) const {
    require(other.dim_ == dim_, Errc::dimension_mismatch, "subset test");
    for (std::size_t i = 0; i < size(); ++i)
      if (!other.contains((*this)[i])) return false;
    return true;
  }

  friend bool operator==(const FiniteSubset& a, const FiniteSubset& b) {
    return a.dim_ == b.dim_ && a.flat_ == b.flat_;
  }

  std::string to_string() const {
    std::string s = "{";
    for (std::size_t i = 0; i < size(); ++i) {
      if (i) s += ",";
      s += dim_ == 1 ? std::to_string(flat_[i]) : point(i).to_string();
    }
    return s + "}";
  }

 private:
  std::size_t dim_;
  std::vector<Coord> flat_;
};

namespace detail {

inline void check_same_dim(const FiniteSubset& a, const FiniteSubset& b, const char* what) {
  require(a.dim() == b.dim(), Errc::dimension_mismatch,
          std::string(what) + ": dimensions " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
}

// Linear merge over two sorted sets; keep(in_a, in_b) decides membership.
template <class Keep>
FiniteSubset merge(const FiniteSubset& a, const FiniteSubset& b, Keep keep) {
  std::vector<Coord> out;
  std::size_t i = 0, j = 0;
  auto emit = [&](std::span<const Coord> p) { out.insert(out.end(), p.begin(), p.end()); };
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && lex_less(a[i], b[j]))) {
      if (keep(true, false)) emit(a[i]);
      ++i;
    } else if (i == a.size() || lex_less(b[j], a[i])) {
      if (keep(false, true)) emit(b[j]);
      ++j;
    } else {
      if (keep(true, true)) emit(a[i]);
      ++i;
      ++j;
    }
  }
  return FiniteSubset::from_flat(a.dim(), std::move(out));
}

}  // namespace detail

inline FiniteSubset set_union(const FiniteSubset& a, const FiniteSubset& b) {
  detail::check_same_dim(a, b, "union");
  return detail::merge(a, b, [](bool x, bool y) { return x || y; });
}

inline FiniteSubset set_intersection(const FiniteSubset& a, const FiniteSubset& b) {
  detail::check_same_dim(a, b, "intersection");
  return detail::merge(a, b, [](bool x, bool y) { return x && y; });
}

inline FiniteSubset set_difference(const FiniteSubset& a, const FiniteSubset& b) {
  detail::check_same_dim(a, b, "difference");
  return detail::merge(a, b, [](bool x, bool y) { return x && !y; });
}

inline bool are_disjoint(const FiniteSubset& a, const FiniteSubset& b) {
  return set_intersection(a, b).empty();
}

// ---------------------------------------------------------------------------
// F-boundary calculus

inline void check_tile(const FiniteSubset& omega, const FiniteSubset& f) {
  detail::check_same_dim(omega, f, "boundary operator");
  require(f.contains_origin(), Errc::origin_missing, "tile " + f.to_string() + " must contain the origin");
}

// { gamma not in Omega : (gamma + F) meets Omega } = (Omega - F) \ Omega.
inline FiniteSubset boundary_outer(const FiniteSubset& omega, const FiniteSubset& f) {
  check_tile(omega, f);
  const std::size_t d = omega.dim();
  std::vector<Coord> out;
  std::vector<Coord> c(d);
  for (std::size_t i = 0; i < omega.size(); ++i) {
    auto w = omega[i];
    for (std::size_t j = 0; j < f.size(); ++j) {
      auto g = f[j];
      for (std::size_t k = 0; k < d; ++k) c[k] = w[k] - g[k];
      if (!omega.contains(c)) out.insert(out.end(), c.begin(), c.end());
    }
  }
  return FiniteSubset::from_flat(d, std::move(out));
}

// { gamma in Omega : (gamma + F) meets the complement of Omega }.
inline FiniteSubset boundary_inner(const FiniteSubset& omega, const FiniteSubset& f) {
  check_tile(omega, f);
  const std::size_t d = omega.dim();
  std::vector<Coord> out;
  std::vector<Coord> c(d);
  for (std::size_t i = 0; i < omega.size(); ++i) {
    auto w = omega[i];
    for (std::size_t j = 0; j < f.size(); ++j) {
      auto g = f[j];
      for (std::size_t k = 0; k < d; ++k) c[k] = w[k] + g[k];
      if (!omega.contains(c)) {
        out.insert(out.end(), w.begin(), w.end());
        break;
      }
    }
  }
  return FiniteSubset::from_flat(d, std::move(out));
}

inline FiniteSubset boundary_full(const FiniteSubset& omega, const FiniteSubset& f) {
  return set_union(boundary_outer(omega, f), boundary_inner(omega, f));
}

// { gamma : gamma + F is contained in Omega }.
inline FiniteSubset interior(const FiniteSubset& omega, const FiniteSubset& f) {
  return set_difference(omega, boundary_inner(omega, f));
}

// { gamma : gamma + F meets Omega }.
inline FiniteSubset closure(const FiniteSubset& omega, const FiniteSubset& f) {
  return set_union(omega, boundary_outer(omega, f));
}

// Relative amenability |d_F Omega| / |Omega|, exact.
inline Rational alpha(const FiniteSubset& omega, const FiniteSubset& f) {
  check_tile(omega, f);
  require(!omega.empty(), Errc::empty_set, "alpha of the empty set");
  auto b = static_cast<std::int64_t>(boundary_outer(omega, f).size() + boundary_inner(omega, f).size());
  return Rational(b, static_cast<std::int64_t>(omega.size()));
}

// |d^-_F Omega| / |Omega|; the sharper quantity for quasi-tiling coverage.
inline Rational alpha_inner(const FiniteSubset& omega, const FiniteSubset& f) {
  check_tile(omega, f);
  require(!omega.empty(), Errc::empty_set, "alpha of the empty set");
  return Rational(static_cast<std::int64_t>(boundary_inner(omega, f).size()),
                  static_cast<std::int64_t>(omega.size()));
}

// ---------------------------------------------------------------------------
// Boxes: products of integer intervals, with closed-form boundary counts.

struct Box {
  std::vector<Coord> lo;
  std::vector<Coord> hi;  // inclusive

  static Box cube(std::size_t dim, Coord lo, Coord hi) {
    return Box{std::vector<Coord>(dim, lo), std::vector<Coord>(dim, hi)};
  }

  std::size_t dim() const noexcept { return lo.size(); }

  bool empty() const {
    for (std::size_t k = 0; k < dim(); ++k)
      if (hi[k] < lo[k]) return true;
    return false;
  }

  Coord side(std::size_t k) const { return hi[k] < lo[k] ? 0 : hi[k] - lo[k] + 1; }

  std::int64_t cardinality() const {
    std::int64_t n = 1;
    for (std::size_t k = 0; k < dim(); ++k) n *= side(k);
    return n;
  }

  bool contains(const Box& other) const {
    if (other.empty()) return true;
    for (std::size_t k = 0; k < dim(); ++k)
      if (other.lo[k] < lo[k] || other.hi[k] > hi[k]) return false;
    return true;
  }

  FiniteSubset to_subset() const {
    const std::size_t d = dim();
    require(d >= 1, Errc::parameter_domain, "box of dimension 0");
    std::vector<Coord> flat;
    if (empty()) return FiniteSubset(d);
    flat.reserve(static_cast<std::size_t>(cardinality()) * d);
    std::vector<Coord> p = lo;
    while (true) {
      flat.insert(flat.end(), p.begin(), p.end());
      std::size_t k = d;
      while (k > 0) {
        --k;
        if (p[k] < hi[k]) {
          ++p[k];
          for (std::size_t m = k + 1; m < d; ++m) p[m] = lo[m];
          break;
        }
        if (k == 0) return FiniteSubset::from_flat(d, std::move(flat));
      }
    }
  }

  friend bool operator==(const Box&, const Box&) = default;
};

inline std::optional<Box> bounding_box(const FiniteSubset& s) {
  if (s.empty()) return std::nullopt;
  Box b{std::vector<Coord>(s[0].begin(), s[0].end()), std::vector<Coord>(s[0].begin(), s[0].end())};
  for (std::size_t i = 1; i < s.size(); ++i)
    for (std::size_t k = 0; k < s.dim(); ++k) {
      b.lo[k] = std::min(b.lo[k], s[i][k]);
      b.hi[k] = std::max(b.hi[k], s[i][k]);
    }
  return b;
}

// The box equal to s, if s is a box.
inline std::optional<Box> as_box(const FiniteSubset& s) {
  auto b = bounding_box(s);
  if (b && b->cardinality() == static_cast<std::int64_t>(s.size())) return b;
  return std::nullopt;
}

// alpha(Omega; F) for boxes Omega, F with 0 in F, in O(d):
// Omega - F and int_F Omega are again boxes.
inline Rational alpha_boxes(const Box& omega, const Box& f) {
  require(omega.dim() == f.dim(), Errc::dimension_mismatch, "alpha_boxes");
  require(!omega.empty(), Errc::empty_set, "alpha of the empty set");
  for (std::size_t k = 0; k < f.dim(); ++k)
    require(f.lo[k] <= 0 && 0 <= f.hi[k], Errc::origin_missing, "tile box must contain the origin");
  Box sum{omega.lo, omega.hi}, inner{omega.lo, omega.hi};
  for (std::size_t k = 0; k < omega.dim(); ++k) {
    sum.lo[k] = omega.lo[k] - f.hi[k];
    sum.hi[k] = omega.hi[k] - f.lo[k];
    inner.lo[k] = omega.lo[k] - f.lo[k];
    inner.hi[k] = omega.hi[k] - f.hi[k];
  }
  const std::int64_t n = omega.cardinality();
  const std::int64_t outer = sum.cardinality() - n;
  const std::int64_t inner_boundary = n - (inner.empty() ? 0 : inner.cardinality());
  return Rational(outer + inner_boundary, n);
}

// ---------------------------------------------------------------------------
// Folner families

enum class FolnerFamily {
  centered_box,         // [-i, i]^d
  shifted_box,          // [0, 2i]^d
  eccentric_rectangle,  // [0, r*i] x [0, i]^(d-1)
};

inline const char* family_name(FolnerFamily f) {
  switch (f) {
    case FolnerFamily::centered_box: return "centered";
    case FolnerFamily::shifted_box: return "shifted";
    case FolnerFamily::eccentric_rectangle: return "eccentric";
  }
  return "unknown";
}

struct FolnerSpec {
  FolnerFamily family = FolnerFamily::centered_box;
  std::size_t dim = 1;
  Coord ratio = 2;             // eccentricity bound, eccentric_rectangle only
  std::int64_t max_index = 4096;
};

inline Box folner_box(const FolnerSpec& spec, std::int64_t index) {
  require(spec.dim >= 1, Errc::parameter_domain, "Folner dimension must be >= 1");
  require(index >= 1 && index <= spec.max_index, Errc::index_out_of_range,
          "Folner index " + std::to_string(index) + " outside [1, " + std::to_string(spec.max_index) + "]");
  switch (spec.family) {
    case FolnerFamily::centered_box:
      return Box::cube(spec.dim, -index, index);
    case FolnerFamily::shifted_box:
      return Box::cube(spec.dim, 0, 2 * index);
    case FolnerFamily::eccentric_rectangle: {
      require(spec.ratio >= 1, Errc::parameter_domain, "eccentricity ratio must be >= 1");
      Box b = Box::cube(spec.dim, 0, index);
      b.hi[0] = spec.ratio * index;
      return b;
    }
  }
  fail(Errc::parameter_domain, "unknown Folner family");
}

inline FiniteSubset folner_set(const FolnerSpec& spec, std::int64_t index) {
  return folner_box(spec, index).to_subset();
}

// The index whose set has exactly `cardinality` points.
inline std::int64_t folner_index_for_size(const FolnerSpec& spec, std::int64_t cardinality) {
  std::int64_t lo = 1, hi = spec.max_index;
  while (lo < hi) {
    std::int64_t mid = lo + (hi - lo) / 2;
    if (folner_box(spec, mid).cardinality() < cardinality)
      lo = mid + 1;
    else
      hi = mid;
  }
  require(folner_box(spec, lo).cardinality() == cardinality, Errc::index_out_of_range,
          "no " + std::string(family_name(spec.family)) + " Folner set has " + std::to_string(cardinality) +
              " points");
  return lo;
}

}  // namespace amenable
