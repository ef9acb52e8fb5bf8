#pragma once

// Von Neumann dimension of band-limited subspaces of l^2(Z^d).
//
// A MultiplierSet E in the torus [0,1)^d defines the shift-invariant subspace
// Y = { x : supp(x^) in E }. The orthogonal projection onto Y has the
// convolution kernel K(k) = int_E e^{2 pi i k.theta} dtheta, so the Gram
// matrix of the restriction R_Omega R^* is M[g, g'] = K(g - g'). Its trace is
// |Omega| * measure(E) for every Omega, and its eigenvalues pile up at 0 and
// 1 as Omega runs through a Folner sequence.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "amenable/error.hpp"
#include "amenable/group_geometry.hpp"
#include "amenable/parallel.hpp"

namespace amenable {

using Complex = std::complex<double>;

inline constexpr double kSpectrumTol = 1e-8;

struct TorusInterval {
  double a = 0.0;  // [a, b) inside [0, 1)
  double b = 0.0;
};

// Finite union of half-open intervals per torus coordinate; E is their product.
class MultiplierSet {
 public:
  explicit MultiplierSet(std::vector<std::vector<TorusInterval>> per_dim) : dims_(std::move(per_dim)) {
    require(!dims_.empty(), Errc::parameter_domain, "multiplier set needs at least one dimension");
    for (auto& ivs : dims_) {
      std::sort(ivs.begin(), ivs.end(), [](auto& x, auto& y) { return x.a < y.a; });
      for (std::size_t i = 0; i < ivs.size(); ++i) {
        require(0.0 <= ivs[i].a && ivs[i].a < ivs[i].b && ivs[i].b <= 1.0, Errc::parameter_domain,
                "interval [" + std::to_string(ivs[i].a) + "," + std::to_string(ivs[i].b) + ") not inside [0,1)");
        if (i > 0)
          require(ivs[i - 1].b <= ivs[i].a, Errc::parameter_domain, "intervals of a multiplier set overlap");
      }
    }
  }

  // E = (-L/2, L/2) mod 1 in every coordinate with L^d = measure; symmetric
  // about 0, so every kernel value is real.
  static MultiplierSet symmetric(double measure, std::size_t dim = 1) {
    require(measure >= 0.0 && measure <= 1.0, Errc::parameter_domain, "measure must lie in [0,1]");
    require(dim >= 1, Errc::parameter_domain, "dimension must be >= 1");
    const double len = std::pow(measure, 1.0 / static_cast<double>(dim));
    std::vector<TorusInterval> ivs;
    if (len >= 1.0)
      ivs.push_back({0.0, 1.0});
    else if (len > 0.0)
      ivs = {{0.0, len / 2}, {1.0 - len / 2, 1.0}};
    return MultiplierSet(std::vector<std::vector<TorusInterval>>(dim, ivs));
  }

  // "a:b[,a:b...]" per dimension, dimensions separated by ';'.
  static MultiplierSet parse(std::string_view text) {
    std::vector<std::vector<TorusInterval>> dims;
    auto num = [&](std::string_view s) {
      try {
        std::size_t used = 0;
        double v = std::stod(std::string(s), &used);
        if (used != s.size()) throw std::invalid_argument("trailing");
        return v;
      } catch (...) {
        fail(Errc::parameter_domain, "bad multiplier interval endpoint '" + std::string(s) + "'");
      }
    };
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t semi = text.find(';', start);
      std::string_view part = text.substr(start, semi == std::string_view::npos ? std::string_view::npos : semi - start);
      std::vector<TorusInterval> ivs;
      std::size_t s = 0;
      while (s < part.size()) {
        std::size_t comma = part.find(',', s);
        std::string_view iv = part.substr(s, comma == std::string_view::npos ? std::string_view::npos : comma - s);
        std::size_t colon = iv.find(':');
        require(colon != std::string_view::npos, Errc::parameter_domain,
                "multiplier interval '" + std::string(iv) + "' must look like a:b");
        ivs.push_back({num(iv.substr(0, colon)), num(iv.substr(colon + 1))});
        if (comma == std::string_view::npos) break;
        s = comma + 1;
      }
      dims.push_back(std::move(ivs));
      if (semi == std::string_view::npos) break;
      start = semi + 1;
    }
    return MultiplierSet(std::move(dims));
  }

  std::size_t dim() const noexcept { return dims_.size(); }
  const std::vector<TorusInterval>& intervals(std::size_t k) const { return dims_.at(k); }

  double length(std::size_t k) const {
    double s = 0.0;
    for (auto& iv : dims_.at(k)) s += iv.b - iv.a;
    return s;
  }

  double measure() const {
    double m = 1.0;
    for (std::size_t k = 0; k < dim(); ++k) m *= length(k);
    return m;
  }

  bool contains(std::span<const double> theta) const {
    require(theta.size() == dim(), Errc::dimension_mismatch, "torus point");
    for (std::size_t k = 0; k < dim(); ++k) {
      double t = theta[k] - std::floor(theta[k]);
      bool in = false;
      for (auto& iv : dims_[k]) in = in || (iv.a <= t && t < iv.b);
      if (!in) return false;
    }
    return true;
  }

  std::string to_string() const {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t k = 0; k < dim(); ++k) {
      if (k) os << ';';
      for (std::size_t i = 0; i < dims_[k].size(); ++i) os << (i ? "," : "") << dims_[k][i].a << ':' << dims_[k][i].b;
    }
    return os.str();
  }

 private:
  std::vector<std::vector<TorusInterval>> dims_;
};

namespace detail {

// e^{2 pi i k x} with the integer part of k*x removed first.
inline Complex unit_phase(std::int64_t k, double x) {
  const double t = static_cast<double>(k) * x;
  const double frac = t - std::floor(t);
  const double ang = 2.0 * std::numbers::pi * frac;
  return {std::cos(ang), std::sin(ang)};
}

inline Complex kernel_factor(const std::vector<TorusInterval>& ivs, std::int64_t k) {
  if (k == 0) {
    double s = 0.0;
    for (auto& iv : ivs) s += iv.b - iv.a;
    return {s, 0.0};
  }
  Complex s{0.0, 0.0};
  for (auto& iv : ivs) s += unit_phase(k, iv.b) - unit_phase(k, iv.a);
  return s / Complex(0.0, 2.0 * std::numbers::pi * static_cast<double>(k));
}

}  // namespace detail

// K(k) = int_E e^{2 pi i k.theta} dtheta in closed form.
inline Complex kernel_entry(const MultiplierSet& e, std::span<const Coord> k) {
  require(k.size() == e.dim(), Errc::dimension_mismatch, "kernel argument");
  Complex v{1.0, 0.0};
  for (std::size_t j = 0; j < e.dim(); ++j) v *= detail::kernel_factor(e.intervals(j), k[j]);
  return v;
}

inline Complex kernel_entry(const MultiplierSet& e, const LatticePoint& k) { return kernel_entry(e, k.coords()); }

inline constexpr std::size_t kDefaultGramCap = 4096;

inline Eigen::MatrixXcd gram_matrix(const MultiplierSet& e, const FiniteSubset& omega,
                                    std::size_t cap = kDefaultGramCap) {
  require(omega.dim() == e.dim(), Errc::dimension_mismatch, "omega and multiplier set dimensions differ");
  require(omega.size() <= cap, Errc::size_cap,
          "|omega| = " + std::to_string(omega.size()) + " exceeds the cap " + std::to_string(cap));
  const auto n = static_cast<Eigen::Index>(omega.size());
  const std::size_t d = omega.dim();
  Eigen::MatrixXcd m(n, n);
  std::vector<Coord> diff(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      auto gi = omega[static_cast<std::size_t>(i)];
      auto gj = omega[static_cast<std::size_t>(j)];
      for (std::size_t k = 0; k < d; ++k) diff[k] = gi[k] - gj[k];
      const Complex v = kernel_entry(e, diff);
      m(i, j) = v;
      m(j, i) = std::conj(v);
    }
  }
  return m;
}

inline bool is_real_matrix(const Eigen::MatrixXcd& m, double tol = 1e-14) {
  return m.imag().cwiseAbs().maxCoeff() <= tol;
}

struct IntervalCount {
  double a = 0.0;
  double b = 0.0;
  std::int64_t count = 0;
};

// Eigenvalues within kSpectrumTol of [0,1] are clamped before counting, so
// the closed interval [eps, 1] also catches eigenvalues rounded to 1+1e-15.
inline std::int64_t count_in(const std::vector<double>& eigenvalues, double a, double b) {
  std::int64_t n = 0;
  for (double l : eigenvalues) {
    double c = l;
    if (c < 0.0 && c >= -kSpectrumTol) c = 0.0;
    if (c > 1.0 && c <= 1.0 + kSpectrumTol) c = 1.0;
    if (a <= c && c <= b) ++n;
  }
  return n;
}

struct SpectralReport {
  std::size_t omega_size = 0;
  std::vector<double> eigenvalues;  // ascending
  double trace = 0.0;               // sum of the diagonal
  double eigenvalue_sum = 0.0;
  std::vector<IntervalCount> counts;

  std::int64_t count(double a, double b) const { return count_in(eigenvalues, a, b); }
};

struct Eigensystem {
  std::vector<double> eigenvalues;  // ascending
  Eigen::MatrixXcd vectors;         // columns, empty unless requested
};

// Full Hermitian eigensolve; real symmetric input takes the real solver.
inline Eigensystem solve_hermitian(const Eigen::MatrixXcd& m, bool with_vectors = false) {
  Eigensystem out;
  const int opts = with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
  if (is_real_matrix(m)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.real(), opts);
    require(es.info() == Eigen::Success, Errc::eigensolver_failure, "real symmetric eigensolver did not converge");
    out.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    if (with_vectors) out.vectors = es.eigenvectors().cast<Complex>();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, opts);
    require(es.info() == Eigen::Success, Errc::eigensolver_failure, "Hermitian eigensolver did not converge");
    out.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    if (with_vectors) out.vectors = es.eigenvectors();
  }
  return out;
}

inline SpectralReport spectral_report(const MultiplierSet& e, const FiniteSubset& omega,
                                      const std::vector<std::pair<double, double>>& intervals = {},
                                      std::size_t cap = kDefaultGramCap) {
  const Eigen::MatrixXcd m = gram_matrix(e, omega, cap);
  SpectralReport r;
  r.omega_size = omega.size();
  r.trace = m.diagonal().real().sum();
  r.eigenvalues = solve_hermitian(m).eigenvalues;
  for (double l : r.eigenvalues) r.eigenvalue_sum += l;
  for (auto [a, b] : intervals) {
    require(a <= b, Errc::parameter_domain, "interval endpoints out of order");
    r.counts.push_back({a, b, r.count(a, b)});
  }
  return r;
}

// Largest relative residual |M v - lambda v| / |M| over all eigenpairs.
inline double max_relative_residual(const Eigen::MatrixXcd& m, const Eigensystem& sys) {
  const double norm = std::max(m.norm(), 1e-300);
  double worst = 0.0;
  const Eigen::MatrixXcd mv = m * sys.vectors;
  for (Eigen::Index j = 0; j < sys.vectors.cols(); ++j) {
    const double r = (mv.col(j) - sys.eigenvalues[static_cast<std::size_t>(j)] * sys.vectors.col(j)).norm();
    worst = std::max(worst, r / norm);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Eigenvalue concentration along a Folner family

struct ConcentrationRow {
  std::int64_t index = 0;
  std::size_t size = 0;
  std::int64_t count = 0;
  double ratio = 0.0;
};

struct ConcentrationTable {
  double a = 0.0;
  double b = 0.0;
  std::vector<ConcentrationRow> rows;
  // Ratio at the largest size below the ratio at the smallest; a table that
  // is identically zero has nothing left to concentrate and also passes.
  bool decreasing = false;
};

inline ConcentrationTable concentration_scan(const MultiplierSet& e, const FolnerSpec& spec,
                                             const std::vector<std::int64_t>& indices, double a, double b) {
  require(0.0 < a && a <= b && b < 1.0, Errc::parameter_domain, "need 0 < a <= b < 1");
  require(!indices.empty(), Errc::parameter_domain, "no Folner indices given");
  require(std::is_sorted(indices.begin(), indices.end()), Errc::parameter_domain, "indices must be ascending");
  ConcentrationTable t;
  t.a = a;
  t.b = b;
  t.rows.resize(indices.size());
  parallel_for(indices.size(), [&](std::size_t i) {
    const FiniteSubset omega = folner_set(spec, indices[i]);
    const SpectralReport r = spectral_report(e, omega);
    auto& row = t.rows[i];
    row.index = indices[i];
    row.size = omega.size();
    row.count = r.count(a, b);
    row.ratio = static_cast<double>(row.count) / static_cast<double>(row.size);
  });
  const double first = t.rows.front().ratio, last = t.rows.back().ratio;
  t.decreasing = last < first || (first == 0.0 && last == 0.0);
  return t;
}

// ---------------------------------------------------------------------------
// Width sandwich: n[eps,1] <= wdim_eps(R_Omega B^Y_1, l^2) <= n[eps/2,1]

struct WidthSandwich {
  std::size_t omega_size = 0;
  std::int64_t lower = 0;  // n[eps, 1]
  std::int64_t upper = 0;  // n[eps/2, 1]
  double epsilon = 0.0;
};

inline WidthSandwich wdim_sandwich(const std::vector<double>& eigenvalues, std::size_t omega_size, double epsilon) {
  require(epsilon > 0.0 && epsilon < 1.0, Errc::parameter_domain, "epsilon must lie in (0,1)");
  return {omega_size, count_in(eigenvalues, epsilon, 1.0), count_in(eigenvalues, epsilon / 2, 1.0), epsilon};
}

inline WidthSandwich wdim_sandwich(const MultiplierSet& e, const FiniteSubset& omega, double epsilon) {
  require(epsilon > 0.0 && epsilon < 1.0, Errc::parameter_domain, "epsilon must lie in (0,1)");
  return wdim_sandwich(spectral_report(e, omega).eigenvalues, omega.size(), epsilon);
}

// ---------------------------------------------------------------------------
// Finite-index reduction: Z^d seen through the sublattice N Z^d, with the
// value space enlarged N^d times.

struct ReductionReport {
  double dim_parent = 0.0;
  double dim_sub = 0.0;
  std::int64_t lattice_index = 1;  // [Z^d : N Z^d] = N^d
  bool holds = false;
};

inline ReductionReport reduction_check(const MultiplierSet& e, std::int64_t n, const FiniteSubset& omega) {
  require(n >= 1, Errc::parameter_domain, "sublattice step must be >= 1");
  require(omega.dim() == e.dim(), Errc::dimension_mismatch, "omega and multiplier set dimensions differ");
  const auto box = as_box(omega);
  require(box.has_value(), Errc::incompatible_box, "omega must be a box");
  const std::size_t d = omega.dim();
  std::int64_t index = 1;
  std::vector<Coord> blocks(d);
  for (std::size_t k = 0; k < d; ++k) {
    require(box->side(k) % n == 0, Errc::incompatible_box,
            "box side " + std::to_string(box->side(k)) + " not divisible by " + std::to_string(n));
    blocks[k] = box->side(k) / n;
    index *= n;
  }
  ReductionReport r;
  r.lattice_index = index;

  // Parent: trace over Omega in Z^d.
  const Eigen::MatrixXcd parent = gram_matrix(e, omega);
  r.dim_parent = parent.diagonal().real().sum() / static_cast<double>(omega.size());

  // Sublattice: Omega = {lo + N m + r}, m in the block grid, r in [0,N)^d.
  // The diagonal block at m is the N^d x N^d matrix K(r - r'); its trace
  // is accumulated per sublattice point.
  const Box sub_box{std::vector<Coord>(d, 0), [&] {
                      std::vector<Coord> h(d);
                      for (std::size_t k = 0; k < d; ++k) h[k] = blocks[k] - 1;
                      return h;
                    }()};
  const FiniteSubset sub_points = sub_box.to_subset();
  const FiniteSubset residues = Box::cube(d, 0, n - 1).to_subset();
  double sub_trace = 0.0;
  std::vector<Coord> g(d), h(d), diff(d);
  for (std::size_t m = 0; m < sub_points.size(); ++m) {
    for (std::size_t ri = 0; ri < residues.size(); ++ri) {
      for (std::size_t k = 0; k < d; ++k) g[k] = box->lo[k] + n * sub_points[m][k] + residues[ri][k];
      const auto row = omega.index_of(g);
      require(row.has_value(), Errc::incompatible_box, "regrouped point outside omega");
      sub_trace += parent((Eigen::Index)*row, (Eigen::Index)*row).real();
    }
  }
  r.dim_sub = sub_trace / static_cast<double>(sub_points.size());
  r.holds = std::abs(r.dim_sub - static_cast<double>(index) * r.dim_parent) <= 1e-9;
  return r;
}

// ---------------------------------------------------------------------------
// Finite-type symbols

// S = sum_gamma coeff(gamma) shift_gamma : l^2(Z^d; V) -> l^2(Z^d; V').
struct FiniteTypeSymbol {
  std::size_t dim_v = 1;
  std::size_t dim_vprime = 1;
  std::vector<std::pair<LatticePoint, Eigen::MatrixXcd>> coefficients;  // dim_vprime x dim_v each

  void validate() const {
    require(dim_v >= 1 && dim_vprime >= 1, Errc::parameter_domain, "value spaces must be nonzero");
    for (auto& [g, a] : coefficients) {
      require(static_cast<std::size_t>(a.rows()) == dim_vprime && static_cast<std::size_t>(a.cols()) == dim_v,
              Errc::dimension_mismatch, "coefficient at " + g.to_string() + " has the wrong shape");
    }
  }

  // S^(theta) = sum_gamma coeff(gamma) e^{2 pi i gamma.theta}
  Eigen::MatrixXcd evaluate(std::span<const double> theta) const {
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero((Eigen::Index)dim_vprime, (Eigen::Index)dim_v);
    for (auto& [g, a] : coefficients) {
      require(g.dim() == theta.size(), Errc::dimension_mismatch, "symbol support dimension");
      double phase = 0.0;
      for (std::size_t k = 0; k < theta.size(); ++k) phase += static_cast<double>(g[k]) * theta[k];
      phase -= std::floor(phase);
      s += a * std::polar(1.0, 2.0 * std::numbers::pi * phase);
    }
    return s;
  }
};

struct SymbolRankReport {
  std::int64_t min_rank = 0;
  std::int64_t max_rank = 0;
  std::int64_t grid_points_in_e = 0;
  double image_dimension = 0.0;  // (1/grid^d) sum_theta rank(theta) 1_E(theta)
  bool injectivity_impossible = false;
};

inline SymbolRankReport symbol_rank_dimension(const FiniteTypeSymbol& s, const MultiplierSet& e,
                                              std::int64_t grid_size, double rank_tol = 1e-8) {
  s.validate();
  require(grid_size >= 16, Errc::parameter_domain, "grid size must be >= 16");
  const std::size_t d = e.dim();
  for (auto& [g, a] : s.coefficients)
    require(g.dim() == d, Errc::dimension_mismatch, "symbol support and multiplier set dimensions differ");
  SymbolRankReport r;
  std::int64_t total = 1;
  for (std::size_t k = 0; k < d; ++k) total *= grid_size;
  std::vector<double> theta(d);
  std::int64_t rank_sum = 0;
  bool first = true;
  for (std::int64_t idx = 0; idx < total; ++idx) {
    std::int64_t rem = idx;
    for (std::size_t k = d; k-- > 0;) {
      theta[k] = static_cast<double>(rem % grid_size) / static_cast<double>(grid_size);
      rem /= grid_size;
    }
    if (!e.contains(theta)) continue;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(s.evaluate(theta));
    std::int64_t rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()(i) > rank_tol) ++rank;
    r.min_rank = first ? rank : std::min(r.min_rank, rank);
    r.max_rank = first ? rank : std::max(r.max_rank, rank);
    first = false;
    rank_sum += rank;
    ++r.grid_points_in_e;
  }
  r.image_dimension = static_cast<double>(rank_sum) / static_cast<double>(total);
  r.injectivity_impossible = r.max_rank < static_cast<std::int64_t>(s.dim_v);
  return r;
}

// ---------------------------------------------------------------------------
// Quasimode check: an eigenvector x of R_Omega R^* with eigenvalue lambda is
// a 0-quasimode, so lambda (1 - lambda) <= delta where delta is the mass of
// R^* x outside Omega. R^* x is evaluated on Omega's bounding box padded by
// `padding` times its half-width.

struct QuasimodeSample {
  double lambda = 0.0;
  double delta = 0.0;  // |R^* x restricted to the padded box minus Omega| / |x|
  bool holds = false;
};

inline std::vector<QuasimodeSample> quasimode_check(const MultiplierSet& e, const FiniteSubset& omega,
                                                    std::size_t samples, double padding = 4.0) {
  const auto box = bounding_box(omega);
  require(box.has_value(), Errc::empty_set, "quasimode check on an empty set");
  const Eigen::MatrixXcd m = gram_matrix(e, omega);
  const Eigensystem sys = solve_hermitian(m, true);
  const std::size_t d = omega.dim();
  Box padded = *box;
  for (std::size_t k = 0; k < d; ++k) {
    const auto half = std::max<Coord>(1, (box->hi[k] - box->lo[k] + 1) / 2);
    const auto pad = static_cast<Coord>(std::ceil(padding * static_cast<double>(half)));
    padded.lo[k] -= pad;
    padded.hi[k] += pad;
  }
  const FiniteSubset outside = set_difference(padded.to_subset(), omega);
  // Kernel rows from every outside point to every omega point.
  Eigen::MatrixXcd k_out((Eigen::Index)outside.size(), (Eigen::Index)omega.size());
  std::vector<Coord> diff(d);
  for (std::size_t i = 0; i < outside.size(); ++i)
    for (std::size_t j = 0; j < omega.size(); ++j) {
      for (std::size_t c = 0; c < d; ++c) diff[c] = outside[i][c] - omega[j][c];
      k_out((Eigen::Index)i, (Eigen::Index)j) = kernel_entry(e, diff);
    }
  std::vector<QuasimodeSample> out;
  const std::size_t n = sys.eigenvalues.size();
  const std::size_t take = std::min(samples, n);
  for (std::size_t s = 0; s < take; ++s) {
    const std::size_t j = take == 1 ? n / 2 : s * (n - 1) / (take - 1);
    const Eigen::VectorXcd x = sys.vectors.col((Eigen::Index)j);
    const double lambda = std::clamp(sys.eigenvalues[j], 0.0, 1.0);
    const double delta = (k_out * x).norm() / x.norm();
    out.push_back({lambda, delta, lambda * (1.0 - lambda) <= delta + 1e-12});
  }
  return out;
}

}  // namespace amenable
