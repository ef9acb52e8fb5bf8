#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "amenable/random.hpp"
#include "amenable/spectral_vn.hpp"

using namespace amenable;

namespace {

// Composite midpoint rule for the integral of e^{2 pi i k theta} over E.
Complex quadrature_kernel(const MultiplierSet& e, std::int64_t k, int steps = 200000) {
  Complex s{0, 0};
  for (auto& iv : e.intervals(0)) {
    const double h = (iv.b - iv.a) / steps;
    for (int i = 0; i < steps; ++i) {
      const double t = iv.a + (i + 0.5) * h;
      s += std::polar(h, 2 * std::numbers::pi * static_cast<double>(k) * t);
    }
  }
  return s;
}

MultiplierSet half_interval() { return MultiplierSet({{{0.0, 0.5}}}); }

double max_abs_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST(MultiplierSet, ConstructionAndMeasure) {
  const auto e = MultiplierSet::symmetric(0.5);
  EXPECT_EQ(e.dim(), 1u);
  EXPECT_DOUBLE_EQ(e.measure(), 0.5);
  EXPECT_NEAR(MultiplierSet::symmetric(0.3, 2).measure(), 0.3, 1e-15);
  EXPECT_EQ(MultiplierSet::symmetric(0.0).measure(), 0.0);
  EXPECT_EQ(MultiplierSet::symmetric(1.0).measure(), 1.0);
  const double t1[] = {0.1}, t2[] = {0.5}, t3[] = {-0.1};
  EXPECT_TRUE(e.contains(t1));
  EXPECT_FALSE(e.contains(t2));
  EXPECT_TRUE(e.contains(t3));
}

TEST(MultiplierSet, ParseAndErrors) {
  const auto e = MultiplierSet::parse("0:0.25,0.5:0.75;0.1:0.2");
  EXPECT_EQ(e.dim(), 2u);
  EXPECT_NEAR(e.measure(), 0.05, 1e-15);
  for (const char* bad : {"0.5:0.2", "0:0.5,0.4:0.6", "0:1.5", "x:0.5", "0.5", "0:0.5z"}) {
    try {
      (void)MultiplierSet::parse(bad);
      FAIL() << bad;
    } catch (const Error& err) {
      EXPECT_EQ(err.code(), Errc::parameter_domain) << bad;
    }
  }
}

TEST(Kernel, SpecValues) {
  EXPECT_DOUBLE_EQ(kernel_entry(half_interval(), LatticePoint{0}).real(), 0.5);
  const Complex k1 = kernel_entry(MultiplierSet::symmetric(0.5), LatticePoint{1});
  EXPECT_NEAR(k1.real(), 1 / std::numbers::pi, 1e-15);
  EXPECT_NEAR(k1.imag(), 0.0, 1e-15);
}

TEST(Kernel, MatchesQuadratureOracle) {
  const std::vector<MultiplierSet> sets{half_interval(), MultiplierSet::symmetric(0.5), MultiplierSet::symmetric(0.3),
                                        MultiplierSet::parse("0.1:0.35,0.6:0.7")};
  for (const auto& e : sets)
    for (std::int64_t k : {-7, -2, -1, 0, 1, 3, 10}) {
      const Complex a = kernel_entry(e, LatticePoint{k}), b = quadrature_kernel(e, k);
      EXPECT_NEAR(std::abs(a - b), 0.0, 1e-9) << e.to_string() << " k=" << k;
    }
}

TEST(Kernel, HermitianSymmetry) {
  const auto e = MultiplierSet::parse("0.05:0.3;0.2:0.9");
  for (Coord x = -6; x <= 6; ++x)
    for (Coord y = -6; y <= 6; ++y) {
      const Complex a = kernel_entry(e, LatticePoint{x, y}), b = kernel_entry(e, LatticePoint{-x, -y});
      EXPECT_NEAR(std::abs(a - std::conj(b)), 0.0, 1e-15);
    }
}

TEST(Kernel, LargeArgumentsStayAccurate) {
  // The phase is reduced mod 1 before the trig call, so huge k loses no
  // accuracy beyond the representation of the endpoints.
  const auto e = MultiplierSet::symmetric(0.5);
  const std::int64_t k = 4000001;  // k = 1 mod 4
  EXPECT_NEAR(kernel_entry(e, LatticePoint{k}).real(), 1 / (std::numbers::pi * static_cast<double>(k)), 1e-15);
}

TEST(Gram, ShapeAndEntries) {
  const auto m = gram_matrix(half_interval(), FiniteSubset::interval(0, 1));
  EXPECT_NEAR(std::abs(m(0, 1)), 1 / std::numbers::pi, 1e-12);
  EXPECT_NEAR(std::abs(m(0, 1) - quadrature_kernel(half_interval(), -1)), 0.0, 1e-9);
  EXPECT_EQ(m(0, 0), Complex(0.5, 0));
  EXPECT_LT(max_abs_diff(m, m.adjoint()), 1e-15);
  EXPECT_FALSE(is_real_matrix(m));
  EXPECT_TRUE(is_real_matrix(gram_matrix(MultiplierSet::symmetric(0.4), FiniteSubset::interval(-5, 5))));
}

TEST(Gram, SizeCap) {
  try {
    (void)gram_matrix(half_interval(), FiniteSubset::interval(0, 99), 50);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), Errc::size_cap);
  }
  try {
    (void)gram_matrix(half_interval(), Box::cube(2, 0, 2).to_subset());
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), Errc::dimension_mismatch);
  }
}

TEST(Spectrum, SingletonCase) {
  const auto r = spectral_report(MultiplierSet::symmetric(0.5), FiniteSubset::interval(0, 0), {{0.4, 0.6}});
  ASSERT_EQ(r.eigenvalues.size(), 1u);
  EXPECT_NEAR(r.eigenvalues[0], 0.5, 1e-15);
  ASSERT_EQ(r.counts.size(), 1u);
  EXPECT_EQ(r.counts[0].count, 1);
}

TEST(Spectrum, TraceIdentityAndContainment) {
  Rng rng(17);
  const std::vector<MultiplierSet> sets{MultiplierSet::symmetric(0.25), half_interval(),
                                        MultiplierSet::parse("0.1:0.2,0.3:0.65"),
                                        MultiplierSet::parse("0:0.5;0.25:0.5")};
  for (const auto& e : sets)
    for (int t = 0; t < 6; ++t) {
      std::vector<Coord> flat;
      const std::size_t d = e.dim();
      const Coord ext = d == 1 ? 30 : 6;
      for (int i = 0; i < 40; ++i)
        for (std::size_t k = 0; k < d; ++k) flat.push_back(rng.uniform_int(-ext, ext));
      const FiniteSubset omega = FiniteSubset::from_flat(d, flat);
      const auto r = spectral_report(e, omega);
      EXPECT_NEAR(r.trace / static_cast<double>(omega.size()), e.measure(), 1e-9);
      EXPECT_NEAR(r.eigenvalue_sum, r.trace, 1e-8);
      EXPECT_TRUE(std::is_sorted(r.eigenvalues.begin(), r.eigenvalues.end()));
      EXPECT_GE(r.eigenvalues.front(), -kSpectrumTol);
      EXPECT_LE(r.eigenvalues.back(), 1 + kSpectrumTol);
      EXPECT_EQ(r.count(0, 1), static_cast<std::int64_t>(omega.size()));
    }
}

TEST(Spectrum, ResidualsWithinContract) {
  for (const auto& e : {MultiplierSet::symmetric(0.5), half_interval()}) {
    const auto m = gram_matrix(e, FiniteSubset::interval(-60, 60));
    const Eigensystem sys = solve_hermitian(m, true);
    EXPECT_LE(max_relative_residual(m, sys), 1e-8);
    EXPECT_EQ(sys.vectors.cols(), m.cols());
  }
}

TEST(Spectrum, ShiftedIntervalHasSameSpectrum) {
  // Modulating E by a translate is a unitary conjugation of the Gram matrix.
  const FiniteSubset omega = FiniteSubset::interval(0, 40);
  const auto a = spectral_report(MultiplierSet::symmetric(0.5), omega).eigenvalues;
  const auto b = spectral_report(MultiplierSet::parse("0.1:0.6"), omega).eigenvalues;
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-10);
}

TEST(Concentration, MeasureHalfStrictlyDecreasing) {
  const auto t = concentration_scan(MultiplierSet::symmetric(0.5), FolnerSpec{}, {32, 128, 512}, 0.1, 0.9);
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[0].size, 65u);
  EXPECT_EQ(t.rows[2].size, 1025u);
  EXPECT_GT(t.rows[0].ratio, t.rows[1].ratio);
  EXPECT_GT(t.rows[1].ratio, t.rows[2].ratio);
  EXPECT_GT(t.rows[2].count, 0);
  EXPECT_TRUE(t.decreasing);
}

TEST(Concentration, DegenerateMeasures) {
  for (double m : {0.0, 1.0}) {
    const auto t = concentration_scan(MultiplierSet::symmetric(m), FolnerSpec{}, {16, 64, 256}, 0.1, 0.9);
    for (auto& row : t.rows) EXPECT_EQ(row.count, 0) << "measure " << m;
    EXPECT_TRUE(t.decreasing);
  }
}

TEST(Concentration, PointIntervalIsNonIncreasing) {
  const auto t = concentration_scan(MultiplierSet::symmetric(0.3), FolnerSpec{}, {16, 64, 256}, 0.5, 0.5);
  for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_LE(t.rows[i].ratio, t.rows[0].ratio);
  EXPECT_TRUE(t.decreasing);
}

TEST(Concentration, ParameterErrors) {
  const auto e = MultiplierSet::symmetric(0.5);
  EXPECT_THROW((void)concentration_scan(e, FolnerSpec{}, {4, 8}, 0.0, 0.5), Error);
  EXPECT_THROW((void)concentration_scan(e, FolnerSpec{}, {4, 8}, 0.6, 0.5), Error);
  EXPECT_THROW((void)concentration_scan(e, FolnerSpec{}, {8, 4}, 0.1, 0.5), Error);
  EXPECT_THROW((void)concentration_scan(e, FolnerSpec{}, {}, 0.1, 0.5), Error);
}

TEST(Sandwich, Size257) {
  const auto s = wdim_sandwich(MultiplierSet::symmetric(0.5), FiniteSubset::interval(-128, 128), 0.1);
  EXPECT_LE(s.lower, s.upper);
  EXPECT_NEAR(static_cast<double>(s.lower) / 257, 0.5, 0.1);
  EXPECT_NEAR(static_cast<double>(s.upper) / 257, 0.5, 0.1);
}

TEST(Sandwich, Size1025) {
  const FiniteSubset omega = FiniteSubset::interval(-512, 512);
  for (double m : {0.25, 0.5}) {
    const auto s = wdim_sandwich(MultiplierSet::symmetric(m), omega, 0.1);
    EXPECT_NEAR(static_cast<double>(s.lower) / 1025, m, 0.05);
    EXPECT_NEAR(static_cast<double>(s.upper) / 1025, m, 0.05);
  }
}

TEST(Sandwich, FullMeasureAndOrdering) {
  const FiniteSubset omega = FiniteSubset::interval(0, 20);
  const auto full = wdim_sandwich(MultiplierSet::symmetric(1.0), omega, 0.999);
  EXPECT_EQ(full.lower, 21);
  const auto eigs = spectral_report(MultiplierSet::symmetric(0.4), omega).eigenvalues;
  for (double eps = 0.05; eps < 1; eps += 0.05) {
    const auto s = wdim_sandwich(eigs, omega.size(), eps);
    EXPECT_LE(s.lower, s.upper);
  }
  EXPECT_THROW((void)wdim_sandwich(eigs, omega.size(), 1.0), Error);
}

TEST(Reduction, SpecValues) {
  auto r = reduction_check(MultiplierSet::symmetric(0.3), 2, FiniteSubset::interval(0, 63));
  EXPECT_NEAR(r.dim_parent, 0.3, 1e-12);
  EXPECT_NEAR(r.dim_sub, 0.6, 1e-9);
  EXPECT_EQ(r.lattice_index, 2);
  EXPECT_TRUE(r.holds);
  r = reduction_check(MultiplierSet::symmetric(0.3), 1, FiniteSubset::interval(0, 63));
  EXPECT_NEAR(r.dim_sub, r.dim_parent, 1e-12);
  r = reduction_check(MultiplierSet::symmetric(0.25), 4, FiniteSubset::interval(-8, 7));
  EXPECT_NEAR(r.dim_parent, 0.25, 1e-12);
  EXPECT_NEAR(r.dim_sub, 1.0, 1e-9);
  EXPECT_TRUE(r.holds);
}

TEST(Reduction, TwoDimensionalIndex) {
  const auto r = reduction_check(MultiplierSet::symmetric(0.36, 2), 3, Box::cube(2, 0, 5).to_subset());
  EXPECT_EQ(r.lattice_index, 9);
  EXPECT_NEAR(r.dim_sub, 9 * 0.36, 1e-9);
  EXPECT_TRUE(r.holds);
}

TEST(Reduction, IncompatibleBox) {
  for (const FiniteSubset& omega :
       {FiniteSubset::interval(0, 62), FiniteSubset::from_flat(1, std::vector<Coord>{0, 1, 3, 4})}) {
    try {
      (void)reduction_check(MultiplierSet::symmetric(0.3), 2, omega);
      FAIL();
    } catch (const Error& err) {
      EXPECT_EQ(err.code(), Errc::incompatible_box);
    }
  }
}

TEST(SymbolRank, RankBoundForcesNonInjectivity) {
  FiniteTypeSymbol s;
  s.dim_v = 2;
  Eigen::MatrixXcd a(1, 2);
  a << Complex(1, 0), Complex(0, 2);
  s.coefficients = {{LatticePoint{0}, a}, {LatticePoint{3}, a * 0.5}};
  const auto r = symbol_rank_dimension(s, MultiplierSet::symmetric(1.0), 32);
  EXPECT_LE(r.max_rank, 1);
  EXPECT_TRUE(r.injectivity_impossible);
}

TEST(SymbolRank, IdentityGivesMeasure) {
  FiniteTypeSymbol s;
  s.coefficients = {{LatticePoint{0}, Eigen::MatrixXcd::Identity(1, 1)}};
  for (double m : {0.25, 0.5, 1.0}) {
    const auto r = symbol_rank_dimension(s, MultiplierSet::symmetric(m), 64);
    EXPECT_NEAR(r.image_dimension, m, 1e-12);
    EXPECT_EQ(r.min_rank, 1);
    EXPECT_FALSE(r.injectivity_impossible);
  }
}

TEST(SymbolRank, ShiftPairHasRankOne) {
  FiniteTypeSymbol s;
  s.dim_vprime = 2;
  Eigen::MatrixXcd a0 = Eigen::MatrixXcd::Zero(2, 1), a1 = Eigen::MatrixXcd::Zero(2, 1);
  a0(0, 0) = 1;
  a1(1, 0) = 1;
  s.coefficients = {{LatticePoint{0}, a0}, {LatticePoint{1}, a1}};
  const auto r = symbol_rank_dimension(s, MultiplierSet::symmetric(1.0), 64);
  // Oracle: |S(theta)|^2 = 1 + |e^{2 pi i theta}|^2 = 2 at every grid point.
  for (int i = 0; i < 64; ++i) {
    const double th[] = {i / 64.0};
    EXPECT_NEAR(s.evaluate(th).norm(), std::sqrt(2.0), 1e-14);
  }
  EXPECT_EQ(r.min_rank, 1);
  EXPECT_EQ(r.max_rank, 1);
  EXPECT_EQ(r.grid_points_in_e, 64);
  EXPECT_DOUBLE_EQ(r.image_dimension, 1.0);
}

TEST(SymbolRank, Errors) {
  FiniteTypeSymbol s;
  s.coefficients = {{LatticePoint{0}, Eigen::MatrixXcd::Identity(2, 2)}};
  EXPECT_THROW((void)symbol_rank_dimension(s, MultiplierSet::symmetric(1.0), 64), Error);
  s.coefficients = {{LatticePoint{0}, Eigen::MatrixXcd::Identity(1, 1)}};
  EXPECT_THROW((void)symbol_rank_dimension(s, MultiplierSet::symmetric(1.0), 8), Error);
}

TEST(Quasimode, InequalityHolds) {
  for (double m : {0.25, 0.5}) {
    const auto samples = quasimode_check(MultiplierSet::symmetric(m), FiniteSubset::interval(-40, 40), 25);
    ASSERT_EQ(samples.size(), 25u);
    for (auto& s : samples) {
      EXPECT_TRUE(s.holds) << "lambda=" << s.lambda << " delta=" << s.delta;
      // delta^2 is at most the full outside mass lambda (1 - lambda).
      EXPECT_LE(s.delta * s.delta, s.lambda * (1 - s.lambda) + 1e-9);
    }
  }
}
