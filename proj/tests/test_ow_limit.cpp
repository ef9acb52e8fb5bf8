#include <gtest/gtest.h>

#include <cmath>

#include "amenable/ow_limit.hpp"

using namespace amenable;

namespace {

FiniteSubset Z(std::initializer_list<Coord> pts) { return FiniteSubset::from_flat(1, std::vector<Coord>(pts)); }

const std::vector<double> kEps{0.2, 0.1, 0.05};

}  // namespace

TEST(Hypotheses, Volume) {
  const auto r = check_hypotheses(volume_function(), SamplePlan{});
  EXPECT_TRUE(r.all());
  EXPECT_TRUE(r.counterexamples.empty());
  EXPECT_GT(r.checks, 0u);
}

TEST(Hypotheses, BoundaryInOneAndTwoDimensions) {
  EXPECT_TRUE(check_hypotheses(boundary_function(Z({-1, 0, 2})), SamplePlan{}).all());
  SamplePlan p;
  p.dim = 2;
  p.extent = 4;
  p.samples = 25;
  const auto r = check_hypotheses(boundary_function(Box::cube(2, 0, 1).to_subset()), p);
  EXPECT_TRUE(r.all()) << (r.counterexamples.empty() ? "" : r.counterexamples[0].detail);
}

TEST(Hypotheses, Spectral) {
  for (double m : {0.25, 0.5}) {
    SamplePlan p;
    p.eps_grid = {0.9, 0.6, 0.3, 0.1};
    p.seed = 3;
    const auto r = check_hypotheses(spectral_function(MultiplierSet::symmetric(m)), p);
    EXPECT_TRUE(r.all()) << (r.counterexamples.empty() ? "" : r.counterexamples[0].detail);
  }
}

TEST(Hypotheses, SpectralConstantBelowOneHalfFails) {
  // Two singletons: each has eigenvalue 0.5; their union {0,1} has the
  // eigenvalue 0.5 + 1/pi > 0.8, so a(0.8, A u B) = 1 while a(0.8 c, A) = 0
  // for every c > 5/8.
  OWFunction f = spectral_function(MultiplierSet::symmetric(0.5));
  const FiniteSubset a = Z({0}), b = Z({1});
  EXPECT_EQ(f(0.8, set_union(a, b)), 1.0);
  EXPECT_EQ(f(0.8 / std::sqrt(2.0), a) + f(0.8 / std::sqrt(2.0), b), 0.0);
  EXPECT_EQ(f(0.4, a) + f(0.4, b), 2.0);
}

TEST(Hypotheses, DetectsBrokenFunctions) {
  OWFunction shifted{"position", [](double, const FiniteSubset& o) { return static_cast<double>(std::abs(o[0][0])); },
                     1e9, 1.0};
  EXPECT_FALSE(check_hypotheses(shifted, SamplePlan{}).invariant);
  OWFunction increasing{"increasing", [](double e, const FiniteSubset& o) { return e * static_cast<double>(o.size()); },
                        1.0, 1.0};
  const auto r = check_hypotheses(increasing, SamplePlan{});
  EXPECT_FALSE(r.monotone);
  EXPECT_TRUE(r.sublinear);
  OWFunction square{"square",
                    [](double, const FiniteSubset& o) { return static_cast<double>(o.size() * o.size()); }, 1.0, 1.0};
  const auto s = check_hypotheses(square, SamplePlan{});
  EXPECT_FALSE(s.sublinear);
  EXPECT_FALSE(s.subadditive);
  for (auto& v : s.counterexamples) EXPECT_TRUE(v.hypothesis == 'c' || v.hypothesis == 'd');
}

TEST(Hypotheses, Deterministic) {
  OWFunction bad{"bad", [](double, const FiniteSubset& o) { return static_cast<double>(o.size() * o.size()); }, 1.0,
                 1.0};
  const auto a = check_hypotheses(bad, SamplePlan{}), b = check_hypotheses(bad, SamplePlan{});
  ASSERT_EQ(a.counterexamples.size(), b.counterexamples.size());
  for (std::size_t i = 0; i < a.counterexamples.size(); ++i)
    EXPECT_EQ(a.counterexamples[i].detail, b.counterexamples[i].detail);
}

TEST(Evaluator, RejectsNegativeAndNonFinite) {
  OWFunction neg{"neg", [](double, const FiniteSubset&) { return -1.0; }, 1.0, 1.0};
  OWFunction nan{"nan", [](double, const FiniteSubset&) { return std::nan(""); }, 1.0, 1.0};
  for (const auto* f : {&neg, &nan}) {
    try {
      (void)(*f)(0.1, Z({0}));
      FAIL();
    } catch (const Error& err) {
      EXPECT_EQ(err.code(), Errc::evaluator_failure);
      EXPECT_NE(std::string(err.what()).find(f->name), std::string::npos);
    }
  }
}

TEST(Limit, VolumeIsExactlyOne) {
  const auto est = estimate_limit(volume_function(), FolnerSpec{}, {4, 8, 16, 32}, kEps);
  for (auto& row : est.table) EXPECT_EQ(row.value, 1.0);
  EXPECT_EQ(est.extrapolated, 1.0);
  EXPECT_EQ(est.tail_oscillation, 0.0);
  EXPECT_TRUE(est.converged);
  ASSERT_EQ(est.table.size(), 12u);
  EXPECT_EQ(est.table[5].eps, 0.1);
  EXPECT_EQ(est.table[5].index, 8);
  EXPECT_EQ(est.table[5].size, 17u);
}

TEST(Limit, BoundaryDensityVanishes) {
  const auto est = estimate_limit(boundary_function(Z({0, 1})), FolnerSpec{}, {16, 64, 256, 1024}, kEps);
  EXPECT_LT(est.extrapolated, 0.01);
  EXPECT_DOUBLE_EQ(est.table.back().value, 2.0 / 2049);
  EXPECT_TRUE(est.converged);
  // Values decrease along the family for every eps.
  for (std::size_t e = 0; e < kEps.size(); ++e)
    for (std::size_t i = 1; i < 4; ++i) EXPECT_LT(est.table[e * 4 + i].value, est.table[e * 4 + i - 1].value);
}

TEST(Limit, SpectralApproachesMeasure) {
  for (double m : {0.25, 0.5}) {
    const auto est = estimate_limit(spectral_function(MultiplierSet::symmetric(m)), FolnerSpec{},
                                    {32, 64, 128, 256}, kEps);
    EXPECT_NEAR(est.extrapolated, m, 0.05) << "measure " << m;
    EXPECT_TRUE(est.converged);
    for (std::size_t e = 0; e < kEps.size(); ++e) EXPECT_LE(est.liminf[e], est.limsup[e]);
    // Smaller eps counts more eigenvalues.
    for (std::size_t e = 1; e < kEps.size(); ++e) EXPECT_GE(est.limsup[e], est.limsup[e - 1]);
  }
}

TEST(Limit, ParameterErrors) {
  const auto f = volume_function();
  const std::vector<double> asc{0.1, 0.2};
  EXPECT_THROW((void)estimate_limit(f, FolnerSpec{}, {4, 8}, asc), Error);
  EXPECT_THROW((void)estimate_limit(f, FolnerSpec{}, {8, 4}, kEps), Error);
  EXPECT_THROW((void)estimate_limit(f, FolnerSpec{}, {4, 4}, kEps), Error);
  EXPECT_THROW((void)estimate_limit(f, FolnerSpec{}, {}, kEps), Error);
}

TEST(Limit, EvaluatorFailureCarriesContext) {
  OWFunction bad{"bad", [](double, const FiniteSubset& o) { return o.size() > 10 ? -1.0 : 1.0; }, 1.0, 1.0};
  try {
    (void)estimate_limit(bad, FolnerSpec{}, {2, 8}, kEps);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), Errc::evaluator_failure);
    EXPECT_NE(std::string(err.what()).find("i=8"), std::string::npos);
  }
}

TEST(Limit, SizeCapPropagates) {
  try {
    (void)estimate_limit(spectral_function(MultiplierSet::symmetric(0.5)), FolnerSpec{}, {4, 3000}, kEps);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), Errc::size_cap);
  }
}

TEST(Independence, CenteredVersusShifted) {
  const FolnerSpec shifted{FolnerFamily::shifted_box};
  const auto r = sequence_independence(spectral_function(MultiplierSet::symmetric(0.5)), FolnerSpec{}, shifted,
                                       {32, 64, 128, 256}, kEps);
  EXPECT_TRUE(r.agree);
  EXPECT_LE(r.difference, 0.05);
  const auto v = sequence_independence(boundary_function(Z({0, 1})), FolnerSpec{}, shifted, {16, 64, 256}, kEps);
  EXPECT_TRUE(v.agree);
}

TEST(Independence, TwoDimensionalFamilies) {
  FolnerSpec centered;
  centered.dim = 2;
  const FolnerSpec ecc{FolnerFamily::eccentric_rectangle, 2, 3};
  const auto r = sequence_independence(boundary_function(Box::cube(2, 0, 1).to_subset()), centered, ecc,
                                       {8, 16, 32}, kEps);
  EXPECT_LT(r.first.extrapolated, 0.15);
  EXPECT_LT(r.second.extrapolated, 0.15);
  EXPECT_TRUE(r.agree);
}

TEST(Independence, IdenticalSpecsRejected) {
  EXPECT_THROW((void)sequence_independence(volume_function(), FolnerSpec{}, FolnerSpec{}, {4, 8}, kEps), Error);
}

TEST(Nested, MonotoneAndLipschitz) {
  const std::vector<double> grid{0.8, 0.5, 0.2};
  // Eigenvalue counts interlace under adding a point.
  for (const OWFunction& f : {volume_function(), spectral_function(MultiplierSet::symmetric(0.4))}) {
    const auto r = check_nested(f, FiniteSubset::interval(-5, 5), FiniteSubset::interval(-5, 6), grid);
    EXPECT_EQ(r.small.size(), grid.size());
    EXPECT_TRUE(r.holds) << f.name;
  }
  EXPECT_THROW(
      (void)check_nested(volume_function(), FiniteSubset::interval(0, 3), FiniteSubset::interval(1, 5), grid), Error);
}
