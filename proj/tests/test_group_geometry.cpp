#include <gtest/gtest.h>

#include "amenable/group_geometry.hpp"
#include "oracles.hpp"

using namespace amenable;

namespace {

FiniteSubset Z(std::initializer_list<Coord> pts) {
  return FiniteSubset::from_flat(1, std::vector<Coord>(pts));
}

}  // namespace

TEST(LatticePoint, ArithmeticAndOrder) {
  LatticePoint a{1, -2}, b{3, 4};
  EXPECT_EQ(a + b, (LatticePoint{4, 2}));
  EXPECT_EQ(b - a, (LatticePoint{2, 6}));
  EXPECT_EQ(-a, (LatticePoint{-1, 2}));
  EXPECT_LT(a, b);
  EXPECT_TRUE(LatticePoint::origin(3).is_origin());
  EXPECT_EQ(a.to_string(), "(1,-2)");
}

TEST(FiniteSubset, DeduplicatesAndSorts) {
  FiniteSubset s(1, {LatticePoint{3}, LatticePoint{-1}, LatticePoint{3}, LatticePoint{0}});
  EXPECT_EQ(s.size(), 3u);
  EXPECT_EQ(s, Z({-1, 0, 3}));
  EXPECT_EQ(s.index_of(LatticePoint{3}.coords()), 2u);
  EXPECT_FALSE(s.contains(LatticePoint{1}));
  EXPECT_EQ(s.translated(LatticePoint{2}), Z({1, 2, 5}));
  EXPECT_EQ(s.negated(), Z({-3, 0, 1}));
}

TEST(FiniteSubset, DimensionMismatchIsRejected) {
  FiniteSubset a = FiniteSubset::interval(0, 3);
  FiniteSubset b = Box::cube(2, 0, 1).to_subset();
  try {
    (void)set_union(a, b);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::dimension_mismatch);
  }
}

TEST(FiniteSubset, SetOperationsMatchStdSet) {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    FiniteSubset a = oracle::random_subset(rng, -10, 10, 0.4);
    FiniteSubset b = oracle::random_subset(rng, -10, 10, 0.4);
    auto sa = oracle::to_set(a), sb = oracle::to_set(b);
    oracle::PtSet u = sa, i, d;
    u.insert(sb.begin(), sb.end());
    for (auto& p : sa) (sb.count(p) ? i : d).insert(p);
    EXPECT_EQ(oracle::to_set(set_union(a, b)), u);
    EXPECT_EQ(oracle::to_set(set_intersection(a, b)), i);
    EXPECT_EQ(oracle::to_set(set_difference(a, b)), d);
    EXPECT_EQ(are_disjoint(a, b), i.empty());
    EXPECT_EQ(a.subset_of(b), d.empty());
  }
}

TEST(Boundary, WorkedExamplesInZ) {
  const FiniteSubset omega = FiniteSubset::interval(0, 4), f = Z({0, 1});
  EXPECT_EQ(boundary_outer(omega, f), Z({-1}));
  EXPECT_EQ(boundary_inner(omega, f), Z({4}));
  EXPECT_EQ(boundary_full(omega, f), Z({-1, 4}));
  EXPECT_EQ(interior(omega, f), FiniteSubset::interval(0, 3));
  EXPECT_EQ(closure(omega, f), FiniteSubset::interval(-1, 4));
  EXPECT_EQ(alpha(omega, f), Rational(2, 5));
  EXPECT_EQ(boundary_outer(omega.translated(LatticePoint{7}), f), Z({6}));
  EXPECT_EQ(boundary_inner(omega, Z({-1, 0, 1})), Z({0, 4}));
}

TEST(Boundary, TrivialTile) {
  const FiniteSubset omega = Z({-3, 0, 2, 5}), f = Z({0});
  EXPECT_TRUE(boundary_outer(omega, f).empty());
  EXPECT_TRUE(boundary_full(omega, f).empty());
  EXPECT_EQ(interior(omega, f), omega);
  EXPECT_EQ(closure(omega, f), omega);
  EXPECT_EQ(alpha(omega, f), Rational(0));
}

TEST(Boundary, SquareWithCornerTile) {
  const FiniteSubset omega = Box::cube(2, 0, 4).to_subset();
  const FiniteSubset f(2, {LatticePoint{0, 0}, LatticePoint{1, 0}, LatticePoint{0, 1}});
  const FiniteSubset b = boundary_full(omega, f);
  EXPECT_EQ(b.size(), 19u);
  EXPECT_EQ(oracle::to_set(b).size(),
            oracle::outer(oracle::to_set(omega), oracle::to_set(f)).size() +
                oracle::inner(oracle::to_set(omega), oracle::to_set(f)).size());
}

TEST(Boundary, OriginMissingIsAnError) {
  try {
    (void)boundary_outer(FiniteSubset::interval(0, 4), Z({1, 2}));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::origin_missing);
  }
}

TEST(Boundary, AlphaOfEmptyOmegaIsAnError) {
  try {
    (void)alpha(FiniteSubset(1), Z({0}));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::empty_set);
  }
}

TEST(Boundary, MatchesEnumerationOracleAndIdentities) {
  Rng rng(5);
  for (int t = 0; t < 300; ++t) {
    const FiniteSubset omega = oracle::random_subset(rng, 0, 11, 0.5);
    const FiniteSubset f = oracle::random_tile(rng, 3, 0.3);
    const auto so = oracle::to_set(omega), sf = oracle::to_set(f);
    const auto out = boundary_outer(omega, f), in = boundary_inner(omega, f);
    ASSERT_EQ(oracle::to_set(out), oracle::outer(so, sf));
    ASSERT_EQ(oracle::to_set(in), oracle::inner(so, sf));
    EXPECT_TRUE(are_disjoint(out, in));
    EXPECT_EQ(boundary_full(omega, f), set_union(out, in));
    EXPECT_EQ(interior(omega, f), set_difference(omega, in));
    EXPECT_EQ(closure(omega, f), set_union(omega, out));
    EXPECT_EQ(alpha(omega, f), Rational(static_cast<std::int64_t>(out.size() + in.size()),
                                        static_cast<std::int64_t>(omega.size())));
  }
}

TEST(Boundary, TwoDimensionalOracle) {
  Rng rng(8);
  for (int t = 0; t < 40; ++t) {
    std::vector<Coord> flat;
    for (Coord x = 0; x < 5; ++x)
      for (Coord y = 0; y < 5; ++y)
        if (rng.coin(0.6)) flat.insert(flat.end(), {x, y});
    if (flat.empty()) flat = {0, 0};
    const FiniteSubset omega = FiniteSubset::from_flat(2, flat);
    std::vector<Coord> ff{0, 0};
    for (Coord x = -1; x <= 1; ++x)
      for (Coord y = -1; y <= 1; ++y)
        if (rng.coin(0.3)) ff.insert(ff.end(), {x, y});
    const FiniteSubset f = FiniteSubset::from_flat(2, ff);
    EXPECT_EQ(oracle::to_set(boundary_outer(omega, f)), oracle::outer(oracle::to_set(omega), oracle::to_set(f)));
    EXPECT_EQ(oracle::to_set(boundary_inner(omega, f)), oracle::inner(oracle::to_set(omega), oracle::to_set(f)));
  }
}

TEST(Alpha, MonotoneInTheTile) {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const FiniteSubset omega = oracle::random_subset(rng, 0, 12, 0.5);
    const FiniteSubset f = oracle::random_tile(rng, 4, 0.4);
    // Random sub-tile that keeps the origin.
    std::vector<Coord> sub{0};
    for (std::size_t i = 0; i < f.size(); ++i)
      if (rng.coin()) sub.push_back(f[i][0]);
    const FiniteSubset f_small = FiniteSubset::from_flat(1, sub);
    EXPECT_LE(alpha(omega, f_small), alpha(omega, f));
    EXPECT_TRUE(boundary_full(omega, f_small).subset_of(boundary_full(omega, f)));
  }
}

TEST(Alpha, TranslationInvariant) {
  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    const FiniteSubset omega = oracle::random_subset(rng, -6, 6, 0.5);
    const FiniteSubset f = oracle::random_tile(rng, 3, 0.4);
    const LatticePoint g{rng.uniform_int(-1000, 1000)};
    EXPECT_EQ(alpha(omega.translated(g), f), alpha(omega, f));
  }
}

TEST(Alpha, CenteredIntervalsClosedForm) {
  Rational prev(2);
  for (Coord i = 1; i <= 40; ++i) {
    const Rational a = alpha(FiniteSubset::interval(-i, i), Z({0, 1}));
    EXPECT_EQ(a, Rational(2, 2 * i + 1));
    EXPECT_LT(a, prev);
    prev = a;
  }
}

TEST(Alpha, BoxClosedFormMatchesGeneral) {
  Rng rng(21);
  for (int t = 0; t < 150; ++t) {
    const std::size_t d = 1 + static_cast<std::size_t>(rng.uniform_int(0, 2));
    std::vector<Coord> lo(d), hi(d), flo(d), fhi(d);
    for (std::size_t k = 0; k < d; ++k) {
      lo[k] = rng.uniform_int(-5, 5);
      hi[k] = lo[k] + rng.uniform_int(0, d == 3 ? 4 : 8);
      flo[k] = -rng.uniform_int(0, 2);
      fhi[k] = rng.uniform_int(0, 3);
    }
    const Box om{lo, hi}, f{flo, fhi};
    EXPECT_EQ(alpha_boxes(om, f), alpha(om.to_subset(), f.to_subset())) << "d=" << d;
  }
}

TEST(Folner, Families) {
  FolnerSpec c;
  EXPECT_EQ(folner_set(c, 3), FiniteSubset::interval(-3, 3));
  c.dim = 2;
  EXPECT_EQ(folner_set(c, 2).size(), 25u);
  FolnerSpec s{FolnerFamily::shifted_box};
  EXPECT_EQ(folner_set(s, 3), FiniteSubset::interval(0, 6));
  FolnerSpec e{FolnerFamily::eccentric_rectangle, 2, 3};
  const Box b = folner_box(e, 2);
  EXPECT_EQ(b.side(0), 7);
  EXPECT_EQ(b.side(1), 3);
  EXPECT_EQ(folner_index_for_size(FolnerSpec{}, 1025), 512);
  try {
    (void)folner_index_for_size(FolnerSpec{}, 1024);
    FAIL() << "even sizes are not centered boxes";
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), Errc::index_out_of_range);
  }
  try {
    (void)folner_set(FolnerSpec{}, 0);
    FAIL() << "index 0 is outside the family";
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), Errc::index_out_of_range);
  }
}

TEST(Folner, CenteredBoxesIncreaseAndDecay) {
  for (std::size_t d : {1u, 2u}) {
    FolnerSpec spec;
    spec.dim = d;
    const FiniteSubset f = Box::cube(d, -1, 1).to_subset();
    Rational prev(100);
    for (std::int64_t i = 1; i <= 12; ++i) {
      EXPECT_TRUE(folner_set(spec, i).subset_of(folner_set(spec, i + 1)));
      const Rational a = alpha(folner_set(spec, i), f);
      EXPECT_LE(a, prev);
      prev = a;
    }
    EXPECT_LT(to_double(alpha_boxes(folner_box(spec, 2000), *as_box(f))), 0.01);
  }
}
