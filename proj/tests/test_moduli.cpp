#include <gtest/gtest.h>

#include <map>
#include <set>

#include "support.hpp"

using namespace k3;

namespace {

std::vector<oracle::Mat> formula_mats(const FiberFormulaResult& r) {
  std::vector<oracle::Mat> out;
  for (const auto& pt : r.points) out.push_back(support::to_mat(pt.subspace.subspace()));
  std::sort(out.begin(), out.end());
  return out;
}

// dim(K+ cap phi K+ cap N_0)
std::size_t base_meet_dim(const CharacteristicSubspace& Kp, const PlusSpace& P) {
  const Field& F = Kp.field();
  FieldMatrix B(0, P.full.dim());
  for (std::size_t i = 0; i < P.base.dim(); ++i) {
    std::vector<code_t> e(P.full.dim(), 0);
    e[i] = 1;
    B.append_row(e);
  }
  const Subspace base(P.full, F, std::move(B));
  const Subspace& K = Kp.subspace();
  return intersect(intersect(K, phi(K)), base).dim();
}

CharacteristicSubspace with_e(const CharacteristicSubspace& K0, const PlusSpace& P) {
  FieldMatrix M(0, P.full.dim());
  for (std::size_t i = 0; i < K0.subspace().dim(); ++i) {
    std::vector<code_t> r(P.full.dim(), 0);
    const auto row = K0.subspace().basis().row(i);
    std::copy(row.begin(), row.end(), r.begin());
    M.append_row(r);
  }
  std::vector<code_t> e(P.full.dim(), 0);
  e[P.e_index] = 1;
  M.append_row(e);
  return CharacteristicSubspace::make(Subspace(P.full, K0.field(), std::move(M)), P.sigma0() + 1);
}

}  // namespace

TEST(Moduli, PlusSpaceStructure) {
  const auto P = build_plus_space(standard_N0(5, 2));
  EXPECT_EQ(P.full.dim(), 6u);
  EXPECT_EQ(P.sigma0(), 2);
  EXPECT_EQ(P.d_index, 4u);
  EXPECT_EQ(P.e_index, 5u);
  EXPECT_EQ(P.full.gram(4, 5), 1);
  EXPECT_EQ(P.full.gram(5, 4), 1);
  EXPECT_EQ(P.full.gram(4, 4), 0);
  EXPECT_EQ(P.full.gram(5, 5), 0);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(P.full.gram(i, 4), 0);
    EXPECT_EQ(P.full.gram(i, 5), 0);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(P.full.gram(i, j), P.base.gram(i, j));
  }
}

TEST(Moduli, SectionExamples) {
  const auto V = standard_N0(3, 1);
  const auto P = build_plus_space(V);
  const auto F = make_field(3, 2);
  const auto pts = enumerate_characteristic(V, F, 1);
  ASSERT_EQ(pts.size(), 2u);
  const auto S = sigma_section(pts[0], P);
  FieldMatrix M(0, 4);
  M.append_row(std::vector<code_t>{1, 3, 0, 0});
  M.append_row(std::vector<code_t>{0, 0, 1, 0});
  EXPECT_EQ(S.subspace(), Subspace(P.full, F, std::move(M)));
  EXPECT_EQ(S.sigma0(), 2);
  // D is phi-fixed, so the phi-closure of K (+) <D> misses E
  for (const auto& K : pts) EXPECT_FALSE(sigma_section(K, P).strict());
  for (const auto& K : enumerate_characteristic(standard_N0(3, 1), make_field(3, 4), 1))
    EXPECT_FALSE(sigma_section(K, P).strict());
}

TEST(Moduli, PointAtInfinityProjectsToBase) {
  for (auto [p, s, n] : std::vector<std::tuple<int, int, int>>{{3, 1, 2}, {3, 2, 2}, {5, 1, 2}, {3, 1, 4}}) {
    const auto V = standard_N0(p, s);
    const auto P = build_plus_space(V);
    for (const auto& K : enumerate_characteristic(V, make_field(p, n), s)) EXPECT_EQ(gamma_plus(with_e(K, P), P), K);
  }
}

TEST(Moduli, SectionIdentity) {
  const std::map<std::tuple<int, int, int>, std::size_t> expected{
      {{3, 1, 2}, 2}, {{3, 1, 4}, 2}, {{3, 2, 2}, 20}, {{3, 2, 4}, 164},
      {{5, 1, 2}, 2}, {{5, 1, 4}, 2}, {{5, 2, 2}, 52}, {{5, 2, 4}, 1252}};
  for (int p : {3, 5})
    for (int s : {1, 2})
      for (int n = 1; n <= 4; ++n) {
        const auto V = standard_N0(p, s);
        const auto P = build_plus_space(V);
        const auto pts = enumerate_characteristic(V, make_field(p, n), s);
        const auto it = expected.find({p, s, n});
        EXPECT_EQ(pts.size(), it == expected.end() ? 0u : it->second) << p << "," << s << "," << n;
        for (const auto& K : pts) EXPECT_EQ(gamma_plus(sigma_section(K, P), P), K);
      }
}

TEST(Moduli, FibersOverF9AreProjectiveLines) {
  const auto V = standard_N0(3, 1);
  const auto P = build_plus_space(V);
  const auto F = make_field(3, 2);
  const auto base = enumerate_characteristic(V, F, 1);
  const auto all = enumerate_characteristic(P.full, F, 2);
  ASSERT_EQ(base.size(), 2u);
  ASSERT_EQ(all.size(), 20u);
  std::set<oracle::Mat> seen;
  for (const auto& K0 : base) {
    const auto brute = fiber_enumerate(K0, P, F);
    EXPECT_EQ(brute.size(), 10u);
    const auto r = fiber_formula(K0, P, F);
    EXPECT_FALSE(r.extended);
    EXPECT_EQ(formula_mats(r), support::to_mats(brute));
    for (const auto& K : brute) EXPECT_TRUE(seen.insert(support::to_mat(K.subspace())).second);
  }
  EXPECT_EQ(seen.size(), all.size());
}

TEST(Moduli, FiberFormulaParametrization) {
  for (auto [p, n] : std::vector<std::pair<int, int>>{{3, 2}, {5, 2}, {3, 4}}) {
    const auto V = standard_N0(p, 1);
    const auto P = build_plus_space(V);
    const auto F = make_field(p, n);
    for (const auto& K0 : enumerate_characteristic(V, F, 1)) {
      const auto r = fiber_formula(K0, P, F);
      ASSERT_EQ(r.points.size(), F->order() + 1);
      EXPECT_EQ(r.points[0].kind, FiberPoint::Kind::AtInfinity);
      EXPECT_EQ(r.points[0].subspace, with_e(K0, P));
      ASSERT_EQ(r.points[1].kind, FiberPoint::Kind::Affine);
      EXPECT_TRUE(r.points[1].lambda->is_zero());
      EXPECT_EQ(r.points[1].subspace, sigma_section(K0, P));
      std::set<oracle::Mat> distinct;
      for (const auto& pt : r.points) distinct.insert(support::to_mat(pt.subspace.subspace()));
      EXPECT_EQ(distinct.size(), r.points.size());
      // c^{p+1} <v, phi v> = 1
      const auto c = r.normalizer;
      auto cp1 = c;
      for (int i = 0; i < p; ++i) cp1 = cp1 * c;
      EXPECT_EQ((cp1 * FieldElement(r.working_field, (*embedding(F, r.working_field))(r.pairing.code()))).code(), 1u);
      EXPECT_EQ(P.base.form(*r.working_field, r.v, phi(*r.working_field, r.v)), 1u);
    }
  }
}

TEST(Moduli, FibersOverF25AndF81MatchBruteForce) {
  for (auto [p, n, size] : std::vector<std::tuple<int, int, std::size_t>>{{5, 2, 26}, {3, 4, 82}}) {
    const auto V = standard_N0(p, 1);
    const auto P = build_plus_space(V);
    const auto F = make_field(p, n);
    for (const auto& K0 : enumerate_characteristic(V, F, 1)) {
      const auto brute = fiber_enumerate(K0, P, F);
      EXPECT_EQ(brute.size(), size);
      EXPECT_EQ(formula_mats(fiber_formula(K0, P, F)), support::to_mats(brute));
    }
  }
}

TEST(Moduli, FiberOfRationalBaseOverExtension) {
  // F_9-points lifted to F_81 need no further extension
  const auto V = standard_N0(3, 1);
  const auto P = build_plus_space(V);
  const auto F81 = make_field(3, 4);
  for (const auto& K0 : enumerate_characteristic(V, make_field(3, 2), 1)) {
    const auto r = fiber_formula(K0, P, F81);
    EXPECT_FALSE(r.extended);
    EXPECT_EQ(r.points.size(), 82u);
    EXPECT_EQ(fiber_enumerate(K0, P, F81).size(), 82u);
  }
}

TEST(Moduli, EmptyFibersOverF3) {
  const auto V = standard_N0(3, 1);
  const auto P = build_plus_space(V);
  const auto F3 = make_field(3, 1);
  EXPECT_TRUE(enumerate_characteristic(V, F3, 1).empty());
  EXPECT_TRUE(enumerate_characteristic(P.full, F3, 2).empty());
}

// Base of Artin invariant 2 over F_{p^2}: the brute-force fiber is larger than
// the p^2 + 1 points of the parametrization.  Values frozen from an
// independent enumeration.
TEST(Moduli, SigmaTwoBaseFibersExceedTheParametrization) {
  const auto V = standard_N0(3, 2);
  const auto P = build_plus_space(V);
  const auto F = make_field(3, 2);
  const auto base = enumerate_characteristic(V, F, 2);
  ASSERT_EQ(base.size(), 20u);
  std::size_t total = 0, inside = 0;
  for (const auto& K0 : base) {
    const auto brute = fiber_enumerate(K0, P, F);
    EXPECT_EQ(brute.size(), 28u);
    total += brute.size();
    const auto r = fiber_formula(K0, P, F);
    ASSERT_EQ(r.points.size(), 10u);
    const auto bm = support::to_mats(brute);
    const auto fm = formula_mats(r);
    EXPECT_TRUE(std::includes(bm.begin(), bm.end(), fm.begin(), fm.end()));
    for (const auto& K : brute) {
      const bool in_formula = std::binary_search(fm.begin(), fm.end(), support::to_mat(K.subspace()));
      EXPECT_EQ(base_meet_dim(K, P) == 1, in_formula);
      inside += in_formula;
    }
  }
  EXPECT_EQ(total, 560u);
  EXPECT_EQ(inside, 200u);
  EXPECT_EQ(total - inside, 360u);
}

TEST(Moduli, IntersectionDimensionOnSigmaTwoPlusSpace) {
  for (auto [p, n] : std::vector<std::pair<int, int>>{{3, 2}, {5, 2}, {3, 4}}) {
    const auto P = build_plus_space(standard_N0(p, 1));
    for (const auto& K : enumerate_characteristic(P.full, make_field(p, n), 2)) EXPECT_EQ(base_meet_dim(K, P), 0u);
  }
}

TEST(Moduli, CountsAndTower) {
  for (auto [p, s, n, c] : std::vector<std::tuple<int, int, int, std::uint64_t>>{
           {3, 1, 2, 2}, {3, 1, 4, 2}, {3, 2, 2, 20}, {5, 1, 2, 2}, {3, 2, 4, 164}, {5, 2, 2, 52}, {7, 1, 2, 2}}) {
    EXPECT_EQ(count_points(p, s, n), c);
    EXPECT_EQ(tower_prediction(p, s, n), c);
  }
  for (auto [p, s, n] : std::vector<std::tuple<int, int, int>>{{3, 1, 1}, {3, 1, 3}, {3, 2, 1}, {3, 2, 3}, {5, 1, 3}, {3, 3, 1}}) {
    EXPECT_EQ(count_points(p, s, n), 0u);
    EXPECT_EQ(tower_prediction(p, s, n), 0u);
  }
  EXPECT_EQ(tower_prediction(3, 3, 2), 200u);
  EXPECT_EQ(tower_prediction(5, 10, 2), 10859007357952ull);  // 2 * 26^9
  EXPECT_THROW(tower_prediction(3, 0, 2), InvalidInput);
  EXPECT_THROW(tower_prediction(3, 11, 2), InvalidInput);
  EXPECT_THROW(tower_prediction(3, 2, 0), InvalidInput);
  EXPECT_THROW(tower_prediction(3, 10, 8), InvalidInput);
  EXPECT_THROW(count_points(3, 1, 0), InvalidInput);
  EXPECT_THROW(count_points(3, 2, 4, EnumerationLimits{50}), GuardExceeded);
}

TEST(Moduli, CountsForSigmaThreeDisagreeWithTower) {
  EXPECT_EQ(count_points(3, 3, 2), 560u);
  EXPECT_EQ(tower_prediction(3, 3, 2), 200u);
  EXPECT_EQ(count_points(5, 3, 2), 6552u);
  EXPECT_EQ(tower_prediction(5, 3, 2), 1352u);
}

TEST(Moduli, IsogenyArithmetic) {
  EXPECT_EQ(isogeny_height(10, 10), 36);
  EXPECT_EQ(isogeny_height(1, 1), 0);
  EXPECT_EQ(isogeny_height(3, 7), 16);
  for (int s = 1; s <= 10; ++s) {
    EXPECT_EQ(kummer_height(s), 2 * s - 2);
    EXPECT_EQ(isogeny_height(s, 1), kummer_height(s));
  }
  for (int s = 2; s <= 10; ++s) {
    const auto st = corollary_step(s);
    EXPECT_EQ(st.sigma0, s - 1);
    EXPECT_EQ(st.height, 2);
  }
  EXPECT_THROW(corollary_step(1), InvalidInput);
  EXPECT_THROW(isogeny_height(0, 3), InvalidInput);
  EXPECT_THROW(isogeny_height(3, 11), InvalidInput);
  EXPECT_THROW(kummer_height(11), InvalidInput);
}

TEST(Moduli, MismatchedInputsAreRejected) {
  const auto V1 = standard_N0(3, 1);
  const auto P1 = build_plus_space(V1);
  const auto P2 = build_plus_space(standard_N0(3, 2));
  const auto F = make_field(3, 2);
  const auto K0 = enumerate_characteristic(V1, F, 1).front();
  EXPECT_THROW(sigma_section(K0, P2), FieldMismatch);
  EXPECT_THROW(gamma_plus(K0, P1), FieldMismatch);
  EXPECT_THROW(fiber_formula(K0, P1, make_field(3, 3)), FieldMismatch);
  EXPECT_THROW(fiber_enumerate(sigma_section(K0, P1), P1, F), FieldMismatch);
}
