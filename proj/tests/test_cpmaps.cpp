#include <gtest/gtest.h>

#include <variant>

#include "cpmasa/cpmaps.hpp"

using namespace cpmasa;

TEST(KrausMap, RejectsBadFamilies) {
  EXPECT_THROW(KrausMap(std::vector<Matrix>{}), DimensionMismatch);
  EXPECT_THROW(KrausMap({Matrix::Zero(2, 2), Matrix::Zero(3, 3)}), DimensionMismatch);
  EXPECT_THROW(KrausMap({Matrix::Zero(2, 3)}), DimensionMismatch);
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = NAN;
  EXPECT_THROW(KrausMap({bad}), NumericalFailure);
}

TEST(KrausMap, ApplyMatchesSuperoperator) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const Index d = 2 + static_cast<Index>(seed % 3);
    const KrausMap t = random_kraus(rng, d, 1 + static_cast<Index>(seed % 3));
    const Matrix x = random_ginibre(rng, d, d);
    EXPECT_LE((vec(t.apply(x)) - t.superoperator() * vec(x)).norm(), 1e-11);
  }
}

TEST(KrausMap, SelfAdjointInputsGiveSelfAdjointOutputs) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const KrausMap t = random_kraus(rng, 3, 2);
    const Matrix y = t.apply(random_hermitian(rng, 3));
    EXPECT_LE((y - y.adjoint()).norm(), 1e-12);
  }
}

TEST(Choi, PositiveSemidefinite) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const Index d = 2 + static_cast<Index>(seed % 3);
    const KrausMap t = random_kraus(rng, d, 2);
    const Matrix c = choi_matrix(t);
    const double lmin = hermitian_eig(c, Tolerance{1e-9, 1e-9}).values.minCoeff();
    EXPECT_GE(lmin, -static_cast<double>(d * d) * 1e-9 * (1.0 + c.norm()));
  }
}

TEST(Choi, IdentityChannelIsRankOne) {
  const Matrix c = choi_matrix(KrausMap::identity(2));
  EXPECT_EQ(numerical_rank(c, Tolerance{}), 1);
}

TEST(MinimalKraus, PreservesMapAndReducesToChoiRank) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const Index d = 2 + static_cast<Index>(seed % 3);
    // four operators in a two-dimensional span
    const KrausMap base = random_kraus(rng, d, 2);
    std::vector<Matrix> ops = base.operators();
    ops.push_back(ops[0] + 2.0 * ops[1]);
    ops.push_back(kI * ops[1]);
    const KrausMap t(ops);
    const KrausMap m = minimal_kraus(t);
    EXPECT_EQ(m.size(), 2u);
    const Matrix s = t.superoperator();
    EXPECT_LE((s - m.superoperator()).norm(), 10.0 * 1e-9 * (1.0 + s.norm()));
  }
}

TEST(MinimalKraus, ZeroMapGivesOneZeroOperator) {
  const KrausMap m = minimal_kraus(KrausMap({Matrix::Zero(3, 3)}));
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].norm(), 0.0);
}

TEST(KrausTransform, MixedFamiliesAreRelatedByTheirMixingMatrix) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const Index d = 2 + static_cast<Index>(seed % 2);
    const KrausMap t = random_kraus(rng, d, 2);
    const Matrix w = random_unitary(rng, 2);
    std::vector<Matrix> s_ops;
    for (Index j = 0; j < 2; ++j) s_ops.push_back(w(j, 0) * t[0] + w(j, 1) * t[1]);
    const KrausMap s(s_ops);
    const auto r = kraus_transform(t, s);
    ASSERT_TRUE(std::holds_alternative<DecompositionTransform>(r));
    const Matrix& v = std::get<DecompositionTransform>(r).v;
    // two minimal decompositions: V is unitary
    EXPECT_LE((v.adjoint() * v - Matrix::Identity(2, 2)).norm(), 1e-9);
    EXPECT_LE((v * v.adjoint() - Matrix::Identity(2, 2)).norm(), 1e-9);
    for (Index j = 0; j < 2; ++j) {
      Matrix rebuilt = v(j, 0) * t[0] + v(j, 1) * t[1];
      EXPECT_LE((rebuilt - s[static_cast<std::size_t>(j)]).norm(), 1e-9);
    }
    // equal spans
    std::vector<Matrix> both = t.operators();
    both.insert(both.end(), s_ops.begin(), s_ops.end());
    EXPECT_EQ(span_rank(both), span_rank(t.operators()));
    EXPECT_EQ(span_rank(both), span_rank(s_ops));
  }
}

TEST(KrausTransform, DifferentMapsAreInequivalent) {
  Rng rng(2);
  const auto r = kraus_transform(random_kraus(rng, 2, 2), random_kraus(rng, 2, 2));
  ASSERT_TRUE(std::holds_alternative<Inequivalent>(r));
  EXPECT_GT(std::get<Inequivalent>(r).distance, 1e-3);
}

TEST(Unital, IsometryEnsembleIsUnital) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const KrausMap t = random_unital_cp(rng, 2 + static_cast<Index>(seed % 3), 3);
    EXPECT_TRUE(is_unital(t).holds);
  }
  Rng rng(1);
  EXPECT_FALSE(is_unital(random_kraus(rng, 2, 2)).holds);
}

TEST(Conjugated, ActsAsConjugatedMap) {
  Rng rng(4);
  const KrausMap t = random_kraus(rng, 3, 2);
  const Matrix u = random_unitary(rng, 3);
  const Matrix x = random_ginibre(rng, 3, 3);
  const KrausMap c = conjugated(t, u);
  EXPECT_LE((c.apply(x) - u * t.apply(u.adjoint() * x * u) * u.adjoint()).norm(), 1e-12);
}

TEST(SuperoperatorMap, AdjointIsHilbertSchmidtAdjoint) {
  Rng rng(8);
  const KrausMap t = random_kraus(rng, 3, 2);
  const Superoperator s = as_superoperator(t);
  const Matrix x = random_ginibre(rng, 3, 3);
  const Matrix y = random_ginibre(rng, 3, 3);
  const cd lhs = (y.adjoint() * s.apply(x)).trace();
  const cd rhs = (s.apply_adjoint(y).adjoint() * x).trace();
  EXPECT_LE(std::abs(lhs - rhs), 1e-11);
  // adjoint of a Kraus map is X ↦ Σ L X L*
  Matrix direct = Matrix::Zero(3, 3);
  for (const Matrix& l : t.operators()) direct += l * y * l.adjoint();
  EXPECT_LE((s.apply_adjoint(y) - direct).norm(), 1e-11);
}
