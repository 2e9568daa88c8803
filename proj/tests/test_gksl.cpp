#include <gtest/gtest.h>

#include <cmath>
#include <variant>

#include "cpmasa/corpus.hpp"
#include "cpmasa/gksl.hpp"
#include "ensembles.hpp"

using namespace cpmasa;

namespace {

// Independent evaluation of a generator from its definition.
Matrix direct_apply(const std::vector<Matrix>& ops, const Matrix& beta, const Matrix& x) {
  Matrix out = x * beta + beta.adjoint() * x;
  for (const Matrix& l : ops) out += l.adjoint() * x * l;
  return out;
}

Matrix random_isometry_matrix(Rng& rng, Index rows, Index cols) {
  return random_isometry(rng, rows, cols);
}

GkslGenerator random_minimal_generator(Rng& rng, Index d, Index n) {
  // traceless operators are independent of 1 generically
  std::vector<Matrix> ops;
  for (Index i = 0; i < n; ++i) {
    Matrix l = random_ginibre(rng, d, d);
    l -= (l.trace() / static_cast<double>(d)) * Matrix::Identity(d, d);
    ops.push_back(l);
  }
  return GkslGenerator(KrausMap(ops), random_ginibre(rng, d, d));
}

}  // namespace

TEST(Generator, ApplyMatchesSuperoperatorAndDefinition) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const Index d = 2 + static_cast<Index>(seed % 3);
    const GkslGenerator l(random_kraus(rng, d, 2), random_ginibre(rng, d, d));
    const Matrix x = random_ginibre(rng, d, d);
    EXPECT_LE((l.apply(x) - direct_apply(l.operators(), l.beta(), x)).norm(), 1e-11);
    EXPECT_LE((vec(l.apply(x)) - l.superoperator() * vec(x)).norm(), 1e-11);
  }
}

TEST(Generator, MarkovFormAnnihilatesIdentity) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const Index d = 2 + static_cast<Index>(seed % 3);
    const GkslGenerator l = random_markov_generator(rng, d, 2);
    EXPECT_LE(l.apply(Matrix::Identity(d, d)).norm(), 1e-11);
    const GkslGenerator g = generator_from_map(random_unital_cp(rng, d, 2));
    EXPECT_LE(g.apply(Matrix::Identity(d, d)).norm(), 1e-11);
  }
}

TEST(Generator, MarkovFormHamiltonianConvention) {
  // L(X) = i[X, h] when there is no CP part
  Rng rng(3);
  const Matrix h = random_hermitian(rng, 3);
  const GkslGenerator l = markov_form(KrausMap({Matrix::Zero(3, 3)}), h);
  const Matrix x = random_ginibre(rng, 3, 3);
  EXPECT_LE((l.apply(x) - kI * commutator(x, h)).norm(), 1e-12);
  EXPECT_LE((l.hamiltonian() - h).norm(), 1e-12);
  EXPECT_THROW(markov_form(KrausMap({Matrix::Zero(2, 2)}), random_ginibre(rng, 2, 2)),
               NotSelfAdjoint);
}

TEST(Generator, NonUnitalMapIsRejected) {
  Rng rng(1);
  EXPECT_THROW(generator_from_map(random_kraus(rng, 2, 2)), NotUnital);
}

TEST(Semigroup, CompositionLaw) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const GkslGenerator l = random_markov_generator(rng, 2 + static_cast<Index>(seed % 2), 2);
    for (double s : {0.1, 0.5, 1.0})
      for (double t : {0.1, 0.5, 1.0}) {
        const Matrix lhs = semigroup_at(l, s + t);
        EXPECT_LE((lhs - semigroup_at(l, s) * semigroup_at(l, t)).norm(), 1e-9 * lhs.norm());
      }
  }
}

TEST(Semigroup, MarkovSemigroupIsUnitalAndTimeMustBeNonnegative) {
  Rng rng(5);
  const GkslGenerator l = random_markov_generator(rng, 3, 2);
  const Matrix s = semigroup_at(l, 1.3);
  EXPECT_LE((s * vec(Matrix::Identity(3, 3)) - vec(Matrix::Identity(3, 3))).norm(), 1e-10);
  EXPECT_THROW(semigroup_at(l, -1.0), PreconditionFailed);
}

TEST(Equivalence, ReflexiveAndSymmetric) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const GkslGenerator l = random_minimal_generator(rng, 2, 2);
    const GkslGenerator k = random_minimal_generator(rng, 2, 2);
    const auto self = gksl_equivalent(l, l);
    ASSERT_TRUE(std::holds_alternative<TransformWitness>(self));
    const TransformWitness& w = std::get<TransformWitness>(self);
    EXPECT_LE((w.m_matrix - Matrix::Identity(2, 2)).norm(), 1e-9);
    EXPECT_LE(std::abs(w.gamma), 1e-9);
    const auto a = gksl_equivalent(l, k);
    const auto b = gksl_equivalent(k, l);
    ASSERT_TRUE(std::holds_alternative<Inequivalent>(a));
    ASSERT_TRUE(std::holds_alternative<Inequivalent>(b));
    EXPECT_NEAR(std::get<Inequivalent>(a).distance, std::get<Inequivalent>(b).distance, 1e-12);
  }
}

TEST(Equivalence, ForwardBackwardRoundTrip) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(derive_seed(101, seed));
    const Index d = 2 + static_cast<Index>(seed % 2);
    const Index n = 1 + static_cast<Index>(seed % 3);
    const Index nj = n + static_cast<Index>(seed % 2);
    const GkslGenerator l = random_minimal_generator(rng, d, n);
    ASSERT_TRUE(is_minimal(l));
    const Matrix m = random_isometry_matrix(rng, nj, n);
    Vector eta_prime(nj);
    for (Index j = 0; j < nj; ++j) eta_prime(j) = rng.complex_normal();
    const double h = rng.normal();
    const GkslGenerator k = gauge_transform(l, m, eta_prime, h);
    EXPECT_LE((l.superoperator() - k.superoperator()).norm(), 1e-9);

    const auto r = gksl_equivalent(l, k, Tolerance{1e-8, 1e-10});
    ASSERT_TRUE(std::holds_alternative<TransformWitness>(r)) << "seed " << seed;
    const TransformWitness& w = std::get<TransformWitness>(r);
    EXPECT_LE((w.m_matrix - m).norm(), 1e-8);
    EXPECT_LE((w.eta_prime - eta_prime).norm(), 1e-8);
    EXPECT_NEAR(w.h_scalar, h, 1e-8);
    EXPECT_LE(w.isometry_residual, 1e-8);
    EXPECT_LE(w.gamma_real_residual, 1e-8);
    EXPECT_LE(w.drift_residual, 1e-8);
    const GkslGenerator rebuilt = apply_gauge(l, w.m_matrix, w.eta_prime, w.gamma, w.eta);
    EXPECT_LE((rebuilt.superoperator() - l.superoperator()).norm(), 1e-8);
  }
}

TEST(Equivalence, ShiftedDriftIsInequivalent) {
  Rng rng(77);
  const GkslGenerator l = random_minimal_generator(rng, 3, 2);
  const GkslGenerator k(l.kraus(), l.beta() + 0.05 * Matrix::Identity(3, 3));
  const auto r = gksl_equivalent(l, k);
  ASSERT_TRUE(std::holds_alternative<Inequivalent>(r));
  // the shift adds 2·0.05·X, so the distance is 0.1·‖1_{d²}‖_F = 0.3
  EXPECT_NEAR(std::get<Inequivalent>(r).distance, 0.3, 1e-12);
}

TEST(Equivalence, NonMinimalFormsNeedTheCompositePath) {
  Rng rng(12);
  const GkslGenerator base = random_minimal_generator(rng, 2, 1);
  // {1, L_1, 1 + 2L_1} is dependent
  std::vector<Matrix> ops = base.operators();
  ops.push_back(Matrix::Identity(2, 2) + 2.0 * ops[0]);
  const GkslGenerator l(KrausMap(ops), base.beta());
  EXPECT_FALSE(is_minimal(l));
  EXPECT_THROW(gksl_equivalent(l, l), NotMinimal);
  const auto r = gksl_equivalent(l, l, Tolerance{}, false);
  ASSERT_TRUE(std::holds_alternative<TransformWitness>(r));
  const TransformWitness& w = std::get<TransformWitness>(r);
  EXPECT_FALSE(w.minimal_path);
  EXPECT_LE(w.kraus_residual, 1e-8);
  EXPECT_LE(w.drift_residual, 1e-8);
  const GkslGenerator rebuilt = apply_gauge(l, w.m_matrix, w.eta_prime, w.gamma, w.eta);
  EXPECT_LE((rebuilt.superoperator() - l.superoperator()).norm(), 1e-8);
}

TEST(Reduction, MinimalReductionReproducesGenerator) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const Index d = 2 + static_cast<Index>(seed % 2);
    std::vector<Matrix> ops = random_kraus(rng, d, 2).operators();
    ops.push_back(ops[0] - ops[1] + cd(0.3, -0.2) * Matrix::Identity(d, d));
    const GkslGenerator l(KrausMap(ops), random_ginibre(rng, d, d));
    const MinimalReduction red = minimal_reduction(l);
    EXPECT_EQ(red.operators.size(), 2u);
    const GkslGenerator m(KrausMap(red.operators), red.beta);
    EXPECT_LE((m.superoperator() - l.superoperator()).norm(), 1e-8);
    EXPECT_TRUE(is_minimal(m));
  }
}

TEST(CpPartSplit, ExampleTwoEightIsInfeasible) {
  const GkslGenerator l = ex2_8_generator();
  const SplitVerdict v = cp_part_split(l, Matrix::Identity(2, 2));
  EXPECT_FALSE(v.feasible);
  // η̄_1 + η̄_2·2 = 3 and η̄_1 + 2η̄_2 = 5: distance of (3, 5) from span{(1,1)}
  EXPECT_NEAR(v.residual, std::sqrt(2.0), 1e-12);
  EXPECT_FALSE(v.regauged.has_value());
}

TEST(CpPartSplit, FeasibleSplitRegaugesToTheSameGenerator) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const Index d = 2 + static_cast<Index>(seed % 3);
    // diagonal-preserving CP part plus scalar shifts, diagonal drift: feasible
    std::vector<Matrix> ks = ensembles::row_monomial_family(rng, d, 2);
    Vector eta(2);
    eta << rng.complex_normal(), rng.complex_normal();
    std::vector<Matrix> ls;
    Matrix beta = random_diagonal(rng, d);
    for (Index i = 0; i < 2; ++i) {
      ls.push_back(ks[static_cast<std::size_t>(i)] + eta(i) * Matrix::Identity(d, d));
      beta -= std::conj(eta(i)) * ks[static_cast<std::size_t>(i)];
    }
    const GkslGenerator l(KrausMap(ls), beta);
    const SplitVerdict v = cp_part_split(l, Matrix::Identity(d, d));
    ASSERT_TRUE(v.feasible) << "seed " << seed << " residual " << v.residual;
    ASSERT_TRUE(v.regauged.has_value());
    EXPECT_LE((v.regauged->superoperator() - l.superoperator()).norm(), 1e-8);
    EXPECT_LE(offdiag(v.regauged->beta()).norm(), 1e-8);
    // its CP part maps diagonals to diagonals
    for (Index k = 0; k < d; ++k)
      EXPECT_LE(offdiag(v.regauged->kraus().apply(matrix_unit(d, k, k))).norm(), 1e-8);
  }
}

TEST(HamiltonianSplit, ExampleThreeTwoCertificate) {
  const SplitVerdict v = hamiltonian_split(ex3_2_generator(), Matrix::Identity(3, 3));
  EXPECT_FALSE(v.feasible);
  ASSERT_TRUE(v.elimination.forced_unique);
  EXPECT_LE(std::abs(v.elimination.forced_values(0) - 10.0), 1e-9);
  EXPECT_LE(std::abs(v.elimination.forced_values(1) - 2.0), 1e-9);
  ASSERT_EQ(v.elimination.conflicting.size(), 1u);
  EXPECT_EQ(v.elimination.conflicting[0].row, 0);
  EXPECT_EQ(v.elimination.conflicting[0].col, 1);
  // 3c₁ − 6 − c̄₁ − c̄₂ + 2 at (10, 2)
  EXPECT_LE(std::abs(v.elimination.conflicting[0].defect - 14.0), 1e-9);
}

TEST(HamiltonianSplit, ExampleTwoEightIsInfeasibleAsWell) {
  // L_1, L_2 are real symmetric while Im B is not; see README
  const SplitVerdict v = hamiltonian_split(ex2_8_generator(), Matrix::Identity(2, 2));
  EXPECT_FALSE(v.feasible);
  EXPECT_NEAR(v.residual, 4.0, 1e-12);
}

TEST(HamiltonianSplit, DiagonalDriftIsFeasibleWithZeroShift) {
  Rng rng(6);
  const GkslGenerator l(random_kraus(rng, 3, 2), random_diagonal(rng, 3));
  const SplitVerdict v = hamiltonian_split(l, Matrix::Identity(3, 3));
  EXPECT_TRUE(v.feasible);
}
