// gksl.hpp: GKSL generators L(X) = Σ L_i* X L_i + Xβ + β*X
//
// Besides evaluation and the semigroup e^{tL}, this header decides when two
// GKSL forms describe the same generator (with the explicit gauge data
// γ, η′, M, h relating them) and whether a form can be re-gauged so that its
// CP part, or its Hamiltonian part, leaves a masa invariant.

#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cpmasa/cpmaps.hpp"
#include "cpmasa/linalg.hpp"

namespace cpmasa {

class GkslGenerator {
 public:
  GkslGenerator(KrausMap kraus, Matrix beta) : kraus_(std::move(kraus)), beta_(std::move(beta)) {
    require_dim(beta_, kraus_.dim(), "GkslGenerator beta");
    require_finite(beta_, "GkslGenerator beta");
  }

  static GkslGenerator zero(Index d) {
    return GkslGenerator(KrausMap({Matrix::Zero(d, d)}), Matrix::Zero(d, d));
  }

  Index dim() const { return kraus_.dim(); }
  const KrausMap& kraus() const { return kraus_; }
  const std::vector<Matrix>& operators() const { return kraus_.operators(); }
  const Matrix& beta() const { return beta_; }

  /// h = Im β, the Hamiltonian of the Markov form.
  Matrix hamiltonian() const { return imaginary_part(beta_); }

  Matrix apply(const Matrix& x) const {
    require_dim(x, dim(), "apply_generator");
    return kraus_.apply(x) + x * beta_ + beta_.adjoint() * x;
  }

  Matrix superoperator() const {
    const Index d = dim();
    const Matrix id = Matrix::Identity(d, d);
    return kraus_.superoperator() + kron(beta_.transpose(), id) + kron(id, beta_.adjoint());
  }

 private:
  KrausMap kraus_;
  Matrix beta_;
};

inline Matrix apply_generator(const GkslGenerator& l, const Matrix& x) { return l.apply(x); }

inline Matrix superoperator(const GkslGenerator& l) { return l.superoperator(); }

/// {1, L_1, …, L_n} linearly independent.
inline bool is_minimal(const GkslGenerator& l, const Tolerance& tol = {}) {
  const Index d = l.dim();
  std::vector<Matrix> family{Matrix::Identity(d, d)};
  for (const Matrix& op : l.operators()) family.push_back(op);
  return span_rank(family, tol) == static_cast<Index>(family.size());
}

/// L(X) = Σ L_i* X L_i − (X S + S X)/2 + i[X, h], S = Σ L_i* L_i.
inline GkslGenerator markov_form(const KrausMap& kraus, const Matrix& hamiltonian,
                                 const Tolerance& tol = {}) {
  require_dim(hamiltonian, kraus.dim(), "markov_form hamiltonian");
  if ((hamiltonian - hamiltonian.adjoint()).norm() > tol.threshold(hamiltonian.norm()))
    throw NotSelfAdjoint("markov_form: hamiltonian is not self-adjoint");
  const Index d = kraus.dim();
  const Matrix s = kraus.apply(Matrix::Identity(d, d));
  return GkslGenerator(kraus, -0.5 * s + kI * hermitian_part(hamiltonian));
}

/// e^{tL} as a d²×d² superoperator.
inline Matrix semigroup_at(const GkslGenerator& l, double t, const Tolerance& tol = {}) {
  if (!(t >= 0.0)) throw PreconditionFailed("semigroup_at: t must be nonnegative");
  return matrix_exp(t * l.superoperator(), tol);
}

/// L = T − id for a unital T (the Markov semigroup e^{t(T − id)}).
inline GkslGenerator generator_from_map(const KrausMap& t, const Tolerance& tol = {}) {
  const Verdict unital = is_unital(t, tol);
  if (!unital)
    throw NotUnital("generator_from_map: ‖T(1) − 1‖_F = " + std::to_string(unital.residual));
  const Index d = t.dim();
  return GkslGenerator(t, -0.5 * Matrix::Identity(d, d));
}

/// L = T, β = 0: the generator of the CP-semigroup e^{tT}.
inline GkslGenerator cp_semigroup_generator(const KrausMap& t) {
  return GkslGenerator(t, Matrix::Zero(t.dim(), t.dim()));
}

inline GkslGenerator conjugated(const GkslGenerator& l, const Matrix& u) {
  return GkslGenerator(conjugated(l.kraus(), u), u * l.beta() * u.adjoint());
}

// ---------------------------------------------------------------------------
// Equivalence of GKSL forms

/// Gauge data relating L = (L_i, β) to K = (K_j, α):
///   K_j = η′_j 1 + Σ_i a_ji L_i,  α = β + γ1 + Σ_i conj(η_i) L_i,
/// with M = (a_ji), η = −M*η′ and γ = ih − ⟨η′, η′⟩/2 on the minimal path.
struct TransformWitness {
  cd gamma{0.0, 0.0};
  Vector eta_prime;
  Matrix m_matrix;
  double h_scalar = 0.0;
  Vector eta;

  bool minimal_path = true;
  double distance = 0.0;             // superoperator distance of L and K
  double kraus_residual = 0.0;       // max_j ‖K_j − η′_j 1 − Σ a_ji L_i‖_F
  double drift_residual = 0.0;       // ‖α − β − γ1 − Σ conj(η_i) L_i‖_F
  double isometry_residual = 0.0;    // ‖M*M − 1‖_F (minimal) / ‖MM*M − M‖_F
  double eta_residual = 0.0;         // ‖η + M*η′‖ (minimal) / ‖MM*η′ − η′‖
  double gamma_real_residual = 0.0;  // |Re γ + ⟨η′, η′⟩/2|
};

/// The generator obtained from L by the gauge data of a witness.
inline GkslGenerator apply_gauge(const GkslGenerator& l, const Matrix& m_matrix,
                                 const Vector& eta_prime, cd gamma, const Vector& eta) {
  const Index d = l.dim();
  const Index n = static_cast<Index>(l.operators().size());
  if (m_matrix.cols() != n || m_matrix.rows() != eta_prime.size() || eta.size() != n)
    throw DimensionMismatch("apply_gauge: witness shapes do not match the generator");
  const Matrix id = Matrix::Identity(d, d);
  std::vector<Matrix> ks;
  for (Index j = 0; j < m_matrix.rows(); ++j) {
    Matrix k = eta_prime(j) * id;
    for (Index i = 0; i < n; ++i) k += m_matrix(j, i) * l.operators()[i];
    ks.push_back(std::move(k));
  }
  if (ks.empty()) ks.push_back(Matrix::Zero(d, d));
  Matrix alpha = l.beta() + gamma * id;
  for (Index i = 0; i < n; ++i) alpha += std::conj(eta(i)) * l.operators()[i];
  return GkslGenerator(KrausMap(std::move(ks)), std::move(alpha));
}

/// Forward construction: K from L and (M isometry, η′, h) with η and γ fixed
/// by the gauge constraints.
inline GkslGenerator gauge_transform(const GkslGenerator& l, const Matrix& m_matrix,
                                     const Vector& eta_prime, double h) {
  const Vector eta = -m_matrix.adjoint() * eta_prime;
  const cd gamma = cd(-0.5 * eta_prime.squaredNorm(), h);
  return apply_gauge(l, m_matrix, eta_prime, gamma, eta);
}

/// Result of stripping a GKSL form down to a minimal one:
/// L_i = μ_i 1 + Σ_r p_ir Lm_r, and Lm is minimal (its family may be empty).
struct MinimalReduction {
  std::vector<Matrix> operators;  // Lm_r, traceless and independent
  Matrix beta;
  Vector mu;
  Matrix p;  // #I × r
};

inline MinimalReduction minimal_reduction(const GkslGenerator& l, const Tolerance& tol = {}) {
  const Index d = l.dim();
  const Index n = static_cast<Index>(l.operators().size());
  const Matrix id = Matrix::Identity(d, d);
  MinimalReduction red;
  red.mu = Vector(n);
  red.beta = l.beta();
  std::vector<Matrix> traceless;
  for (Index i = 0; i < n; ++i) {
    const Matrix& li = l.operators()[i];
    const cd mu = li.trace() / static_cast<double>(d);
    red.mu(i) = mu;
    Matrix l0 = li - mu * id;
    // μ̄ X L⁰ + μ L⁰* X + |μ|² X is absorbed into the drift
    red.beta += std::conj(mu) * l0 + 0.5 * std::norm(mu) * id;
    traceless.push_back(std::move(l0));
  }
  const KrausMap reduced = minimal_kraus(KrausMap(traceless), tol);
  for (const Matrix& op : reduced.operators())
    if (op.norm() > 0.0) red.operators.push_back(op);
  const Matrix basis = detail::stacked(red.operators);
  red.p = red.operators.empty() ? Matrix(n, 0) : detail::expansion(traceless, basis, tol);
  return red;
}

namespace detail {

// Expansion of K over a minimal family {1, L_i} (possibly empty).
inline TransformWitness strict_witness(const std::vector<Matrix>& l_ops, const Matrix& beta,
                                       const GkslGenerator& k, const Tolerance& tol) {
  const Index d = k.dim();
  const Index n = static_cast<Index>(l_ops.size());
  const Matrix id = Matrix::Identity(d, d);
  std::vector<Matrix> basis_ops{id};
  for (const Matrix& op : l_ops) basis_ops.push_back(op);
  const Matrix basis = stacked(basis_ops);

  TransformWitness w;
  const Index nj = static_cast<Index>(k.operators().size());
  w.eta_prime = Vector(nj);
  w.m_matrix = Matrix(nj, n);
  for (Index j = 0; j < nj; ++j) {
    const Vector coeff = complex_least_squares(basis, vec(k.operators()[j]), tol);
    w.eta_prime(j) = coeff(0);
    w.m_matrix.row(j) = coeff.tail(n).transpose();
    w.kraus_residual = std::max(w.kraus_residual, (basis * coeff - vec(k.operators()[j])).norm());
  }
  w.eta = -w.m_matrix.adjoint() * w.eta_prime;
  Matrix rest = k.beta() - beta;
  for (Index i = 0; i < n; ++i) rest -= std::conj(w.eta(i)) * l_ops[i];
  w.gamma = rest.trace() / static_cast<double>(d);
  w.drift_residual = (rest - w.gamma * id).norm();
  w.h_scalar = w.gamma.imag();
  w.isometry_residual = (w.m_matrix.adjoint() * w.m_matrix - Matrix::Identity(n, n)).norm();
  w.eta_residual = 0.0;
  w.gamma_real_residual = std::abs(w.gamma.real() + 0.5 * w.eta_prime.squaredNorm());
  return w;
}

}  // namespace detail

/// Decides K = L and returns the gauge witness. With strict = true, L must be
/// minimal and the witness satisfies the isometric gauge constraints. With
/// strict = false, L is first reduced to a minimal form Lm and the witness is
/// the composite L → Lm → K: M is a partial isometry and η, γ are read off
/// the drift equation (reported constraint residuals show how far they are
/// from the isometric gauge).
inline std::variant<TransformWitness, Inequivalent> gksl_equivalent(const GkslGenerator& l,
                                                                    const GkslGenerator& k,
                                                                    const Tolerance& tol = {},
                                                                    bool strict = true) {
  if (l.dim() != k.dim()) throw DimensionMismatch("gksl_equivalent: dimensions differ");
  if (strict && !is_minimal(l, tol))
    throw NotMinimal("gksl_equivalent: {1, L_i} is linearly dependent");
  const Matrix sl = l.superoperator();
  const Matrix sk = k.superoperator();
  const double dist = superoperator_distance(sl, sk);
  const double thr = tol.threshold(std::max(sl.norm(), sk.norm()));
  if (dist > thr) return Inequivalent{dist, thr};

  if (strict) {
    TransformWitness w = detail::strict_witness(l.operators(), l.beta(), k, tol);
    w.distance = dist;
    return w;
  }

  const MinimalReduction red = minimal_reduction(l, tol);
  const TransformWitness w1 = detail::strict_witness(red.operators, red.beta, k, tol);
  const Index d = l.dim();
  const Index n = static_cast<Index>(l.operators().size());
  const Matrix id = Matrix::Identity(d, d);

  TransformWitness w;
  w.minimal_path = false;
  w.distance = dist;
  w.m_matrix = w1.m_matrix * red.p.adjoint();
  w.eta_prime = w1.eta_prime - w.m_matrix * red.mu;
  w.eta = red.mu + red.p * w1.eta;
  Matrix rest = k.beta() - l.beta();
  for (Index i = 0; i < n; ++i) rest -= std::conj(w.eta(i)) * l.operators()[i];
  w.gamma = rest.trace() / static_cast<double>(d);
  w.h_scalar = w.gamma.imag();
  w.drift_residual = (rest - w.gamma * id).norm();
  for (std::size_t j = 0; j < k.operators().size(); ++j) {
    Matrix r = k.operators()[j] - w.eta_prime(static_cast<Index>(j)) * id;
    for (Index i = 0; i < n; ++i) r -= w.m_matrix(static_cast<Index>(j), i) * l.operators()[i];
    w.kraus_residual = std::max(w.kraus_residual, r.norm());
  }
  const Matrix& m = w.m_matrix;
  w.isometry_residual = (m * m.adjoint() * m - m).norm();
  w.eta_residual = (m * m.adjoint() * w.eta_prime - w.eta_prime).norm();
  w.gamma_real_residual = std::abs(w.gamma.real() + 0.5 * w.eta_prime.squaredNorm());
  return w;
}

// ---------------------------------------------------------------------------
// Split feasibility

/// Structured infeasibility certificate for a system of complex equations:
/// equations are taken sparsest first and kept while jointly consistent; the
/// kept ones force values of the unknowns, at which every rejected equation
/// has a nonzero defect.
struct EliminationCertificate {
  struct Equation {
    Index row = 0;
    Index col = 0;
    cd defect{0.0, 0.0};
  };
  std::vector<Equation> accepted;
  std::vector<Equation> conflicting;
  Vector forced_values;
  bool forced_unique = false;
};

struct SplitVerdict {
  bool feasible = false;
  double residual = 0.0;
  double threshold = 0.0;
  Vector coefficients;                 // least-squares unknowns (z = η̄ or c)
  std::optional<Vector> eta;           // cp-part only
  RealVector infeasibility_certificate;  // b − A x of the realified system
  EliminationCertificate elimination;
  std::optional<GkslGenerator> regauged;  // cp-part only, when feasible
};

namespace detail {

struct LabeledSystem {
  RealLinearSystem system;
  std::vector<std::pair<Index, Index>> labels;
};

inline EliminationCertificate eliminate(const LabeledSystem& ls, const Tolerance& tol) {
  const RealLinearSystem& sys = ls.system;
  std::vector<Index> order(static_cast<std::size_t>(sys.equations()));
  for (Index e = 0; e < sys.equations(); ++e) order[static_cast<std::size_t>(e)] = e;
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return sys.nonzeros(a) < sys.nonzeros(b); });
  std::vector<Index> accepted;
  std::vector<Index> rejected;
  for (Index e : order) {
    std::vector<Index> trial = accepted;
    trial.push_back(e);
    const RealVector b = sys.rhs(trial);
    const LeastSquaresResult r = real_linear_least_squares(sys.matrix(trial), b, tol);
    if (r.residual <= tol.threshold(b.norm()))
      accepted = std::move(trial);
    else
      rejected.push_back(e);
  }
  EliminationCertificate cert;
  LeastSquaresResult forced;
  if (accepted.empty()) {
    forced.solution = RealVector::Zero(sys.real_columns());
  } else {
    forced = real_linear_least_squares(sys.matrix(accepted), sys.rhs(accepted), tol);
  }
  cert.forced_unique = forced.rank == sys.real_columns();
  cert.forced_values = Vector(sys.unknowns());
  for (Index v = 0; v < sys.unknowns(); ++v) cert.forced_values(v) = sys.value(forced.solution, v);
  for (Index e : accepted)
    cert.accepted.push_back({ls.labels[e].first, ls.labels[e].second,
                             sys.equation_defect(forced.solution, e)});
  for (Index e : rejected)
    cert.conflicting.push_back({ls.labels[e].first, ls.labels[e].second,
                                sys.equation_defect(forced.solution, e)});
  return cert;
}

inline SplitVerdict solve_split(const LabeledSystem& ls, const Tolerance& tol) {
  SplitVerdict v;
  const RealMatrix a = ls.system.matrix();
  const RealVector b = ls.system.rhs();
  const LeastSquaresResult r = real_linear_least_squares(a, b, tol);
  v.residual = r.residual;
  v.threshold = tol.threshold(b.norm());
  v.feasible = v.residual <= v.threshold;
  v.coefficients = Vector(ls.system.unknowns());
  for (Index i = 0; i < ls.system.unknowns(); ++i)
    v.coefficients(i) = ls.system.value(r.solution, i);
  if (!v.feasible) {
    v.infeasibility_certificate = r.residual_vector;
    v.elimination = eliminate(ls, tol);
  }
  return v;
}

}  // namespace detail

/// Generator in the coordinates of the basis u: U* L_i U and U* β U.
inline GkslGenerator rotated(const GkslGenerator& l, const Matrix& u) {
  return conjugated(l, Matrix(u.adjoint()));
}

/// Is there η with offdiag(B + Σ conj(η_i) L_i) = 0 in the given basis?
/// `basis` is the masa's unitary; the caller is responsible for invariance
/// (see cp_part_diagonalizable in masa.hpp, which checks it).
inline SplitVerdict cp_part_split(const GkslGenerator& l, const Matrix& basis,
                                  const Tolerance& tol = {}) {
  const GkslGenerator r = rotated(l, basis);
  const Index d = l.dim();
  const Index n = static_cast<Index>(l.operators().size());
  detail::LabeledSystem ls;
  for (Index i = 0; i < n; ++i) ls.system.add_complex_unknown();  // z_i = conj(η_i)
  for (Index row = 0; row < d; ++row)
    for (Index col = 0; col < d; ++col) {
      if (row == col) continue;
      const Index eq = ls.system.add_equation(-r.beta()(row, col));
      ls.labels.emplace_back(row, col);
      for (Index i = 0; i < n; ++i) ls.system.add_term(eq, i, r.operators()[i](row, col));
    }
  SplitVerdict v = detail::solve_split(ls, tol);
  v.eta = v.coefficients.conjugate();
  if (v.feasible) {
    const Vector& eta = *v.eta;
    const Matrix id = Matrix::Identity(d, d);
    const cd gamma = -0.5 * eta.squaredNorm();
    Matrix alpha = l.beta() + gamma * id;
    std::vector<Matrix> ks;
    for (Index i = 0; i < n; ++i) {
      alpha += std::conj(eta(i)) * l.operators()[i];
      ks.push_back(l.operators()[i] - eta(i) * id);
    }
    v.regauged = GkslGenerator(KrausMap(std::move(ks)), std::move(alpha));
  }
  return v;
}

/// Is there c with offdiag(B′ − B′*) = 0, 2B′ = Σ c_i L_i + 2B, in the given
/// basis? One complex equation per pair row < col (the (col,row) entry is its
/// negated conjugate), scaled as in 2B′.
inline SplitVerdict hamiltonian_split(const GkslGenerator& l, const Matrix& basis,
                                      const Tolerance& tol = {}) {
  const GkslGenerator r = rotated(l, basis);
  const Index d = l.dim();
  const Index n = static_cast<Index>(l.operators().size());
  detail::LabeledSystem ls;
  for (Index i = 0; i < n; ++i) ls.system.add_complex_unknown();
  const Matrix& b = r.beta();
  for (Index row = 0; row < d; ++row)
    for (Index col = row + 1; col < d; ++col) {
      const Index eq = ls.system.add_equation(-2.0 * (b(row, col) - std::conj(b(col, row))));
      ls.labels.emplace_back(row, col);
      for (Index i = 0; i < n; ++i) {
        const Matrix& li = r.operators()[i];
        ls.system.add_term(eq, i, li(row, col));
        ls.system.add_conjugate_term(eq, i, -std::conj(li(col, row)));
      }
    }
  return detail::solve_split(ls, tol);
}

// ---------------------------------------------------------------------------

/// Random generator in Markov form with n Kraus operators.
inline GkslGenerator random_markov_generator(Rng& rng, Index d, Index n) {
  return markov_form(random_kraus(rng, d, n), random_hermitian(rng, d));
}

}  // namespace cpmasa
