// cpmaps.hpp: completely positive maps in Kraus form
//
// A KrausMap (L_i) acts as T(X) = Σ L_i* X L_i. Superoperators use column
// stacking: vec(T(X)) = M_T vec(X) with M_T = Σ L_iᵀ ⊗ L_i*.

#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cpmasa/linalg.hpp"
#include "cpmasa/random.hpp"

namespace cpmasa {

class KrausMap {
 public:
  explicit KrausMap(std::vector<Matrix> operators) : ops_(std::move(operators)) {
    if (ops_.empty()) throw DimensionMismatch("KrausMap: at least one operator required");
    dim_ = ops_.front().rows();
    for (const Matrix& l : ops_) {
      require_square(l, "KrausMap");
      require_dim(l, dim_, "KrausMap");
      require_finite(l, "KrausMap");
    }
  }

  static KrausMap identity(Index d) { return KrausMap({Matrix::Identity(d, d)}); }

  Index dim() const { return dim_; }
  std::size_t size() const { return ops_.size(); }
  const std::vector<Matrix>& operators() const { return ops_; }
  const Matrix& operator[](std::size_t i) const { return ops_[i]; }

  Matrix apply(const Matrix& x) const {
    require_dim(x, dim_, "apply_cp");
    Matrix out = Matrix::Zero(dim_, dim_);
    for (const Matrix& l : ops_) out.noalias() += l.adjoint() * x * l;
    return out;
  }

  Matrix superoperator() const {
    Matrix m = Matrix::Zero(dim_ * dim_, dim_ * dim_);
    for (const Matrix& l : ops_) m += kron(l.transpose(), l.adjoint());
    return m;
  }

 private:
  std::vector<Matrix> ops_;
  Index dim_ = 0;
};

/// A linear map on M_d given by its d²×d² column-stacking matrix.
class Superoperator {
 public:
  Superoperator(Index dim, Matrix m) : dim_(dim), m_(std::move(m)) {
    if (m_.rows() != dim_ * dim_ || m_.cols() != dim_ * dim_)
      throw DimensionMismatch("Superoperator: matrix must be d^2 x d^2");
  }

  Index dim() const { return dim_; }
  const Matrix& matrix() const { return m_; }
  Matrix superoperator() const { return m_; }

  Matrix apply(const Matrix& x) const {
    require_dim(x, dim_, "Superoperator::apply");
    return unvec(m_ * vec(x), dim_);
  }

  /// Hilbert-Schmidt adjoint.
  Matrix apply_adjoint(const Matrix& y) const {
    require_dim(y, dim_, "Superoperator::apply_adjoint");
    return unvec(m_.adjoint() * vec(y), dim_);
  }

 private:
  Index dim_;
  Matrix m_;
};

/// Anything with dim(), apply(X) and superoperator().
template <class M>
concept MatrixMap = requires(const M& m, const Matrix& x) {
  { m.dim() } -> std::convertible_to<Index>;
  { m.apply(x) } -> std::convertible_to<Matrix>;
  { m.superoperator() } -> std::convertible_to<Matrix>;
};

template <MatrixMap M>
Superoperator as_superoperator(const M& map) {
  return Superoperator(map.dim(), map.superoperator());
}

struct DecompositionTransform {
  Matrix v;  // #J × #I, K_j = Σ_i v_ji L_i
};

struct Inequivalent {
  double distance = 0.0;
  double threshold = 0.0;
};

// ---------------------------------------------------------------------------

inline Matrix apply_cp(const KrausMap& t, const Matrix& x) { return t.apply(x); }

inline Matrix superoperator(const KrausMap& t) { return t.superoperator(); }

/// Σ_{k,l} E_kl ⊗ T(E_kl).
inline Matrix choi_matrix(const KrausMap& t) {
  const Index d = t.dim();
  Matrix c = Matrix::Zero(d * d, d * d);
  for (Index k = 0; k < d; ++k)
    for (Index l = 0; l < d; ++l) c.block(k * d, l * d, d, d) = t.apply(matrix_unit(d, k, l));
  return c;
}

inline double superoperator_distance(const Matrix& a, const Matrix& b) { return (a - b).norm(); }

/// Kraus family of minimal length (the Choi rank), read off the Choi
/// eigendecomposition: √λ·(eigenvector) reshaped, largest eigenvalue first.
/// The returned operators are mutually Hilbert-Schmidt orthogonal.
inline KrausMap minimal_kraus(const KrausMap& t, const Tolerance& tol = {}) {
  const Index d = t.dim();
  const EigenDecomposition eig = hermitian_eig(choi_matrix(t), tol);
  const double lmax = std::max(0.0, eig.values.maxCoeff());
  const double thr = tol.threshold(lmax);
  std::vector<Matrix> ops;
  for (Index k = d * d - 1; k >= 0; --k) {
    const double lambda = eig.values(k);
    if (lambda <= thr) break;
    Matrix l(d, d);
    // Choi = Σ w wᴴ with w[k·d + r] = conj(L(k, r))
    for (Index row = 0; row < d; ++row)
      for (Index col = 0; col < d; ++col)
        l(row, col) = std::conj(eig.vectors(row * d + col, k)) * std::sqrt(lambda);
    ops.push_back(std::move(l));
  }
  if (ops.empty()) ops.push_back(Matrix::Zero(d, d));
  KrausMap out(std::move(ops));
  const Matrix s = t.superoperator();
  const double err = superoperator_distance(s, out.superoperator());
  if (err > 10.0 * tol.atol * (1.0 + s.norm()) + tol.rtol * s.norm())
    throw NumericalFailure("minimal_kraus: reduced family differs by " + std::to_string(err));
  return out;
}

namespace detail {

// Columns vec(ops[i]).
inline Matrix stacked(const std::vector<Matrix>& ops) {
  const Index d = ops.empty() ? 0 : ops.front().rows();
  Matrix m(d * d, static_cast<Index>(ops.size()));
  for (std::size_t i = 0; i < ops.size(); ++i) m.col(static_cast<Index>(i)) = vec(ops[i]);
  return m;
}

// Rows: coefficients of each op in the given basis (least squares).
inline Matrix expansion(const std::vector<Matrix>& ops, const Matrix& basis_cols,
                        const Tolerance& tol) {
  Matrix coeff(static_cast<Index>(ops.size()), basis_cols.cols());
  for (std::size_t i = 0; i < ops.size(); ++i)
    coeff.row(static_cast<Index>(i)) = complex_least_squares(basis_cols, vec(ops[i]), tol).transpose();
  return coeff;
}

}  // namespace detail

/// Rank of span{L_i} under the shared rank policy.
inline Index span_rank(const std::vector<Matrix>& ops, const Tolerance& tol = {}) {
  return numerical_rank(detail::stacked(ops), tol);
}

/// V with S_j = Σ_i v_ji T_i and T_i = Σ_j conj(v_ji) S_j, or the distance of
/// the two maps if they differ.
inline std::variant<DecompositionTransform, Inequivalent> kraus_transform(const KrausMap& t,
                                                                          const KrausMap& s,
                                                                          const Tolerance& tol = {}) {
  if (t.dim() != s.dim()) throw DimensionMismatch("kraus_transform: dimensions differ");
  const Matrix st = t.superoperator();
  const Matrix ss = s.superoperator();
  const double dist = superoperator_distance(st, ss);
  const double thr = tol.threshold(std::max(st.norm(), ss.norm()));
  if (dist > thr) return Inequivalent{dist, thr};

  const KrausMap minimal = minimal_kraus(t, tol);
  const Matrix basis = detail::stacked(minimal.operators());
  const Matrix x = detail::expansion(t.operators(), basis, tol);  // T_i = Σ_a x_ia M_a
  const Matrix y = detail::expansion(s.operators(), basis, tol);  // S_j = Σ_a y_ja M_a
  return DecompositionTransform{y * x.adjoint()};
}

inline Verdict is_unital(const KrausMap& t, const Tolerance& tol = {}) {
  const Matrix one = Matrix::Identity(t.dim(), t.dim());
  const double r = (t.apply(one) - one).norm();
  return decide(r, tol.threshold(one.norm()));
}

/// Random unital CP map X ↦ V*(X ⊗ 1_k)V for a Haar isometry V: ℂ^d → ℂ^d ⊗ ℂ^k.
inline KrausMap random_unital_cp(Rng& rng, Index d, Index k) {
  const Matrix v = random_isometry(rng, d * k, d);
  std::vector<Matrix> ops;
  for (Index m = 0; m < k; ++m) {
    Matrix l(d, d);
    for (Index a = 0; a < d; ++a) l.row(a) = v.row(a * k + m);
    ops.push_back(std::move(l));
  }
  return KrausMap(std::move(ops));
}

inline KrausMap random_kraus(Rng& rng, Index d, Index n) {
  std::vector<Matrix> ops;
  for (Index i = 0; i < n; ++i) ops.push_back(random_ginibre(rng, d, d));
  return KrausMap(std::move(ops));
}

/// Conjugated family U L_i U*, so the map acts as Ad(U)∘T∘Ad(U*).
inline KrausMap conjugated(const KrausMap& t, const Matrix& u) {
  std::vector<Matrix> ops;
  for (const Matrix& l : t.operators()) ops.push_back(u * l * u.adjoint());
  return KrausMap(std::move(ops));
}

}  // namespace cpmasa
