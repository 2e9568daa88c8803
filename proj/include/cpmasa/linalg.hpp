// linalg.hpp: dense complex linear algebra kernel: tolerances, Hermitian
// eigendecomposition, real-linear least squares, matrix exponential and
// commutants.
//
// All routines are pure functions of their arguments. Matrices are Eigen
// column-major, so vec() below is column stacking.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cpmasa/errors.hpp"

namespace cpmasa {

using cd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr cd kI{0.0, 1.0};

/// Absolute/relative tolerance pair. "A ≈ B" means
/// ‖A − B‖_F ≤ atol + rtol·max(‖A‖_F, ‖B‖_F).
struct Tolerance {
  double atol = 1e-9;
  double rtol = 1e-9;

  void validate() const {
    if (!(atol >= 0.0) || !(rtol >= 0.0) || !std::isfinite(atol) || !std::isfinite(rtol))
      throw ToleranceInvalid("tolerances must be finite and nonnegative");
    if (atol == 0.0 && rtol == 0.0)
      throw ToleranceInvalid("at least one of atol, rtol must be positive");
  }

  double threshold(double scale) const { return atol + rtol * scale; }

  template <class A, class B>
  bool approx(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) const {
    return (a - b).norm() <= threshold(std::max(a.norm(), b.norm()));
  }
};

/// A boolean decision reported together with the number it was decided on.
struct Verdict {
  bool holds = false;
  double residual = 0.0;
  double threshold = 0.0;

  explicit operator bool() const { return holds; }
};

inline Verdict decide(double residual, double threshold) {
  return Verdict{residual <= threshold, residual, threshold};
}

// ---------------------------------------------------------------------------
// Small helpers

template <class Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(std::real(m(i, j))) || !std::isfinite(std::imag(m(i, j)))) return false;
  return true;
}

inline void require_finite(const Matrix& m, const char* what) {
  if (!all_finite(m)) throw NumericalFailure(std::string(what) + ": non-finite entry");
}

inline void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw DimensionMismatch(std::string(what) + ": expected a nonempty square matrix, got " +
                            std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

inline void require_dim(const Matrix& m, Index d, const char* what) {
  if (m.rows() != d || m.cols() != d)
    throw DimensionMismatch(std::string(what) + ": expected " + std::to_string(d) + "x" +
                            std::to_string(d) + ", got " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()));
}

inline Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

inline Matrix unvec(const Vector& v, Index d) {
  if (v.size() != d * d) throw DimensionMismatch("unvec: length is not d^2");
  return Eigen::Map<const Matrix>(v.data(), d, d);
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Matrix matrix_unit(Index d, Index k, Index l) {
  Matrix e = Matrix::Zero(d, d);
  e(k, l) = 1.0;
  return e;
}

inline Matrix offdiag(const Matrix& m) {
  Matrix out = m;
  out.diagonal().setZero();
  return out;
}

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

inline Matrix hermitian_part(const Matrix& m) { return (m + m.adjoint()) / 2.0; }

/// Im m := (m − m*)/2i, the self-adjoint "imaginary part".
inline Matrix imaginary_part(const Matrix& m) { return (m - m.adjoint()) / (2.0 * kI); }

// ---------------------------------------------------------------------------
// Singular values, rank and null spaces

/// Singular values below atol + rtol·σ_max count as zero.
inline double rank_threshold(const RealVector& singular_values, const Tolerance& tol) {
  const double smax = singular_values.size() ? singular_values.maxCoeff() : 0.0;
  return tol.threshold(smax);
}

template <class Derived>
Index numerical_rank(const Eigen::MatrixBase<Derived>& a, const Tolerance& tol) {
  if (a.size() == 0) return 0;
  using Plain = typename Derived::PlainObject;
  Eigen::BDCSVD<Plain> svd(a.eval());
  const RealVector s = svd.singularValues();
  const double thr = rank_threshold(s, tol);
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > thr) ++r;
  return r;
}

/// Orthonormal basis of the null space of a, as columns.
inline Matrix null_space(const Matrix& a, const Tolerance& tol) {
  const Index n = a.cols();
  if (a.rows() == 0) return Matrix::Identity(n, n);
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const RealVector s = svd.singularValues();
  const double thr = rank_threshold(s, tol);
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > thr) ++r;
  return svd.matrixV().rightCols(n - r);
}

/// Orthonormal basis of the column space of a.
inline Matrix range_basis(const Matrix& a, const Tolerance& tol) {
  if (a.cols() == 0) return Matrix(a.rows(), 0);
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU);
  const RealVector s = svd.singularValues();
  const double thr = rank_threshold(s, tol);
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > thr) ++r;
  return svd.matrixU().leftCols(r);
}

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition

struct EigenDecomposition {
  RealVector values;  // ascending
  Matrix vectors;     // columns, unitary
};

namespace detail {

// Largest-magnitude entry made real positive; ties go to the lowest row.
inline void fix_phase(Eigen::Ref<Vector> v) {
  double best = -1.0;
  Index at = 0;
  for (Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > best * (1.0 + 1e-12) + 1e-300) {
      best = a;
      at = i;
    }
  }
  if (best > 0.0) v *= std::conj(v(at)) / std::abs(v(at));
}

// Replaces a basis of a degenerate eigenspace by a canonical one: pivoted
// Gram-Schmidt of the projected standard basis vectors, ordered by pivot row.
inline Matrix canonical_cluster_basis(const Matrix& cluster) {
  const Index d = cluster.rows();
  const Index m = cluster.cols();
  Matrix proj = cluster * cluster.adjoint();
  std::vector<std::pair<Index, Vector>> picked;
  Matrix residual = proj;
  for (Index step = 0; step < m; ++step) {
    Index best = -1;
    double best_norm = -1.0;
    for (Index j = 0; j < d; ++j) {
      const double nrm = residual.col(j).norm();
      if (nrm > best_norm * (1.0 + 1e-10)) {
        best_norm = nrm;
        best = j;
      }
    }
    Vector v = residual.col(best) / best_norm;
    // second pass for orthogonality
    for (const auto& [idx, w] : picked) v -= w * w.dot(v);
    v.normalize();
    picked.emplace_back(best, v);
    residual -= v * (v.adjoint() * residual);
  }
  std::sort(picked.begin(), picked.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  Matrix out(d, m);
  for (Index k = 0; k < m; ++k) out.col(k) = picked[k].second;
  return out;
}

}  // namespace detail

inline EigenDecomposition hermitian_eig(const Matrix& a, const Tolerance& tol = {}) {
  require_square(a, "hermitian_eig");
  require_finite(a, "hermitian_eig");
  const double asym = (a - a.adjoint()).norm();
  if (asym > tol.threshold(a.norm()))
    throw NotSelfAdjoint("hermitian_eig: ‖A − A*‖_F = " + std::to_string(asym));

  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(a));
  if (es.info() != Eigen::Success) throw NumericalFailure("hermitian_eig: no convergence");

  EigenDecomposition out{es.eigenvalues(), es.eigenvectors()};
  const Index n = a.rows();
  const double scale = out.values.cwiseAbs().maxCoeff();
  const double gap = tol.threshold(scale);
  for (Index start = 0; start < n;) {
    Index end = start + 1;
    while (end < n && out.values(end) - out.values(end - 1) <= gap) ++end;
    if (end - start > 1)
      out.vectors.middleCols(start, end - start) =
          detail::canonical_cluster_basis(out.vectors.middleCols(start, end - start));
    start = end;
  }
  for (Index k = 0; k < n; ++k) detail::fix_phase(out.vectors.col(k));
  return out;
}

// ---------------------------------------------------------------------------
// Real-linear least squares

struct LeastSquaresResult {
  RealVector solution;        // minimum-norm minimizer
  double residual = 0.0;      // ‖A x − b‖₂
  RealVector residual_vector; // b − A x
  Index rank = 0;
};

inline LeastSquaresResult real_linear_least_squares(const RealMatrix& a, const RealVector& b,
                                                    const Tolerance& tol = {}) {
  if (a.rows() != b.size())
    throw DimensionMismatch("real_linear_least_squares: A has " + std::to_string(a.rows()) +
                            " rows, b has " + std::to_string(b.size()));
  LeastSquaresResult out;
  out.solution = RealVector::Zero(a.cols());
  if (a.cols() > 0 && a.rows() > 0) {
    Eigen::BDCSVD<RealMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector s = svd.singularValues();
    const double thr = rank_threshold(s, tol);
    const RealVector utb = svd.matrixU().transpose() * b;
    RealVector y = RealVector::Zero(s.size());
    for (Index i = 0; i < s.size(); ++i) {
      if (s(i) > thr) {
        y(i) = utb(i) / s(i);
        ++out.rank;
      }
    }
    out.solution = svd.matrixV() * y;
  }
  out.residual_vector = b - a * out.solution;
  out.residual = out.residual_vector.norm();
  return out;
}

/// Complex least squares min ‖A x − b‖ with the same rank policy.
inline Vector complex_least_squares(const Matrix& a, const Vector& b, const Tolerance& tol = {}) {
  if (a.rows() != b.size()) throw DimensionMismatch("complex_least_squares: row mismatch");
  if (a.cols() == 0) return Vector(0);
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector s = svd.singularValues();
  const double thr = rank_threshold(s, tol);
  const Vector utb = svd.matrixU().adjoint() * b;
  Vector y = Vector::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > thr) y(i) = utb(i) / s(i);
  return svd.matrixV() * y;
}

/// Assembles a system of complex equations whose unknowns enter complex-linearly,
/// conjugate-linearly or as real scalars. Each complex unknown occupies two
/// adjacent real columns (Re z, Im z); each complex equation two real rows.
class RealLinearSystem {
 public:
  Index add_complex_unknown() {
    const Index c = cols_;
    cols_ += 2;
    complex_.push_back(true);
    start_.push_back(c);
    return static_cast<Index>(start_.size()) - 1;
  }

  Index add_real_unknown() {
    const Index c = cols_;
    cols_ += 1;
    complex_.push_back(false);
    start_.push_back(c);
    return static_cast<Index>(start_.size()) - 1;
  }

  Index add_equation(cd rhs) {
    rhs_.push_back(rhs);
    return static_cast<Index>(rhs_.size()) - 1;
  }

  /// eq += a·z
  void add_term(Index eq, Index var, cd a) { push(eq, var, a, false); }
  /// eq += a·conj(z)
  void add_conjugate_term(Index eq, Index var, cd a) { push(eq, var, a, true); }

  Index equations() const { return static_cast<Index>(rhs_.size()); }
  Index unknowns() const { return static_cast<Index>(start_.size()); }
  Index real_columns() const { return cols_; }
  bool is_complex(Index var) const { return complex_[var]; }
  Index column(Index var) const { return start_[var]; }

  RealMatrix matrix() const { return assemble(nullptr); }

  /// Rows restricted to the listed complex equations (in that order).
  RealMatrix matrix(const std::vector<Index>& eqs) const { return assemble(&eqs); }

  RealVector rhs() const { return rhs_of(nullptr); }
  RealVector rhs(const std::vector<Index>& eqs) const { return rhs_of(&eqs); }

  cd value(const RealVector& x, Index var) const {
    const Index c = start_[var];
    return complex_[var] ? cd(x(c), x(c + 1)) : cd(x(c), 0.0);
  }

  /// Complex value of (lhs − rhs) of one equation at x.
  cd equation_defect(const RealVector& x, Index eq) const {
    const RealMatrix row = matrix(std::vector<Index>{eq});
    const RealVector r = row * x;
    return cd(r(0), r(1)) - rhs_[eq];
  }

  /// Number of structurally nonzero real coefficients in an equation's two rows.
  Index nonzeros(Index eq) const {
    const RealMatrix row = matrix(std::vector<Index>{eq});
    return (row.array() != 0.0).count();
  }

 private:
  struct Term {
    Index eq;
    Index var;
    cd a;
    bool conjugate;
  };

  void push(Index eq, Index var, cd a, bool conj) {
    if (eq < 0 || eq >= equations() || var < 0 || var >= unknowns())
      throw DimensionMismatch("RealLinearSystem: index out of range");
    terms_.push_back({eq, var, a, conj});
  }

  RealMatrix assemble(const std::vector<Index>* eqs) const {
    std::vector<Index> row_of(rhs_.size(), -1);
    Index n = 0;
    if (eqs) {
      for (Index e : *eqs) row_of[e] = n++;
    } else {
      for (Index e = 0; e < equations(); ++e) row_of[e] = n++;
    }
    RealMatrix m = RealMatrix::Zero(2 * n, cols_);
    for (const Term& t : terms_) {
      const Index r = row_of[t.eq];
      if (r < 0) continue;
      const Index c = start_[t.var];
      const double ar = t.a.real(), ai = t.a.imag();
      if (!complex_[t.var]) {
        m(2 * r, c) += ar;
        m(2 * r + 1, c) += ai;
      } else if (!t.conjugate) {
        // a·z = (ar x − ai y) + i(ai x + ar y)
        m(2 * r, c) += ar;
        m(2 * r, c + 1) -= ai;
        m(2 * r + 1, c) += ai;
        m(2 * r + 1, c + 1) += ar;
      } else {
        // a·z̄ = (ar x + ai y) + i(ai x − ar y)
        m(2 * r, c) += ar;
        m(2 * r, c + 1) += ai;
        m(2 * r + 1, c) += ai;
        m(2 * r + 1, c + 1) -= ar;
      }
    }
    return m;
  }

  RealVector rhs_of(const std::vector<Index>* eqs) const {
    std::vector<Index> list;
    if (eqs) {
      list = *eqs;
    } else {
      for (Index e = 0; e < equations(); ++e) list.push_back(e);
    }
    RealVector b(2 * static_cast<Index>(list.size()));
    for (std::size_t k = 0; k < list.size(); ++k) {
      b(2 * k) = rhs_[list[k]].real();
      b(2 * k + 1) = rhs_[list[k]].imag();
    }
    return b;
  }

  Index cols_ = 0;
  std::vector<bool> complex_;
  std::vector<Index> start_;
  std::vector<cd> rhs_;
  std::vector<Term> terms_;
};

// ---------------------------------------------------------------------------
// Matrix exponential

/// e^A by scaling and squaring with a Taylor series truncated once the next
/// term falls below unit roundoff relative to the partial sum.
inline Matrix matrix_exp(const Matrix& a, const Tolerance& tol = {}) {
  (void)tol;
  require_square(a, "matrix_exp");
  require_finite(a, "matrix_exp");
  const Index n = a.rows();
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  if (squarings > 1000) throw NumericalFailure("matrix_exp: norm too large");
  const Matrix scaled = a / std::ldexp(1.0, squarings);

  Matrix sum = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  constexpr double kRoundoff = 1.1102230246251565e-16;
  for (int k = 1; k <= 60; ++k) {
    term = (term * scaled) / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().colwise().sum().maxCoeff() <=
        kRoundoff * sum.cwiseAbs().colwise().sum().maxCoeff())
      break;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  if (!all_finite(sum)) throw NumericalFailure("matrix_exp: overflow");
  return sum;
}

// ---------------------------------------------------------------------------
// Commutants

struct CommutantResult {
  Index dimension = 0;
  std::vector<Matrix> basis;
};

/// {X : [X, A] = [X, A*] = 0 for all A in the list}.
inline CommutantResult commutant_intersection(const std::vector<Matrix>& mats,
                                              const Tolerance& tol = {}) {
  if (mats.empty()) throw DimensionMismatch("commutant_intersection: empty list");
  const Index d = mats.front().rows();
  for (const Matrix& m : mats) {
    require_square(m, "commutant_intersection");
    require_dim(m, d, "commutant_intersection");
  }
  const Matrix id = Matrix::Identity(d, d);
  Matrix system(2 * d * d * static_cast<Index>(mats.size()), d * d);
  Index row = 0;
  for (const Matrix& m : mats) {
    for (const Matrix& a : {m, Matrix(m.adjoint())}) {
      // vec(XA − AX) = (Aᵀ ⊗ 1 − 1 ⊗ A) vec X
      system.middleRows(row, d * d) = kron(a.transpose(), id) - kron(id, a);
      row += d * d;
    }
  }
  const Matrix ns = null_space(system, tol);
  CommutantResult out;
  out.dimension = ns.cols();
  for (Index k = 0; k < ns.cols(); ++k) out.basis.push_back(unvec(ns.col(k), d));
  return out;
}

}  // namespace cpmasa
