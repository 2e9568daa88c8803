// masa.hpp: maximal abelian subalgebras U 𝓓_d U* and invariance under CP
// maps and generators
//
// Decision procedures work in masa coordinates: the map is conjugated by the
// basis unitary and the question becomes one about diagonal matrices.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cpmasa/cpmaps.hpp"
#include "cpmasa/gksl.hpp"
#include "cpmasa/linalg.hpp"

namespace cpmasa {

/// The masa U 𝓓_d U*, stored as the unitary U whose columns are the joint
/// eigenbasis.
class Masa {
 public:
  explicit Masa(Matrix basis_unitary, const Tolerance& tol = {}) : u_(std::move(basis_unitary)) {
    require_square(u_, "Masa");
    require_finite(u_, "Masa");
    const Index d = u_.rows();
    const Matrix id = Matrix::Identity(d, d);
    const double err = (u_.adjoint() * u_ - id).norm();
    if (err > std::max(tol.threshold(id.norm()), 1e-8))
      throw PreconditionFailed("Masa: basis is not unitary (‖U*U − 1‖_F = " + std::to_string(err) +
                               ")");
  }

  static Masa diagonal(Index d) { return Masa(Matrix::Identity(d, d)); }

  Index dim() const { return u_.rows(); }
  const Matrix& basis() const { return u_; }

  /// u_k u_k*
  Matrix projection(Index k) const { return u_.col(k) * u_.col(k).adjoint(); }

  /// U diag(values) U*
  Matrix element(const Vector& values) const { return u_ * values.asDiagonal() * u_.adjoint(); }

  Matrix to_masa_coordinates(const Matrix& x) const { return u_.adjoint() * x * u_; }
  Matrix from_masa_coordinates(const Matrix& x) const { return u_ * x * u_.adjoint(); }

 private:
  Matrix u_;
};

/// Masa generated by a self-adjoint c with simple spectrum.
inline Masa masa_from_selfadjoint(const Matrix& c, const Tolerance& tol = {}) {
  const EigenDecomposition eig = hermitian_eig(c, tol);
  const double scale = eig.values.cwiseAbs().maxCoeff();
  for (Index k = 1; k < eig.values.size(); ++k)
    if (eig.values(k) - eig.values(k - 1) <= tol.threshold(scale))
      throw DegenerateSpectrum("masa_from_selfadjoint: eigenvalues " + std::to_string(k - 1) +
                               " and " + std::to_string(k) + " coincide");
  return Masa(eig.vectors, tol);
}

// ---------------------------------------------------------------------------
// Invariance

/// max_k ‖offdiag(U* Φ(u_k u_k*) U)‖_F together with max_k ‖Φ(u_k u_k*)‖_F.
template <MatrixMap Map>
std::pair<double, double> invariance_residual(const Map& phi, const Masa& c) {
  if (phi.dim() != c.dim()) throw DimensionMismatch("invariance: map and masa dimensions differ");
  double worst = 0.0;
  double scale = 0.0;
  for (Index k = 0; k < c.dim(); ++k) {
    const Matrix image = phi.apply(c.projection(k));
    scale = std::max(scale, image.norm());
    worst = std::max(worst, offdiag(c.to_masa_coordinates(image)).norm());
  }
  return {worst, scale};
}

template <MatrixMap Map>
Verdict is_invariant(const Map& phi, const Masa& c, const Tolerance& tol = {}) {
  const auto [r, scale] = invariance_residual(phi, c);
  return decide(r, tol.threshold(scale));
}

inline Verdict is_invariant_map(const KrausMap& t, const Masa& c, const Tolerance& tol = {}) {
  return is_invariant(t, c, tol);
}

inline Verdict is_invariant_generator(const GkslGenerator& l, const Masa& c,
                                      const Tolerance& tol = {}) {
  return is_invariant(l, c, tol);
}

// ---------------------------------------------------------------------------
// Kraus coefficient criterion: [c, L_i] = Σ_j c_ij(c) L_j with c_ij(c*) = c_ji(c)*

/// c_ij(E_kk) for every basis projection, as diagonal vectors in masa
/// coordinates. coefficient(k, i, j) = conj(coefficient(k, j, i)).
struct KrausCoefficientWitness {
  Index dim = 0;
  Index family_size = 0;
  std::vector<std::vector<Vector>> blocks;  // blocks[k][i·n + j]
  double residual = 0.0;
  double threshold = 0.0;

  const Vector& coefficient(Index k, Index i, Index j) const {
    return blocks[static_cast<std::size_t>(k)][static_cast<std::size_t>(i * family_size + j)];
  }

  /// c_ij(c) for c = Σ_k values_k E_kk, by linearity.
  Vector coefficient_for(const Vector& values, Index i, Index j) const {
    Vector out = Vector::Zero(dim);
    for (Index k = 0; k < dim; ++k) out += values(k) * coefficient(k, i, j);
    return out;
  }
};

struct Infeasible {
  double residual = 0.0;
  double threshold = 0.0;
};

namespace detail {

// Criterion for a family already in masa coordinates. Returns the witness and
// the squared residual / squared right-hand-side norm.
inline KrausCoefficientWitness kraus_coefficients_in_basis(const std::vector<Matrix>& ops,
                                                           const Tolerance& tol, double& res2,
                                                           double& rhs2) {
  const Index n = static_cast<Index>(ops.size());
  const Index d = ops.front().rows();
  KrausCoefficientWitness w;
  w.dim = d;
  w.family_size = n;
  w.blocks.assign(static_cast<std::size_t>(d),
                  std::vector<Vector>(static_cast<std::size_t>(n * n), Vector::Zero(d)));
  res2 = 0.0;
  rhs2 = 0.0;
  for (Index k = 0; k < d; ++k) {
    for (Index r = 0; r < d; ++r) {
      // unknowns (c_ij)_r: complex for i < j, real for i = j
      RealLinearSystem sys;
      std::vector<Index> var(static_cast<std::size_t>(n * n), -1);
      for (Index i = 0; i < n; ++i)
        for (Index j = i; j < n; ++j)
          var[static_cast<std::size_t>(i * n + j)] =
              (i == j) ? sys.add_real_unknown() : sys.add_complex_unknown();
      for (Index i = 0; i < n; ++i) {
        for (Index s = 0; s < d; ++s) {
          const double sign = (r == k ? 1.0 : 0.0) - (s == k ? 1.0 : 0.0);
          const Index eq = sys.add_equation(sign * ops[i](r, s));
          for (Index j = 0; j < n; ++j) {
            const cd a = ops[j](r, s);
            if (j >= i)
              sys.add_term(eq, var[static_cast<std::size_t>(i * n + j)], a);
            else
              sys.add_conjugate_term(eq, var[static_cast<std::size_t>(j * n + i)], a);
          }
        }
      }
      const RealVector b = sys.rhs();
      const LeastSquaresResult ls = real_linear_least_squares(sys.matrix(), b, tol);
      res2 += ls.residual * ls.residual;
      rhs2 += b.squaredNorm();
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
          const cd value = (j >= i) ? sys.value(ls.solution, var[static_cast<std::size_t>(i * n + j)])
                                    : std::conj(sys.value(ls.solution,
                                                          var[static_cast<std::size_t>(j * n + i)]));
          w.blocks[static_cast<std::size_t>(k)][static_cast<std::size_t>(i * n + j)](r) = value;
        }
    }
  }
  return w;
}

inline std::vector<Matrix> rotate_family(const std::vector<Matrix>& ops, const Masa& c) {
  std::vector<Matrix> out;
  for (const Matrix& op : ops) out.push_back(c.to_masa_coordinates(op));
  return out;
}

}  // namespace detail

inline std::variant<KrausCoefficientWitness, Infeasible> solve_kraus_coefficients(
    const KrausMap& t, const Masa& c, const Tolerance& tol = {}) {
  if (t.dim() != c.dim()) throw DimensionMismatch("solve_kraus_coefficients: dimensions differ");
  double res2 = 0.0, rhs2 = 0.0;
  KrausCoefficientWitness w =
      detail::kraus_coefficients_in_basis(detail::rotate_family(t.operators(), c), tol, res2, rhs2);
  w.residual = std::sqrt(res2);
  const double thr = tol.threshold(std::sqrt(rhs2));
  if (w.residual > thr) return Infeasible{w.residual, thr};
  w.threshold = thr;
  return w;
}

// ---------------------------------------------------------------------------
// Generator coefficient criterion

/// c_i = U diag(c_ops[i]) U*, γ = U diag(gamma) U*, and the Kraus witness for
/// the shifted family K_i = L_i − c_i (all diagonals in masa coordinates).
struct GeneratorCoefficientWitness {
  std::vector<Vector> c_ops;
  RealVector gamma;
  KrausCoefficientWitness inner_witness;
  double stage1_residual = 0.0;
  double stage2_residual = 0.0;
  double stage3_residual = 0.0;
  double residual = 0.0;
  double threshold = 0.0;
};

/// Staged solver. Stage 1 takes x_ik = (L_i)_kk in masa coordinates, an exact
/// solution of the row-k system Σ_i conj(x_ik)(L_i)_ks = Σ_i conj((L_i)_kk)(L_i)_ks
/// that also leaves the shifted family with zero diagonal. Stage 2 reads γ off
/// L(E_kk) and checks everything else in L(E_kk) against Σ K_i* E_kk K_i.
/// Stage 3 runs the Kraus criterion on the K_i.
inline std::variant<GeneratorCoefficientWitness, Infeasible> solve_generator_coefficients(
    const GkslGenerator& l, const Masa& c, const Tolerance& tol = {}) {
  if (l.dim() != c.dim())
    throw DimensionMismatch("solve_generator_coefficients: dimensions differ");
  const Index d = l.dim();
  const Index n = static_cast<Index>(l.operators().size());
  const GkslGenerator rot = rotated(l, c.basis());
  const std::vector<Matrix>& ops = rot.operators();

  GeneratorCoefficientWitness w;
  std::vector<Matrix> shifted;
  for (Index i = 0; i < n; ++i) {
    w.c_ops.push_back(ops[i].diagonal());
    Matrix k = ops[i];
    k.diagonal().setZero();
    shifted.push_back(std::move(k));
  }

  double s1 = 0.0, s2 = 0.0, scale2 = 0.0;
  w.gamma = RealVector::Zero(d);
  for (Index k = 0; k < d; ++k) {
    for (Index s = 0; s < d; ++s) {
      if (s == k) continue;
      cd lhs = 0.0, rhs = 0.0;
      for (Index i = 0; i < n; ++i) {
        lhs += std::conj(w.c_ops[i](k)) * ops[i](k, s);
        rhs += std::conj(ops[i](k, k)) * ops[i](k, s);
      }
      s1 += std::norm(lhs - rhs);
    }
    const Matrix image = rot.apply(matrix_unit(d, k, k));
    Matrix sandwich = Matrix::Zero(d, d);
    for (const Matrix& kk : shifted) sandwich += kk.row(k).adjoint() * kk.row(k);
    const cd gamma = image(k, k) - sandwich(k, k);
    w.gamma(k) = gamma.real();
    Matrix defect = image - sandwich;
    defect(k, k) -= gamma.real();
    s2 += defect.squaredNorm();
    scale2 += image.squaredNorm();
  }
  w.stage1_residual = std::sqrt(s1);
  w.stage2_residual = std::sqrt(s2);

  double res3 = 0.0, rhs3 = 0.0;
  w.inner_witness = detail::kraus_coefficients_in_basis(shifted, tol, res3, rhs3);
  w.stage3_residual = std::sqrt(res3);
  w.inner_witness.residual = w.stage3_residual;
  w.residual = std::sqrt(s1 + s2 + res3);
  const double thr = tol.threshold(std::sqrt(scale2 + rhs3));
  if (w.residual > thr) return Infeasible{w.residual, thr};
  w.threshold = thr;
  return w;
}

/// Σ_i (L_i − c_i)* c (L_i − c_i) + γc for c = u_k u_k*: the right-hand side
/// of condition 3, in original coordinates.
inline Matrix condition3_image(const GkslGenerator& l, const Masa& c,
                               const GeneratorCoefficientWitness& w, Index k) {
  const Index d = l.dim();
  const Matrix p = c.projection(k);
  Matrix out = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < l.operators().size(); ++i) {
    const Matrix ki = l.operators()[i] - c.element(w.c_ops[i]);
    out += ki.adjoint() * p * ki;
  }
  out += c.element(w.gamma.cast<cd>()) * p;
  return out;
}

// ---------------------------------------------------------------------------
// Split feasibility relative to a masa

inline SplitVerdict cp_part_diagonalizable(const GkslGenerator& l, const Masa& c,
                                           const Tolerance& tol = {}) {
  const Verdict inv = is_invariant_generator(l, c, tol);
  if (!inv)
    throw NotInvariant("cp_part_diagonalizable: generator does not leave the masa invariant "
                       "(residual " + std::to_string(inv.residual) + ")");
  return cp_part_split(l, c.basis(), tol);
}

inline SplitVerdict hamiltonian_part_diagonalizable(const GkslGenerator& l, const Masa& c,
                                                    const Tolerance& tol = {}) {
  if (l.dim() != c.dim()) throw DimensionMismatch("hamiltonian_part_diagonalizable");
  return hamiltonian_split(l, c.basis(), tol);
}

// ---------------------------------------------------------------------------
// Rebolledo's criterion

struct CompatiblePattern {
  std::vector<Index> columns;  // columns[r] = allowed column of row r, or −1
  Index dimension = 0;
  std::vector<Matrix> basis;   // in masa coordinates
};

struct RebolledoVerdict {
  std::vector<Verdict> per_operator;
  std::vector<RealVector> operator_coefficients;  // c_K per operator (when it passes)
  std::vector<CompatiblePattern> compatible;      // nonzero intersections only
  std::size_t patterns_examined = 0;

  bool all_operators_pass() const {
    return std::all_of(per_operator.begin(), per_operator.end(),
                       [](const Verdict& v) { return v.holds; });
  }
  bool has_compatible_element() const { return !compatible.empty(); }
};

/// Per-operator test with the generating element c = diag(1, …, d): K passes
/// iff every row has at most one nonzero entry, and then c K − K c = c_K K
/// with (c_K)_r = r − σ(r). Compatible-element analysis intersects span{L_i}
/// with every support pattern rows → (one column | none).
inline RebolledoVerdict rebolledo_check(const KrausMap& t, const Masa& c,
                                        const Tolerance& tol = {}, Index max_dim = 5) {
  if (t.dim() != c.dim()) throw DimensionMismatch("rebolledo_check: dimensions differ");
  const Index d = t.dim();
  if (d > max_dim)
    throw PatternExplosion("rebolledo_check: (d+1)^d patterns exceed the cap at d = " +
                           std::to_string(d));
  const std::vector<Matrix> ops = detail::rotate_family(t.operators(), c);

  RebolledoVerdict out;
  for (const Matrix& k : ops) {
    double off2 = 0.0;
    RealVector ck = RealVector::Zero(d);
    for (Index r = 0; r < d; ++r) {
      Index best = 0;
      for (Index s = 1; s < d; ++s)
        if (std::abs(k(r, s)) > std::abs(k(r, best))) best = s;
      for (Index s = 0; s < d; ++s)
        if (s != best) off2 += std::norm(k(r, s));
      if (std::abs(k(r, best)) > 0.0) ck(r) = static_cast<double>(r - best);
    }
    out.per_operator.push_back(decide(std::sqrt(off2), tol.threshold(k.norm())));
    out.operator_coefficients.push_back(ck);
  }

  const Matrix span = range_basis(detail::stacked(ops), tol);
  std::vector<Index> columns(static_cast<std::size_t>(d), -1);
  // odometer over {−1, 0, …, d−1}^d
  while (true) {
    ++out.patterns_examined;
    std::vector<Index> coords;
    for (Index r = 0; r < d; ++r)
      if (columns[static_cast<std::size_t>(r)] >= 0)
        coords.push_back(columns[static_cast<std::size_t>(r)] * d + r);  // column-major vec index
    if (!coords.empty() && span.cols() > 0) {
      Matrix selector = Matrix::Zero(d * d, static_cast<Index>(coords.size()));
      for (std::size_t m = 0; m < coords.size(); ++m) selector(coords[m], static_cast<Index>(m)) = 1.0;
      Matrix joint(d * d, span.cols() + selector.cols());
      joint << span, -selector;
      const Matrix ns = null_space(joint, tol);
      if (ns.cols() > 0) {
        CompatiblePattern pat;
        pat.columns = columns;
        pat.dimension = ns.cols();
        for (Index q = 0; q < ns.cols(); ++q)
          pat.basis.push_back(unvec(span * ns.col(q).head(span.cols()), d));
        out.compatible.push_back(std::move(pat));
      }
    }
    Index pos = 0;
    while (pos < d) {
      Index& v = columns[static_cast<std::size_t>(pos)];
      if (v + 1 < d) {
        ++v;
        break;
      }
      v = -1;
      ++pos;
    }
    if (pos == d) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Constructive masa on M_2

struct M2MasaResult {
  Masa masa;
  double eigenvalue = 0.0;
  Eigen::Vector3d axis;        // Y = axis · (σx, σy, σz)
  double span_residual = 0.0;  // distance of α(Y) from span{1, Y}
  Verdict invariance;
};

inline std::array<Matrix, 4> pauli_basis() {
  Matrix one = Matrix::Identity(2, 2);
  Matrix sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, -kI, kI, 0;
  sz << 1, 0, 0, -1;
  return {one, sx, sy, sz};
}

/// α given by its images of (1, σx, σy, σz). α must be a *-map with α(1) ∈ ℂ1.
/// The traceless self-adjoint part of α restricted to traceless self-adjoint
/// matrices is a real 3×3 matrix; an eigenvector for a real eigenvalue
/// (which exists, the dimension being odd) spans an invariant masa.
inline M2MasaResult find_masa_m2(const std::array<Matrix, 4>& images, const Tolerance& tol = {}) {
  const auto sigma = pauli_basis();
  for (const Matrix& m : images) require_dim(m, 2, "find_masa_m2");
  double scale = 0.0;
  for (const Matrix& m : images) scale = std::max(scale, m.norm());
  const Matrix& a1 = images[0];
  const Matrix scalar_part = (a1.trace() / 2.0) * Matrix::Identity(2, 2);
  if ((a1 - scalar_part).norm() > tol.threshold(scale))
    throw PreconditionFailed("find_masa_m2: α(1) is not a multiple of 1");
  for (std::size_t j = 0; j < 4; ++j)
    if ((images[j] - images[j].adjoint()).norm() > tol.threshold(scale))
      throw PreconditionFailed("find_masa_m2: α is not a *-map");

  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = 0.5 * (sigma[i + 1] * images[j + 1]).trace().real();

  Eigen::EigenSolver<Eigen::Matrix3d> es(m);
  if (es.info() != Eigen::Success) throw NumericalFailure("find_masa_m2: eigensolver failed");
  int pick = 0;
  for (int k = 1; k < 3; ++k) {
    const double ik = std::abs(es.eigenvalues()(k).imag());
    const double ip = std::abs(es.eigenvalues()(pick).imag());
    if (ik < ip || (ik == ip && es.eigenvalues()(k).real() > es.eigenvalues()(pick).real()))
      pick = k;
  }
  Eigen::Vector3cd v = es.eigenvectors().col(pick);
  Eigen::Index at = 0;
  v.cwiseAbs().maxCoeff(&at);
  v *= std::conj(v(at)) / std::abs(v(at));
  Eigen::Vector3d y = v.real().normalized();

  Matrix big_y = y(0) * sigma[1] + y(1) * sigma[2] + y(2) * sigma[3];
  const Masa masa = masa_from_selfadjoint(big_y, tol);

  Matrix alpha_y = y(0) * images[1] + y(1) * images[2] + y(2) * images[3];
  Matrix span(4, 2);
  span.col(0) = vec(Matrix::Identity(2, 2));
  span.col(1) = vec(big_y);
  const Vector coeff = complex_least_squares(span, vec(alpha_y), tol);
  const double span_res = (span * coeff - vec(alpha_y)).norm();

  // invariance of C_Y = span{1, Y}: both basis projections map into C_Y
  Superoperator alpha_map(2, Matrix::Zero(4, 4));
  {
    Matrix sm(4, 4);
    // vec(α(X)) for X = Σ x_j σ_j with x_j = tr(σ_j X)/2
    Matrix coords(4, 4);
    for (int j = 0; j < 4; ++j) coords.row(j) = vec(sigma[j]).adjoint() / 2.0;
    Matrix imgs(4, 4);
    for (int j = 0; j < 4; ++j) imgs.col(j) = vec(images[j]);
    sm = imgs * coords;
    alpha_map = Superoperator(2, sm);
  }
  const Verdict inv = is_invariant(alpha_map, masa, tol);
  return M2MasaResult{masa, es.eigenvalues()(pick).real(), y, span_res, inv};
}

template <MatrixMap Map>
M2MasaResult find_masa_m2(const Map& alpha, const Tolerance& tol = {}) {
  if (alpha.dim() != 2) throw DimensionMismatch("find_masa_m2: map must act on M_2");
  const auto sigma = pauli_basis();
  return find_masa_m2(std::array<Matrix, 4>{alpha.apply(sigma[0]), alpha.apply(sigma[1]),
                                            alpha.apply(sigma[2]), alpha.apply(sigma[3])},
                      tol);
}

// ---------------------------------------------------------------------------
// Classical restriction

/// A_kl = Re⟨u_k, Φ(u_l u_l*) u_k⟩, so Φ(Σ_l d_l u_l u_l*) = Σ_k (A d)_k u_k u_k*.
template <MatrixMap Map>
RealMatrix classical_restriction(const Map& phi, const Masa& c, const Tolerance& tol = {}) {
  const Verdict inv = is_invariant(phi, c, tol);
  if (!inv)
    throw NotInvariant("classical_restriction: masa is not invariant (residual " +
                       std::to_string(inv.residual) + ")");
  const Index d = c.dim();
  RealMatrix a(d, d);
  double imag = 0.0, scale = 0.0;
  for (Index l = 0; l < d; ++l) {
    const Matrix image = c.to_masa_coordinates(phi.apply(c.projection(l)));
    scale = std::max(scale, image.norm());
    for (Index k = 0; k < d; ++k) {
      a(k, l) = image(k, k).real();
      imag = std::max(imag, std::abs(image(k, k).imag()));
    }
  }
  if (imag > tol.threshold(scale))
    throw NumericalFailure("classical_restriction: diagonal has imaginary part " +
                           std::to_string(imag));
  return a;
}

/// Zero row sums and nonnegative off-diagonal entries, within the threshold.
inline Verdict is_q_matrix(const RealMatrix& a, double threshold) {
  double worst = 0.0;
  for (Index k = 0; k < a.rows(); ++k) {
    worst = std::max(worst, std::abs(a.row(k).sum()));
    for (Index l = 0; l < a.cols(); ++l)
      if (k != l) worst = std::max(worst, -a(k, l));
  }
  return decide(worst, threshold);
}

/// Unit row sums and nonnegative entries, within the threshold.
inline Verdict is_stochastic(const RealMatrix& a, double threshold) {
  double worst = 0.0;
  for (Index k = 0; k < a.rows(); ++k) {
    worst = std::max(worst, std::abs(a.row(k).sum() - 1.0));
    for (Index l = 0; l < a.cols(); ++l) worst = std::max(worst, -a(k, l));
  }
  return decide(worst, threshold);
}

}  // namespace cpmasa
