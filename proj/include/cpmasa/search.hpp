// search.hpp: multi-start descent on U(d) for invariant masas and
// projections
//
// Both searches are numerical corroboration only: a large best residual is
// evidence, not proof, that no invariant masa exists.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "cpmasa/cpmaps.hpp"
#include "cpmasa/linalg.hpp"
#include "cpmasa/masa.hpp"
#include "cpmasa/random.hpp"

namespace cpmasa {

struct SearchOptions {
  std::size_t restarts = 200;
  std::uint64_t seed = 42;
  double initial_step = 0.1;
  double shrink = 0.5;  // on non-improvement
  double grow = 2.0;    // after an accepted step
  double max_step = 1.0;
  std::size_t max_iterations = 500;
  double gradient_tol = 1e-12;
  double objective_floor = 1e-30;
};

/// Threshold below which a search residual counts as "found".
inline constexpr double kSearchBoundedAway = 1e-3;

namespace detail {

/// exp(x) for skew-Hermitian x, via the Hermitian matrix i·x; exactly unitary
/// up to roundoff.
inline Matrix exp_skew(const Matrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(kI * x));
  const RealVector w = es.eigenvalues();
  Vector phases(w.size());
  for (Index k = 0; k < w.size(); ++k) phases(k) = std::exp(-kI * w(k));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

inline Matrix skew_part(const Matrix& g) { return (g - g.adjoint()) / 2.0; }

/// Polar-factor cleanup against drift away from U(d).
inline Matrix nearest_unitary(const Matrix& u) {
  Eigen::JacobiSVD<Matrix> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

/// Value and Riemannian gradient (skew-Hermitian, in the frame of U) of an
/// objective on U(d). The step is U ← U exp(−t g).
using UnitaryObjective = std::function<std::pair<double, Matrix>(const Matrix&)>;

struct DescentResult {
  Matrix u;
  double value = 0.0;
  std::size_t iterations = 0;
};

inline DescentResult descend(const UnitaryObjective& f, Matrix u, const SearchOptions& opt) {
  auto [value, grad] = f(u);
  double step = opt.initial_step;
  std::size_t it = 0;
  for (; it < opt.max_iterations; ++it) {
    const double g2 = grad.squaredNorm();
    if (value <= opt.objective_floor || std::sqrt(g2) <= opt.gradient_tol) break;
    bool accepted = false;
    while (step > 1e-14) {
      const Matrix trial = u * exp_skew(-step * grad);
      auto [tv, tg] = f(trial);
      if (tv <= value - 1e-4 * step * 2.0 * g2) {
        u = trial;
        value = tv;
        grad = std::move(tg);
        step = std::min(step * opt.grow, opt.max_step);
        accepted = true;
        break;
      }
      step *= opt.shrink;
    }
    if (!accepted) break;
    if (it % 50 == 49) u = nearest_unitary(u);
  }
  u = nearest_unitary(u);
  value = f(u).first;
  return {std::move(u), value, it};
}

inline Matrix start_point(std::uint64_t seed, std::size_t restart, Index d) {
  if (restart == 0) return Matrix::Identity(d, d);
  Rng rng(derive_seed(seed, restart));
  return random_unitary(rng, d);
}

}  // namespace detail

/// R(U) = Σ_k ‖offdiag(U* Φ(U E_kk U*) U)‖²_F and its Riemannian gradient for
/// the map with superoperator s.
inline std::pair<double, Matrix> masa_objective(const Matrix& s, const Matrix& u) {
  const Index d = u.rows();
  double r = 0.0;
  Matrix g = Matrix::Zero(d, d);
  const Matrix sh = s.adjoint();
  for (Index k = 0; k < d; ++k) {
    const Matrix p = u.col(k) * u.col(k).adjoint();
    const Matrix y = u.adjoint() * unvec(s * vec(p), d) * u;
    const Matrix o = offdiag(y);
    r += o.squaredNorm();
    const Matrix z = u.adjoint() * unvec(sh * vec(u * o * u.adjoint()), d) * u;
    Matrix ze = Matrix::Zero(d, d);
    ze.col(k) = z.col(k);
    Matrix ez = Matrix::Zero(d, d);
    ez.row(k) = z.row(k);
    g += y.adjoint() * o - o * y.adjoint() + ze - ez;
  }
  return {r, detail::skew_part(g)};
}

struct MasaSearchResult {
  Masa masa;
  double residual = 0.0;  // best R(U)
  std::size_t best_restart = 0;
  std::vector<double> restart_residuals;
};

/// Multi-start descent for R(U). Restart 0 starts at the identity; restart r > 0
/// at a Haar unitary seeded by derive_seed(seed, r). The minimum is taken in
/// restart order, so ties resolve to the earliest restart.
template <MatrixMap Map>
MasaSearchResult search_masa(const Map& phi, const SearchOptions& opt = {}) {
  if (opt.restarts == 0) throw PreconditionFailed("search_masa: restarts must be positive");
  const Index d = phi.dim();
  const Matrix s = phi.superoperator();
  const detail::UnitaryObjective f = [&s](const Matrix& u) { return masa_objective(s, u); };

  Matrix best_u;
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_restart = 0;
  std::vector<double> all;
  for (std::size_t r = 0; r < opt.restarts; ++r) {
    detail::DescentResult res = detail::descend(f, detail::start_point(opt.seed, r, d), opt);
    all.push_back(res.value);
    if (res.value < best) {
      best = res.value;
      best_u = std::move(res.u);
      best_restart = r;
    }
  }
  return MasaSearchResult{Masa(best_u), best, best_restart, std::move(all)};
}

// ---------------------------------------------------------------------------

struct ProjectionCandidate {
  Matrix projection;
  Index rank = 0;
  double residual = 0.0;  // ‖[q, Φ(q)]‖_F
};

/// f(U) = ‖[q, Φ(q)]‖²_F with q = U P_r U*, and its Riemannian gradient.
inline std::pair<double, Matrix> projection_objective(const Matrix& s, Index rank,
                                                      const Matrix& u) {
  const Index d = u.rows();
  const Matrix q = u.leftCols(rank) * u.leftCols(rank).adjoint();
  const Matrix fq = unvec(s * vec(q), d);
  const Matrix c = commutator(q, fq);
  const Matrix g1 = c * fq.adjoint() - fq.adjoint() * c;
  const Matrix g2 = -unvec(s.adjoint() * vec(commutator(c, q)), d);
  const Matrix g = g1 + g2;
  const Matrix e = u.adjoint() * (g * q - q * g) * u;
  return {c.squaredNorm(), detail::skew_part(e)};
}

/// Projections q with ‖[q, Φ(q)]‖_F ≤ tol.threshold(‖Φ(q)‖_F): 0 and 1, plus
/// deduplicated local minima of the descent for each rank 1 … d−1.
/// opt.restarts is the number of starts per rank.
template <MatrixMap Map>
std::vector<ProjectionCandidate> search_invariant_projections(const Map& phi,
                                                              const SearchOptions& opt = {},
                                                              const Tolerance& tol = {}) {
  const Index d = phi.dim();
  const Matrix s = phi.superoperator();
  std::vector<ProjectionCandidate> out;
  out.push_back({Matrix::Zero(d, d), 0, 0.0});
  {
    const Matrix one = Matrix::Identity(d, d);
    out.push_back({one, d, commutator(one, unvec(s * vec(one), d)).norm()});
  }
  for (Index rank = 1; rank < d; ++rank) {
    const detail::UnitaryObjective f = [&s, rank](const Matrix& u) {
      return projection_objective(s, rank, u);
    };
    for (std::size_t r = 0; r < opt.restarts; ++r) {
      const std::uint64_t stream = static_cast<std::uint64_t>(rank) * 1000003ULL + r;
      const detail::DescentResult res =
          detail::descend(f, detail::start_point(opt.seed, stream, d), opt);
      const Matrix q = res.u.leftCols(rank) * res.u.leftCols(rank).adjoint();
      const Matrix fq = unvec(s * vec(q), d);
      const double residual = commutator(q, fq).norm();
      if (residual > tol.threshold(fq.norm())) continue;
      const bool seen = std::any_of(out.begin(), out.end(), [&](const ProjectionCandidate& c) {
        return c.rank == rank && (c.projection - q).norm() <= 1e-6;
      });
      if (!seen) out.push_back({q, rank, residual});
    }
  }
  return out;
}

}  // namespace cpmasa
