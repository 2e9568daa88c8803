// random.hpp: seeded, platform-independent random matrices
//
// std:: distributions are implementation-defined, so uniforms and normals are
// derived here directly from mt19937_64 output to keep seeded runs identical
// across standard libraries.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "cpmasa/linalg.hpp"

namespace cpmasa {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for the k-th independent stream derived from a base seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(th);
    has_spare_ = true;
    return r * std::cos(th);
  }

  cd complex_normal() { return cd(normal(), normal()) / std::sqrt(2.0); }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline Matrix random_ginibre(Rng& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.complex_normal();
  return m;
}

inline Matrix random_hermitian(Rng& rng, Index d) {
  const Matrix g = random_ginibre(rng, d, d);
  return hermitian_part(g);
}

/// rows × cols matrix with orthonormal columns (Haar-distributed), rows ≥ cols.
inline Matrix random_isometry(Rng& rng, Index rows, Index cols) {
  const Matrix g = random_ginibre(rng, rows, cols);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  const Matrix r = qr.matrixQR().topRows(cols).template triangularView<Eigen::Upper>();
  for (Index k = 0; k < cols; ++k) {
    const cd rkk = r(k, k);
    if (std::abs(rkk) > 0.0) q.col(k) *= rkk / std::abs(rkk);
  }
  return q;
}

inline Matrix random_unitary(Rng& rng, Index d) { return random_isometry(rng, d, d); }

/// Random diagonal matrix with complex normal entries.
inline Matrix random_diagonal(Rng& rng, Index d, bool real = false) {
  Matrix m = Matrix::Zero(d, d);
  for (Index k = 0; k < d; ++k) m(k, k) = real ? cd(rng.normal(), 0.0) : rng.complex_normal();
  return m;
}

}  // namespace cpmasa
