#pragma once

#include "fmchain/common.hpp"

#include <functional>
#include <variant>
#include <vector>

namespace fmc::toeplitz {

using BlockFunction = std::function<CMatrix(long)>;
using GeneratingFunction = std::function<CMatrix(Real)>;
using SpectralFunction = std::function<Real(Real)>;

/// Declared decay ||T(k)|| <= scale * rate^|k| of the Fourier blocks.
struct DecayBound {
  Real scale = 1.0;
  Real rate = 0.0;
};

/// Hermitian block Toeplitz operator on l^2(N) (x) C^d. Block (i, j) of
/// the operator is coefficient(j - i), and coefficient(-k) = coefficient(k)*.
class BlockToeplitz {
 public:
  /// `blocks` must be defined for every integer k. `closed_form`, when
  /// given, replaces the truncated Fourier sum for the generating function.
  BlockToeplitz(Eigen::Index block_dim, BlockFunction blocks, DecayBound decay,
                GeneratingFunction closed_form = {});

  /// Finite band: coefficient(k) = nonnegative[k] for 0 <= k < size and zero
  /// beyond; negative k follow by adjoint.
  static BlockToeplitz banded(std::vector<CMatrix> nonnegative);

  Eigen::Index block_dim() const noexcept { return d_; }
  CMatrix coefficient(long k) const { return blocks_(k); }
  /// Number of Fourier terms on each side kept by the truncated sum.
  long reach() const noexcept { return reach_; }

  /// T(theta) = sum_k coefficient(k) e^{ik theta}; Hermitian.
  CMatrix generating(Real theta) const;
  /// Truncated Fourier sum, ignoring any closed form.
  CMatrix generating_series(Real theta) const;

 private:
  Eigen::Index d_;
  BlockFunction blocks_;
  long reach_ = 0;
  std::vector<CMatrix> cached_;  // coefficients 0..reach
  GeneratingFunction closed_form_;
};

/// Leading n x n block principal submatrix (n blocks of size d).
CMatrix finite_section(const BlockToeplitz& t, long n);

struct EigDistribution {
  RealVector points;  // ascending
  Real weight = 0.0;  // uniform mass per point

  /// Empirical distribution function at t.
  Real cdf(Real t) const;
};

EigDistribution eig_distribution(const CMatrix& section);

/// inf and sup of the spectra of T(theta) over the circle.
struct SpectralBounds {
  Real lower = 0.0;
  Real upper = 0.0;
};
SpectralBounds spectral_bounds(const BlockToeplitz& t, long grid = 1024);

/// Limiting eigenvalue distribution function of the finite sections at t,
/// (1/d) sum_k |{theta : tau_k(theta) <= t}| / 2pi, sampled on `grid` nodes.
Real limiting_distribution(const BlockToeplitz& t, Real level, long grid);

/// Richardson-checked trapezoid rule on the circle.
struct QuadratureOptions {
  long initial_nodes = 256;
  long max_nodes = 1L << 16;
  Real tolerance = 1e-9;
};

struct QuadratureResult {
  Real value = 0.0;
  long nodes = 0;
  Real richardson_gap = 0.0;
};

/// (1/2pi) int (1/d) tr f(T(theta)) dtheta.
QuadratureResult szego_density(const BlockToeplitz& t, const SpectralFunction& f,
                               const QuadratureOptions& options = {});

/// Sum of f over the eigenvalues of a Hermitian matrix.
Real trace_function(const CMatrix& section, const SpectralFunction& f);

/// (1/(nd)) tr f(section_n).
Real section_average(const BlockToeplitz& t, const SpectralFunction& f, long n);

/// tr f(section_{n+1}) - tr f(section_n); converges to d * szego_density.
Real szego_rate(const BlockToeplitz& t, const SpectralFunction& f, long n);

/// tr f(section_n) for n = 1..n_max.
std::vector<Real> section_traces(const BlockToeplitz& t, const SpectralFunction& f, long n_max);

/// Complex polynomial, coefficients in increasing degree.
struct Polynomial {
  std::vector<Complex> coeffs;

  Complex operator()(Complex z) const;
  CMatrix operator()(const CMatrix& m) const;
};

using MatrixFunction = std::variant<Polynomial, SpectralFunction>;

struct AmalgamatedResult {
  CMatrix finite;  // E_n of the block product
  CMatrix limit;   // circle average of A_1 f_1(T_1) A_2 ... A_{k+1}
  Real gap = 0.0;  // operator norm of the difference
  long nodes = 0;
};

/// E_n((1 (x) A_1) f_1(P_n T_1 P_n) (1 (x) A_2) ... (1 (x) A_{k+1})) against
/// its circle average. Only polynomial functions are supported.
AmalgamatedResult amalgamated_szego(const std::vector<BlockToeplitz>& ts,
                                    const std::vector<MatrixFunction>& fs,
                                    const std::vector<CMatrix>& as, long n);

/// Relabels the ascending spectrum of an nd x nd section as tau(k, j),
/// column j holding the j-th consecutive group of d eigenvalues. With this
/// labelling the spectra of consecutive sections interlace as
/// tau^{n+1}(k, j) <= tau^n(k, j) <= tau^{n+1}(k, j+1).
RealMatrix interlacing_labels(const RealVector& ascending, Eigen::Index d);

/// Largest violation of the interlacing inequalities (0 when they hold).
Real interlacing_violation(const RealVector& section_n, const RealVector& section_n1, Eigen::Index d);

}  // namespace fmc::toeplitz
