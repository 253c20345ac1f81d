#pragma once

#include "fmchain/common.hpp"

#include <cstdint>
#include <vector>

namespace fmc::classical {

/// Tolerance on row sums and stationarity.
inline constexpr Real kStochasticTol = 1e-12;

/// Power-iteration stopping rule for the invariant measure.
inline constexpr Real kInvariantResidual = 1e-13;
inline constexpr long kInvariantMaxIter = 100000;

/// Largest number of path configurations |Omega|^n a marginal may hold.
inline constexpr long double kMaxPathTable = 16777216.0L;  // 2^24

/// Checks that `p` is non-negative with unit row sums. Works for both the
/// d x d transition matrix and the d x d^2 extension matrix.
void validate_row_stochastic(const RealMatrix& p, const char* what);

/// Stationary probability vector of a row-stochastic matrix, by power
/// iteration from the uniform vector.
RealVector invariant_measure(const RealMatrix& p);

/// Row-stochastic d x d transition matrix together with its invariant
/// measure.
class StochasticMatrix {
 public:
  explicit StochasticMatrix(RealMatrix p);

  Eigen::Index dim() const noexcept { return p_.rows(); }
  const RealMatrix& matrix() const noexcept { return p_; }
  const RealVector& invariant() const noexcept { return mu_; }

 private:
  RealMatrix p_;
  RealVector mu_;
};

/// mu-average of the row entropies of P.
Real markov_entropy_rate(const StochasticMatrix& p);

/// d x d^2 row-stochastic matrix compatible with a transition matrix.
///
/// Row omega is a joint law over (sigma, tau): column sigma * d + tau.
/// sigma is the next hidden state and tau the emitted letter. Compatibility
/// requires both marginals of every row to equal the corresponding row of P.
class HmmExtension {
 public:
  HmmExtension(StochasticMatrix base, RealMatrix entries);

  Eigen::Index dim() const noexcept { return base_.dim(); }
  const StochasticMatrix& base() const noexcept { return base_; }
  const RealMatrix& matrix() const noexcept { return q_; }

  /// Entry for transition omega -> (hidden sigma, emitted tau).
  Real operator()(Eigen::Index omega, Eigen::Index sigma, Eigen::Index tau) const {
    return q_(omega, sigma * dim() + tau);
  }

 private:
  StochasticMatrix base_;
  RealMatrix q_;
};

/// Diagonal embedding Q(f (x) g) = P(fg). Reproduces the Markov chain of P.
HmmExtension markov_extension(const StochasticMatrix& p);

/// Q[omega, (sigma, tau)] = P[omega, sigma] P[omega, tau]: hidden step and
/// emission drawn independently from the same row.
HmmExtension independent_extension(const StochasticMatrix& p);

/// Law of the first `length` emitted letters, indexed lexicographically with
/// the earliest letter most significant.
struct PathDistribution {
  int length = 0;
  Eigen::Index alphabet = 0;
  RealVector probs;
};

PathDistribution hmm_marginal(const HmmExtension& q, int n);

struct EntropyIncrements {
  /// increments[n-1] = H(n+1 letters) - H(n letters), n = 1..n_max.
  std::vector<Real> increments;
  Real estimate = 0.0;
};

EntropyIncrements entropy_rate_increments_classical(const HmmExtension& q, int n_max);

/// Ergodic average of the predictive entropy along a simulated trajectory of
/// the hidden-Markov process (Blackwell's filter).
Real blackwell_filter_estimate(const HmmExtension& q, long steps, long burn_in,
                               std::uint64_t seed);

}  // namespace fmc::classical
