#include "fmchain/classical.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace fmc::classical {

namespace {

std::string fmt_real(Real v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void guard_path_table(Eigen::Index d, int sites) {
  const long double size = std::pow(static_cast<long double>(d), sites);
  if (size > kMaxPathTable)
    throw ResourceError("resource_limit", "path table " + std::to_string(d) + "^" +
                                              std::to_string(sites) +
                                              " exceeds the 2^24 entry budget");
}

// Forward weights over (emitted prefix, current hidden state); row-major so
// that one product with the reordered Q yields the next level in place.
using Forward = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Column tau * d + sigma holds Q[., (sigma, tau)].
RealMatrix emission_major(const HmmExtension& q) {
  const Eigen::Index d = q.dim();
  RealMatrix w(d, d * d);
  for (Eigen::Index sigma = 0; sigma < d; ++sigma)
    for (Eigen::Index tau = 0; tau < d; ++tau) w.col(tau * d + sigma) = q.matrix().col(sigma * d + tau);
  return w;
}

Forward advance(const Forward& alpha, const RealMatrix& w) {
  const Eigen::Index d = alpha.cols();
  Forward next = alpha * w;  // (N) x (d*d), row-major
  Forward out = Eigen::Map<const Forward>(next.data(), alpha.rows() * d, d);
  return out;
}

Forward initial_forward(const HmmExtension& q) {
  return q.base().invariant().transpose();
}

std::size_t sample_index(const Eigen::Ref<const RealVector>& weights, Real u) {
  Real acc = 0.0;
  const auto n = static_cast<std::size_t>(weights.size());
  for (std::size_t i = 0; i < n; ++i) {
    acc += weights(static_cast<Eigen::Index>(i));
    if (u < acc) return i;
  }
  // u landed in the roundoff gap above the total mass: take the last
  // state carrying positive weight.
  for (std::size_t i = n; i-- > 0;)
    if (weights(static_cast<Eigen::Index>(i)) > 0.0) return i;
  return n - 1;
}

}  // namespace

void validate_row_stochastic(const RealMatrix& p, const char* what) {
  if (p.rows() == 0 || p.cols() == 0)
    throw ValidationError("not_stochastic", std::string(what) + " is empty");
  if (!p.allFinite())
    throw ValidationError("not_stochastic", std::string(what) + " has non-finite entries");
  if (p.minCoeff() < 0.0)
    throw ValidationError("not_stochastic",
                          std::string(what) + " has a negative entry " + fmt_real(p.minCoeff()));
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    const Real s = p.row(r).sum();
    if (std::abs(s - 1.0) > kStochasticTol)
      throw ValidationError("not_stochastic", std::string(what) + " row " + std::to_string(r) +
                                                  " sums to " + fmt_real(s));
  }
}

RealVector invariant_measure(const RealMatrix& p) {
  if (p.rows() != p.cols())
    throw ValidationError("not_stochastic",
                          "transition matrix must be square, got " + describe_shape(p.rows(), p.cols()));
  validate_row_stochastic(p, "transition matrix");
  const Eigen::Index d = p.rows();
  const RealMatrix pt = p.transpose();
  RealVector mu = RealVector::Constant(d, 1.0 / static_cast<Real>(d));
  Real residual = 0.0;
  for (long it = 0; it < kInvariantMaxIter; ++it) {
    RealVector next = pt * mu;
    residual = (next - mu).lpNorm<1>();
    if (residual <= kInvariantResidual) return mu;
    mu = next / next.sum();
  }
  std::ostringstream os;
  os << "power iteration for the invariant measure stalled at residual " << residual << " after "
     << kInvariantMaxIter << " iterations (periodic or reducible chain?)";
  throw ConvergenceError("non_convergence", os.str());
}

StochasticMatrix::StochasticMatrix(RealMatrix p) : p_(std::move(p)), mu_(invariant_measure(p_)) {}

Real markov_entropy_rate(const StochasticMatrix& p) {
  Real h = 0.0;
  for (Eigen::Index w = 0; w < p.dim(); ++w)
    h += p.invariant()(w) * shannon_entropy(p.matrix().row(w).transpose());
  return h;
}

HmmExtension::HmmExtension(StochasticMatrix base, RealMatrix entries)
    : base_(std::move(base)), q_(std::move(entries)) {
  const Eigen::Index d = base_.dim();
  if (q_.rows() != d || q_.cols() != d * d)
    throw ValidationError("dimension_mismatch", "extension matrix must be " + describe_shape(d, d * d) +
                                                    ", got " + describe_shape(q_.rows(), q_.cols()));
  validate_row_stochastic(q_, "extension matrix");
  const RealMatrix& p = base_.matrix();
  for (Eigen::Index w = 0; w < d; ++w) {
    for (Eigen::Index f = 0; f < d; ++f) {
      Real hidden = 0.0;   // Q(e_f (x) 1)
      Real emitted = 0.0;  // Q(1 (x) e_f)
      for (Eigen::Index g = 0; g < d; ++g) {
        hidden += q_(w, f * d + g);
        emitted += q_(w, g * d + f);
      }
      const Real target = p(w, f);
      if (std::abs(hidden - target) > kStochasticTol || std::abs(emitted - target) > kStochasticTol)
        throw ValidationError("not_compatible", "extension row " + std::to_string(w) +
                                                    " is not compatible with P at column " +
                                                    std::to_string(f));
    }
  }
}

HmmExtension markov_extension(const StochasticMatrix& p) {
  const Eigen::Index d = p.dim();
  RealMatrix q = RealMatrix::Zero(d, d * d);
  for (Eigen::Index w = 0; w < d; ++w)
    for (Eigen::Index s = 0; s < d; ++s) q(w, s * d + s) = p.matrix()(w, s);
  return HmmExtension(p, std::move(q));
}

HmmExtension independent_extension(const StochasticMatrix& p) {
  const Eigen::Index d = p.dim();
  RealMatrix q(d, d * d);
  for (Eigen::Index w = 0; w < d; ++w)
    for (Eigen::Index s = 0; s < d; ++s)
      for (Eigen::Index t = 0; t < d; ++t) q(w, s * d + t) = p.matrix()(w, s) * p.matrix()(w, t);
  return HmmExtension(p, std::move(q));
}

PathDistribution hmm_marginal(const HmmExtension& q, int n) {
  if (n < 1) throw ValidationError("invalid_argument", "marginal length must be >= 1");
  guard_path_table(q.dim(), n);
  const RealMatrix w = emission_major(q);
  Forward alpha = initial_forward(q);
  for (int k = 0; k < n; ++k) alpha = advance(alpha, w);
  return PathDistribution{n, q.dim(), alpha.rowwise().sum()};
}

EntropyIncrements entropy_rate_increments_classical(const HmmExtension& q, int n_max) {
  if (n_max < 1) throw ValidationError("invalid_argument", "n_max must be >= 1");
  guard_path_table(q.dim(), n_max + 1);
  const RealMatrix w = emission_major(q);
  Forward alpha = initial_forward(q);

  EntropyIncrements out;
  out.increments.reserve(static_cast<std::size_t>(n_max));
  Real previous = 0.0;
  for (int sites = 1; sites <= n_max + 1; ++sites) {
    alpha = advance(alpha, w);
    const Real h = shannon_entropy(alpha.rowwise().sum());
    if (sites >= 2) out.increments.push_back(h - previous);
    previous = h;
  }
  for (std::size_t i = 1; i < out.increments.size(); ++i) {
    if (out.increments[i] > out.increments[i - 1] + 1e-10)
      throw NumericError("internal_consistency",
                         "conditional entropy increased at n=" + std::to_string(i + 1));
  }
  out.estimate = out.increments.back();
  return out;
}

Real blackwell_filter_estimate(const HmmExtension& q, long steps, long burn_in, std::uint64_t seed) {
  if (burn_in < 0 || steps <= burn_in)
    throw ValidationError("invalid_argument", "need steps > burn_in >= 0");
  const Eigen::Index d = q.dim();
  const RealMatrix w = emission_major(q);
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return static_cast<Real>(rng() >> 11) * 0x1.0p-53; };

  RealVector nu = q.base().invariant();
  auto hidden = static_cast<Eigen::Index>(sample_index(nu, uniform()));
  RealVector predictive(d);
  RealVector posterior(d);

  Real total = 0.0;
  for (long t = 0; t < steps; ++t) {
    for (Eigen::Index tau = 0; tau < d; ++tau)
      predictive(tau) = nu.dot(w.middleCols(tau * d, d).rowwise().sum());
    if (t >= burn_in) total += shannon_entropy(predictive);

    const auto pick = static_cast<Eigen::Index>(sample_index(q.matrix().row(hidden).transpose(), uniform()));
    const Eigen::Index sigma = pick / d;
    const Eigen::Index tau = pick % d;
    hidden = sigma;

    posterior = w.middleCols(tau * d, d).transpose() * nu;
    const Real norm = posterior.sum();
    if (!(norm > 0.0))
      throw NumericError("degenerate_observation",
                         "filter posterior vanished at step " + std::to_string(t));
    nu = posterior / norm;
  }
  return total / static_cast<Real>(steps - burn_in);
}

}  // namespace fmc::classical
