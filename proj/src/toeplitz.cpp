#include "fmchain/toeplitz.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fmc::toeplitz {

namespace {

constexpr Real kTailBound = 1e-13;
constexpr long kMaxReach = 100000;

bool is_power_of_two(long m) { return m > 0 && (m & (m - 1)) == 0; }

std::string num(Real v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

void guard_section(long n, Eigen::Index d) {
  if (n < 1) throw ValidationError("invalid_argument", "section size must be >= 1");
  if (n * d > kMaxDenseDim)
    throw ResourceError("resource_limit", "section of dimension " + std::to_string(n * d) +
                                              " exceeds " + std::to_string(kMaxDenseDim));
}

Real mean_trace_function(const CMatrix& m, const SpectralFunction& f) {
  if (m.rows() == 1) return f(m(0, 0).real());
  return trace_function(m, f) / static_cast<Real>(m.rows());
}

Real trapezoid(const BlockToeplitz& t, const SpectralFunction& f, long nodes) {
  Real sum = 0.0;
  for (long j = 0; j < nodes; ++j) sum += mean_trace_function(t.generating(circle_node(j, nodes)), f);
  return sum / static_cast<Real>(nodes);
}

// M * (1 (x) A) for an (n d) x (n d) matrix M.
CMatrix times_block_diagonal(const CMatrix& m, const CMatrix& a, long n) {
  const Eigen::Index d = a.rows();
  CMatrix out(m.rows(), m.cols());
  for (long j = 0; j < n; ++j) out.middleCols(j * d, d) = m.middleCols(j * d, d) * a;
  return out;
}

CMatrix amalgamated_integrand(const std::vector<BlockToeplitz>& ts, const std::vector<Polynomial>& ps,
                              const std::vector<CMatrix>& as, Real theta) {
  CMatrix acc = as.front();
  for (std::size_t j = 0; j < ts.size(); ++j) acc = acc * ps[j](ts[j].generating(theta)) * as[j + 1];
  return acc;
}

// Golden-section search for the minimum of g on [lo, hi].
template <typename G>
Real golden_minimum(G&& g, Real lo, Real hi) {
  const Real ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  Real x1 = hi - ratio * (hi - lo);
  Real x2 = lo + ratio * (hi - lo);
  Real g1 = g(x1), g2 = g(x2);
  for (int it = 0; it < 80; ++it) {
    if (g1 < g2) {
      hi = x2;
      x2 = x1;
      g2 = g1;
      x1 = hi - ratio * (hi - lo);
      g1 = g(x1);
    } else {
      lo = x1;
      x1 = x2;
      g1 = g2;
      x2 = lo + ratio * (hi - lo);
      g2 = g(x2);
    }
  }
  return std::min(g1, g2);
}

}  // namespace

BlockToeplitz::BlockToeplitz(Eigen::Index block_dim, BlockFunction blocks, DecayBound decay,
                             GeneratingFunction closed_form)
    : d_(block_dim), blocks_(std::move(blocks)), closed_form_(std::move(closed_form)) {
  if (d_ < 1) throw ValidationError("invalid_argument", "block dimension must be >= 1");
  if (!blocks_) throw ValidationError("invalid_argument", "missing block function");
  if (!(decay.rate >= 0.0 && decay.rate < 1.0) || !(decay.scale >= 0.0))
    throw ValidationError("invalid_argument", "decay bound needs scale >= 0 and 0 <= rate < 1");

  reach_ = 0;
  if (decay.rate > 0.0 && decay.scale > 0.0) {
    Real tail = 2.0 * decay.scale * decay.rate / (1.0 - decay.rate);
    while (tail > kTailBound) {
      if (++reach_ > kMaxReach)
        throw ResourceError("resource_limit", "decay too slow for a truncated Fourier sum");
      tail *= decay.rate;
    }
  }
  cached_.reserve(static_cast<std::size_t>(reach_ + 1));
  for (long k = 0; k <= reach_; ++k) cached_.push_back(blocks_(k));

  const long probes = std::min<long>(std::max<long>(reach_, 1), 8);
  for (long k = 0; k <= probes; ++k) {
    const CMatrix up = blocks_(k);
    const CMatrix down = blocks_(-k);
    if (up.rows() != d_ || up.cols() != d_ || down.rows() != d_ || down.cols() != d_)
      throw ValidationError("dimension_mismatch", "block " + std::to_string(k) + " has the wrong shape");
    const Real scale = std::max<Real>(1.0, up.cwiseAbs().maxCoeff());
    if ((down - up.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw ValidationError("not_hermitian", "coefficient(-" + std::to_string(k) +
                                                 ") is not the adjoint of coefficient(" +
                                                 std::to_string(k) + ")");
  }
}

BlockToeplitz BlockToeplitz::banded(std::vector<CMatrix> nonnegative) {
  if (nonnegative.empty()) throw ValidationError("invalid_argument", "banded operator needs a block");
  const Eigen::Index d = nonnegative.front().rows();
  auto blocks = [nonnegative, d](long k) -> CMatrix {
    const auto idx = static_cast<std::size_t>(k < 0 ? -k : k);
    if (idx >= nonnegative.size()) return CMatrix::Zero(d, d);
    return k < 0 ? CMatrix(nonnegative[idx].adjoint()) : nonnegative[idx];
  };
  BlockToeplitz t(d, blocks, DecayBound{0.0, 0.0});
  t.reach_ = static_cast<long>(nonnegative.size()) - 1;
  t.cached_ = std::move(nonnegative);
  return t;
}

CMatrix BlockToeplitz::generating_series(Real theta) const {
  CMatrix out = cached_.front();
  for (long k = 1; k <= reach_; ++k) {
    const CMatrix term = cached_[static_cast<std::size_t>(k)] * std::polar(1.0, static_cast<Real>(k) * theta);
    out += term + term.adjoint();
  }
  return (out + out.adjoint()) / 2.0;
}

CMatrix BlockToeplitz::generating(Real theta) const {
  if (!closed_form_) return generating_series(theta);
  const CMatrix m = closed_form_(theta);
  return (m + m.adjoint()) / 2.0;
}

CMatrix finite_section(const BlockToeplitz& t, long n) {
  const Eigen::Index d = t.block_dim();
  guard_section(n, d);
  std::vector<CMatrix> coeffs;
  coeffs.reserve(static_cast<std::size_t>(n));
  for (long k = 0; k < n; ++k) coeffs.push_back(t.coefficient(k));
  CMatrix out(n * d, n * d);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) {
      const auto& c = coeffs[static_cast<std::size_t>(std::abs(j - i))];
      if (j >= i)
        out.block(i * d, j * d, d, d) = c;
      else
        out.block(i * d, j * d, d, d) = c.adjoint();
    }
  }
  return out;
}

Real EigDistribution::cdf(Real t) const {
  const auto* begin = points.data();
  const auto* end = begin + points.size();
  return weight * static_cast<Real>(std::upper_bound(begin, end, t) - begin);
}

EigDistribution eig_distribution(const CMatrix& section) {
  require_hermitian(section, "section", 1e-10);
  EigDistribution out;
  out.points = hermitian_eigenvalues(section);
  out.weight = 1.0 / static_cast<Real>(out.points.size());
  return out;
}

SpectralBounds spectral_bounds(const BlockToeplitz& t, long grid) {
  if (grid < 16) throw ValidationError("invalid_argument", "grid must have at least 16 nodes");
  auto lowest = [&t](Real th) { return hermitian_eigenvalues(t.generating(th))(0); };
  auto highest = [&t](Real th) {
    const RealVector e = hermitian_eigenvalues(t.generating(th));
    return e(e.size() - 1);
  };
  Real lo = std::numeric_limits<Real>::infinity();
  Real hi = -lo;
  long arg_lo = 0, arg_hi = 0;
  for (long j = 0; j < grid; ++j) {
    const Real th = circle_node(j, grid);
    const Real a = lowest(th), b = highest(th);
    if (a < lo) lo = a, arg_lo = j;
    if (b > hi) hi = b, arg_hi = j;
  }
  const Real h = 2.0 * std::numbers::pi / static_cast<Real>(grid);
  const Real t_lo = circle_node(arg_lo, grid);
  const Real t_hi = circle_node(arg_hi, grid);
  lo = std::min(lo, golden_minimum(lowest, t_lo - h, t_lo + h));
  hi = std::max(hi, -golden_minimum([&](Real th) { return -highest(th); }, t_hi - h, t_hi + h));
  return {lo, hi};
}

Real limiting_distribution(const BlockToeplitz& t, Real level, long grid) {
  if (grid < 16) throw ValidationError("invalid_argument", "grid must have at least 16 nodes");
  long count = 0;
  for (long j = 0; j < grid; ++j) {
    const RealVector e = hermitian_eigenvalues(t.generating(circle_node(j, grid)));
    count += static_cast<long>((e.array() <= level).count());
  }
  return static_cast<Real>(count) / static_cast<Real>(grid * t.block_dim());
}

QuadratureResult szego_density(const BlockToeplitz& t, const SpectralFunction& f,
                               const QuadratureOptions& options) {
  if (!is_power_of_two(options.initial_nodes) || options.initial_nodes < 2)
    throw ValidationError("invalid_argument", "quadrature size must be a power of two >= 2");
  long nodes = options.initial_nodes;
  Real coarse = trapezoid(t, f, nodes / 2);
  Real fine = trapezoid(t, f, nodes);
  while (std::abs(fine - coarse) > options.tolerance) {
    if (nodes >= options.max_nodes)
      throw ConvergenceError("quadrature_nonconvergence",
                             "trapezoid rule unresolved at " + std::to_string(nodes) +
                                 " nodes (Richardson gap " + num(std::abs(fine - coarse)) + ")");
    nodes *= 2;
    coarse = fine;
    fine = trapezoid(t, f, nodes);
  }
  return {fine, nodes, std::abs(fine - coarse)};
}

Real trace_function(const CMatrix& section, const SpectralFunction& f) {
  const RealVector e = hermitian_eigenvalues(section);
  Real s = 0.0;
  for (Eigen::Index i = 0; i < e.size(); ++i) s += f(e(i));
  return s;
}

Real section_average(const BlockToeplitz& t, const SpectralFunction& f, long n) {
  return trace_function(finite_section(t, n), f) / static_cast<Real>(n * t.block_dim());
}

Real szego_rate(const BlockToeplitz& t, const SpectralFunction& f, long n) {
  const Eigen::Index d = t.block_dim();
  guard_section(n + 1, d);
  const CMatrix big = finite_section(t, n + 1);
  return trace_function(big, f) - trace_function(big.topLeftCorner(n * d, n * d), f);
}

std::vector<Real> section_traces(const BlockToeplitz& t, const SpectralFunction& f, long n_max) {
  const Eigen::Index d = t.block_dim();
  const CMatrix big = finite_section(t, n_max);
  std::vector<Real> out;
  out.reserve(static_cast<std::size_t>(n_max));
  for (long n = 1; n <= n_max; ++n) out.push_back(trace_function(big.topLeftCorner(n * d, n * d), f));
  return out;
}

Complex Polynomial::operator()(Complex z) const {
  Complex acc(0.0, 0.0);
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
  return acc;
}

CMatrix Polynomial::operator()(const CMatrix& m) const {
  const CMatrix id = CMatrix::Identity(m.rows(), m.cols());
  CMatrix acc = CMatrix::Zero(m.rows(), m.cols());
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * m + *it * id;
  return acc;
}

AmalgamatedResult amalgamated_szego(const std::vector<BlockToeplitz>& ts,
                                    const std::vector<MatrixFunction>& fs,
                                    const std::vector<CMatrix>& as, long n) {
  if (ts.empty() || fs.size() != ts.size() || as.size() != ts.size() + 1)
    throw ValidationError("length_mismatch", "need k operators, k functions and k+1 matrices");
  const Eigen::Index d = ts.front().block_dim();
  for (const auto& t : ts)
    if (t.block_dim() != d) throw ValidationError("dimension_mismatch", "operators differ in block size");
  for (const auto& a : as)
    if (a.rows() != d || a.cols() != d)
      throw ValidationError("dimension_mismatch", "amalgamating matrices must be d x d");
  std::vector<Polynomial> ps;
  for (const auto& f : fs) {
    const auto* p = std::get_if<Polynomial>(&f);
    if (!p) throw ValidationError("unsupported_function", "only polynomial functions are supported");
    ps.push_back(*p);
  }
  guard_section(n, d);

  CMatrix product = CMatrix::Zero(n * d, n * d);
  for (long j = 0; j < n; ++j) product.block(j * d, j * d, d, d) = as.front();
  for (std::size_t j = 0; j < ts.size(); ++j)
    product = times_block_diagonal(product * ps[j](finite_section(ts[j], n)), as[j + 1], n);

  AmalgamatedResult out;
  out.finite = CMatrix::Zero(d, d);
  for (long j = 0; j < n; ++j) out.finite += product.block(j * d, j * d, d, d);
  out.finite /= static_cast<Real>(n);

  auto integrate = [&](long nodes) {
    CMatrix acc = CMatrix::Zero(d, d);
    for (long j = 0; j < nodes; ++j) acc += amalgamated_integrand(ts, ps, as, circle_node(j, nodes));
    return CMatrix(acc / static_cast<Real>(nodes));
  };
  long nodes = 64;
  CMatrix coarse = integrate(nodes / 2);
  CMatrix fine = integrate(nodes);
  while ((fine - coarse).cwiseAbs().maxCoeff() > 1e-13 * std::max<Real>(1.0, fine.cwiseAbs().maxCoeff())) {
    if (nodes >= (1L << 16))
      throw ConvergenceError("quadrature_nonconvergence", "amalgamated limit unresolved");
    nodes *= 2;
    coarse = fine;
    fine = integrate(nodes);
  }
  out.limit = fine;
  out.nodes = nodes;
  out.gap = operator_norm(CMatrix(out.finite - out.limit));
  return out;
}

RealMatrix interlacing_labels(const RealVector& ascending, Eigen::Index d) {
  if (d < 1 || ascending.size() % d != 0)
    throw ValidationError("dimension_mismatch", "spectrum size is not a multiple of the block size");
  const Eigen::Index n = ascending.size() / d;
  RealMatrix out(d, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < d; ++k) out(k, j) = ascending(j * d + k);
  return out;
}

Real interlacing_violation(const RealVector& section_n, const RealVector& section_n1, Eigen::Index d) {
  const RealMatrix small = interlacing_labels(section_n, d);
  const RealMatrix large = interlacing_labels(section_n1, d);
  if (large.cols() != small.cols() + 1)
    throw ValidationError("dimension_mismatch", "spectra must come from sections n and n+1");
  Real worst = 0.0;
  for (Eigen::Index j = 0; j < small.cols(); ++j) {
    for (Eigen::Index k = 0; k < d; ++k) {
      worst = std::max(worst, large(k, j) - small(k, j));
      worst = std::max(worst, small(k, j) - large(k, j + 1));
    }
  }
  return worst;
}

}  // namespace fmc::toeplitz
