#include "fmchain/chain.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace fmc::chain {

using quasifree::FreeCpMap;
using quasifree::Symbol;

namespace {

constexpr Real kRecursionTol = 1e-10;

CMatrix matrix_power(CMatrix base, long exponent) {
  CMatrix acc = CMatrix::Identity(base.rows(), base.cols());
  while (exponent > 0) {
    if (exponent & 1) acc = acc * base;
    exponent >>= 1;
    if (exponent) base = base * base;
  }
  return acc;
}

void check_invariance(const FreeCpMap& map, const Symbol& q) {
  const CMatrix residual = q.matrix() - map.a().adjoint() * q.matrix() * map.a() - map.b();
  if (residual.norm() > 1e-12)
    throw NumericError("internal_consistency", "invariant symbol residual exceeds 1e-12");
}

}  // namespace

ChainSpec::ChainSpec(FreeCpMap map, const CMatrix& x)
    : map_(std::move(map)),
      q_(quasifree::fixed_point(map_)),
      ext_(quasifree::build_extension(map_, x)),
      m_(q_.matrix() - map_.b() + ext_.x) {
  check_invariance(map_, q_);
}

ChainSpec ChainSpec::with_strategy(const FreeCpMap& map, const quasifree::XStrategy& strategy) {
  return ChainSpec(map, quasifree::find_X(map, strategy).x);
}

CMatrix qinfinity_block(const ChainSpec& spec, long k) {
  if (k == 0) return spec.invariant().matrix();
  if (k < 0) return qinfinity_block(spec, -k).adjoint();
  return matrix_power(spec.map().a().adjoint(), k) * spec.correlation();
}

CMatrix recursion_matrix(const ChainSpec& spec, long n) {
  const Eigen::Index d = spec.dim();
  if (n < 0) throw ValidationError("invalid_argument", "recursion depth must be >= 0");
  if ((n + 1) * d > 2 * kMaxDenseDim)
    throw ResourceError("resource_limit", "recursion exceeds the dense size budget");
  const CMatrix& c = spec.extension().c;
  const CMatrix& dd = spec.extension().d;

  CMatrix r = spec.invariant().matrix();
  for (long m = 0; m < n; ++m) {
    const Eigen::Index rest = m * d;
    CMatrix next(r.rows() + d, r.cols() + d);
    next.topLeftCorner(2 * d, 2 * d) = c.adjoint() * r.topLeftCorner(d, d) * c + dd;
    if (rest > 0) {
      next.topRightCorner(2 * d, rest) = c.adjoint() * r.topRightCorner(d, rest);
      next.bottomLeftCorner(rest, 2 * d) = r.bottomLeftCorner(rest, d) * c;
      next.bottomRightCorner(rest, rest) = r.bottomRightCorner(rest, rest);
    }
    r = std::move(next);
  }
  return r;
}

Symbol recursion_Rn(const ChainSpec& spec, long n) { return Symbol(recursion_matrix(spec, n)); }

CMatrix generating_function(const ChainSpec& spec, Real theta) {
  const CMatrix& a = spec.map().a();
  const Eigen::Index d = spec.dim();
  const CMatrix za = std::polar(1.0, theta) * a.adjoint();
  const CMatrix resolvent_arg = CMatrix::Identity(d, d) - za;
  Eigen::PartialPivLU<CMatrix> lu(resolvent_arg);
  if (!(std::abs(lu.determinant()) > 1e-14))
    throw NumericError("domain_error", "resolvent (1 - e^{i theta} A*) is singular");
  const CMatrix positive = lu.solve(CMatrix(za * spec.correlation()));
  const CMatrix out = spec.invariant().matrix() + positive + positive.adjoint();
  return (out + out.adjoint()) / 2.0;
}

toeplitz::BlockToeplitz symbol_operator(const ChainSpec& spec) {
  const CMatrix a_adj = spec.map().a().adjoint();
  const CMatrix q = spec.invariant().matrix();
  const CMatrix m = spec.correlation();
  auto blocks = [a_adj, q, m](long k) -> CMatrix {
    if (k == 0) return q;
    if (k > 0) return matrix_power(a_adj, k) * m;
    return (matrix_power(a_adj, -k) * m).adjoint();
  };
  const toeplitz::DecayBound decay{operator_norm(m), operator_norm(spec.map().a())};
  return toeplitz::BlockToeplitz(spec.dim(), blocks, decay,
                                 [spec](Real theta) { return generating_function(spec, theta); });
}

Symbol finite_symbol(const ChainSpec& spec, long n) {
  const Eigen::Index d = spec.dim();
  const CMatrix section = toeplitz::finite_section(symbol_operator(spec), n);
  const CMatrix projected = recursion_matrix(spec, n).bottomRightCorner(n * d, n * d);
  const Real defect = (section - projected).cwiseAbs().maxCoeff();
  if (!(defect <= kRecursionTol)) {
    std::ostringstream os;
    os << "Toeplitz assembly deviates from the transfer recursion by " << defect;
    throw NumericError("internal_consistency", os.str());
  }
  return Symbol(section);
}

Real entropy_density(const ChainSpec& spec, const DensityMethod& method) {
  if (const auto* avg = std::get_if<Average>(&method)) {
    if (avg->n < 1) throw ValidationError("invalid_argument", "average needs n >= 1");
    return quasifree::symbol_entropy(finite_symbol(spec, avg->n)) / static_cast<Real>(avg->n);
  }
  if (const auto* inc = std::get_if<Increment>(&method)) {
    if (inc->n < 1) throw ValidationError("invalid_argument", "increment needs n >= 1");
    const Symbol big = finite_symbol(spec, inc->n + 1);
    return quasifree::symbol_entropy(big) - quasifree::block_entropy(big, 0, inc->n * spec.dim());
  }
  const auto& sz = std::get<Szego>(method);
  toeplitz::QuadratureOptions opts;
  opts.initial_nodes = sz.nodes;
  const auto result = toeplitz::szego_density(symbol_operator(spec), binary_entropy, opts);
  return result.value * static_cast<Real>(spec.dim());
}

ScanResult scan_extension_scalar(Complex a, Real b, long grid, long nodes) {
  if (grid < 2) throw ValidationError("invalid_argument", "scan grid must be >= 2");
  const FreeCpMap map(CMatrix::Constant(1, 1, a), CMatrix::Constant(1, 1, b));
  const auto lens = quasifree::ScalarLens::of(a, b);
  const bool extendible = quasifree::extendibility(map).extendible;
  const auto [lo, hi] = lens.real_interval();

  ScanResult out;
  out.grid = grid;
  out.feasible = extendible && lo <= hi;
  Real re_lo = -b, re_hi = b, im_half = b;
  if (out.feasible) {
    re_lo = lo;
    re_hi = hi;
    im_half = std::min(lens.b, lens.r2);
  }
  const auto steps = static_cast<Real>(grid - 1);
  const Real d_re = (re_hi - re_lo) / steps;
  const Real d_im = 2.0 * im_half / steps;
  out.cell = std::max(d_re, d_im);

  out.rows.reserve(static_cast<std::size_t>(grid * grid));
  out.min_density = std::numeric_limits<Real>::infinity();
  for (long i = 0; i < grid; ++i) {
    for (long j = 0; j < grid; ++j) {
      ScanRow row;
      row.x_re = i + 1 == grid ? re_hi : re_lo + static_cast<Real>(i) * d_re;
      row.x_im = 2 * j + 1 == grid ? 0.0 : -im_half + static_cast<Real>(j) * d_im;
      const Complex x(row.x_re, row.x_im);
      row.feasible = out.feasible && lens.contains(x);
      row.density = std::numeric_limits<Real>::quiet_NaN();
      if (row.feasible) {
        const ChainSpec spec(map, CMatrix::Constant(1, 1, x));
        row.density = entropy_density(spec, Szego{nodes});
        if (row.density < out.min_density) {
          out.min_density = row.density;
          out.argmin = x;
        }
      }
      out.rows.push_back(row);
    }
  }
  if (out.feasible) out.boundary_distance = lens.boundary_distance(out.argmin);
  else out.min_density = std::numeric_limits<Real>::quiet_NaN();
  return out;
}

}  // namespace fmc::chain
