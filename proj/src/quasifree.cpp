#include "fmchain/quasifree.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>
#include <sstream>

namespace fmc::quasifree {

namespace {

// Decisions on A*A <= 1/2 use a tolerance at the level of roundoff so that
// |a|^2 = 1/2 + 1e-12 is already rejected.
constexpr Real kExtendibilityTol = 64 * std::numeric_limits<Real>::epsilon();

// Below this the map is treated as having ||A|| = 1.
constexpr Real kContractionGap = 1e-12;

constexpr Real kDykstraTarget = -1e-10;
constexpr long kDykstraStall = 10000;
constexpr long kDykstraMaxRounds = 200000;

std::string num(Real v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

CMatrix identity(Eigen::Index d) { return CMatrix::Identity(d, d); }

CMatrix hermitian_part(const CMatrix& m) { return (m + m.adjoint()) / 2.0; }

// Frobenius projection of a Hermitian matrix onto the PSD cone.
CMatrix positive_part(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(h));
  if (es.info() != Eigen::Success)
    throw NumericError("eigensolver_failure", "eigensolver failed in PSD projection");
  const RealVector lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix upper_gap(const FreeCpMap& map, const CMatrix& x) {
  const Eigen::Index d = map.dim();
  const CMatrix& g = map.gram();
  CMatrix m(2 * d, 2 * d);
  m.topLeftCorner(d, d) = identity(d) - g - map.b();
  m.bottomRightCorner(d, d) = identity(d) - g - map.b();
  m.topRightCorner(d, d) = -g - x;
  m.bottomLeftCorner(d, d) = -g - x.adjoint();
  return m;
}

CMatrix assemble_d(const CMatrix& b, const CMatrix& x) {
  const Eigen::Index d = b.rows();
  CMatrix m(2 * d, 2 * d);
  m << b, x, x.adjoint(), b;
  return m;
}

CMatrix dykstra_search(const FreeCpMap& map, const CMatrix& seed) {
  const Eigen::Index d = map.dim();
  const CMatrix& b = map.b();
  const CMatrix lower1 = -b;
  const CMatrix upper1 = b;
  const CMatrix lower2 = b - identity(d);
  const CMatrix upper2 = identity(d) - 2.0 * map.gram() - b;

  auto project = [&](int which, const CMatrix& y) -> CMatrix {
    switch (which) {
      case 0: return lower1 + positive_part(y - lower1);
      case 1: return upper1 - positive_part(upper1 - y);
      case 2: return lower2 + positive_part(y - lower2);
      default: return upper2 - positive_part(upper2 - y);
    }
  };

  CMatrix x = hermitian_part(seed);
  std::array<CMatrix, 4> corr;
  corr.fill(CMatrix::Zero(d, d));

  Real best = extension_margins(map, x).worst();
  long since_best = 0;
  for (long round = 0; round < kDykstraMaxRounds; ++round) {
    if (best >= kDykstraTarget && extension_margins(map, x).worst() >= kDykstraTarget) return x;
    for (int i = 0; i < 4; ++i) {
      const CMatrix shifted = x + corr[static_cast<std::size_t>(i)];
      const CMatrix y = project(i, shifted);
      corr[static_cast<std::size_t>(i)] = shifted - y;
      x = y;
    }
    const Real worst = extension_margins(map, x).worst();
    if (worst > best) {
      best = worst;
      since_best = 0;
    } else if (++since_best >= kDykstraStall) {
      break;
    }
  }
  throw ConvergenceError("search_failure",
                         "alternating projections for X stalled at margin " + num(best));
}


// Orthonormal basis of the real space of d x d Hermitian matrices.
std::vector<CMatrix> hermitian_basis(Eigen::Index d) {
  std::vector<CMatrix> basis;
  const Real r = 1.0 / std::sqrt(2.0);
  for (Eigen::Index j = 0; j < d; ++j) {
    basis.push_back(CMatrix::Zero(d, d));
    basis.back()(j, j) = 1.0;
  }
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index l = j + 1; l < d; ++l) {
      CMatrix re = CMatrix::Zero(d, d), im = CMatrix::Zero(d, d);
      re(j, l) = re(l, j) = r;
      im(j, l) = Complex(0.0, r);
      im(l, j) = Complex(0.0, -r);
      basis.push_back(re);
      basis.push_back(im);
    }
  return basis;
}

// Log-barrier interior point for max t subject to F_i(X) >= t, where the
// F_i are X + B, B - X, X - B + 1 and 1 - 2A*A - B - X.
MarginOptimum barrier_search(const FreeCpMap& map, const CMatrix& start) {
  const Eigen::Index d = map.dim();
  const auto basis = hermitian_basis(d);
  const auto nv = static_cast<Eigen::Index>(basis.size()) + 1;  // coordinates of X, then t
  const std::array<CMatrix, 4> offsets{map.b(), map.b(), identity(d) - map.b(),
                                       identity(d) - 2.0 * map.gram() - map.b()};
  constexpr std::array<Real, 4> sign{1.0, -1.0, 1.0, -1.0};
  auto to_x = [&](const Eigen::VectorXd& z) {
    CMatrix x = CMatrix::Zero(d, d);
    for (std::size_t k = 0; k < basis.size(); ++k) x += z(static_cast<Eigen::Index>(k)) * basis[k];
    return x;
  };
  auto slack = [&](const Eigen::VectorXd& z, int i) {
    const auto k = static_cast<std::size_t>(i);
    return CMatrix(offsets[k] + sign[k] * to_x(z) - z(nv - 1) * identity(d));
  };
  auto barrier = [&](const Eigen::VectorXd& z, Real s, Real& value) {
    value = -s * z(nv - 1);
    for (int i = 0; i < 4; ++i) {
      Eigen::LLT<CMatrix> llt(slack(z, i));
      if (llt.info() != Eigen::Success) return false;
      for (Eigen::Index k = 0; k < d; ++k) value -= 2.0 * std::log(llt.matrixLLT()(k, k).real());
    }
    return std::isfinite(value);
  };

  Eigen::VectorXd z(nv);
  const CMatrix x0 = hermitian_part(start);
  for (std::size_t k = 0; k < basis.size(); ++k)
    z(static_cast<Eigen::Index>(k)) = (basis[k].adjoint() * x0).trace().real();
  Real t0 = std::numeric_limits<Real>::infinity();
  z(nv - 1) = 0.0;
  for (int i = 0; i < 4; ++i) t0 = std::min(t0, min_eigenvalue(slack(z, i)));
  z(nv - 1) = t0 - 1.0;

  std::vector<CMatrix> derivs(basis);
  derivs.push_back(-identity(d));
  const Real gap_target = 1e-13;
  for (Real s = 1.0; 4.0 * static_cast<Real>(d) / s > gap_target; s *= 8.0) {
    for (int iter = 0; iter < 100; ++iter) {
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(nv);
      grad(nv - 1) = -s;
      Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(nv, nv);
      for (int i = 0; i < 4; ++i) {
        const CMatrix w = slack(z, i).inverse();
        std::vector<CMatrix> wd(static_cast<std::size_t>(nv));
        for (Eigen::Index a = 0; a < nv; ++a) {
          const Real sg = a + 1 == nv ? 1.0 : sign[static_cast<std::size_t>(i)];
          wd[static_cast<std::size_t>(a)] = w * (sg * derivs[static_cast<std::size_t>(a)]);
          grad(a) -= wd[static_cast<std::size_t>(a)].trace().real();
        }
        for (Eigen::Index a = 0; a < nv; ++a)
          for (Eigen::Index b = a; b < nv; ++b) {
            const Real h = (wd[static_cast<std::size_t>(a)] * wd[static_cast<std::size_t>(b)]).trace().real();
            hess(a, b) += h;
            if (a != b) hess(b, a) += h;
          }
      }
      const Eigen::VectorXd step = -hess.ldlt().solve(grad);
      const Real decrement = -grad.dot(step);
      if (!(decrement > 1e-14)) break;
      Real f0 = 0.0;
      barrier(z, s, f0);
      Real alpha = 1.0, f1 = 0.0;
      while (alpha > 1e-12 && !(barrier(z + alpha * step, s, f1) && f1 <= f0 - 0.25 * alpha * decrement)) alpha *= 0.5;
      if (alpha <= 1e-12) break;
      z += alpha * step;
      if (decrement < 1e-12) break;
    }
  }
  MarginOptimum out;
  out.x = hermitian_part(to_x(z));
  out.margin = extension_margins(map, out.x).worst();
  return out;
}

}  // namespace

Symbol::Symbol(const CMatrix& q) {
  require_hermitian(q, "symbol");
  if (!q.allFinite()) throw ValidationError("not_hermitian", "symbol has non-finite entries");
  const CMatrix h = hermitian_part(q);
  RealVector lam = hermitian_eigenvalues(h);
  const Real lo = lam(0);
  const Real hi = lam(lam.size() - 1);
  if (lo < -kSpectralSlack || hi > 1.0 + kSpectralSlack)
    throw ValidationError("symbol_out_of_range",
                          "symbol spectrum [" + num(lo) + ", " + num(hi) + "] leaves [0, 1]");
  if (lo >= 0.0 && hi <= 1.0) {
    q_ = h;
    spectrum_ = std::move(lam);
    return;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  spectrum_ = es.eigenvalues().cwiseMax(0.0).cwiseMin(1.0);
  q_ = es.eigenvectors() * spectrum_.asDiagonal() * es.eigenvectors().adjoint();
}

Real symbol_entropy(const Symbol& q) {
  Real s = 0.0;
  for (Eigen::Index i = 0; i < q.eigenvalues().size(); ++i) s += binary_entropy(q.eigenvalues()(i));
  return s;
}

Real block_entropy(const Symbol& q, Eigen::Index offset, Eigen::Index size) {
  if (offset < 0 || size < 0 || offset + size > q.dim())
    throw ValidationError("dimension_mismatch", "block exceeds symbol dimension");
  if (size == 0) return 0.0;
  const RealVector lam = hermitian_eigenvalues(q.matrix().block(offset, offset, size, size));
  Real s = 0.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) s += binary_entropy(lam(i));
  return s;
}

Complex quasifree_expectation(const Symbol& q, const CMatrix& phis, const CMatrix& psis) {
  if (phis.cols() != psis.cols() || phis.cols() == 0)
    throw ValidationError("length_mismatch", "need equally many (>= 1) creation and annihilation vectors");
  if (phis.rows() != q.dim() || psis.rows() != q.dim())
    throw ValidationError("dimension_mismatch", "vectors must live in the one-particle space");
  const CMatrix pairing = psis.adjoint() * q.matrix() * phis;
  return pairing.determinant();
}

FreeCpMap::FreeCpMap(CMatrix a, CMatrix b) : a_(std::move(a)) {
  require_square(a_, "A");
  require_hermitian(b, "B");
  if (b.rows() != a_.rows())
    throw ValidationError("dimension_mismatch", "A and B must have the same dimension");
  b_ = hermitian_part(b);
  gram_ = hermitian_part(a_.adjoint() * a_);
  const Real low = min_eigenvalue(b_);
  const Real high = min_eigenvalue(CMatrix(identity(dim()) - gram_ - b_));
  if (low < -kCpTol || high < -kCpTol)
    throw ValidationError("not_completely_positive",
                          "need 0 <= B <= 1 - A*A; smallest eigenvalues " + num(low) + " and " + num(high));
}

Symbol apply_dual(const FreeCpMap& map, const Symbol& q) {
  if (q.dim() != map.dim())
    throw ValidationError("dimension_mismatch", "symbol and map dimensions differ");
  return Symbol(hermitian_part(map.a().adjoint() * q.matrix() * map.a() + map.b()));
}

Symbol fixed_point(const FreeCpMap& map) {
  const Real norm = operator_norm(map.a());
  if (norm >= 1.0 - kContractionGap)
    throw InfeasibleError("no_unique_invariant_state",
                          "||A|| = " + num(norm) + " >= 1: no unique invariant state");
  const CMatrix& a = map.a();
  const CMatrix& b = map.b();

  // Doubling: after k rounds x is the 2^k-th iterate of X -> A*XA + B from 0.
  CMatrix x = b;
  CMatrix power = a;
  for (int round = 0; round < 64; ++round) {
    const CMatrix tail = power.adjoint() * x * power;
    x += tail;
    power = power * power;
    if (tail.norm() <= 1e-17 * std::max<Real>(1.0, x.norm()) || power.norm() < 1e-300) break;
  }
  Real residual = 0.0;
  for (int it = 0; it < 1000; ++it) {
    const CMatrix next = hermitian_part(a.adjoint() * x * a + b);
    residual = (next - x).norm();
    x = next;
    if (residual <= kFixedPointResidual) return Symbol(x);
  }
  throw ConvergenceError("non_convergence", "fixed-point iteration stalled at residual " + num(residual));
}

Extendibility extendibility(const FreeCpMap& map) {
  const Eigen::Index d = map.dim();
  const Real half = min_eigenvalue(CMatrix(0.5 * identity(d) - map.gram()));
  const Real rest = min_eigenvalue(CMatrix(identity(d) - map.b() - map.gram()));
  const Real scale = std::max<Real>(1.0, operator_norm(map.gram()));
  Extendibility out;
  out.margin = std::min(half, rest);
  out.extendible = half >= -kExtendibilityTol * scale && rest >= -kCpTol;
  return out;
}

ExtensionMargins extension_margins(const FreeCpMap& map, const CMatrix& x) {
  if (x.rows() != map.dim() || x.cols() != map.dim())
    throw ValidationError("dimension_mismatch", "X must be " + describe_shape(map.dim(), map.dim()));
  return {min_eigenvalue(assemble_d(map.b(), x)), min_eigenvalue(upper_gap(map, x))};
}

ExtensionData build_extension(const FreeCpMap& map, const CMatrix& x) {
  const ExtensionMargins m = extension_margins(map, x);
  if (m.lower < -kCpTol)
    throw InfeasibleError("extension_not_completely_positive",
                          "D has negative eigenvalue " + num(m.lower));
  if (m.upper < -kCpTol)
    throw InfeasibleError("extension_not_completely_positive",
                          "1 - C*C - D has negative eigenvalue " + num(m.upper));
  const Eigen::Index d = map.dim();
  ExtensionData out;
  out.x = x;
  out.c.resize(d, 2 * d);
  out.c << map.a(), map.a();
  out.d = assemble_d(map.b(), x);
  return out;
}

ScalarLens ScalarLens::of(Complex a, Real b) {
  ScalarLens lens;
  lens.b = b;
  lens.shift = std::norm(a);
  lens.r2 = std::max<Real>(0.0, 1.0 - lens.shift - b);
  return lens;
}

bool ScalarLens::contains(Complex x, Real tol) const noexcept {
  return std::abs(x) <= b + tol && std::abs(x + shift) <= r2 + tol;
}

std::pair<Real, Real> ScalarLens::real_interval() const noexcept {
  return {std::max(-b, -shift - r2), std::min(b, r2 - shift)};
}

Real ScalarLens::boundary_distance(Complex x) const noexcept {
  return std::min(b - std::abs(x), r2 - std::abs(x + shift));
}

Complex ScalarLens::boundary_point(Real phi) const noexcept {
  const auto [lo, hi] = real_interval();
  const Complex centre(0.5 * (lo + hi), 0.0);
  const Complex dir = std::polar(1.0, phi);
  auto exit_time = [&](Complex disk_centre, Real radius) {
    const Complex rel = centre - disk_centre;
    const Real beta = (std::conj(dir) * rel).real();
    const Real gamma = std::norm(rel) - radius * radius;
    return std::max<Real>(0.0, -beta + std::sqrt(std::max<Real>(0.0, beta * beta - gamma)));
  };
  const Real t = std::min(exit_time(0.0, b), exit_time(Complex(-shift, 0.0), r2));
  return centre + t * dir;
}

ExtensionData find_X(const FreeCpMap& map, const XStrategy& strategy) {
  if (const auto* given = std::get_if<Explicit>(&strategy)) return build_extension(map, given->x);

  const Extendibility ext = extendibility(map);
  if (!ext.extendible)
    throw InfeasibleError("not_extendible",
                          "no compatible extension exists (margin " + num(ext.margin) + ")");

  const Eigen::Index d = map.dim();
  const bool scalar = d == 1;
  if (scalar && !std::holds_alternative<ProductSeed>(strategy)) {
    const ScalarLens lens = ScalarLens::of(map.a()(0, 0), map.b()(0, 0).real());
    Complex x;
    if (std::holds_alternative<Midpoint>(strategy)) {
      const auto [lo, hi] = lens.real_interval();
      x = 0.5 * (lo + hi);
    } else {
      x = lens.boundary_point(std::get<BoundaryAngle>(strategy).phi);
    }
    return build_extension(map, CMatrix::Constant(1, 1, x));
  }
  if (std::holds_alternative<BoundaryAngle>(strategy))
    throw ValidationError("invalid_argument", "boundary-angle strategy needs a one-dimensional map");

  const CMatrix seed = map.b() - fixed_point(map).matrix();
  if (extension_margins(map, seed).worst() >= -kCpTol) return build_extension(map, seed);
  // For non-commuting A*A and B the operator intervals can miss each other
  // even though the condition above holds, so settle feasibility first.
  const MarginOptimum best = barrier_search(map, seed);
  if (best.margin < -kCpTol)
    throw InfeasibleError("not_extendible",
                          "the operator intervals [-B, B] and [B - 1, 1 - 2A*A - B] do not intersect; best margin " +
                              num(best.margin));
  try {
    return build_extension(map, dykstra_search(map, seed));
  } catch (const ConvergenceError&) {
    return build_extension(map, best.x);
  }
}

MarginOptimum max_margin_X(const FreeCpMap& map) {
  return barrier_search(map, map.b() - fixed_point(map).matrix());
}

}  // namespace fmc::quasifree
