#pragma once

#include "fmchain/common.hpp"

#include <variant>
#include <vector>

namespace fmc::quasifree {

/// Tolerance for the operator inequalities defining completely positive maps.
inline constexpr Real kCpTol = 1e-10;

/// Fixed-point iteration stopping rule.
inline constexpr Real kFixedPointResidual = 1e-13;

/// One-particle symbol of a quasi-free state: Hermitian Q with 0 <= Q <= 1.
///
/// Eigenvalues within kSpectralSlack of [0, 1] are clamped and the matrix is
/// rebuilt from the clamped spectrum; larger violations are rejected.
class Symbol {
 public:
  explicit Symbol(const CMatrix& q);

  Eigen::Index dim() const noexcept { return q_.rows(); }
  const CMatrix& matrix() const noexcept { return q_; }
  /// Ascending, clamped to [0, 1].
  const RealVector& eigenvalues() const noexcept { return spectrum_; }

 private:
  CMatrix q_;
  RealVector spectrum_;
};

/// -tr Q log Q - tr (1-Q) log (1-Q), in nats.
Real symbol_entropy(const Symbol& q);

/// Entropy of a principal block [offset, offset + size) of the symbol.
Real block_entropy(const Symbol& q, Eigen::Index offset, Eigen::Index size);

/// omega_Q(a*(phi_1)...a*(phi_n) a(psi_n)...a(psi_1)) = det[<psi_k, Q phi_l>].
/// `phis` and `psis` hold the vectors as columns.
Complex quasifree_expectation(const Symbol& q, const CMatrix& phis, const CMatrix& psis);

/// Free completely positive map (A, B) with 0 <= B <= 1 - A*A.
class FreeCpMap {
 public:
  FreeCpMap(CMatrix a, CMatrix b);

  Eigen::Index dim() const noexcept { return a_.rows(); }
  const CMatrix& a() const noexcept { return a_; }
  const CMatrix& b() const noexcept { return b_; }
  /// A*A, cached.
  const CMatrix& gram() const noexcept { return gram_; }

 private:
  CMatrix a_;
  CMatrix b_;
  CMatrix gram_;
};

/// Symbol transported through the map: A*QA + B.
Symbol apply_dual(const FreeCpMap& map, const Symbol& q);

/// Unique Q with Q = A*QA + B. Requires ||A|| < 1.
Symbol fixed_point(const FreeCpMap& map);

struct Extendibility {
  bool extendible = false;
  /// min of the smallest eigenvalues of (1/2 - A*A) and (1 - B - A*A).
  Real margin = 0.0;
};

/// A*A <= 1/2 and A*A <= 1 - B, both as operator inequalities. Necessary
/// for a compatible extension to exist; sufficient when d = 1 or when A*A
/// and B commute. find_X settles the general case.
Extendibility extendibility(const FreeCpMap& map);

/// Compatible extension (C, D) of a free map for a choice of X.
struct ExtensionData {
  CMatrix x;  // d x d
  CMatrix c;  // d x 2d, [A A]
  CMatrix d;  // 2d x 2d, [[B, X], [X*, B]]
};

/// Assembles C and D and checks 0 <= D <= 1 - C*C.
ExtensionData build_extension(const FreeCpMap& map, const CMatrix& x);

/// Smallest eigenvalues of D and of 1 - C*C - D.
struct ExtensionMargins {
  Real lower = 0.0;
  Real upper = 0.0;
  Real worst() const noexcept { return std::min(lower, upper); }
};
ExtensionMargins extension_margins(const FreeCpMap& map, const CMatrix& x);

/// Feasible region for X when the one-particle space is one-dimensional:
/// the lens |x| <= b, |x + |a|^2| <= 1 - |a|^2 - b.
struct ScalarLens {
  Real b = 0.0;
  Real shift = 0.0;  // |a|^2, the second disk is centred at -shift
  Real r2 = 0.0;     // 1 - |a|^2 - b

  static ScalarLens of(Complex a, Real b);

  bool nonempty() const noexcept { return shift <= b + r2; }
  bool contains(Complex x, Real tol = 0.0) const noexcept;
  /// Intersection of the lens with the real axis.
  std::pair<Real, Real> real_interval() const noexcept;
  /// Distance from an interior point to the lens boundary.
  Real boundary_distance(Complex x) const noexcept;
  /// Boundary point hit by the ray from the real midpoint at angle phi.
  Complex boundary_point(Real phi) const noexcept;
};

/// Hermitian X maximising the worst margin of 0 <= D <= 1 - C*C. A
/// compatible extension exists iff margin >= 0 (up to roundoff).
struct MarginOptimum {
  CMatrix x;
  Real margin = 0.0;
};

MarginOptimum max_margin_X(const FreeCpMap& map);

struct Midpoint {};
/// Start from B - Q (the product-state choice) and project onto the
/// feasible set.
struct ProductSeed {};
struct BoundaryAngle {
  Real phi = 0.0;
};
struct Explicit {
  CMatrix x;
};
using XStrategy = std::variant<Midpoint, ProductSeed, BoundaryAngle, Explicit>;

/// Chooses X so that (C, D) is completely positive.
///
/// For d = 1 the lens is handled in closed form. For d > 1 Midpoint and
/// ProductSeed both run Dykstra's projections over the four operator
/// half-intervals -B <= X <= B and B - 1 <= X <= 1 - 2A*A - B, starting
/// from X = B - Q.
ExtensionData find_X(const FreeCpMap& map, const XStrategy& strategy);

}  // namespace fmc::quasifree
