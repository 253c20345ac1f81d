#pragma once

#include "fmchain/common.hpp"
#include "fmchain/quasifree.hpp"
#include "fmchain/toeplitz.hpp"

#include <variant>
#include <vector>

namespace fmc::chain {

/// Free Fermionic Markov chain built from a free CP map (A, B), a compatible
/// extension matrix X, and the invariant symbol Q of the map.
class ChainSpec {
 public:
  ChainSpec(quasifree::FreeCpMap map, const CMatrix& x);

  static ChainSpec with_strategy(const quasifree::FreeCpMap& map, const quasifree::XStrategy& strategy);

  Eigen::Index dim() const noexcept { return map_.dim(); }
  const quasifree::FreeCpMap& map() const noexcept { return map_; }
  const quasifree::ExtensionData& extension() const noexcept { return ext_; }
  const CMatrix& x() const noexcept { return ext_.x; }
  const quasifree::Symbol& invariant() const noexcept { return q_; }
  /// Q - B + X, the nearest-neighbour correlation block.
  const CMatrix& correlation() const noexcept { return m_; }

 private:
  quasifree::FreeCpMap map_;
  quasifree::Symbol q_;
  quasifree::ExtensionData ext_;
  CMatrix m_;
};

/// Block (i, i + k) of the infinite chain symbol: Q for k = 0, (A*)^k M for
/// k > 0 and the adjoint of block |k| for k < 0.
CMatrix qinfinity_block(const ChainSpec& spec, long k);

/// R_n on (n + 1) d modes by the transfer recursion; the first d modes are
/// the auxiliary (hidden) ones and are dropped by the projection P_n.
CMatrix recursion_matrix(const ChainSpec& spec, long n);
quasifree::Symbol recursion_Rn(const ChainSpec& spec, long n);

/// The chain symbol as a block Toeplitz operator with closed-form generating
/// function.
toeplitz::BlockToeplitz symbol_operator(const ChainSpec& spec);

/// Restriction of the chain symbol to n sites. Checked against the
/// recursion to 1e-10.
quasifree::Symbol finite_symbol(const ChainSpec& spec, long n);

/// Q + P(theta) + P(theta)*, P = (1 - e^{i theta} A*)^{-1} e^{i theta} A* M.
CMatrix generating_function(const ChainSpec& spec, Real theta);

struct Average {
  long n = 64;
};
struct Increment {
  long n = 256;
};
struct Szego {
  long nodes = 4096;
};
using DensityMethod = std::variant<Average, Increment, Szego>;

/// Entropy per site (nats).
Real entropy_density(const ChainSpec& spec, const DensityMethod& method);

struct ScanRow {
  Real x_re = 0.0;
  Real x_im = 0.0;
  bool feasible = false;
  Real density = 0.0;  // NaN when infeasible
};

struct ScanResult {
  bool feasible = false;  // lens non-empty
  long grid = 0;
  Real cell = 0.0;        // larger grid spacing
  std::vector<ScanRow> rows;
  Complex argmin;
  Real min_density = 0.0;
  Real boundary_distance = 0.0;
};

/// Rasterises the feasible lens of X for a one-dimensional map on a
/// grid x grid lattice over its bounding box and evaluates the Szego-route
/// density at every feasible node.
ScanResult scan_extension_scalar(Complex a, Real b, long grid, long nodes = 256);

}  // namespace fmc::chain
