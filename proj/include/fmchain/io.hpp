#pragma once

#include "fmchain/chain.hpp"
#include "fmchain/classical.hpp"
#include "fmchain/common.hpp"
#include "fmchain/quasifree.hpp"
#include "fmchain/toeplitz.hpp"

#include "json.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace fmc::io {

using Json = nlohmann::json;

/// Shortest round-trip decimal representation; "nan" for NaN.
std::string format_real(Real v);

/// Complex numbers are [re, im] pairs; a bare number is read as real.
Complex complex_from_json(const Json& j, const std::string& what);
Json to_json(Complex z);

/// Row-major nested arrays of complex entries.
CMatrix complex_matrix_from_json(const Json& j, const std::string& what);
/// As above, then re-validated as Hermitian.
CMatrix hermitian_matrix_from_json(const Json& j, const std::string& what);
Json to_json(const CMatrix& m);

/// Row-major nested arrays of numbers.
RealMatrix real_matrix_from_json(const Json& j, const std::string& what);
Json to_json(const RealMatrix& m);
Json to_json(const RealVector& v);

/// {"A": ..., "B": ..., "X": optional, "strategy": optional}. The strategy
/// is "midpoint", "product", {"boundary_angle": phi}; an explicit X wins.
struct ChainDocument {
  CMatrix a;
  CMatrix b;
  std::optional<CMatrix> x;
  quasifree::XStrategy strategy = quasifree::ProductSeed{};
};

ChainDocument chain_document_from_json(const Json& j);
Json to_json(const chain::ChainSpec& spec);

/// `index,value` rows, index starting at `first_index`.
void write_index_value_csv(std::ostream& os, const std::vector<Real>& values, long first_index = 1);
void write_path_distribution_csv(std::ostream& os, const classical::PathDistribution& dist);
/// Single `eigenvalue` column.
void write_eigenvalue_csv(std::ostream& os, const toeplitz::EigDistribution& dist);
/// `n,value` rows for sweeps over the section size.
void write_sweep_csv(std::ostream& os, const std::vector<std::pair<long, Real>>& sweep);
/// `x_re,x_im,feasible,density`.
void write_scan_csv(std::ostream& os, const chain::ScanResult& scan, Real unit = 1.0);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);

}  // namespace fmc::io
