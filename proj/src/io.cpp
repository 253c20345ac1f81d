#include "fmchain/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fmc::io {

namespace {

[[noreturn]] void bad(const std::string& what, const std::string& why) {
  throw ValidationError("invalid_input", what + ": " + why);
}

template <typename Entry, typename Read>
Eigen::Matrix<Entry, Eigen::Dynamic, Eigen::Dynamic> nested_matrix(const Json& j, const std::string& what,
                                                                   Read&& read) {
  if (!j.is_array() || j.empty()) bad(what, "expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j.front().is_array() || j.front().empty()) bad(what, "expected rows as arrays");
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Eigen::Matrix<Entry, Eigen::Dynamic, Eigen::Dynamic> m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) bad(what, "ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = read(row[static_cast<std::size_t>(c)]);
  }
  return m;
}

}  // namespace

std::string format_real(Real v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Complex complex_from_json(const Json& j, const std::string& what) {
  if (j.is_number()) return {j.get<Real>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<Real>(), j[1].get<Real>()};
  bad(what, "expected a number or an [re, im] pair");
}

Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

CMatrix complex_matrix_from_json(const Json& j, const std::string& what) {
  return nested_matrix<Complex>(j, what, [&](const Json& e) { return complex_from_json(e, what); });
}

CMatrix hermitian_matrix_from_json(const Json& j, const std::string& what) {
  CMatrix m = complex_matrix_from_json(j, what);
  require_hermitian(m, what);
  return m;
}

Json to_json(const CMatrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

RealMatrix real_matrix_from_json(const Json& j, const std::string& what) {
  return nested_matrix<Real>(j, what, [&](const Json& e) {
    if (!e.is_number()) bad(what, "expected numeric entries");
    return e.get<Real>();
  });
}

Json to_json(const RealMatrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

Json to_json(const RealVector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

ChainDocument chain_document_from_json(const Json& j) {
  if (!j.is_object()) bad("chain document", "expected a JSON object");
  if (!j.contains("A") || !j.contains("B")) bad("chain document", "needs A and B");
  ChainDocument doc;
  doc.a = complex_matrix_from_json(j.at("A"), "A");
  doc.b = hermitian_matrix_from_json(j.at("B"), "B");
  if (j.contains("X") && !j.at("X").is_null()) doc.x = complex_matrix_from_json(j.at("X"), "X");
  if (j.contains("strategy")) {
    const Json& s = j.at("strategy");
    if (s == "midpoint")
      doc.strategy = quasifree::Midpoint{};
    else if (s == "product")
      doc.strategy = quasifree::ProductSeed{};
    else if (s.is_object() && s.contains("boundary_angle") && s.at("boundary_angle").is_number())
      doc.strategy = quasifree::BoundaryAngle{s.at("boundary_angle").get<Real>()};
    else
      bad("strategy", "expected \"midpoint\", \"product\" or {\"boundary_angle\": phi}");
  }
  if (doc.x) doc.strategy = quasifree::Explicit{*doc.x};
  return doc;
}

Json to_json(const chain::ChainSpec& spec) {
  return Json{{"A", to_json(spec.map().a())}, {"B", to_json(spec.map().b())}, {"X", to_json(spec.x())}};
}

void write_index_value_csv(std::ostream& os, const std::vector<Real>& values, long first_index) {
  os << "index,value\n";
  for (std::size_t i = 0; i < values.size(); ++i)
    os << first_index + static_cast<long>(i) << ',' << format_real(values[i]) << '\n';
}

void write_path_distribution_csv(std::ostream& os, const classical::PathDistribution& dist) {
  os << "index,value\n";
  for (Eigen::Index i = 0; i < dist.probs.size(); ++i) os << i << ',' << format_real(dist.probs(i)) << '\n';
}

void write_eigenvalue_csv(std::ostream& os, const toeplitz::EigDistribution& dist) {
  os << "eigenvalue\n";
  for (Eigen::Index i = 0; i < dist.points.size(); ++i) os << format_real(dist.points(i)) << '\n';
}

void write_sweep_csv(std::ostream& os, const std::vector<std::pair<long, Real>>& sweep) {
  os << "n,value\n";
  for (const auto& [n, v] : sweep) os << n << ',' << format_real(v) << '\n';
}

void write_scan_csv(std::ostream& os, const chain::ScanResult& scan, Real unit) {
  os << "x_re,x_im,feasible,density\n";
  for (const auto& row : scan.rows)
    os << format_real(row.x_re) << ',' << format_real(row.x_im) << ',' << (row.feasible ? "true" : "false")
       << ',' << format_real(row.density * unit) << '\n';
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("io_error", "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError("invalid_json", path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("io_error", "cannot write " + path);
  out << contents;
}

}  // namespace fmc::io
