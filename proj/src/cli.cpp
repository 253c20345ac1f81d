#include "fmchain/cli.hpp"

#include "fmchain/chain.hpp"
#include "fmchain/classical.hpp"
#include "fmchain/io.hpp"
#include "fmchain/quasifree.hpp"
#include "fmchain/toeplitz.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <sstream>

namespace fmc::cli {

namespace {

using io::Json;
namespace fs = std::filesystem;

const char* kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::infeasible: return "infeasible";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::resource: return "resource";
    case ErrorKind::numeric: return "numeric";
  }
  return "unknown";
}

std::string out_path(const RunConfig& config, const std::string& name) {
  return (fs::path(config.out_dir) / name).string();
}

void prepare_out_dir(const RunConfig& config) {
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) throw ValidationError("io_error", "cannot create output directory " + config.out_dir);
}

void write_json(const RunConfig& config, const std::string& name, const Json& j) {
  io::write_text_file(out_path(config, name), j.dump(2) + "\n");
}

long positive(const std::optional<long>& v, long fallback, const char* flag) {
  const long value = v.value_or(fallback);
  if (value < 1) throw ValidationError("invalid_argument", std::string(flag) + " must be >= 1");
  return value;
}

// Non-finite numbers become null so the documents stay valid JSON.
Json number(Real v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::validation:
    case ErrorKind::resource: return kValidation;
    case ErrorKind::infeasible: return kInfeasible;
    case ErrorKind::convergence:
    case ErrorKind::numeric: return kNumeric;
  }
  return kNumeric;
}

Real RunConfig::unit() const noexcept { return bits ? 1.0 / std::numbers::ln2 : 1.0; }

void cmd_classical(const RunConfig& config, std::ostream& out) {
  const Json input = io::read_json_file(config.input);
  if (!input.is_object() || !input.contains("P")) throw ValidationError("invalid_input", "input needs P");
  const classical::StochasticMatrix p(io::real_matrix_from_json(input.at("P"), "P"));
  const classical::HmmExtension q =
      input.contains("Q_ext") ? classical::HmmExtension(p, io::real_matrix_from_json(input.at("Q_ext"), "Q_ext"))
                              : classical::markov_extension(p);
  const long n_max = positive(config.n, 14, "--n");
  const long steps = positive(config.steps, 100000, "--steps");
  if (steps < 2) throw ValidationError("invalid_argument", "--steps must be >= 2");
  const long burn_in = std::max<long>(1, steps / 10);
  const Real unit = config.unit();

  const Real rate = classical::markov_entropy_rate(p) * unit;
  auto inc = classical::entropy_rate_increments_classical(q, static_cast<int>(n_max));
  for (auto& v : inc.increments) v *= unit;
  const Real filter = classical::blackwell_filter_estimate(q, steps, burn_in, config.seed) * unit;
  const int marginal_len = static_cast<int>(std::min<long>(n_max, 10));
  const auto marginal = classical::hmm_marginal(q, marginal_len);

  prepare_out_dir(config);
  Json summary{{"command", "classical"},
               {"units", config.unit_name()},
               {"dim", p.dim()},
               {"invariant", io::to_json(p.invariant())},
               {"markov_rate", rate},
               {"increments", inc.increments},
               {"increment_estimate", inc.estimate * unit},
               {"blackwell", {{"estimate", filter}, {"steps", steps}, {"burn_in", burn_in}, {"seed", config.seed}}},
               {"marginal_length", marginal_len}};
  write_json(config, "classical.json", summary);
  write_json(config, "increments.json", Json(inc.increments));
  io::write_text_file(out_path(config, "rate.txt"), io::format_real(rate) + "\n");
  std::ostringstream csv;
  io::write_index_value_csv(csv, inc.increments);
  io::write_text_file(out_path(config, "increments.csv"), csv.str());
  std::ostringstream mcsv;
  io::write_path_distribution_csv(mcsv, marginal);
  io::write_text_file(out_path(config, "marginal.csv"), mcsv.str());
  out << summary.dump() << '\n';
}

void cmd_fermi(const RunConfig& config, std::ostream& out) {
  const auto doc = io::chain_document_from_json(io::read_json_file(config.input));
  const quasifree::FreeCpMap map(doc.a, doc.b);
  const long n = positive(config.n, 256, "--n");
  const long quad = positive(config.quad, 4096, "--quad");
  const Real unit = config.unit();

  const auto ext = quasifree::extendibility(map);
  if (!ext.extendible)
    throw InfeasibleError("not_extendible",
                          "A*A <= min(1/2, 1 - B) fails; margin " + io::format_real(ext.margin));
  const chain::ChainSpec spec = chain::ChainSpec::with_strategy(map, doc.strategy);

  const Real average = chain::entropy_density(spec, chain::Average{n}) * unit;
  const Real increment = chain::entropy_density(spec, chain::Increment{n}) * unit;
  const Real szego = chain::entropy_density(spec, chain::Szego{quad}) * unit;

  prepare_out_dir(config);
  Json summary{{"command", "fermi"},
               {"units", config.unit_name()},
               {"dim", spec.dim()},
               {"extendible", ext.extendible},
               {"margin", ext.margin},
               {"Q", io::to_json(spec.invariant().matrix())},
               {"X", io::to_json(spec.x())},
               {"n", n},
               {"quad", quad},
               {"densities", {{"average", average}, {"increment", increment}, {"szego", szego}}},
               {"gaps",
                {{"increment_szego", std::abs(increment - szego)}, {"average_szego", std::abs(average - szego)}}}};
  write_json(config, "fermi.json", summary);
  write_json(config, "chain.json", io::to_json(spec));
  out << summary.dump() << '\n';
}

void cmd_scan(const RunConfig& config, std::ostream& out) {
  const Json input = io::read_json_file(config.input);
  if (!input.is_object() || !input.contains("a") || !input.contains("b") || !input.at("b").is_number())
    throw ValidationError("invalid_input", "scan input needs scalar a and b");
  const Complex a = io::complex_from_json(input.at("a"), "a");
  const Real b = input.at("b").get<Real>();
  const long grid = positive(config.grid, 101, "--grid");
  const long quad = positive(config.quad, 256, "--quad");
  const auto scan = chain::scan_extension_scalar(a, b, grid, quad);

  prepare_out_dir(config);
  std::ostringstream csv;
  io::write_scan_csv(csv, scan, config.unit());
  io::write_text_file(out_path(config, "scan.csv"), csv.str());
  const long feasible_count =
      std::count_if(scan.rows.begin(), scan.rows.end(), [](const chain::ScanRow& r) { return r.feasible; });
  Json summary{{"command", "scan"},
               {"units", config.unit_name()},
               {"feasible", scan.feasible},
               {"grid", grid},
               {"rows", scan.rows.size()},
               {"feasible_points", feasible_count},
               {"cell", scan.cell}};
  if (scan.feasible) {
    summary["argmin"] = io::to_json(scan.argmin);
    summary["min_density"] = number(scan.min_density * config.unit());
    summary["boundary_distance"] = scan.boundary_distance;
    summary["within_one_cell"] = scan.boundary_distance <= scan.cell;
  } else {
    summary["argmin"] = nullptr;
    summary["min_density"] = nullptr;
    summary["boundary_distance"] = nullptr;
    summary["within_one_cell"] = nullptr;
  }
  write_json(config, "scan_summary.json", summary);
  out << summary.dump() << '\n';
}

void cmd_spectrum(const RunConfig& config, std::ostream& out) {
  const auto doc = io::chain_document_from_json(io::read_json_file(config.input));
  const quasifree::FreeCpMap map(doc.a, doc.b);
  const chain::ChainSpec spec = chain::ChainSpec::with_strategy(map, doc.strategy);
  const long n = positive(config.n, 64, "--n");
  const long bins = positive(config.grid, 40, "--grid");
  const long quad = positive(config.quad, 2048, "--quad");
  if (quad < 16) throw ValidationError("invalid_argument", "--quad must be >= 16 in spectrum mode");

  const auto section = chain::finite_symbol(spec, n);
  const auto dist = toeplitz::eig_distribution(section.matrix());
  const auto op = chain::symbol_operator(spec);

  std::ostringstream hist;
  hist << "bin_lo,bin_hi,finite,limit\n";
  Real prev_finite = 0.0, prev_limit = 0.0;
  for (long i = 0; i < bins; ++i) {
    const Real lo = static_cast<Real>(i) / static_cast<Real>(bins);
    const Real hi = static_cast<Real>(i + 1) / static_cast<Real>(bins);
    const Real edge = i + 1 == bins ? std::numeric_limits<Real>::infinity() : hi;
    const Real f_cdf = dist.cdf(edge);
    const Real l_cdf = i + 1 == bins ? 1.0 : toeplitz::limiting_distribution(op, edge, quad);
    hist << io::format_real(lo) << ',' << io::format_real(hi) << ',' << io::format_real(f_cdf - prev_finite) << ','
         << io::format_real(l_cdf - prev_limit) << '\n';
    prev_finite = f_cdf;
    prev_limit = l_cdf;
  }

  prepare_out_dir(config);
  io::write_text_file(out_path(config, "histogram.csv"), hist.str());
  std::ostringstream eig;
  io::write_eigenvalue_csv(eig, dist);
  io::write_text_file(out_path(config, "eigenvalues.csv"), eig.str());
  Json summary{{"command", "spectrum"},
               {"n", n},
               {"bins", bins},
               {"quad", quad},
               {"eigenvalue_min", dist.points(0)},
               {"eigenvalue_max", dist.points(dist.points.size() - 1)}};
  write_json(config, "spectrum_summary.json", summary);
  out << summary.dump() << '\n';
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig config;
  CLI::App app{"Markov chains from channels: extensions and entropy densities", "fmchain"};
  app.require_subcommand(1);

  auto add_common = [&config](CLI::App* sub) {
    sub->add_option("--input", config.input, "input JSON document")->required();
    sub->add_option("--out", config.out_dir, "output directory");
    sub->add_option("--n", config.n, "sites / increments");
    sub->add_option("--quad", config.quad, "quadrature nodes");
    sub->add_option("--grid", config.grid, "scan resolution or histogram bins");
    sub->add_option("--steps", config.steps, "filter steps");
    sub->add_option("--seed", config.seed, "random seed");
    sub->add_flag("--bits", config.bits, "report entropies in bits");
  };
  auto* classical_cmd = app.add_subcommand("classical", "classical chain: closed form, increments, filter");
  auto* fermi_cmd = app.add_subcommand("fermi", "free Fermionic chain: extendibility and densities");
  auto* scan_cmd = app.add_subcommand("scan", "scan the extension lens of a scalar map");
  auto* spectrum_cmd = scan_cmd->add_subcommand("spectrum", "section spectrum against the limit distribution");
  add_common(classical_cmd);
  add_common(fermi_cmd);
  add_common(spectrum_cmd);
  // Scan options are optional at parse time so that `scan spectrum` parses;
  // --input is checked below.
  scan_cmd->add_option("--input", config.input, "input JSON document");
  scan_cmd->add_option("--out", config.out_dir, "output directory");
  scan_cmd->add_option("--quad", config.quad, "initial quadrature nodes");
  scan_cmd->add_option("--grid", config.grid, "scan resolution");
  scan_cmd->add_flag("--bits", config.bits, "report entropies in bits");

  auto report = [&err](const std::string& code, const std::string& kind, const std::string& message) {
    err << Json{{"error", {{"code", code}, {"kind", kind}, {"message", message}}}}.dump() << '\n';
  };

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    report("usage", "validation", e.what());
    return kValidation;
  }

  try {
    if (classical_cmd->parsed()) {
      cmd_classical(config, out);
    } else if (fermi_cmd->parsed()) {
      cmd_fermi(config, out);
    } else if (spectrum_cmd->parsed()) {
      cmd_spectrum(config, out);
    } else {
      if (config.input.empty()) throw ValidationError("usage", "--input is required");
      cmd_scan(config, out);
    }
  } catch (const Error& e) {
    report(e.code(), kind_name(e.kind()), e.what());
    return exit_code_for(e.kind());
  } catch (const Json::exception& e) {
    report("invalid_input", "validation", e.what());
    return kValidation;
  } catch (const std::exception& e) {
    report("internal", "numeric", e.what());
    return kNumeric;
  }
  return kOk;
}

}  // namespace fmc::cli
