#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "treebound/convexity.hpp"
#include "treebound/fork.hpp"
#include "treebound/json_io.hpp"
#include "treebound/lower_bound.hpp"
#include "treebound/optimizer.hpp"

namespace {

using namespace treebound;

// Exit codes: 0 success, 1 domain/runtime error, 2 usage error,
// 3 internal invariant violation.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvariantFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') {
      out += '\\';
      out += ch;
    } else if (static_cast<unsigned char>(ch) < 0x20) {
      char buf[8];
      std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
      out += buf;
    } else {
      out += ch;
    }
  }
  out += "\"";
  return out;
}

std::string human(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

class Stopwatch {
 public:
  double elapsed_ms() const {
    const auto now = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(now - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

/// floor(log2 n) for a decimal string, i.e. bit length minus one. Works for
/// arbitrarily large n; only the bit length is ever materialized.
std::int64_t floor_log2_decimal(const std::string& text) {
  if (text.empty() ||
      !std::all_of(text.begin(), text.end(),
                   [](unsigned char ch) { return std::isdigit(ch); })) {
    throw UsageError("--n expects a decimal integer, got '" + text + "'");
  }
  std::string digits = text;
  digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
  if (digits == "0") {
    throw DomainError("--n must be at least 2");
  }
  std::int64_t bits = 0;
  while (digits != "0") {
    ++bits;
    std::string quotient;
    int carry = 0;
    for (char ch : digits) {
      const int cur = carry * 10 + (ch - '0');
      quotient.push_back(static_cast<char>('0' + cur / 2));
      carry = cur % 2;
    }
    quotient.erase(0, std::min(quotient.find_first_not_of('0'),
                               quotient.size() - 1));
    digits = quotient;
  }
  return bits - 1;
}

ConvexityProfile resolve_profile(double p, int dim, const std::string& c_flag) {
  SpaceSpec space{p, dim};
  space.validate();
  if (c_flag == "auto") {
    return convexity_profile(space);
  }
  double c = 0.0;
  try {
    std::size_t pos = 0;
    c = std::stod(c_flag, &pos);
    if (pos != c_flag.size()) throw std::invalid_argument(c_flag);
  } catch (const std::exception&) {
    throw UsageError("--c expects 'auto' or a positive real, got '" + c_flag +
                     "'");
  }
  if (!(c > 0.0)) {
    throw DomainError("--c must be positive, got " + c_flag);
  }
  ConvexityProfile profile;
  profile.p_type = std::max(2.0, p);
  profile.c = c;
  profile.source = ConvexityProfile::Source::analytic;
  return profile;
}

struct BoundArgs {
  std::int64_t m = -1;
  std::string n;
  double p = 0.0;
  std::string c = "auto";
  int dim = 2;
  double tau = 1e-6;
  std::string method = "iterative";
  bool json = false;
  bool csv = false;
};

int run_bound(const BoundArgs& args) {
  Stopwatch clock;
  const bool have_m = args.m >= 0;
  const bool have_n = !args.n.empty();
  if (have_m == have_n) {
    throw UsageError("pass exactly one of --m and --n");
  }
  if (args.json && args.csv) {
    throw UsageError("--json and --csv are mutually exclusive");
  }
  const std::int64_t m = have_m ? args.m : floor_log2_decimal(args.n);
  const ConvexityProfile profile = resolve_profile(args.p, args.dim, args.c);

  std::vector<LowerBoundResult> results;
  if (args.method == "iterative" || args.method == "both") {
    results.push_back(lower_bound_iterative(m, profile, args.tau));
  }
  if (args.method == "asymptotic" || args.method == "both") {
    results.push_back(lower_bound_asymptotic(m, profile));
  }
  if (results.empty()) {
    throw UsageError("--method must be iterative, asymptotic or both");
  }

  Manifest manifest;
  manifest.subcommand = "bound";
  manifest.parameters = {{"m", std::to_string(m)},
                         {"p", format_double(args.p)},
                         {"c", format_double(profile.c)},
                         {"dim", std::to_string(args.dim)},
                         {"tau", format_double(args.tau)},
                         {"method", "\"" + args.method + "\""}};
  manifest.wall_time_ms = clock.elapsed_ms();

  if (args.json) {
    std::string out = "{\"manifest\": " + manifest_json(manifest) +
                      ",\n\"profile\": {\"p_type\": " +
                      format_double(profile.p_type) +
                      ", \"c\": " + format_double(profile.c) +
                      ", \"source\": \"" + profile.source_name() +
                      "\"},\n\"results\": [";
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (i > 0) out += ",";
      out += lower_bound_json(results[i]);
    }
    out += "]}\n";
    std::cout << out;
    return 0;
  }
  if (args.csv) {
    std::cout << "m,method,value,p,c,tau\n";
    for (const auto& r : results) {
      std::cout << r.m << "," << r.method_name() << ","
                << format_double(r.value) << "," << format_double(r.profile.p_type)
                << "," << format_double(r.profile.c) << ","
                << format_double(r.tau) << "\n";
    }
    return 0;
  }
  std::cout << "m = " << m << "  (p = " << human(profile.p_type)
            << ", c = " << human(profile.c) << " [" << profile.source_name()
            << "], tau = " << human(args.tau) << ")\n";
  for (const auto& r : results) {
    if (r.method == LowerBoundResult::Method::iterative) {
      std::cout << "iterative bound:  " << human(r.value) << "\n";
      if (r.used_scan_fallback) {
        std::cout << "note: monotonicity validation failed; scan fallback "
                     "used\n";
      }
    } else {
      std::cout << "asymptotic bound: " << human(r.value)
                << "  (leading order only)\n";
    }
  }
  return 0;
}

struct ModulusArgs {
  double p = 0.0;
  int dim = 0;
  double eps = 0.0;
  bool numeric = false;
  std::uint64_t seed = 7;
  bool json = false;
};

int run_modulus(const ModulusArgs& args) {
  Stopwatch clock;
  SpaceSpec space{args.p, args.dim};
  space.validate();

  std::optional<double> analytic;
  if (args.p >= 2.0) {
    analytic = modulus_analytic(space, args.eps);
  }
  std::optional<ModulusEstimate> numeric;
  if (args.numeric || !analytic.has_value()) {
    numeric = modulus_numeric(space, args.eps, args.seed);
  }

  Manifest manifest;
  manifest.subcommand = "modulus";
  manifest.parameters = {{"p", format_double(args.p)},
                         {"dim", std::to_string(args.dim)},
                         {"eps", format_double(args.eps)}};
  manifest.seed = args.seed;
  manifest.wall_time_ms = clock.elapsed_ms();

  if (args.json) {
    std::string out = "{\"manifest\": " + manifest_json(manifest) + ",\n";
    out += "\"p\": " + format_double(args.p) +
           ", \"dim\": " + std::to_string(args.dim) +
           ", \"eps\": " + format_double(args.eps);
    if (analytic) out += ",\n\"analytic\": " + format_double(*analytic);
    if (numeric) {
      out += ",\n\"numeric\": {\"value\": " + format_double(numeric->value) +
             ", \"separation\": " + format_double(numeric->separation) +
             ", \"x\": [";
      for (std::size_t i = 0; i < numeric->x.size(); ++i) {
        if (i > 0) out += ",";
        out += format_double(numeric->x[i]);
      }
      out += "], \"y\": [";
      for (std::size_t i = 0; i < numeric->y.size(); ++i) {
        if (i > 0) out += ",";
        out += format_double(numeric->y[i]);
      }
      out += "]}";
    }
    out += "}\n";
    std::cout << out;
    return 0;
  }
  std::cout << "modulus of convexity of l_" << human(args.p) << "^"
            << args.dim << " at eps = " << human(args.eps) << "\n";
  if (analytic) {
    std::cout << "analytic: " << human(*analytic) << "\n";
  }
  if (numeric) {
    std::cout << "numeric:  " << human(numeric->value)
              << "  (separation " << human(numeric->separation)
              << ", residual " << human(numeric->constraint_residual)
              << ")\n";
  }
  return 0;
}

struct EmbedArgs {
  int depth = 0;
  double p = 0.0;
  int dim = 0;
  int restarts = 8;
  int steps = 5000;
  std::uint64_t seed = 42;
  std::string out;
  std::string history;
  double tau = 1e-6;
  bool json = false;
};

int run_embed(const EmbedArgs& args) {
  Stopwatch clock;
  SpaceSpec space{args.p, args.dim};
  space.validate();
  OptimizerConfig config;
  config.restarts = args.restarts;
  config.steps = args.steps;
  config.seed = args.seed;
  config.record_history = !args.history.empty();

  const OptimizationResult result = multi_start(args.depth, space, config);

  double lower = 1.0;
  if (args.depth >= 2) {
    const std::int64_t m =
        floor_log2_decimal(std::to_string(args.depth));
    const ConvexityProfile profile = convexity_profile(space);
    lower = lower_bound_iterative(m, profile, args.tau).value;
  }

  Manifest manifest;
  manifest.subcommand = "embed";
  manifest.parameters = {{"depth", std::to_string(args.depth)},
                         {"p", format_double(args.p)},
                         {"dim", std::to_string(args.dim)},
                         {"restarts", std::to_string(args.restarts)},
                         {"steps", std::to_string(args.steps)},
                         {"tau", format_double(args.tau)}};
  manifest.seed = args.seed;
  manifest.wall_time_ms = clock.elapsed_ms();

  write_text_file(args.out, embedding_json(result.embedding, &manifest));
  if (!args.history.empty()) {
    std::string csv = "restart,step,objective,exact_distortion\n";
    for (const auto& rec : result.step_history) {
      csv += std::to_string(rec.restart) + "," + std::to_string(rec.step) +
             "," + format_double(rec.objective) + "," +
             format_double(rec.exact_distortion) + "\n";
    }
    write_text_file(args.history, csv);
  }

  if (args.json) {
    std::cout << "{\"manifest\": " << manifest_json(manifest)
              << ",\n\"distortion\": " << format_double(result.report.distortion)
              << ", \"expansion\": " << format_double(result.report.expansion)
              << ", \"contraction\": "
              << format_double(result.report.contraction)
              << ", \"lower_bound\": " << format_double(lower)
              << ", \"out\": " << quoted(args.out) << "}\n";
    return 0;
  }
  std::cout << "optimized embedding of T_" << args.depth << " into l_"
            << human(args.p) << "^" << args.dim << "\n";
  std::cout << "upper bound (achieved distortion): "
            << human(result.report.distortion) << "\n";
  std::cout << "lower bound (certified):           " << human(lower) << "\n";
  std::cout << "written to " << args.out << "\n";
  return 0;
}

struct CertifyArgs {
  std::string input;
  double tau = 1e-6;
  std::string trace_path;
  bool json = false;
};

int run_certify(const CertifyArgs& args) {
  Stopwatch clock;
  const Embedding embedding = parse_embedding_json(read_text_file(args.input));
  if (embedding.tree.depth < 2) {
    throw UsageError("certification needs an embedding of depth >= 2, got " +
                     std::to_string(embedding.tree.depth));
  }
  const ConvexityProfile profile = convexity_profile(embedding.space);
  const ExtractionTrace trace = certify_chain(embedding, profile, args.tau);

  Manifest manifest;
  manifest.subcommand = "certify";
  manifest.parameters = {{"input", quoted(args.input)},
                         {"tau", format_double(args.tau)}};
  manifest.wall_time_ms = clock.elapsed_ms();

  if (!args.trace_path.empty()) {
    write_text_file(args.trace_path,
                    trace_json(trace, embedding.tree.depth, profile, args.tau,
                               &manifest));
  }

  if (args.json) {
    std::cout << trace_json(trace, embedding.tree.depth, profile, args.tau,
                            &manifest);
  } else {
    std::cout << "D_0 = " << human(trace.d_sequence.front()) << "\n";
    std::cout << "D_k sequence:";
    for (double d : trace.d_sequence) std::cout << " " << human(d);
    std::cout << "\n";
    std::cout << "certified lower bound L = " << human(trace.lower_bound)
              << "\n";
    std::cout << (trace.d0_dominates ? "PASS" : "FAIL")
              << ": observed distortion "
              << (trace.d0_dominates ? ">=" : "<") << " L\n";
    std::cout << trace.certified_statement << "\n";
  }
  if (!trace.d0_dominates) {
    throw InvariantFailure(
        "observed distortion fell below the certified lower bound");
  }
  return 0;
}

struct ReportArgs {
  double p = 0.0;
  std::vector<std::int64_t> m_list;
  int dim = 2;
  double tau = 1e-6;
  std::string csv_path;
  bool json = false;
};

int run_report(const ReportArgs& args) {
  Stopwatch clock;
  const ConvexityProfile profile = resolve_profile(args.p, args.dim, "auto");
  std::vector<ReportRow> rows;
  for (const std::int64_t m : args.m_list) {
    ReportRow row;
    row.m = m;
    row.iterative = lower_bound_iterative(m, profile, args.tau).value;
    row.asymptotic = lower_bound_asymptotic(m, profile).value;
    row.ratio = row.asymptotic / row.iterative;
    rows.push_back(row);
  }

  Manifest manifest;
  manifest.subcommand = "report";
  manifest.parameters = {{"p", format_double(args.p)},
                         {"dim", std::to_string(args.dim)},
                         {"tau", format_double(args.tau)}};
  manifest.wall_time_ms = clock.elapsed_ms();

  if (!args.csv_path.empty()) {
    write_text_file(args.csv_path, report_csv(rows));
  }
  if (args.json) {
    std::string out = "{\"manifest\": " + manifest_json(manifest) +
                      ",\n\"profile\": {\"p_type\": " +
                      format_double(profile.p_type) +
                      ", \"c\": " + format_double(profile.c) +
                      ", \"source\": \"" + profile.source_name() +
                      "\"},\n\"rows\": [";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i > 0) out += ",";
      out += "{\"m\":" + std::to_string(rows[i].m) +
             ",\"iterative\":" + format_double(rows[i].iterative) +
             ",\"asymptotic\":" + format_double(rows[i].asymptotic) +
             ",\"ratio\":" + format_double(rows[i].ratio) + "}";
    }
    out += "]}\n";
    std::cout << out;
    return 0;
  }
  std::printf("%8s %14s %14s %10s\n", "m", "iterative", "asymptotic",
              "ratio");
  for (const auto& row : rows) {
    std::printf("%8lld %14.8g %14.8g %10.6g\n",
                static_cast<long long>(row.m), row.iterative, row.asymptotic,
                row.ratio);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certified lower bounds on the distortion of binary trees in "
               "l_p spaces, with numeric embeddings to sandwich them"};
  app.require_subcommand(1);

  BoundArgs bound_args;
  auto* bound = app.add_subcommand(
      "bound", "certified lower bound for trees with floor(log2 n) = m");
  bound->add_option("--m", bound_args.m, "number of halving iterations");
  bound->add_option("--n", bound_args.n,
                    "tree depth as a decimal string (may be huge)");
  bound->add_option("--p", bound_args.p, "norm exponent")->required();
  bound->add_option("--c", bound_args.c, "convexity constant or 'auto'");
  bound->add_option("--dim", bound_args.dim,
                    "dimension used when fitting a numeric profile");
  bound->add_option("--tau", bound_args.tau, "margin in (0,1)");
  bound->add_option("--method", bound_args.method,
                    "iterative | asymptotic | both");
  bound->add_flag("--json", bound_args.json, "machine-readable output");
  bound->add_flag("--csv", bound_args.csv, "CSV output");

  ModulusArgs modulus_args;
  auto* modulus = app.add_subcommand(
      "modulus", "modulus of uniform convexity of l_p^d");
  modulus->add_option("--p", modulus_args.p, "norm exponent")->required();
  modulus->add_option("--dim", modulus_args.dim, "dimension")->required();
  modulus->add_option("--eps", modulus_args.eps, "separation in (0,2]")
      ->required();
  modulus->add_flag("--numeric", modulus_args.numeric,
                    "also run the numeric search");
  modulus->add_option("--seed", modulus_args.seed, "search seed");
  modulus->add_flag("--json", modulus_args.json, "machine-readable output");

  EmbedArgs embed_args;
  auto* embed = app.add_subcommand(
      "embed", "optimize a low-distortion embedding and write it as JSON");
  embed->add_option("--depth", embed_args.depth, "tree depth")->required();
  embed->add_option("--p", embed_args.p, "norm exponent")->required();
  embed->add_option("--dim", embed_args.dim, "dimension")->required();
  embed->add_option("--restarts", embed_args.restarts, "restart count");
  embed->add_option("--steps", embed_args.steps, "descent steps");
  embed->add_option("--seed", embed_args.seed, "base seed");
  embed->add_option("--out", embed_args.out, "output embedding file")
      ->required();
  embed->add_option("--history", embed_args.history,
                    "optional CSV of per-step objective values");
  embed->add_option("--tau", embed_args.tau, "margin for the printed bound");
  embed->add_flag("--json", embed_args.json, "machine-readable output");

  CertifyArgs certify_args;
  auto* certify = app.add_subcommand(
      "certify", "replay the extraction chain on an embedding file");
  certify->add_option("--input", certify_args.input, "embedding JSON file")
      ->required();
  certify->add_option("--tau", certify_args.tau, "margin in (0,1)");
  certify->add_option("--trace", certify_args.trace_path,
                      "write the full JSON trace here");
  certify->add_flag("--json", certify_args.json, "machine-readable output");

  ReportArgs report_args;
  auto* report = app.add_subcommand(
      "report", "iterative vs asymptotic bound table over a list of m");
  report->add_option("--p", report_args.p, "norm exponent")->required();
  report->add_option("--m-list", report_args.m_list, "m values")
      ->required()
      ->delimiter(',');
  report->add_option("--dim", report_args.dim,
                     "dimension used when fitting a numeric profile");
  report->add_option("--tau", report_args.tau, "margin in (0,1)");
  report->add_option("--csv", report_args.csv_path, "write CSV here");
  report->add_flag("--json", report_args.json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(bound)) return run_bound(bound_args);
    if (app.got_subcommand(modulus)) return run_modulus(modulus_args);
    if (app.got_subcommand(embed)) return run_embed(embed_args);
    if (app.got_subcommand(certify)) return run_certify(certify_args);
    if (app.got_subcommand(report)) return run_report(report_args);
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const UsageError& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return 2;
  } catch (const InvariantFailure& err) {
    std::cerr << "internal invariant violation: " << err.what() << "\n";
    return 3;
  } catch (const LemmaViolation& err) {
    std::cerr << "internal invariant violation: " << err.what() << "\n";
    return 3;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}
