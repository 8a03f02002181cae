// reprocg: generate matrices, run the reproducible PCG solver, sweep
// topologies for bit-equality, and benchmark dot products.
//
// Exit codes: 0 success or PASS, 1 usage or input error, 2 numerical
// breakdown or non-convergence, 3 reproducibility FAIL.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "reprocg/hexfloat.hpp"
#include "reprocg/oracle.hpp"
#include "reprocg/reprocg.hpp"

using namespace reprocg;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitIrreproducible = 3;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::uint64_t bits(double x) { return std::bit_cast<std::uint64_t>(x); }

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

std::size_t to_size(const std::string& s, const char* what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size()) throw usage_error(std::string("bad ") + what + ": '" + s + "'");
  return static_cast<std::size_t>(v);
}

double to_double(const std::string& s, const char* what) {
  try {
    return parse_hex(s);
  } catch (const parse_error&) {
    throw usage_error(std::string("bad ") + what + ": '" + s + "'");
  }
}

Variant parse_variant(const std::string& s) {
  if (s == "baseline") return Variant::baseline;
  if (s == "exblas") return Variant::exblas;
  if (s == "opt") return Variant::opt;
  throw usage_error("unknown variant '" + s + "'");
}

// ---------------------------------------------------------------------------
// Matrix sources

CsrMatrix identity_matrix(std::size_t n) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return assemble_csr(n, std::move(t));
}

// kind + numeric parameters, e.g. {"poisson27", "8", "8", "8"}.
CsrMatrix generate(const std::vector<std::string>& spec) {
  if (spec.empty()) throw usage_error("empty generator spec");
  const std::string& kind = spec[0];
  auto need = [&](std::size_t k) {
    if (spec.size() != k + 1) throw usage_error(kind + " takes " + std::to_string(k) + " parameter(s)");
  };
  if (kind == "poisson27") {
    need(3);
    return gen_poisson27(to_size(spec[1], "nx"), to_size(spec[2], "ny"), to_size(spec[3], "nz"));
  }
  if (kind == "band") {
    need(2);
    return gen_band(to_size(spec[1], "n"), to_size(spec[2], "band"));
  }
  if (kind == "identity") {
    need(1);
    return identity_matrix(to_size(spec[1], "n"));
  }
  throw usage_error("unknown generator '" + kind + "'");
}

// "poisson27:8,8,8", "band:1000,5", "identity:10" or "illcond:1e12:poisson27:6,6,6".
CsrMatrix generate_from_string(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() >= 2 && parts[0] == "illcond") {
    if (parts.size() != 4) throw usage_error("illcond spec is illcond:COND:KIND:PARAMS");
    const double cond = to_double(parts[1], "condition number");
    std::vector<std::string> base{parts[2]};
    for (const auto& p : split(parts[3], ',')) base.push_back(p);
    return gen_illcond(generate(base), cond);
  }
  if (parts.size() != 2) throw usage_error("generator spec must look like kind:p1,p2,...");
  std::vector<std::string> spec{parts[0]};
  for (const auto& p : split(parts[1], ',')) spec.push_back(p);
  return generate(spec);
}

struct MatrixSource {
  std::string path;
  std::string gen;

  void add_options(CLI::App* app) {
    app->add_option("--matrix", path, "Matrix Market file");
    app->add_option("--gen", gen, "generator spec, e.g. poisson27:8,8,8 or illcond:1e12:band:100,2");
  }

  [[nodiscard]] std::string describe() const { return path.empty() ? gen : path; }

  [[nodiscard]] CsrMatrix load() const {
    if (path.empty() == gen.empty()) throw usage_error("give exactly one of --matrix and --gen");
    return path.empty() ? generate_from_string(gen) : load_matrix_market(path);
  }
};

std::vector<double> read_vector(const std::string& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot open " + path);
  std::vector<double> v;
  std::string tok;
  while (in >> tok) v.push_back(to_double(tok, "reference value"));
  if (v.size() != n) throw usage_error("reference solution has " + std::to_string(v.size()) + " values, expected " +
                                       std::to_string(n));
  return v;
}

// ---------------------------------------------------------------------------
// Report output

struct Output {
  std::string format = "json";
  std::string path;

  void add_options(CLI::App* app) {
    app->add_option("--format", format, "report format")->check(CLI::IsMember({"json", "csv"}));
    app->add_option("--out", path, "report file (default: stdout)");
  }

  void write(const std::string& text) const {
    if (path.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream out(path);
    if (!out) throw usage_error("cannot write " + path);
    out << text;
  }
};

// Flattens a report into field,index,value rows.
void csv_rows(const Json& j, const std::string& prefix, std::ostringstream& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      csv_rows(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (j.is_array() && (j.empty() || !j.front().is_structured())) {
    for (std::size_t i = 0; i < j.size(); ++i)
      out << prefix << ',' << i << ',' << (j[i].is_string() ? j[i].get<std::string>() : j[i].dump()) << '\n';
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) csv_rows(j[i], prefix + "." + std::to_string(i), out);
  } else {
    out << prefix << ",," << (j.is_string() ? j.get<std::string>() : j.dump()) << '\n';
  }
}

std::string render(const Json& report, const std::string& format) {
  if (format == "json") return report.dump(2) + "\n";
  std::ostringstream out;
  out << "field,index,value\n";
  csv_rows(report, "", out);
  return out.str();
}

Json hex_array(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(format_hex(x));
  return a;
}

// ---------------------------------------------------------------------------
// Solver flags shared by solve and verify

struct SolverFlags {
  std::string variant = "exblas";
  std::size_t procs = 1;
  std::size_t workers = 1;
  std::size_t chunk = 256;
  std::size_t fpe_size = kDefaultFpeSize;
  std::string tol = "1e-8";
  std::size_t max_iter = 100000;
  std::uint64_t seed = 20240101;
  bool baseline_shuffle = false;
  bool threaded = false;
  bool root_norm = false;

  void add_common(CLI::App* app) {
    app->add_option("--fpe-size", fpe_size, "expansion size p for the opt variant");
    app->add_option("--tol", tol, "convergence threshold on tau (decimal or hex)");
    app->add_option("--max-iter", max_iter, "iteration limit");
    app->add_option("--seed", seed, "seed for shuffled schedules");
    app->add_flag("--baseline-shuffle", baseline_shuffle, "randomize chunk order and partial-sum association");
    app->add_flag("--threaded", threaded, "run workers on std::threads");
    app->add_flag("--sqrt-tau", root_norm, "compare sqrt(tau) instead of tau against the threshold");
  }

  void add_topology(CLI::App* app) {
    app->add_option("--variant", variant, "baseline | exblas | opt")->check(CLI::IsMember({"baseline", "exblas", "opt"}));
    app->add_option("--procs", procs, "simulated processes P");
    app->add_option("--workers", workers, "workers per process T");
    app->add_option("--chunk", chunk, "chunk size bm");
  }

  [[nodiscard]] SolverConfig config(Variant v, const Topology& t) const {
    SolverConfig c;
    c.tolerance = to_double(tol, "tolerance");
    c.max_iterations = max_iter;
    c.variant = v;
    c.fpe_size = fpe_size;
    c.topology = t;
    c.norm = root_norm ? ConvergenceNorm::root : ConvergenceNorm::squared;
    c.validate();
    return c;
  }

  [[nodiscard]] Schedule schedule(std::uint64_t run = 0) const {
    if (baseline_shuffle) return Schedule::shuffled(seed + run);
    if (threaded) return Schedule::threaded();
    return Schedule::in_order();
  }

  [[nodiscard]] std::string schedule_name() const {
    return baseline_shuffle ? "shuffled" : threaded ? "threaded" : "in_order";
  }
};

Json topology_json(const Topology& t) {
  return {{"processes", t.processes}, {"workers", t.workers}, {"chunk", t.chunk}};
}

Json result_json(const SolverResult& r, bool with_solution) {
  Json j;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["residuals"] = hex_array(r.residual_history);
  j["final_residual"] = format_hex(r.residual_history.back());
  j["direct_error"] = format_hex(r.direct_error);
  j["direct_error_decimal"] = r.direct_error;
  if (with_solution) j["solution"] = hex_array(r.x);
  Json warnings = Json::array();
  if (r.residue_warning) warnings.push_back("residue: an expansion overflowed, opt result may not be exact");
  if (!r.converged) warnings.push_back("not converged within max_iterations");
  j["warnings"] = warnings;
  return j;
}

// ---------------------------------------------------------------------------
// gen

struct GenCommand {
  std::string kind;
  std::vector<std::string> params;
  std::string out;
  std::string base;
  std::string cond;
  bool symmetric = false;

  void attach(CLI::App& app) {
    CLI::App* c = app.add_subcommand("gen", "write a generated matrix in Matrix Market format");
    c->add_option("kind", kind, "poisson27 | band | illcond")->required()->check(CLI::IsMember({"poisson27", "band", "illcond"}));
    c->add_option("params", params, "poisson27: NX NY NZ; band: N BAND; illcond: base kind and parameters");
    c->add_option("--out", out, "output .mtx path")->required();
    c->add_option("--base", base, "illcond: base matrix file instead of a generated one");
    c->add_option("--cond", cond, "illcond: target condition number");
    c->add_flag("--symmetric", symmetric, "store only the lower triangle");
    c->callback([this] { run(); });
  }

  int status = kExitOk;

  void run() {
    Json report;
    report["command"] = "gen";
    report["kind"] = kind;
    CsrMatrix a;
    if (kind == "illcond") {
      if (cond.empty()) throw usage_error("illcond needs --cond");
      if (base.empty() == params.empty()) throw usage_error("illcond needs either --base or a base generator");
      const CsrMatrix b = base.empty() ? generate(params) : load_matrix_market(base);
      const IllcondResult r = gen_illcond_detailed(b, to_double(cond, "condition number"));
      report["target_condition"] = to_double(cond, "condition number");
      report["estimated_condition"] = r.estimated_condition;
      report["scale"] = format_hex(r.scale);
      a = r.matrix;
    } else {
      std::vector<std::string> spec{kind};
      spec.insert(spec.end(), params.begin(), params.end());
      a = generate(spec);
    }
    save_matrix_market(out, a, symmetric ? MatrixSymmetry::symmetric : MatrixSymmetry::general);
    std::size_t written = 0;
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (auto c : a.row_cols(i))
        if (!symmetric || static_cast<std::size_t>(c) <= i) ++written;
    report["path"] = out;
    report["n"] = a.rows();
    report["nnz"] = a.nnz();
    report["entries_written"] = written;
    std::cout << report.dump(2) << "\n";
  }
};

// ---------------------------------------------------------------------------
// solve

struct SolveCommand {
  MatrixSource source;
  SolverFlags flags;
  Output output;
  std::string reference;
  bool emit_solution = false;
  int status = kExitOk;

  void attach(CLI::App& app) {
    CLI::App* c = app.add_subcommand("solve", "solve A x = A ones with Jacobi PCG from x0 = 0");
    source.add_options(c);
    flags.add_topology(c);
    flags.add_common(c);
    output.add_options(c);
    c->add_option("--reference", reference, "file with the exact solution (default: all ones)");
    c->add_flag("--emit-solution", emit_solution, "include the solution vector in the report");
    c->callback([this] { run(); });
  }

  void run() {
    const CsrMatrix a = source.load();
    const Topology topo{flags.procs, flags.workers, flags.chunk};
    const SolverConfig cfg = flags.config(parse_variant(flags.variant), topo);
    const std::vector<double> b = rhs_from_ones(a);
    const std::vector<double> x_exact = reference.empty() ? std::vector<double>(a.rows(), 1.0) : read_vector(reference, a.rows());

    Json report;
    report["command"] = "solve";
    report["config"] = {{"matrix", source.describe()},
                        {"n", a.rows()},
                        {"nnz", a.nnz()},
                        {"variant", flags.variant},
                        {"topology", topology_json(topo)},
                        {"fpe_size", cfg.fpe_size},
                        {"tolerance", format_hex(cfg.tolerance)},
                        {"norm", flags.root_norm ? "sqrt_tau" : "tau"},
                        {"max_iterations", cfg.max_iterations},
                        {"schedule", flags.schedule_name()},
                        {"seed", flags.seed}};
    Schedule sched = flags.schedule();
    const auto t0 = Clock::now();
    try {
      const SolverResult r = pcg_solve(a, b, cfg, sched, x_exact);
      report["result"] = result_json(r, emit_solution);
      if (!r.converged) status = kExitNumerical;
    } catch (const breakdown_error& e) {
      report["result"] = {{"breakdown", e.what()}, {"iteration", e.iteration()}};
      status = kExitNumerical;
    }
    report["timing"] = {{"wall_time_s", seconds_since(t0)}};
    output.write(render(report, output.format));
  }
};

// ---------------------------------------------------------------------------
// verify

struct FirstDivergence {
  std::string config;
  std::string scalar;
  std::size_t index = 0;
  std::string expected;
  std::string actual;
};

std::optional<FirstDivergence> compare(const SolverResult& ref, const SolverResult& r) {
  const std::size_t m = std::min(ref.residual_history.size(), r.residual_history.size());
  for (std::size_t i = 0; i < m; ++i)
    if (bits(ref.residual_history[i]) != bits(r.residual_history[i]))
      return FirstDivergence{"", "tau", i, format_hex(ref.residual_history[i]), format_hex(r.residual_history[i])};
  for (std::size_t i = 0; i < std::min(ref.beta_history.size(), r.beta_history.size()); ++i)
    if (bits(ref.beta_history[i]) != bits(r.beta_history[i]))
      return FirstDivergence{"", "beta", i, format_hex(ref.beta_history[i]), format_hex(r.beta_history[i])};
  if (ref.iterations != r.iterations)
    return FirstDivergence{"", "iterations", 0, std::to_string(ref.iterations), std::to_string(r.iterations)};
  for (std::size_t i = 0; i < ref.x.size(); ++i)
    if (bits(ref.x[i]) != bits(r.x[i])) return FirstDivergence{"", "x", i, format_hex(ref.x[i]), format_hex(r.x[i])};
  return std::nullopt;
}

struct VerifyCommand {
  MatrixSource source;
  SolverFlags flags;
  Output output;
  std::string variants = "exblas,opt";
  std::string procs_list = "1,2,4,8";
  std::string workers_list = "1,2,4";
  std::string chunk_list = "1,13,256,n";
  std::size_t baseline_runs = 20;
  int status = kExitOk;

  void attach(CLI::App& app) {
    CLI::App* c = app.add_subcommand("verify", "check bit-equality of full solves over a topology grid");
    source.add_options(c);
    flags.add_common(c);
    output.add_options(c);
    c->add_option("--variants", variants, "comma-separated variants; baseline is reported, not asserted");
    c->add_option("--procs", procs_list, "comma-separated P values");
    c->add_option("--workers", workers_list, "comma-separated T values");
    c->add_option("--chunk", chunk_list, "comma-separated bm values; 'n' means the vector length");
    c->add_option("--baseline-runs", baseline_runs, "shuffled baseline runs when --baseline-shuffle is set");
    c->callback([this] { run(); });
  }

  std::vector<Topology> grid(std::size_t n) const {
    std::vector<Topology> out;
    for (const auto& p : split(procs_list, ','))
      for (const auto& t : split(workers_list, ','))
        for (const auto& b : split(chunk_list, ','))
          out.push_back({to_size(p, "P"), to_size(t, "T"), b == "n" ? std::max<std::size_t>(n, 1) : to_size(b, "bm")});
    if (out.empty()) throw usage_error("empty topology grid");
    return out;
  }

  void run() {
    const CsrMatrix a = source.load();
    const std::vector<double> b = rhs_from_ones(a);
    const std::vector<double> ones(a.rows(), 1.0);
    const auto topologies = grid(a.rows());
    std::vector<Variant> repro;
    bool with_baseline = false;
    for (const auto& v : split(variants, ',')) {
      const Variant var = parse_variant(v);
      if (var == Variant::baseline) with_baseline = true;
      else repro.push_back(var);
    }

    const auto t0 = Clock::now();
    Json report;
    report["command"] = "verify";
    report["config"] = {{"matrix", source.describe()},
                        {"n", a.rows()},
                        {"nnz", a.nnz()},
                        {"variants", variants},
                        {"configurations", topologies.size()},
                        {"tolerance", flags.tol},
                        {"schedule", flags.schedule_name()}};

    std::optional<SolverResult> ref;
    std::optional<FirstDivergence> first;
    std::size_t runs = 0, mismatches = 0;
    try {
      for (Variant v : repro) {
        for (std::size_t k = 0; k < topologies.size(); ++k) {
          const Topology& t = topologies[k];
          Schedule s = flags.schedule(k);
          const SolverResult r = pcg_solve(a, b, flags.config(v, t), s, ones);
          ++runs;
          if (!ref) {
            ref = r;
            continue;
          }
          if (auto d = compare(*ref, r)) {
            ++mismatches;
            if (!first) {
              d->config = std::string(to_string(v)) + " P=" + std::to_string(t.processes) +
                          " T=" + std::to_string(t.workers) + " bm=" + std::to_string(t.chunk);
              first = d;
            }
          }
        }
      }
      if (with_baseline) {
        std::set<std::vector<std::uint64_t>> histories;
        std::size_t divergent = 0, its_min = SIZE_MAX, its_max = 0;
        std::optional<std::vector<std::uint64_t>> first_history;
        const std::size_t count = flags.baseline_shuffle ? baseline_runs : topologies.size();
        for (std::size_t k = 0; k < count; ++k) {
          const Topology& t = topologies[k % topologies.size()];
          Schedule s = flags.schedule(k);
          const SolverResult r = pcg_solve(a, b, flags.config(Variant::baseline, t), s, ones);
          std::vector<std::uint64_t> h;
          for (double tau : r.residual_history) h.push_back(bits(tau));
          if (!first_history) first_history = h;
          else if (h != *first_history) ++divergent;
          histories.insert(h);
          its_min = std::min(its_min, r.iterations);
          its_max = std::max(its_max, r.iterations);
        }
        report["baseline"] = {{"runs", count},
                              {"distinct_residual_histories", histories.size()},
                              {"runs_differing_from_first", divergent},
                              {"iterations_min", its_min},
                              {"iterations_max", its_max}};
      }
    } catch (const breakdown_error& e) {
      report["breakdown"] = {{"message", e.what()}, {"iteration", e.iteration()}};
      status = kExitNumerical;
    }
    report["runs"] = runs;
    report["mismatches"] = mismatches;
    if (ref) {
      report["reference"] = {{"iterations", ref->iterations},
                             {"converged", ref->converged},
                             {"final_residual", format_hex(ref->residual_history.back())},
                             {"direct_error", format_hex(ref->direct_error)}};
    }
    if (first) {
      report["first_divergence"] = {{"config", first->config},
                                    {"scalar", first->scalar},
                                    {"index", first->index},
                                    {"expected", first->expected},
                                    {"actual", first->actual}};
    }
    const bool pass = status == kExitOk && mismatches == 0;
    report["verdict"] = pass ? "PASS" : "FAIL";
    report["timing"] = {{"wall_time_s", seconds_since(t0)}};
    output.write(render(report, output.format));
    if (status == kExitOk && !pass) status = kExitIrreproducible;
  }
};

// ---------------------------------------------------------------------------
// dot-bench

struct DotBenchCommand {
  SolverFlags flags;
  Output output;
  std::size_t n = 1000000;
  std::string range = "1e30";
  std::string variants = "exblas";
  std::size_t reps = 9;
  bool zeros = false;
  bool skip_oracle = false;
  int status = kExitOk;

  void attach(CLI::App& app) {
    CLI::App* c = app.add_subcommand("dot-bench", "time dot products on generated vectors");
    c->add_option("--n", n, "vector length");
    c->add_option("--range", range, "dynamic range max|x|/min|x| of the generated x (y is in [1, 2))");
    c->add_option("--variant", variants, "comma-separated: baseline, exblas, opt");
    c->add_option("--procs", flags.procs, "simulated processes P");
    c->add_option("--workers", flags.workers, "workers per process T");
    c->add_option("--chunk", flags.chunk, "chunk size bm");
    c->add_option("--fpe-size", flags.fpe_size, "expansion size p for opt");
    c->add_option("--seed", flags.seed, "vector generation seed");
    c->add_option("--reps", reps, "timed repetitions (median reported)");
    c->add_flag("--zeros", zeros, "use all-zero vectors");
    c->add_flag("--skip-oracle", skip_oracle, "do not compare with the exact oracle");
    output.add_options(c);
    c->callback([this] { run(); });
  }

  void run() {
    if (reps == 0 || n == 0) throw usage_error("--n and --reps must be positive");
    const double r = to_double(range, "range");
    if (!(r >= 1.0) || r > 1e300) throw usage_error("--range must be in [1, 1e300]");
    // Exponents of x in [lo, lo + L] (decimal), kept inside the range where
    // products and their error terms are exact.
    const double span = std::log10(r);
    const double lo = -std::min(span / 2.0, 280.0);
    std::mt19937_64 g(flags.seed);
    std::uniform_real_distribution<double> ue(lo, lo + span), um(1.0, 2.0);
    std::vector<double> x(n, 0.0), y(n, 0.0);
    if (!zeros) {
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::pow(10.0, ue(g)) * ((g() & 1) ? -1.0 : 1.0);
        y[i] = um(g) * ((g() & 1) ? -1.0 : 1.0);
      }
      x[0] = std::pow(10.0, lo + span);
      if (n > 1) x[1] = std::pow(10.0, lo);
    }
    const Topology topo{flags.procs, flags.workers, flags.chunk};
    topo.validate();
    const std::optional<double> exact = skip_oracle ? std::nullopt : std::optional(oracle::oracle_dot(x, y));

    Json report;
    report["command"] = "dot-bench";
    report["config"] = {{"n", n}, {"range", range}, {"topology", topology_json(topo)}, {"fpe_size", flags.fpe_size},
                        {"seed", flags.seed}, {"reps", reps}};
    if (exact) report["oracle"] = format_hex(*exact);
    Json results = Json::array();
    bool mismatch = false;
    for (const auto& name : split(variants, ',')) {
      const Variant v = parse_variant(name);
      std::vector<double> times;
      ReduceOutcome out;
      for (std::size_t k = 0; k < reps; ++k) {
        Schedule s = Schedule::in_order();
        const auto t0 = Clock::now();
        out = reduce_term(v, {x, y}, {topo, flags.fpe_size}, s);
        times.push_back(seconds_since(t0));
      }
      std::vector<double> sorted = times;
      std::sort(sorted.begin(), sorted.end());
      const double median = sorted[sorted.size() / 2];
      Json entry = {{"variant", name}, {"value", format_hex(out.value)}, {"residue_warning", out.residue_warning}};
      if (exact) {
        const bool ok = bits(out.value) == bits(*exact);
        entry["matches_oracle"] = ok;
        if (!ok && v != Variant::baseline) mismatch = true;
      }
      entry["median_s"] = median;
      entry["ns_per_element"] = median * 1e9 / static_cast<double>(n);
      entry["runs_s"] = times;
      results.push_back(entry);
    }
    report["results"] = results;
    output.write(render(report, output.format));
    if (mismatch) status = kExitIrreproducible;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reproducible preconditioned conjugate gradient toolkit"};
  app.require_subcommand(1);
  GenCommand gen;
  SolveCommand solve;
  VerifyCommand verify;
  DotBenchCommand bench;
  gen.attach(app);
  solve.attach(app);
  verify.attach(app);
  bench.attach(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const breakdown_error& e) {
    std::cerr << "reprocg: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "reprocg: " << e.what() << "\n";
    return kExitUsage;
  }
  return std::max({gen.status, solve.status, verify.status, bench.status});
}
