#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>

#include "polyinv/certify.hpp"
#include "polyinv/experiments.hpp"
#include "polyinv/io.hpp"

#ifndef POLYINV_VERSION
#define POLYINV_VERSION "0.0.0"
#endif

namespace polyinv::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kNonConvergence = 3, kNumerical = 4 };

/// Bad flag combination or value detected after parsing.
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline std::string fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Digest of an output file. CSV columns named "ms" hold wall times and are
/// left out so that reruns compare equal.
inline std::string content_digest(const std::string& path) {
  const std::string text = read_text(path);
  if (!path.ends_with(".csv")) return fnv1a64(text);
  std::istringstream in(text);
  std::string line, kept;
  std::optional<std::size_t> drop;
  bool header = true;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (header) {
      for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i] == "ms") drop = i;
      header = false;
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (drop && i == *drop) continue;
      kept += cells[i];
      kept += ',';
    }
    kept += '\n';
  }
  return fnv1a64(kept);
}

namespace detail {

template <class T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
  std::vector<T> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    std::istringstream conv(item);
    T v{};
    if (!(conv >> v) || !conv.eof()) throw UsageError(std::string(flag) + ": cannot parse '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(std::string(flag) + ": empty list");
  return out;
}

inline std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

/// Static SVG of 2-D polytopes (drawn in order, distinct strokes), the unit
/// circle, and optional points. Coordinates are flipped so y points up.
inline std::string render_svg(const std::vector<Polytope>& polys, const std::vector<Vec>& points = {}) {
  double lo_x = -1.0, hi_x = 1.0, lo_y = -1.0, hi_y = 1.0;
  auto grow = [&](const Vec& v) {
    lo_x = std::min(lo_x, v[0]);
    hi_x = std::max(hi_x, v[0]);
    lo_y = std::min(lo_y, v[1]);
    hi_y = std::max(hi_y, v[1]);
  };
  for (const Polytope& p : polys) {
    if (p.dim() != 2) throw UsageError("render supports n = 2 only (got n = " + std::to_string(p.dim()) + ")");
    for (const Vec& v : p.vertices()) grow(v);
  }
  for (const Vec& v : points) {
    if (v.size() != 2) throw UsageError("render supports n = 2 only");
    grow(v);
  }
  const double span = std::max(hi_x - lo_x, hi_y - lo_y);
  const double pad = 0.05 * span;
  const double vx = lo_x - pad, vy = -hi_y - pad, vw = hi_x - lo_x + 2 * pad, vh = hi_y - lo_y + 2 * pad;
  const double stroke = 0.004 * span;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  using detail::fmt;
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"" << fmt(vx) << ' ' << fmt(vy) << ' '
     << fmt(vw) << ' ' << fmt(vh) << "\" width=\"600\" height=\"" << fmt(600.0 * vh / vw) << "\">\n";
  os << "  <circle cx=\"0\" cy=\"0\" r=\"1\" fill=\"none\" stroke=\"#999999\" stroke-width=\"" << fmt(stroke)
     << "\" stroke-dasharray=\"" << fmt(4 * stroke) << "\"/>\n";
  for (std::size_t i = 0; i < polys.size(); ++i) {
    std::vector<Vec> v = polys[i].vertices();
    std::sort(v.begin(), v.end(),
              [](const Vec& a, const Vec& b) { return std::atan2(a[1], a[0]) < std::atan2(b[1], b[0]); });
    const char* color = palette[i % std::size(palette)];
    os << "  <path d=\"";
    for (std::size_t k = 0; k < v.size(); ++k)
      os << (k ? " L " : "M ") << fmt(v[k][0]) << ' ' << fmt(-v[k][1]);
    os << " Z\" fill=\"" << color << "\" fill-opacity=\"0.12\" stroke=\"" << color << "\" stroke-width=\""
       << fmt(stroke) << "\"/>\n";
  }
  for (const Vec& p : points)
    os << "  <circle cx=\"" << fmt(p[0]) << "\" cy=\"" << fmt(-p[1]) << "\" r=\"" << fmt(1.5 * stroke)
       << "\" fill=\"#333333\"/>\n";
  os << "</svg>\n";
  return os.str();
}

/// Bookkeeping for one command: everything that goes into the manifest.
struct Invocation {
  std::string command;
  std::vector<std::string> args;
  Json flags = Json::object();
  std::optional<std::uint64_t> seed;
  std::vector<std::string> inputs;
  std::vector<std::pair<std::string, std::string>> outputs;  // (role, path)
  Json extra = Json::object();
};

inline std::string manifest_path(const Invocation& inv) { return inv.outputs.front().second + ".manifest.json"; }

inline void write_manifest(const Invocation& inv, const std::string& started, double wall_ms) {
  Json m;
  m["tool"] = "polyinv";
  m["version"] = POLYINV_VERSION;
  m["command"] = inv.command;
  m["args"] = inv.args;
  m["flags"] = inv.flags;
  if (inv.seed) m["seed"] = *inv.seed;
  else m["seed"] = nullptr;
  m["cwd"] = std::filesystem::current_path().string();
  Json in = Json::array();
  for (const std::string& p : inv.inputs) in.push_back({{"path", p}, {"digest", content_digest(p)}});
  m["inputs"] = std::move(in);
  Json out = Json::array();
  for (const auto& [role, p] : inv.outputs) out.push_back({{"role", role}, {"path", p}, {"digest", content_digest(p)}});
  m["outputs"] = std::move(out);
  m["digest"] = "fnv1a64 of the file; CSV columns named ms are excluded";
  if (!inv.extra.empty()) m["details"] = inv.extra;
  m["started_utc"] = started;
  m["wall_ms"] = wall_ms;
  write_text(manifest_path(inv), dump(m));
}

namespace detail {

inline void record_flags(const CLI::App& sub, Invocation& inv) {
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_name();
    if (name == "--help" || name.empty()) continue;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      if (res.size() == 1) inv.flags[name] = res.front();
      else inv.flags[name] = res;
    } else if (!opt->get_default_str().empty()) {
      inv.flags[name] = opt->get_default_str();
    }
  }
}

inline Polytope initial_set(const std::string& init, std::size_t n, Invocation& inv) {
  if (init.empty()) return unit_box(n);
  inv.inputs.push_back(init);
  Polytope x = load_polytope(init);
  if (x.dim() != n) throw UsageError("--init: dimension " + std::to_string(x.dim()) + " does not match n = " + std::to_string(n));
  return x;
}

}  // namespace detail

/// Runs one command line (without the program name). Returns the exit code.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr);

namespace detail {

inline int replay(const std::string& manifest_file, const std::string& out_dir_flag, std::ostream& out,
                  std::ostream& err) {
  const Json m = parse_json(read_text(manifest_file));
  if (!m.contains("args") || !m.contains("outputs") || !m.contains("cwd"))
    throw UsageError("replay: not a manifest: " + manifest_file);
  std::vector<std::string> args = m["args"].get<std::vector<std::string>>();
  const std::string cwd = m["cwd"].get<std::string>();
  namespace fs = std::filesystem;
  fs::path out_dir = out_dir_flag.empty()
                         ? fs::temp_directory_path() / ("polyinv-replay-" + fnv1a64(read_text(manifest_file)))
                         : fs::absolute(out_dir_flag);
  fs::create_directories(out_dir);
  // Outputs go to out_dir under their original file names.
  static const char* out_flags[] = {"--out", "--trace"};
  for (std::size_t i = 0; i + 1 < args.size(); ++i)
    for (const char* f : out_flags)
      if (args[i] == f) args[i + 1] = (out_dir / fs::path(args[i + 1]).filename()).string();
  const fs::path here = fs::current_path();
  fs::current_path(cwd);
  std::ostringstream sink;
  int code = kOk;
  try {
    code = run(args, sink, err);
  } catch (...) {
    fs::current_path(here);
    throw;
  }
  fs::current_path(here);
  if (code != kOk) {
    err << "replay: command exited with " << code << "\n";
    return code;
  }
  const Json& recorded = m["outputs"];
  bool same = true;
  for (const Json& o : recorded) {
    const fs::path fresh = out_dir / fs::path(o["path"].get<std::string>()).filename();
    const std::string d = content_digest(fresh.string());
    const bool ok = d == o["digest"].get<std::string>();
    same = same && ok;
    out << (ok ? "same   " : "DIFFERS") << "  " << o["role"].get<std::string>() << "  " << fresh.string() << "\n";
  }
  out << (same ? "replay: outputs reproduced\n" : "replay: outputs differ\n");
  return same ? kOk : kNumerical;
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Polyhedral invariant sets of switched linear systems from data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", POLYINV_VERSION);
  std::size_t threads = 1;

  // gen-system
  std::size_t g_n = 2, g_modes = 2;
  double g_decay = 0.95;
  std::uint64_t g_seed = 1;
  std::string g_out;
  auto* gen = app.add_subcommand("gen-system", "Random system whose length-3 products certify rho <= decay");
  gen->add_option("--n", g_n, "State dimension")->check(CLI::Range(2, 8))->capture_default_str();
  gen->add_option("--modes", g_modes, "Number of modes")->check(CLI::Range(1, 16))->capture_default_str();
  gen->add_option("--decay", g_decay, "Certified decay bound in (0, 1)")->capture_default_str();
  gen->add_option("--seed", g_seed, "Random seed")->capture_default_str();
  gen->add_option("--out", g_out, "System JSON")->required();

  // sample
  std::string s_system, s_out;
  std::size_t s_n = 0;
  std::uint64_t s_seed = 1;
  auto* smp = app.add_subcommand("sample", "Draw observation pairs from a system");
  smp->add_option("--system", s_system, "System JSON")->required();
  smp->add_option("--N", s_n, "Number of pairs")->required();
  smp->add_option("--seed", s_seed, "Random seed")->capture_default_str();
  smp->add_option("--out", s_out, "SampleSet JSON")->required();

  // synthesize
  std::string y_samples, y_out, y_trace, y_init;
  double y_tol = 1e-8;
  std::size_t y_max = 200;
  auto* syn = app.add_subcommand("synthesize", "Data-driven invariant set from observations");
  syn->add_option("--samples", y_samples, "SampleSet JSON")->required();
  syn->add_option("--tol", y_tol, "Stopping tolerance")->capture_default_str();
  syn->add_option("--max-iter", y_max, "Iteration cap")->capture_default_str();
  syn->add_option("--init", y_init, "Initial polytope JSON (default: unit hypercube)");
  syn->add_option("--out", y_out, "Polytope JSON")->required();
  syn->add_option("--trace", y_trace, "Iteration trace CSV (default: <out>.trace.csv)");

  // certify
  std::string c_poly, c_mode, c_samples, c_init, c_out;
  std::optional<double> c_eps;
  double c_beta = 0.001, c_tol = 1e-8;
  std::optional<std::uint64_t> c_n;
  std::optional<std::size_t> c_modes;
  auto* cer = app.add_subcommand("certify", "Contraction or scenario certificate");
  cer->add_option("--polytope", c_poly, "Polytope JSON");
  cer->add_option("--mode", c_mode, "contraction | scenario")
      ->required()
      ->check(CLI::IsMember({"contraction", "scenario"}));
  cer->add_option("--epsilon", c_eps, "Violation level in (0, 1/2) (contraction)");
  cer->add_option("--beta", c_beta, "Confidence parameter (scenario)")->capture_default_str();
  cer->add_option("--N", c_n, "Number of samples behind the set (contraction)");
  cer->add_option("--modes", c_modes, "Number of modes (contraction)");
  cer->add_option("--samples", c_samples, "SampleSet JSON (required for scenario)");
  cer->add_option("--init", c_init, "Initial polytope JSON for reruns (default: unit hypercube)");
  cer->add_option("--tol", c_tol, "Stopping tolerance for reruns")->capture_default_str();
  cer->add_option("--threads", threads, "Worker threads")->capture_default_str();
  cer->add_option("--out", c_out, "Certificate JSON")->required();

  // bench-table
  std::string b_dims = "2,3,4", b_modes = "4,6", b_out;
  BenchConfig bcfg;
  auto* ben = app.add_subcommand("bench-table", "Data-driven vs model-based iteration over (n, M)");
  ben->add_option("--dims", b_dims, "Comma-separated dimensions")->capture_default_str();
  ben->add_option("--modes", b_modes, "Comma-separated mode counts")->capture_default_str();
  ben->add_option("--N", bcfg.samples, "Samples per row")->capture_default_str();
  ben->add_option("--seed", bcfg.seed, "Root seed; row i uses child stream i")->capture_default_str();
  ben->add_option("--decay", bcfg.decay, "Generator decay bound")->capture_default_str();
  ben->add_option("--tol", bcfg.iteration.tolerance, "Stopping tolerance")->capture_default_str();
  ben->add_option("--threads", threads, "Worker threads")->capture_default_str();
  ben->add_option("--out", b_out, "CSV")->required();

  // bound-curves
  CurveConfig ccfg;
  std::optional<std::string> k_eps, k_grid;
  std::string k_out;
  auto* cur = app.add_subcommand("bound-curves", "Contraction-rate curves lambda_B(N) and lambda_eps(N)");
  cur->add_option("--n", ccfg.n, "State dimension")->check(CLI::Range(2, 8))->capture_default_str();
  cur->add_option("--modes", ccfg.modes, "Number of modes")->check(CLI::Range(1, 16))->capture_default_str();
  cur->add_option("--beta", ccfg.beta, "Confidence parameter")->capture_default_str();
  auto* eps_opt = cur->add_option("--eps-grid", k_eps, "Comma-separated eps values; N = solve_N(eps)");
  auto* n_opt = cur->add_option("--N-grid", k_grid, "Comma-separated sample counts");
  eps_opt->excludes(n_opt);
  cur->add_option("--seed", ccfg.seed, "Root seed")->capture_default_str();
  cur->add_option("--decay", ccfg.decay, "Generator decay bound")->capture_default_str();
  cur->add_option("--threads", threads, "Worker threads")->capture_default_str();
  cur->add_option("--out", k_out, "CSV")->required();

  // render
  std::vector<std::string> r_polys;
  std::string r_samples, r_out;
  auto* ren = app.add_subcommand("render", "SVG of 2-D polytopes");
  ren->add_option("--polytope", r_polys, "Polytope JSON (repeatable, drawn in order)")->required();
  ren->add_option("--samples", r_samples, "SampleSet JSON; successor points are drawn");
  ren->add_option("--out", r_out, "SVG")->required();

  // replay
  std::string p_manifest, p_dir;
  auto* rep = app.add_subcommand("replay", "Rerun a manifest and compare output digests");
  rep->add_option("--manifest", p_manifest, "Manifest JSON")->required();
  rep->add_option("--out-dir", p_dir, "Where rerun outputs go (default: a temp directory)");

  const std::vector<std::string> original = args;
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << POLYINV_VERSION << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  const CLI::App* sub = app.get_subcommands().front();
  Invocation inv;
  inv.command = sub->get_name();
  inv.args = original;
  detail::record_flags(*sub, inv);
  const std::string started = detail::utc_now();
  const auto t0 = std::chrono::steady_clock::now();

  try {
    if (sub == rep) return detail::replay(p_manifest, p_dir, out, err);

    if (sub == gen) {
      if (!(g_decay > 0.0 && g_decay < 1.0)) throw UsageError("--decay must be in (0, 1)");
      RandomSource rng(g_seed);
      const SwitchedLinearSystem sys = generate_stable_system(g_n, g_modes, g_decay, rng);
      save(g_out, sys);
      inv.seed = g_seed;
      inv.outputs.emplace_back("system", g_out);
      const double bound = product_norm_bound(sys);
      inv.extra["certified_decay_bound"] = bound;
      out << "certified decay bound (length-3 products): " << detail::fmt(bound) << "\n";
    } else if (sub == smp) {
      if (s_n < 1) throw UsageError("--N must be at least 1");
      const SwitchedLinearSystem sys = load_system(s_system);
      inv.inputs.push_back(s_system);
      RandomSource rng(s_seed);
      save(s_out, sample_observations(sys, s_n, rng));
      inv.seed = s_seed;
      inv.outputs.emplace_back("samples", s_out);
      out << "wrote " << s_n << " pairs\n";
    } else if (sub == syn) {
      if (!(y_tol > 0.0)) throw UsageError("--tol must be positive");
      if (y_max < 1) throw UsageError("--max-iter must be at least 1");
      const SampleSet s = load_samples(y_samples);
      inv.inputs.push_back(y_samples);
      inv.seed = s.seed;
      const Polytope x = detail::initial_set(y_init, s.n, inv);
      const std::string trace_path = y_trace.empty() ? y_out + ".trace.csv" : y_trace;
      const IterationConfig cfg{y_tol, y_max};
      InvariantSetResult r;
      try {
        r = data_driven_invariant_set(s, x, cfg);
      } catch (const NonConvergence& e) {
        write_text(trace_path, e.trace().to_csv());
        err << "no convergence within " << y_max << " iterations; trace in " << trace_path << "\n";
        return kNonConvergence;
      } catch (const IterationDegeneracy& e) {
        write_text(trace_path, e.trace().to_csv());
        err << "numerical failure: " << e.what() << "; trace in " << trace_path << "\n";
        return kNumerical;
      }
      save(y_out, r.set);
      write_text(trace_path, r.trace.to_csv());
      inv.outputs.emplace_back("polytope", y_out);
      inv.outputs.emplace_back("trace", trace_path);
      inv.extra["k_tilde"] = r.trace.updates();
      inv.extra["vertices"] = r.set.vertex_count();
      out << "k_tilde = " << r.trace.updates() << "\nvertices = " << r.set.vertex_count() << "\n";
    } else if (sub == cer) {
      Json report;
      if (c_mode == "contraction") {
        if (c_poly.empty()) throw UsageError("contraction mode requires --polytope");
        if (!c_eps) throw UsageError("contraction mode requires --epsilon");
        if (!(*c_eps > 0.0 && *c_eps < 0.5)) throw UsageError("--epsilon must be in (0, 1/2)");
        const Polytope s = load_polytope(c_poly);
        inv.inputs.push_back(c_poly);
        std::uint64_t big_n = c_n.value_or(0);
        std::size_t modes = c_modes.value_or(0);
        if (!c_samples.empty()) {
          const SampleSet samples = load_samples(c_samples);
          inv.inputs.push_back(c_samples);
          if (!c_n) big_n = samples.size();
          if (!c_modes) modes = samples.modes;
        }
        if (big_n < 1 || modes < 1) throw UsageError("contraction mode requires --N and --modes (or --samples)");
        const ContractionCertificate c = contraction_certificate(s, *c_eps, big_n, modes, {}, threads);
        report = report_json(c);
        out << "status: " << c.status << "\n";
        if (c.conclusive) out << "lambda = " << detail::fmt(c.lambda) << "\n";
        out << "confidence bound B = " << detail::fmt(c.confidence_bound) << "\n";
      } else {
        if (c_samples.empty()) throw UsageError("scenario mode requires --samples");
        if (!(c_beta > 0.0 && c_beta < 1.0)) throw UsageError("--beta must be in (0, 1)");
        const SampleSet samples = load_samples(c_samples);
        inv.inputs.push_back(c_samples);
        inv.seed = samples.seed;
        const Polytope x = detail::initial_set(c_init, samples.n, inv);
        const IterationConfig cfg{c_tol, 200};
        const RecordedRun run = record_data_driven(samples, x, cfg);
        const ScenarioCertificate c = scenario_certificate(samples, run, c_beta, cfg, threads);
        std::optional<GammaLower> rate;
        if (c.almost_invariance_level < 0.5) rate = gamma_lower(c.set, c.almost_invariance_level, {}, threads);
        report = report_json(c, rate ? &*rate : nullptr);
        if (!c_poly.empty()) {
          const Polytope given = load_polytope(c_poly);
          inv.inputs.push_back(c_poly);
          report["result"]["matches_polytope"] = same_vertex_set(given, c.set);
        }
        out << "supporting points: " << c.support_count() << " of " << c.samples << "\n";
        out << "almost-invariance level M*eps(s) = " << detail::fmt(c.almost_invariance_level)
            << (c.vacuous ? " (vacuous)" : "") << "\n";
        if (rate) out << "lambda_eps = " << detail::fmt(1.0 / rate->value) << "\n";
      }
      write_text(c_out, dump(report));
      inv.outputs.emplace_back("certificate", c_out);
    } else if (sub == ben) {
      const auto dims = detail::parse_list<std::size_t>(b_dims, "--dims");
      const auto modes = detail::parse_list<std::size_t>(b_modes, "--modes");
      for (std::size_t n : dims)
        if (n < 2 || n > 8) throw UsageError("--dims: dimensions must be in 2..8");
      for (std::size_t m : modes)
        if (m < 1 || m > 16) throw UsageError("--modes: mode counts must be in 1..16");
      if (bcfg.samples < 1) throw UsageError("--N must be at least 1");
      if (!(bcfg.decay > 0.0 && bcfg.decay < 1.0)) throw UsageError("--decay must be in (0, 1)");
      bcfg.threads = threads;
      const std::vector<BenchRow> rows = bench_table(dims, modes, bcfg);
      write_text(b_out, bench_csv(rows));
      inv.seed = bcfg.seed;
      inv.outputs.emplace_back("table", b_out);
      Json errors = Json::array();
      for (const BenchRow& r : rows)
        if (!r.error.empty()) errors.push_back({{"n", r.n}, {"M", r.modes}, {"error", r.error}});
      inv.extra["row_errors"] = std::move(errors);
      out << bench_csv(rows);
    } else if (sub == cur) {
      if (!(ccfg.beta > 0.0 && ccfg.beta < 1.0)) throw UsageError("--beta must be in (0, 1)");
      if (!(ccfg.decay > 0.0 && ccfg.decay < 1.0)) throw UsageError("--decay must be in (0, 1)");
      ccfg.threads = threads;
      BoundCurves curves;
      if (k_grid) {
        curves = bound_curves_from_n(detail::parse_list<std::uint64_t>(*k_grid, "--N-grid"), ccfg);
      } else {
        const auto eps = k_eps ? detail::parse_list<double>(*k_eps, "--eps-grid") : kDefaultEpsGrid;
        for (double e : eps)
          if (!(e > 0.0 && e < 0.5)) throw UsageError("--eps-grid: values must be in (0, 1/2)");
        curves = bound_curves_from_eps(eps, ccfg);
      }
      write_text(k_out, curves_csv(curves));
      inv.seed = ccfg.seed;
      inv.outputs.emplace_back("curves", k_out);
      Json pts = Json::array();
      for (std::size_t i = 0; i < curves.grid.size(); ++i)
        pts.push_back({{"N", curves.grid[i]},
                       {"epsilon", curves.epsilons[i]},
                       {"support", curves.lambda_eps[i].support},
                       {"scenario_level", curves.lambda_eps[i].level}});
      inv.extra["grid"] = std::move(pts);
      out << curves_csv(curves);
    } else if (sub == ren) {
      std::vector<Polytope> polys;
      for (const std::string& p : r_polys) {
        polys.push_back(load_polytope(p));
        inv.inputs.push_back(p);
      }
      std::vector<Vec> pts;
      if (!r_samples.empty()) {
        const SampleSet s = load_samples(r_samples);
        inv.inputs.push_back(r_samples);
        for (const SamplePair& p : s.pairs) pts.push_back(p.y);
      }
      write_text(r_out, render_svg(polys, pts));
      inv.outputs.emplace_back("svg", r_out);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ArgumentError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const polyinv::ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const NonConvergence& e) {
    err << "no convergence: " << e.what() << "\n";
    return kNonConvergence;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }

  const double wall = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(inv, started, wall);
  return kOk;
}

}  // namespace polyinv::cli
