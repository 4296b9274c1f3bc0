#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyinv/certify.hpp"
#include "polyinv/errors.hpp"
#include "polyinv/polytope.hpp"
#include "polyinv/system.hpp"

namespace polyinv {

using Json = nlohmann::ordered_json;

namespace detail {

inline void write_real(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
  // Keep reals recognizable as reals.
  if (out.find_first_of(".eEn", out.size() - std::char_traits<char>::length(buf)) == std::string::npos)
    out += ".0";
}

inline void write_json(std::string& out, const Json& j, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += Json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        write_json(out, it.value(), indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const Json& e : j) flat = flat && !e.is_structured();
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += flat ? ", " : ",";
        if (!flat) newline(depth + 1);
        write_json(out, j[i], indent, depth + 1);
      }
      if (!flat) newline(depth);
      out += ']';
      return;
    }
    case Json::value_t::number_float: write_real(out, j.get<double>()); return;
    default: out += j.dump(); return;
  }
}

inline std::size_t line_of_byte(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

inline const Json& field(const Json& j, const char* key, const std::string& what) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(what + ": missing field \"" + key + "\"", 0);
  return j.at(key);
}

inline Vec real_vector(const Json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + ": expected an array of numbers", 0);
  Vec v;
  v.reserve(j.size());
  for (const Json& e : j) {
    if (!e.is_number()) throw ParseError(what + ": expected a number", 0);
    v.push_back(e.get<double>());
  }
  return v;
}

inline std::size_t count_field(const Json& j, const char* key, const std::string& what) {
  const Json& f = field(j, key, what);
  if (!f.is_number_integer()) throw ParseError(what + ": \"" + key + "\" must be an integer", 0);
  const auto v = f.get<std::int64_t>();
  if (v < 0) throw ValidationError(what + ": \"" + key + "\" must be nonnegative");
  return static_cast<std::size_t>(v);
}

inline Json vec_json(std::span<const double> v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

}  // namespace detail

/// Serializes with reals at 17 significant digits (exact round trip).
/// indent < 0 gives a single line.
inline std::string dump(const Json& j, int indent = 2) {
  std::string out;
  detail::write_json(out, j, indent, 0);
  if (indent >= 0) out += '\n';
  return out;
}

/// Parses JSON text; syntax errors become ParseError with the line number.
inline Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const std::size_t line = detail::line_of_byte(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError("line " + std::to_string(line) + ": " + e.what(), line);
  }
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write " + path);
  out << text;
  if (!out) throw ArgumentError("write failed: " + path);
}

// Polytope: {"n", "vertices", "facets"}, facet rows are h with h^T x <= 1.

inline Json to_json(const Polytope& p) {
  Json j;
  j["n"] = p.dim();
  j["vertices"] = Json::array();
  for (const Vec& v : p.vertices()) j["vertices"].push_back(detail::vec_json(v));
  j["facets"] = Json::array();
  for (const Vec& h : p.facets()) j["facets"].push_back(detail::vec_json(h));
  return j;
}

inline Polytope polytope_from_json(const Json& j) {
  const std::string what = "polytope";
  const std::size_t n = detail::count_field(j, "n", what);
  std::vector<Vec> verts, facets;
  const Json& jv = detail::field(j, "vertices", what);
  const Json& jf = detail::field(j, "facets", what);
  if (!jv.is_array() || !jf.is_array()) throw ParseError(what + ": vertices and facets must be arrays", 0);
  for (const Json& v : jv) verts.push_back(detail::real_vector(v, what));
  for (const Json& h : jf) facets.push_back(detail::real_vector(h, what));
  return Polytope::from_representation(n, std::move(verts), std::move(facets));
}

// System: {"n", "M", "modes": [[row-major n*n]]}.

inline Json to_json(const SwitchedLinearSystem& sys) {
  Json j;
  j["n"] = sys.dim();
  j["M"] = sys.mode_count();
  j["modes"] = Json::array();
  for (const Matrix& a : sys.matrices()) j["modes"].push_back(detail::vec_json(a.data()));
  return j;
}

inline SwitchedLinearSystem system_from_json(const Json& j) {
  const std::string what = "system";
  const std::size_t n = detail::count_field(j, "n", what);
  const std::size_t m = detail::count_field(j, "M", what);
  if (n < 1) throw ValidationError("system: n must be positive");
  if (m < 1) throw ValidationError("system: M must be at least 1");
  const Json& jm = detail::field(j, "modes", what);
  if (!jm.is_array()) throw ParseError("system: modes must be an array", 0);
  if (jm.size() != m) throw ValidationError("system: M does not match the number of modes");
  std::vector<Matrix> mats;
  for (const Json& mode : jm) {
    // Row-major flat list; nested rows are accepted too.
    Vec entries;
    if (mode.is_array() && !mode.empty() && mode[0].is_array()) {
      if (mode.size() != n)
        throw ValidationError("system: mode has " + std::to_string(mode.size()) + " rows, expected " +
                              std::to_string(n));
      for (const Json& row : mode) {
        const Vec r = detail::real_vector(row, what);
        if (r.size() != n)
          throw ValidationError("system: mode row has " + std::to_string(r.size()) + " entries, expected " +
                                std::to_string(n));
        entries.insert(entries.end(), r.begin(), r.end());
      }
    } else {
      entries = detail::real_vector(mode, what);
    }
    if (entries.size() != n * n)
      throw ValidationError("system: mode has " + std::to_string(entries.size()) + " entries, expected " +
                            std::to_string(n * n));
    Matrix a(n, n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) a(r, c) = entries[r * n + c];
    mats.push_back(std::move(a));
  }
  return SwitchedLinearSystem(n, std::move(mats));
}

// SampleSet: {"n", "M", "seed", "pairs": [{"x", "sigma", "y"}]}, sigma in 1..M.

inline Json to_json(const SampleSet& s) {
  Json j;
  j["n"] = s.n;
  j["M"] = s.modes;
  j["seed"] = s.seed;
  j["pairs"] = Json::array();
  for (const SamplePair& p : s.pairs) {
    Json e;
    e["x"] = detail::vec_json(p.x);
    e["sigma"] = p.mode;
    e["y"] = detail::vec_json(p.y);
    j["pairs"].push_back(std::move(e));
  }
  return j;
}

inline SampleSet samples_from_json(const Json& j) {
  const std::string what = "samples";
  SampleSet s;
  s.n = detail::count_field(j, "n", what);
  s.modes = detail::count_field(j, "M", what);
  const Json& seed = detail::field(j, "seed", what);
  if (!seed.is_number_integer()) throw ParseError("samples: seed must be an integer", 0);
  s.seed = seed.get<std::uint64_t>();
  if (s.n < 1) throw ValidationError("samples: n must be positive");
  if (s.modes < 1) throw ValidationError("samples: M must be at least 1");
  const Json& jp = detail::field(j, "pairs", what);
  if (!jp.is_array()) throw ParseError("samples: pairs must be an array", 0);
  if (jp.empty()) throw ValidationError("samples: at least one pair required");
  for (const Json& e : jp) {
    SamplePair p;
    p.x = detail::real_vector(detail::field(e, "x", what), what);
    p.y = detail::real_vector(detail::field(e, "y", what), what);
    p.mode = detail::count_field(e, "sigma", what);
    if (p.x.size() != s.n || p.y.size() != s.n) throw ValidationError("samples: pair dimension mismatch");
    if (p.mode < 1 || p.mode > s.modes) throw ValidationError("samples: sigma outside 1..M");
    if (!all_finite(p.x) || !all_finite(p.y)) throw ValidationError("samples: non-finite entry");
    s.pairs.push_back(std::move(p));
  }
  return s;
}

inline Polytope load_polytope(const std::string& path) { return polytope_from_json(parse_json(read_text(path))); }
inline SwitchedLinearSystem load_system(const std::string& path) {
  return system_from_json(parse_json(read_text(path)));
}
inline SampleSet load_samples(const std::string& path) { return samples_from_json(parse_json(read_text(path))); }

inline void save(const std::string& path, const Polytope& p) { write_text(path, dump(to_json(p))); }
inline void save(const std::string& path, const SwitchedLinearSystem& s) { write_text(path, dump(to_json(s))); }
inline void save(const std::string& path, const SampleSet& s) { write_text(path, dump(to_json(s))); }

// Certificate reports: {"type", "inputs", "result", "per_vertex"}.

inline Json per_vertex_json(const std::vector<VertexGamma>& rows) {
  Json a = Json::array();
  for (const VertexGamma& g : rows) {
    Json e;
    e["vertex"] = detail::vec_json(g.vertex);
    e["d_min"] = g.d_min;
    e["gamma"] = g.gamma;
    e["approximate"] = g.approximate;
    a.push_back(std::move(e));
  }
  return a;
}

inline Json report_json(const ContractionCertificate& c) {
  Json j;
  j["type"] = "contraction";
  j["inputs"] = {{"epsilon", c.epsilon}, {"N", c.samples}, {"modes", c.modes}, {"n", c.n}};
  Json r;
  r["status"] = c.status;
  r["conclusive"] = c.conclusive;
  r["delta"] = c.delta;
  r["theta"] = c.theta;
  r["confidence_bound"] = c.confidence_bound;
  r["effective_violation"] = c.effective_violation;
  if (c.conclusive) {
    r["gamma_lower"] = c.gamma_lower;
    r["lambda"] = c.lambda;
  } else {
    r["gamma_lower"] = nullptr;
    r["lambda"] = nullptr;
  }
  j["result"] = std::move(r);
  j["per_vertex"] = per_vertex_json(c.per_vertex);
  return j;
}

/// `rate` holds gamma_lower at the almost-invariance level when it was
/// computable (level < 1/2).
inline Json report_json(const ScenarioCertificate& c, const GammaLower* rate = nullptr) {
  Json j;
  j["type"] = "scenario";
  j["inputs"] = {{"beta", c.beta}, {"N", c.samples}, {"modes", c.modes}, {"n", c.set.dim()}};
  Json r;
  r["supporting_points"] = c.support_count();
  Json idx = Json::array();
  for (std::size_t i : c.support_indices) idx.push_back(i);
  r["support_indices"] = std::move(idx);
  r["candidates"] = c.candidates;
  r["epsilon_of_s"] = c.epsilon_of_s;
  r["almost_invariance_level"] = c.almost_invariance_level;
  r["vacuous"] = c.vacuous;
  r["iterations"] = c.trace.updates();
  r["vertices"] = c.set.vertex_count();
  if (rate) {
    r["gamma_lower"] = rate->value;
    r["lambda_epsilon"] = 1.0 / rate->value;
  } else {
    r["gamma_lower"] = nullptr;
    r["lambda_epsilon"] = nullptr;
  }
  j["result"] = std::move(r);
  j["per_vertex"] = rate ? per_vertex_json(rate->per_vertex) : Json::array();
  return j;
}

}  // namespace polyinv
