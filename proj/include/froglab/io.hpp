#pragma once

// File formats: signal JSON, trace CSV + sidecar JSON, plain numeric CSVs,
// and JSON run reports. Numbers in CSV files are written with 17
// significant digits; JSON uses the shortest round-trip representation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core.hpp"
#include "forward.hpp"

namespace froglab::io {

using json = nlohmann::ordered_json;

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string read_text(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path &path, const std::string &text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

inline json parse_json(const std::filesystem::path &path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception &e) {
    throw ValidationError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

inline void write_json(const std::filesystem::path &path, const json &doc) { write_text(path, doc.dump(2) + "\n"); }

// ---- signals ----------------------------------------------------------------

struct SignalFile {
  Pulse signal;
  std::string label;
};

inline json signal_to_json(const Pulse &x, const std::string &label = {}) {
  json samples = json::array();
  for (const auto &v : x.values()) samples.push_back(json::array({v.real(), v.imag()}));
  json doc;
  doc["n"] = x.size();
  doc["samples"] = std::move(samples);
  if (!label.empty()) doc["label"] = label;
  return doc;
}

inline SignalFile signal_from_json(const json &doc) {
  try {
    require(doc.is_object() && doc.contains("n") && doc.contains("samples"), "signal file needs 'n' and 'samples'");
    const auto n = doc.at("n").get<long long>();
    const auto &samples = doc.at("samples");
    require(n >= 1, "signal length must be positive");
    require(samples.is_array() && samples.size() == static_cast<std::size_t>(n), "samples length does not match n");
    std::vector<cplx> v;
    v.reserve(samples.size());
    for (const auto &s : samples) {
      require(s.is_array() && s.size() == 2 && s[0].is_number() && s[1].is_number(),
              "each sample must be a [re, im] pair");
      const double re = s[0].get<double>(), im = s[1].get<double>();
      require(std::isfinite(re) && std::isfinite(im), "signal samples must be finite");
      v.emplace_back(re, im);
    }
    SignalFile out{Pulse(std::move(v)), {}};
    if (doc.contains("label")) out.label = doc.at("label").get<std::string>();
    return out;
  } catch (const json::exception &e) {
    throw ValidationError(std::string("malformed signal file: ") + e.what());
  }
}

inline SignalFile read_signal(const std::filesystem::path &path) { return signal_from_json(parse_json(path)); }

inline void write_signal(const std::filesystem::path &path, const Pulse &x, const std::string &label = {}) {
  write_json(path, signal_to_json(x, label));
}

// ---- traces -----------------------------------------------------------------

struct TraceProvenance {
  std::uint64_t seed = 0;
  NoiseSpec noise;
};

struct TraceFile {
  FrogTrace trace;
  TraceProvenance provenance;
};

inline std::string trace_to_csv(const FrogTrace &t) {
  std::string out = "k\\m";
  for (std::size_t m = 0; m < t.cols(); ++m) out += "," + std::to_string(m);
  out += "\n";
  for (std::size_t k = 0; k < t.rows(); ++k) {
    out += std::to_string(k);
    for (std::size_t m = 0; m < t.cols(); ++m) out += "," + format_number(t(k, m));
    out += "\n";
  }
  return out;
}

inline json trace_sidecar(const FrogTrace &t, const TraceProvenance &p) {
  const auto &g = t.geometry();
  json doc;
  doc["geometry"] = {{"n", g.n}, {"l", g.l}, {"kind", std::string(to_string(g.kind))}, {"delay_sign", g.delay_sign}};
  doc["provenance"] = {{"seed", p.seed},
                       {"noise", {{"model", std::string(to_string(p.noise.model))},
                                  {"level", p.noise.level},
                                  {"seed", p.noise.seed}}}};
  return doc;
}

inline std::filesystem::path sidecar_path(const std::filesystem::path &csv) {
  auto p = csv;
  p += ".json";
  return p;
}

inline void write_trace(const std::filesystem::path &csv, const FrogTrace &t, const TraceProvenance &p) {
  write_text(csv, trace_to_csv(t));
  write_json(sidecar_path(csv), trace_sidecar(t, p));
}

inline std::vector<std::string> split(const std::string &line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline double parse_number(const std::string &s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception &) {
    throw ValidationError("not a number: '" + s + "'");
  }
  require(used == s.size(), "not a number: '" + s + "'");
  return v;
}

inline TraceFile read_trace(const std::filesystem::path &csv) {
  const auto side = parse_json(sidecar_path(csv));
  TraceFile out{FrogTrace(), {}};
  TraceGeometry g;
  try {
    const auto &geo = side.at("geometry");
    g = TraceGeometry::make(geo.at("n").get<std::size_t>(), geo.at("l").get<std::size_t>(),
                            parse_gate_kind(geo.at("kind").get<std::string>()), geo.at("delay_sign").get<int>());
    if (side.contains("provenance")) {
      const auto &p = side.at("provenance");
      out.provenance.seed = p.value("seed", std::uint64_t{0});
      if (p.contains("noise")) {
        const auto &nz = p.at("noise");
        out.provenance.noise = {parse_noise_model(nz.value("model", std::string("none"))), nz.value("level", 0.0),
                                nz.value("seed", std::uint64_t{0})};
      }
    }
  } catch (const json::exception &e) {
    throw ValidationError(std::string("malformed trace sidecar: ") + e.what());
  }

  FrogTrace t(g);
  std::istringstream in(read_text(csv));
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "trace CSV is empty");
  require(line.rfind("k\\m", 0) == 0, "trace CSV must start with the 'k\\m' header");
  require(split(line, ',').size() == g.m_count + 1, "trace CSV column count does not match sidecar");
  std::size_t k = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    require(k < g.n, "trace CSV has more rows than the sidecar declares");
    const auto cells = split(line, ',');
    require(cells.size() == g.m_count + 1, "trace CSV row " + std::to_string(k) + " has the wrong width");
    for (std::size_t m = 0; m < g.m_count; ++m) {
      const double v = parse_number(cells[m + 1]);
      require(std::isfinite(v) && v >= 0.0, "trace entries must be finite and nonnegative");
      t(k, m) = v;
    }
    ++k;
  }
  require(k == g.n, "trace CSV has fewer rows than the sidecar declares");
  out.trace = std::move(t);
  return out;
}

// ---- plain tables -----------------------------------------------------------

// Header plus rows of numbers; integral columns print as integers via %.17g.
inline std::string table_csv(const std::vector<std::string> &header, const std::vector<std::vector<double>> &rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += "\n";
  for (const auto &r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + format_number(r[i]);
    out += "\n";
  }
  return out;
}

inline void write_table(const std::filesystem::path &path, const std::vector<std::string> &header,
                        const std::vector<std::vector<double>> &rows) {
  write_text(path, table_csv(header, rows));
}

} // namespace froglab::io
