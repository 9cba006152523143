#pragma once

// Versioned JSON model files. Rationals are "p/q" strings; integers are
// accepted on input. Every validation failure names the offending field.
//
// {
//   "version": 1,
//   "space": {"outcomes": ["uu", ...], "probs": ["1/4", ...]},
//   "filtration": {"times": ["0/1", ...], "partitions": [[[0, 1, 2, 3]], ...]},
//   "processes": [{"name": "M", "kind": "martingale", "values": [["0/1", ...], ...]}],
//   "stopping_times": [{"name": "T", "values": [1, 2, null, ...]}],
//   "meta": {...}            optional, copied through
// }

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "martlab/processes.hpp"

namespace martlab {

using Json = nlohmann::ordered_json;

inline constexpr int model_format_version = 1;

// Declared role of a process; the verify suites check the claim.
inline const std::vector<std::string>& process_kinds() {
  static const std::vector<std::string> kinds{"adapted", "increasing", "martingale", "predictable", "process"};
  return kinds;
}

struct NamedProcess {
  std::string name;
  std::string kind;
  ProcessPath path;
};

struct NamedStoppingTime {
  std::string name;
  StoppingTime time;
};

struct Model {
  SpacePtr space;
  FiltrationPtr filtration;
  std::vector<NamedProcess> processes;
  std::vector<NamedStoppingTime> stopping_times;
  Json meta = Json::object();

  const NamedProcess* find_process(const std::string& name) const {
    for (const auto& p : processes)
      if (p.name == name) return &p;
    return nullptr;
  }
};

namespace io {

inline std::string at(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

inline const Json& member(const Json& obj, const std::string& base, const char* key) {
  if (!obj.is_object()) throw ValidationError(base, "expected an object");
  auto it = obj.find(key);
  std::string field = base.empty() ? key : base + "." + key;
  if (it == obj.end()) throw ValidationError(field, "missing");
  return *it;
}

inline const Json& array(const Json& v, const std::string& field) {
  if (!v.is_array()) throw ValidationError(field, "expected an array");
  return v;
}

inline Rational rational(const Json& v, const std::string& field) {
  if (v.is_number_integer()) return Rational(v.get<long>());
  if (!v.is_string()) throw ValidationError(field, "expected a rational string \"p/q\"");
  try {
    return parse_rational(v.get<std::string>());
  } catch (const ValidationError& e) {
    throw ValidationError(field, e.what());
  }
}

inline std::size_t index(const Json& v, const std::string& field) {
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ValidationError(field, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

inline std::string string(const Json& v, const std::string& field) {
  if (!v.is_string()) throw ValidationError(field, "expected a string");
  return v.get<std::string>();
}

// Re-raise construction errors from the core types under the model's field names.
template <class F>
auto scoped(const std::string& field, F&& make) {
  try {
    return make();
  } catch (const ValidationError& e) {
    const std::string& inner = e.field();
    std::string name = field;
    if (!inner.empty() && inner.rfind(field, 0) != 0) name = field + " (" + inner + ")";
    if (!inner.empty() && inner.rfind(field, 0) == 0) name = inner;
    std::string msg = e.what();
    if (!inner.empty() && msg.rfind(inner + ": ", 0) == 0) msg = msg.substr(inner.size() + 2);
    throw ValidationError(name, msg);
  }
}

inline Json rational_json(const Rational& x) { return to_string(x); }

}  // namespace io

inline Model model_from_json(const Json& doc) {
  if (!doc.is_object()) throw ValidationError("", "model file must be a JSON object");
  const Json& version = io::member(doc, "", "version");
  if (!version.is_number_integer() || version.get<long>() != model_format_version)
    throw ValidationError("version", "unsupported model format version (expected " +
                                         std::to_string(model_format_version) + ")");
  Model m;

  const Json& sp = io::member(doc, "", "space");
  const Json& outs = io::array(io::member(sp, "space", "outcomes"), "space.outcomes");
  const Json& probs = io::array(io::member(sp, "space", "probs"), "space.probs");
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < outs.size(); ++i) labels.push_back(io::string(outs[i], io::at("space.outcomes", i)));
  std::vector<Rational> p;
  for (std::size_t i = 0; i < probs.size(); ++i) p.push_back(io::rational(probs[i], io::at("space.probs", i)));
  m.space = io::scoped("space", [&] { return std::make_shared<const SampleSpace>(labels, p); });
  const std::size_t n = m.space->size();

  const Json& fj = io::member(doc, "", "filtration");
  const Json& tj = io::array(io::member(fj, "filtration", "times"), "filtration.times");
  const Json& pj = io::array(io::member(fj, "filtration", "partitions"), "filtration.partitions");
  std::vector<Rational> times;
  for (std::size_t k = 0; k < tj.size(); ++k) times.push_back(io::rational(tj[k], io::at("filtration.times", k)));
  std::vector<Partition> parts;
  for (std::size_t k = 0; k < pj.size(); ++k) {
    const std::string field = io::at("filtration.partitions", k);
    const Json& blocks = io::array(pj[k], field);
    std::vector<Block> bs;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const Json& block = io::array(blocks[b], io::at(field, b));
      Block out;
      for (std::size_t i = 0; i < block.size(); ++i) out.push_back(io::index(block[i], io::at(io::at(field, b), i)));
      bs.push_back(std::move(out));
    }
    parts.push_back(io::scoped(field, [&] { return Partition(bs, n); }));
  }
  m.filtration = io::scoped("filtration", [&] { return std::make_shared<const Filtration>(m.space, times, parts); });

  const Json& procs = doc.contains("processes") ? io::array(doc["processes"], "processes") : Json::array();
  for (std::size_t i = 0; i < procs.size(); ++i) {
    const std::string field = io::at("processes", i);
    std::string name = io::string(io::member(procs[i], field, "name"), field + ".name");
    std::string kind = io::string(io::member(procs[i], field, "kind"), field + ".kind");
    bool known = false;
    for (const auto& k : process_kinds()) known = known || k == kind;
    if (!known) throw ValidationError(field + ".kind", "unknown kind '" + kind + "'");
    for (const auto& other : m.processes)
      if (other.name == name) throw ValidationError(field + ".name", "duplicate process name '" + name + "'");
    const Json& rows = io::array(io::member(procs[i], field, "values"), field + ".values");
    std::vector<ProcessPath::Row> values;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const Json& row = io::array(rows[k], io::at(field + ".values", k));
      ProcessPath::Row r;
      for (std::size_t w = 0; w < row.size(); ++w)
        r.push_back(io::rational(row[w], io::at(io::at(field + ".values", k), w)));
      values.push_back(std::move(r));
    }
    ProcessPath path = io::scoped(field, [&] { return ProcessPath(m.filtration, values); });
    m.processes.push_back({std::move(name), std::move(kind), std::move(path)});
  }

  const Json& stops = doc.contains("stopping_times") ? io::array(doc["stopping_times"], "stopping_times") : Json::array();
  for (std::size_t i = 0; i < stops.size(); ++i) {
    const std::string field = io::at("stopping_times", i);
    std::string name = io::string(io::member(stops[i], field, "name"), field + ".name");
    const Json& vals = io::array(io::member(stops[i], field, "values"), field + ".values");
    std::vector<StoppingTime::Index> idx;
    for (std::size_t w = 0; w < vals.size(); ++w) {
      if (vals[w].is_null()) {
        idx.push_back(StoppingTime::infinity);
      } else {
        idx.push_back(io::index(vals[w], io::at(field + ".values", w)));
      }
    }
    StoppingTime t = io::scoped(field, [&] { return StoppingTime(m.filtration, idx); });
    m.stopping_times.push_back({std::move(name), std::move(t)});
  }
  if (doc.contains("meta")) m.meta = doc["meta"];
  return m;
}

// Line number of a byte offset, for parse diagnostics.
inline std::size_t line_of(const std::string& text, std::size_t offset) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

inline Model parse_model(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError("line " + std::to_string(line_of(text, e.byte == 0 ? 0 : e.byte - 1)),
                          "JSON syntax error");
  }
  return model_from_json(doc);
}

inline Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("model", "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

inline Json model_to_json(const Model& m) {
  Json doc = Json::object();
  doc["version"] = model_format_version;
  Json outs = Json::array(), probs = Json::array();
  for (std::size_t w = 0; w < m.space->size(); ++w) {
    outs.push_back(m.space->outcomes()[w]);
    probs.push_back(io::rational_json(m.space->prob(w)));
  }
  doc["space"] = {{"outcomes", outs}, {"probs", probs}};
  Json times = Json::array(), parts = Json::array();
  for (const auto& t : m.filtration->times()) times.push_back(io::rational_json(t));
  for (const auto& p : m.filtration->partitions()) {
    Json blocks = Json::array();
    for (const auto& b : p.blocks()) blocks.push_back(b);
    parts.push_back(blocks);
  }
  doc["filtration"] = {{"times", times}, {"partitions", parts}};
  Json procs = Json::array();
  for (const auto& p : m.processes) {
    Json rows = Json::array();
    for (const auto& r : p.path.values()) {
      Json row = Json::array();
      for (const auto& v : r) row.push_back(io::rational_json(v));
      rows.push_back(row);
    }
    procs.push_back({{"name", p.name}, {"kind", p.kind}, {"values", rows}});
  }
  doc["processes"] = procs;
  Json stops = Json::array();
  for (const auto& s : m.stopping_times) {
    Json vals = Json::array();
    for (const auto& v : s.time.indices()) vals.push_back(v ? Json(*v) : Json(nullptr));
    stops.push_back({{"name", s.name}, {"values", vals}});
  }
  doc["stopping_times"] = stops;
  if (!m.meta.empty()) doc["meta"] = m.meta;
  return doc;
}

// Canonical text: two-space indent, trailing newline.
inline std::string dump_model(const Model& m) { return model_to_json(m).dump(2) + "\n"; }

}  // namespace martlab
