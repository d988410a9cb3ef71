#include "lemsfem/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lemsfem/expression.hpp"

namespace lemsfem {

using nlohmann::json;

namespace {

class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail("expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = node_.find(key);
    if (it == node_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path_ + "/" + key + ": wrong type (" + it->type_name() + ")");
    }
  }

  void get_int_map(const char* key, std::map<int, int>& out) {
    seen_.insert(key);
    auto it = node_.find(key);
    if (it == node_.end()) return;
    if (!it->is_object()) throw ConfigError(path_ + "/" + key + ": expected an object of id -> integer");
    for (auto& [k, v] : it->items()) {
      int id = 0;
      std::size_t used = 0;
      try {
        id = std::stoi(k, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != k.size()) throw ConfigError(path_ + "/" + key + "/" + k + ": key is not an integer id");
      if (!v.is_number_integer()) throw ConfigError(path_ + "/" + key + "/" + k + ": expected an integer");
      out[id] = v.get<int>();
    }
  }

  Reader child(const char* key) {
    seen_.insert(key);
    auto it = node_.find(key);
    static const json empty = json::object();
    return Reader(it == node_.end() ? empty : *it, path_ + "/" + key);
  }

  void finish() const {
    for (auto& [k, v] : node_.items())
      if (!seen_.count(k)) throw ConfigError(path_ + "/" + k + ": unknown key");
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError((path_.empty() ? "/" : path_) + ": " + msg); }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

json int_map(const std::map<int, int>& m) {
  json out = json::object();
  for (auto [k, v] : m) out[std::to_string(k)] = v;
  return out;
}

void check_expression(const std::string& path, const std::string& text) {
  try {
    compile_expression(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string rule_name(CellRule rule) { return rule == CellRule::centroid ? "centroid" : "edge_midpoints"; }

}  // namespace

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // byte offset -> line and column
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("config line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
  }

  RunConfig c;
  Reader r(root, "");
  if (!root.contains("schema_version")) throw ConfigError("/schema_version: missing");
  r.get("schema_version", c.schema_version);

  Reader d = r.child("domain");
  d.get("x0", c.domain.x0);
  d.get("x1", c.domain.x1);
  d.get("y0", c.domain.y0);
  d.get("y1", c.domain.y1);
  d.finish();

  Reader m = r.child("mesh");
  std::string kind = to_string(c.kind);
  m.get("kind", kind);
  try {
    c.kind = element_kind_from_string(kind);
  } catch (const std::exception&) {
    throw ConfigError("/mesh/kind: unknown element kind '" + kind + "' (quad or triangle)");
  }
  m.get("nx", c.nx);
  m.get("ny", c.ny);
  m.get("n_sub", c.n_sub);
  m.finish();

  Reader co = r.child("coefficient");
  co.get("type", c.coefficient.type);
  co.get("eps", c.coefficient.eps);
  co.get("expression", c.coefficient.expression);
  co.get("alpha_min", c.coefficient.alpha_min);
  co.get("alpha_max", c.coefficient.alpha_max);
  co.finish();

  Reader so = r.child("source");
  so.get("type", c.source.type);
  so.get("value", c.source.value);
  so.get("expression", c.source.expression);
  so.finish();

  Reader dg = r.child("degrees");
  dg.get("N", c.N);
  dg.get("M", c.M);
  dg.get_int_map("edges", c.edge_degrees);
  dg.get_int_map("elements", c.element_degrees);
  dg.finish();

  Reader sv = r.child("solver");
  sv.get("rel_tol", c.rel_tol);
  sv.get("reference", c.reference);
  std::string rule = rule_name(c.rule);
  sv.get("cell_rule", rule);
  if (rule == "centroid") c.rule = CellRule::centroid;
  else if (rule == "edge_midpoints") c.rule = CellRule::edge_midpoints;
  else throw ConfigError("/solver/cell_rule: unknown rule '" + rule + "' (centroid or edge_midpoints)");
  sv.finish();

  Reader es = r.child("estimator");
  es.get("eta", c.eta);
  es.get("smoothness", c.smoothness);
  es.get_int_map("smoothness_table", c.smoothness_table);
  es.finish();

  Reader sw = r.child("sweep");
  sw.get("axis", c.sweep_axis);
  sw.get("values", c.sweep_values);
  sw.finish();

  Reader bs = r.child("basis");
  bs.get("selector", c.basis_selector);
  bs.finish();

  r.get("output", c.output);
  r.get("strict", c.strict);
  r.get("seed", c.seed);
  r.get("workers", c.workers);
  r.get("timing", c.timing);
  r.finish();

  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["domain"] = {{"x0", c.domain.x0}, {"x1", c.domain.x1}, {"y0", c.domain.y0}, {"y1", c.domain.y1}};
  j["mesh"] = {{"kind", to_string(c.kind)}, {"nx", c.nx}, {"ny", c.ny}, {"n_sub", c.n_sub}};
  j["coefficient"] = {{"type", c.coefficient.type},
                      {"eps", c.coefficient.eps},
                      {"expression", c.coefficient.expression},
                      {"alpha_min", c.coefficient.alpha_min},
                      {"alpha_max", c.coefficient.alpha_max}};
  j["source"] = {{"type", c.source.type}, {"value", c.source.value}, {"expression", c.source.expression}};
  j["degrees"] = {{"N", c.N}, {"M", c.M}, {"edges", int_map(c.edge_degrees)}, {"elements", int_map(c.element_degrees)}};
  j["solver"] = {{"rel_tol", c.rel_tol}, {"reference", c.reference}, {"cell_rule", rule_name(c.rule)}};
  j["estimator"] = {{"eta", c.eta}, {"smoothness", c.smoothness}, {"smoothness_table", int_map(c.smoothness_table)}};
  j["sweep"] = {{"axis", c.sweep_axis}, {"values", c.sweep_values}};
  j["basis"] = {{"selector", c.basis_selector}};
  j["output"] = c.output;
  j["strict"] = c.strict;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["timing"] = c.timing;
  return j.dump(2) + "\n";
}

void validate(const RunConfig& c) {
  if (c.schema_version != kSchemaVersion)
    throw ConfigError("/schema_version: unsupported version " + std::to_string(c.schema_version) + " (expected " +
                      std::to_string(kSchemaVersion) + ")");
  if (!(c.domain.x1 > c.domain.x0) || !(c.domain.y1 > c.domain.y0)) throw ConfigError("/domain: empty rectangle");
  if (c.nx < 1) throw ConfigError("/mesh/nx: must be >= 1");
  if (c.ny < 1) throw ConfigError("/mesh/ny: must be >= 1");
  if (c.n_sub < 2) throw ConfigError("/mesh/n_sub: must be >= 2");
  const auto& co = c.coefficient;
  if (co.type == "periodic_benchmark") {
    if (!(co.eps > 0.0)) throw ConfigError("/coefficient/eps: must be > 0");
  } else if (co.type == "expression") {
    if (co.expression.empty()) throw ConfigError("/coefficient/expression: missing");
    check_expression("/coefficient/expression", co.expression);
    if (!(co.alpha_min > 0.0) || co.alpha_max < co.alpha_min)
      throw ConfigError("/coefficient: need 0 < alpha_min <= alpha_max");
  } else if (co.type != "identity") {
    throw ConfigError("/coefficient/type: unknown type '" + co.type + "'");
  }
  const auto& so = c.source;
  if (so.type == "expression") {
    if (so.expression.empty()) throw ConfigError("/source/expression: missing");
    check_expression("/source/expression", so.expression);
  } else if (so.type != "constant" && so.type != "gaussian_benchmark") {
    throw ConfigError("/source/type: unknown type '" + so.type + "'");
  }
  if (c.N < 1) throw ConfigError("/degrees/N: must be >= 1");
  if (c.M < 0) throw ConfigError("/degrees/M: must be >= 0");
  for (auto [e, n] : c.edge_degrees)
    if (n < 1) throw ConfigError("/degrees/edges/" + std::to_string(e) + ": must be >= 1");
  for (auto [k, m] : c.element_degrees)
    if (m < 0) throw ConfigError("/degrees/elements/" + std::to_string(k) + ": must be >= 0");
  if (!(c.rel_tol > 0.0 && c.rel_tol < 1.0)) throw ConfigError("/solver/rel_tol: must lie in (0, 1)");
  if (c.reference != "direct" && c.reference != "cg")
    throw ConfigError("/solver/reference: unknown solver '" + c.reference + "' (direct or cg)");
  if (!(c.eta >= 0.0 && c.eta < 0.5)) throw ConfigError("/estimator/eta: must lie in [0, 1/2)");
  if (c.smoothness < 0) throw ConfigError("/estimator/smoothness: must be >= 0");
  for (auto [k, l] : c.smoothness_table)
    if (l < 0) throw ConfigError("/estimator/smoothness_table/" + std::to_string(k) + ": must be >= 0");
  if (!c.sweep_axis.empty() && c.sweep_axis != "H" && c.sweep_axis != "N" && c.sweep_axis != "M" &&
      c.sweep_axis != "eps")
    throw ConfigError("/sweep/axis: unknown axis '" + c.sweep_axis + "' (H, N, M or eps)");
  if (c.workers < 1) throw ConfigError("/workers: must be >= 1");
  if (c.strict && co.type == "periodic_benchmark") {
    const double h = std::max(c.domain.width() / (c.nx * c.n_sub), c.domain.height() / (c.ny * c.n_sub));
    if (h > co.eps / 8.0 * (1.0 + 1e-12))
      throw ConfigError("/mesh/n_sub: fine mesh size " + std::to_string(h) + " does not resolve eps = " +
                        std::to_string(co.eps) + " (need h <= eps/8)");
  }
}

CoefficientField make_coefficient(const CoefficientSpec& spec) {
  if (spec.type == "identity") return identity_coefficient();
  if (spec.type == "periodic_benchmark") return periodic_benchmark(spec.eps);
  if (spec.type == "expression") return expression_coefficient(spec.expression, spec.alpha_min, spec.alpha_max);
  throw ConfigError("/coefficient/type: unknown type '" + spec.type + "'");
}

ScalarField make_source(const SourceSpec& spec) {
  if (spec.type == "constant") return constant_field(spec.value);
  if (spec.type == "gaussian_benchmark") return gaussian_benchmark();
  if (spec.type == "expression") return expression_field(spec.expression);
  throw ConfigError("/source/type: unknown type '" + spec.type + "'");
}

DegreeAssignment make_degrees(const RunConfig& config, const CoarseMesh& coarse) {
  DegreeAssignment d = DegreeAssignment::uniform(coarse, config.N, config.M);
  for (auto [e, n] : config.edge_degrees) {
    if (e < 0 || static_cast<std::size_t>(e) >= coarse.edges.size())
      throw ConfigError("/degrees/edges/" + std::to_string(e) + ": no such edge");
    d.edge_degree[static_cast<std::size_t>(e)] = n;
  }
  for (auto [k, m] : config.element_degrees) {
    if (k < 0 || static_cast<std::size_t>(k) >= coarse.elements.size())
      throw ConfigError("/degrees/elements/" + std::to_string(k) + ": no such element");
    d.element_degree[static_cast<std::size_t>(k)] = m;
  }
  return d;
}

}  // namespace lemsfem
