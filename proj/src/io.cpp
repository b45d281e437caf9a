#include "finvn/io.hpp"

#include <cmath>
#include <istream>
#include <sstream>

namespace finvn::io {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { fail(errc::bad_config, what); }

double expect_number(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad(where + ": non-finite number");
  return v;
}

complexd expect_complex(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2)
    bad(where + ": expected a [re, im] pair");
  return complexd(expect_number(j[0], where + "[0]"),
                  expect_number(j[1], where + "[1]"));
}

json complex_to_json(const complexd& z) { return json::array({z.real(), z.imag()}); }

}  // namespace

//============================================================================
// Algebra / element
//============================================================================

json to_json(const BlockAlgebra& alg) {
  json blocks = json::array();
  for (std::size_t b = 0; b < alg.dims().size(); ++b)
    blocks.push_back({{"dim", alg.dims()[b]}, {"weight", alg.weights()[b]}});
  return json{{"blocks", blocks}};
}

AlgebraPtr algebra_from_json(const json& j) {
  if (!j.is_object() || !j.contains("blocks") || !j["blocks"].is_array() ||
      j["blocks"].empty())
    bad("algebra: expected {\"blocks\": [{\"dim\", \"weight\"}, ...]}");
  std::vector<int> dims;
  std::vector<double> weights;
  for (std::size_t b = 0; b < j["blocks"].size(); ++b) {
    const json& blk = j["blocks"][b];
    const std::string where = "algebra.blocks[" + std::to_string(b) + "]";
    if (!blk.is_object() || !blk.contains("dim") || !blk.contains("weight"))
      bad(where + ": expected {\"dim\", \"weight\"}");
    if (!blk["dim"].is_number_integer() || blk["dim"].get<std::int64_t>() < 1)
      bad(where + ".dim: expected a positive integer");
    dims.push_back(static_cast<int>(blk["dim"].get<std::int64_t>()));
    const double w = expect_number(blk["weight"], where + ".weight");
    if (!(w > 0.0)) bad(where + ".weight: expected a positive weight");
    weights.push_back(w);
  }
  return BlockAlgebra::make(dims, weights);
}

json to_json(const AlgebraElement& x) {
  json blocks = json::array();
  for (std::size_t b = 0; b < x.algebra()->dims().size(); ++b) {
    const Matrix& m = x.block(static_cast<int>(b));
    json flat = json::array();
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) flat.push_back(complex_to_json(m(i, j)));
    blocks.push_back(std::move(flat));
  }
  return json{{"blocks", blocks}};
}

AlgebraElement element_from_json(const AlgebraPtr& alg, const json& j) {
  if (!j.is_object() || !j.contains("blocks") || !j["blocks"].is_array())
    bad("element: expected {\"blocks\": [[[re, im], ...], ...]}");
  const auto& dims = alg->dims();
  if (j["blocks"].size() != dims.size())
    bad("element: has " + std::to_string(j["blocks"].size()) +
        " blocks, the algebra has " + std::to_string(dims.size()));
  std::vector<Matrix> mats;
  for (std::size_t b = 0; b < dims.size(); ++b) {
    const int d = dims[b];
    const json& flat = j["blocks"][b];
    const std::string where = "element.blocks[" + std::to_string(b) + "]";
    if (!flat.is_array() ||
        flat.size() != static_cast<std::size_t>(d) * static_cast<std::size_t>(d))
      bad(where + ": expected " + std::to_string(d * d) +
          " row-major [re, im] entries");
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k)
        m(i, k) = expect_complex(flat[static_cast<std::size_t>(i) * d + k],
                                 where + "[" + std::to_string(i * d + k) + "]");
    mats.push_back(std::move(m));
  }
  return AlgebraElement(alg, std::move(mats));
}

//============================================================================
// Gauge
//============================================================================

json to_json(const Gauge& g) {
  switch (g.kind()) {
    case Gauge::Kind::constant:
      return json{{"kind", "constant"}, {"value", g.at(0)}};
    case Gauge::Kind::geometric:
      return json{{"kind", "geometric"}, {"c", g.ratio()}};
    case Gauge::Kind::poly:
      return json{{"kind", "poly"}, {"degree", g.degree()}};
    case Gauge::Kind::custom: {
      json vals = json::array();
      for (std::int64_t n = 0; n <= g.horizon(); ++n) vals.push_back(g.at(n));
      return json{{"kind", "custom"}, {"values", vals}};
    }
    case Gauge::Kind::custom_log: {
      json vals = json::array();
      for (std::int64_t n = 0; n <= g.horizon(); ++n)
        vals.push_back(g.log_at(n));
      return json{{"kind", "custom-log"}, {"log_values", vals}};
    }
  }
  bad("gauge: unknown kind");
}

Gauge gauge_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    bad("gauge: expected {\"kind\": ...}");
  const std::string kind = j["kind"].get<std::string>();
  auto field = [&](const char* name) -> const json& {
    if (!j.contains(name))
      bad("gauge: kind \"" + kind + "\" needs field \"" + name + "\"");
    return j[name];
  };
  if (kind == "constant")
    return Gauge::constant(expect_number(field("value"), "gauge.value"));
  if (kind == "geometric")
    return Gauge::geometric(expect_number(field("c"), "gauge.c"));
  if (kind == "poly") {
    const json& d = field("degree");
    if (!d.is_number_integer() || d.get<std::int64_t>() < 0)
      bad("gauge.degree: expected a non-negative integer");
    return Gauge::poly(static_cast<int>(d.get<std::int64_t>()));
  }
  if (kind == "custom" || kind == "custom-log") {
    const char* key = kind == "custom" ? "values" : "log_values";
    const json& vals = field(key);
    if (!vals.is_array() || vals.empty())
      bad(std::string("gauge.") + key + ": expected a non-empty array");
    std::vector<double> v;
    v.reserve(vals.size());
    for (std::size_t n = 0; n < vals.size(); ++n)
      v.push_back(expect_number(
          vals[n], std::string("gauge.") + key + "[" + std::to_string(n) + "]"));
    return kind == "custom" ? Gauge::custom(std::move(v))
                            : Gauge::custom_log(std::move(v));
  }
  bad("gauge.kind: unknown kind \"" + kind + "\"");
}

//============================================================================
// Dense matrices and superoperators
//============================================================================

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) bad("matrix: expected nested rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty())
    bad("matrix: expected nested rows of [re, im] pairs");
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<int>(rows), static_cast<int>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string where = "matrix[" + std::to_string(i) + "]";
    if (!j[i].is_array() || j[i].size() != cols)
      bad(where + ": ragged row");
    for (std::size_t k = 0; k < cols; ++k)
      m(static_cast<int>(i), static_cast<int>(k)) =
          expect_complex(j[i][k], where + "[" + std::to_string(k) + "]");
  }
  return m;
}

json supermap_to_json(const SuperOperator& s) {
  return json{{"kind", "matrix"}, {"entries", matrix_to_json(s.action())}};
}

SuperOperator supermap_from_json(const AlgebraPtr& alg, const json& j,
                                 const LimitOptions& opts) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    bad("map: expected {\"kind\": ...}");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "matrix") {
    if (!j.contains("entries")) bad("map: kind \"matrix\" needs \"entries\"");
    Matrix m = matrix_from_json(j["entries"]);
    if (m.rows() != alg->elem_dim() || m.cols() != alg->elem_dim())
      bad("map.entries: expected a " + std::to_string(alg->elem_dim()) + " x " +
          std::to_string(alg->elem_dim()) + " action matrix");
    return SuperOperator(alg, m);
  }
  if (kind == "sandwich") {
    if (!j.contains("A") || !j.contains("B"))
      bad("map: kind \"sandwich\" needs \"A\" and \"B\"");
    return SuperOperator::sandwich(element_from_json(alg, j["A"]),
                                   element_from_json(alg, j["B"]));
  }
  if (kind == "orbit-limit") {
    if (!j.contains("operator") || !j.contains("gauge"))
      bad("map: kind \"orbit-limit\" needs \"operator\" and \"gauge\"");
    AlgebraElement t = element_from_json(alg, j["operator"]);
    Gauge p = gauge_from_json(j["gauge"]);
    return orbit_limit(t, p, opts).value;
  }
  bad("map.kind: unknown kind \"" + kind + "\"");
}

//============================================================================
// Sequence files
//============================================================================

std::vector<double> read_sequence_csv(std::istream& in) {
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos || line[a] == '#') continue;
    std::size_t b = line.find_last_not_of(" \t\r");
    const std::string tok = line.substr(a, b - a + 1);
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size() || !std::isfinite(v)) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      bad("sequence line " + std::to_string(lineno) + ": cannot parse \"" +
          tok + "\"");
    }
  }
  return out;
}

//============================================================================
// Schema checking
//============================================================================

namespace {

const json* resolve_ref(const json& root, const std::string& ref) {
  const std::string prefix = "#/definitions/";
  if (ref.rfind(prefix, 0) != 0) return nullptr;
  const std::string name = ref.substr(prefix.size());
  if (!root.contains("definitions") || !root["definitions"].contains(name))
    return nullptr;
  return &root["definitions"][name];
}

bool type_matches(const json& inst, const std::string& type) {
  if (type == "object") return inst.is_object();
  if (type == "array") return inst.is_array();
  if (type == "string") return inst.is_string();
  if (type == "number") return inst.is_number();
  if (type == "integer") return inst.is_number_integer();
  if (type == "boolean") return inst.is_boolean();
  if (type == "null") return inst.is_null();
  return false;
}

void check_node(const json& root, const json& schema, const json& inst,
                const std::string& path, std::vector<std::string>& out) {
  if (schema.is_boolean()) {
    if (!schema.get<bool>()) out.push_back(path + ": forbidden by schema");
    return;
  }
  if (!schema.is_object()) return;

  if (schema.contains("$ref")) {
    const json* target = resolve_ref(root, schema["$ref"].get<std::string>());
    if (!target) {
      out.push_back(path + ": unresolvable $ref " +
                    schema["$ref"].get<std::string>());
      return;
    }
    check_node(root, *target, inst, path, out);
    return;
  }

  if (schema.contains("type")) {
    const json& t = schema["type"];
    bool ok = false;
    if (t.is_string()) ok = type_matches(inst, t.get<std::string>());
    else if (t.is_array())
      for (const json& alt : t) ok = ok || type_matches(inst, alt.get<std::string>());
    if (!ok) {
      out.push_back(path + ": expected type " + t.dump());
      return;
    }
  }

  if (schema.contains("enum")) {
    bool ok = false;
    for (const json& v : schema["enum"]) ok = ok || (v == inst);
    if (!ok) out.push_back(path + ": not in enum " + schema["enum"].dump());
  }
  if (schema.contains("const") && !(schema["const"] == inst))
    out.push_back(path + ": expected const " + schema["const"].dump());

  if (schema.contains("oneOf")) {
    int hits = 0;
    for (const json& sub : schema["oneOf"]) {
      std::vector<std::string> probe;
      check_node(root, sub, inst, path, probe);
      if (probe.empty()) ++hits;
    }
    if (hits != 1)
      out.push_back(path + ": matched " + std::to_string(hits) +
                    " of oneOf alternatives, need exactly 1");
  }

  if (inst.is_number()) {
    const double v = inst.get<double>();
    if (schema.contains("minimum") && v < schema["minimum"].get<double>())
      out.push_back(path + ": below minimum " + schema["minimum"].dump());
    if (schema.contains("exclusiveMinimum") &&
        v <= schema["exclusiveMinimum"].get<double>())
      out.push_back(path + ": not above exclusiveMinimum " +
                    schema["exclusiveMinimum"].dump());
    if (schema.contains("maximum") && v > schema["maximum"].get<double>())
      out.push_back(path + ": above maximum " + schema["maximum"].dump());
  }

  if (inst.is_array()) {
    if (schema.contains("minItems") && inst.size() < schema["minItems"].get<std::size_t>())
      out.push_back(path + ": fewer than minItems " + schema["minItems"].dump());
    if (schema.contains("maxItems") && inst.size() > schema["maxItems"].get<std::size_t>())
      out.push_back(path + ": more than maxItems " + schema["maxItems"].dump());
    if (schema.contains("items"))
      for (std::size_t i = 0; i < inst.size(); ++i)
        check_node(root, schema["items"], inst[i],
                   path + "[" + std::to_string(i) + "]", out);
  }

  if (inst.is_object()) {
    if (schema.contains("required"))
      for (const json& req : schema["required"])
        if (!inst.contains(req.get<std::string>()))
          out.push_back(path + ": missing required property \"" +
                        req.get<std::string>() + "\"");
    const json props =
        schema.contains("properties") ? schema["properties"] : json::object();
    for (auto it = inst.begin(); it != inst.end(); ++it) {
      const std::string sub = path + "." + it.key();
      if (props.contains(it.key())) {
        check_node(root, props[it.key()], it.value(), sub, out);
      } else if (schema.contains("additionalProperties")) {
        const json& ap = schema["additionalProperties"];
        if (ap.is_boolean() && !ap.get<bool>())
          out.push_back(sub + ": unexpected property");
        else if (!ap.is_boolean())
          check_node(root, ap, it.value(), sub, out);
      }
    }
  }
}

}  // namespace

std::vector<std::string> schema_validate(const json& instance,
                                         const json& schema) {
  std::vector<std::string> problems;
  check_node(schema, schema, instance, "$", problems);
  return problems;
}

//============================================================================
// Shipped schemas
//============================================================================

namespace {

constexpr const char* kConfigSchema = R"json({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "$id": "finvn-config-1",
  "title": "finvn job configuration",
  "type": "object",
  "additionalProperties": false,
  "properties": {
    "algebra": {"$ref": "#/definitions/algebra"},
    "operators": {
      "type": "object",
      "additionalProperties": {"$ref": "#/definitions/element"}
    },
    "family": {"type": "array", "items": {"type": "string"}, "minItems": 1},
    "gauge": {"$ref": "#/definitions/gauge"},
    "gauges": {
      "type": "array",
      "items": {"$ref": "#/definitions/gauge"},
      "minItems": 1
    },
    "map": {"$ref": "#/definitions/map"},
    "element": {"$ref": "#/definitions/element"},
    "sequence": {"type": "array", "items": {"type": "number"}, "minItems": 64},
    "horizon": {"type": "integer", "minimum": 64},
    "tol": {"type": "number", "exclusiveMinimum": 0},
    "gauge_tol": {"type": "number", "exclusiveMinimum": 0},
    "seed": {"type": "integer", "minimum": 0},
    "amplification": {"type": "integer", "minimum": 1},
    "allow_nonregular": {"type": "boolean"},
    "strict_domination": {"type": "boolean"},
    "output": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "format": {"enum": ["json", "text"]},
        "dump_matrices": {"type": "boolean"},
        "reproducible": {"type": "boolean"}
      }
    }
  },
  "definitions": {
    "algebra": {
      "type": "object",
      "required": ["blocks"],
      "additionalProperties": false,
      "properties": {
        "blocks": {
          "type": "array",
          "minItems": 1,
          "items": {
            "type": "object",
            "required": ["dim", "weight"],
            "additionalProperties": false,
            "properties": {
              "dim": {"type": "integer", "minimum": 1},
              "weight": {"type": "number", "exclusiveMinimum": 0}
            }
          }
        }
      }
    },
    "complex": {
      "type": "array",
      "items": {"type": "number"},
      "minItems": 2,
      "maxItems": 2
    },
    "element": {
      "type": "object",
      "required": ["blocks"],
      "additionalProperties": false,
      "properties": {
        "blocks": {
          "type": "array",
          "items": {"type": "array", "items": {"$ref": "#/definitions/complex"}}
        }
      }
    },
    "gauge": {
      "type": "object",
      "required": ["kind"],
      "additionalProperties": false,
      "properties": {
        "kind": {
          "enum": ["constant", "geometric", "poly", "custom", "custom-log"]
        },
        "value": {"type": "number", "exclusiveMinimum": 0},
        "c": {"type": "number", "exclusiveMinimum": 0},
        "degree": {"type": "integer", "minimum": 0},
        "values": {
          "type": "array",
          "items": {"type": "number", "exclusiveMinimum": 0}
        },
        "log_values": {"type": "array", "items": {"type": "number"}}
      }
    },
    "map": {
      "type": "object",
      "required": ["kind"],
      "additionalProperties": false,
      "properties": {
        "kind": {"enum": ["matrix", "sandwich", "orbit-limit"]},
        "entries": {
          "type": "array",
          "items": {"type": "array", "items": {"$ref": "#/definitions/complex"}}
        },
        "A": {"$ref": "#/definitions/element"},
        "B": {"$ref": "#/definitions/element"},
        "operator": {"$ref": "#/definitions/element"},
        "gauge": {"$ref": "#/definitions/gauge"}
      }
    }
  }
})json";

constexpr const char* kReportSchema = R"json({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "$id": "finvn-report-1",
  "title": "finvn command report",
  "type": "object",
  "required": ["version", "command", "verdict"],
  "properties": {
    "version": {"const": "finvn-1"},
    "command": {
      "enum": ["gauge", "adjoint", "cp", "limit", "similarity", "demo"]
    },
    "verdict": {"enum": ["ok", "error"]},
    "timestamp": {"type": "string"},
    "error": {
      "type": "object",
      "required": ["code", "message"],
      "additionalProperties": false,
      "properties": {
        "code": {"type": "string"},
        "message": {"type": "string"}
      }
    },
    "defects": {
      "type": "object",
      "additionalProperties": {"type": "number"}
    },
    "spectra": {
      "type": "object",
      "additionalProperties": {"type": "array", "items": {"type": "number"}}
    }
  }
})json";

}  // namespace

const json& config_schema() {
  static const json schema = json::parse(kConfigSchema);
  return schema;
}

const json& report_schema() {
  static const json schema = json::parse(kReportSchema);
  return schema;
}

}  // namespace finvn::io
