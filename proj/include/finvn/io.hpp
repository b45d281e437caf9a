#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "finvn/algebra.hpp"
#include "finvn/gauge.hpp"
#include "finvn/limits.hpp"
#include "finvn/supermap.hpp"

// JSON wire formats.
//
//   algebra   {"blocks": [{"dim": 2, "weight": 0.125}, ...]}
//   element   {"blocks": [[[re, im], ...], ...]}      row-major per block
//   gauge     {"kind": "constant",   "value": 1.0}
//             {"kind": "geometric",  "c": 0.9}
//             {"kind": "poly",       "degree": 1}
//             {"kind": "custom",     "values": [...]}
//             {"kind": "custom-log", "log_values": [...]}
//   map       {"kind": "matrix",   "entries": [[[re, im], ...], ...]}
//             {"kind": "sandwich", "A": element, "B": element}    X -> A X B
//             {"kind": "orbit-limit", "operator": element, "gauge": gauge}
//
// Numbers are emitted with shortest round-trip printing, so parse(dump(x))
// reproduces every double bit for bit.

namespace finvn::io {

nlohmann::json to_json(const BlockAlgebra& alg);
AlgebraPtr algebra_from_json(const nlohmann::json& j);

nlohmann::json to_json(const AlgebraElement& x);
AlgebraElement element_from_json(const AlgebraPtr& alg,
                                 const nlohmann::json& j);

nlohmann::json to_json(const Gauge& g);
Gauge gauge_from_json(const nlohmann::json& j);

// Dense complex matrix as nested rows of [re, im] pairs.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

// Serializes the raw action matrix (kind "matrix"). Parsing accepts all
// three kinds; "orbit-limit" runs the full gated pipeline and can therefore
// throw anything orbit_limit throws.
nlohmann::json supermap_to_json(const SuperOperator& s);
SuperOperator supermap_from_json(const AlgebraPtr& alg,
                                 const nlohmann::json& j,
                                 const LimitOptions& opts = {});

// One number per line; blank lines and lines starting with '#' are skipped.
std::vector<double> read_sequence_csv(std::istream& in);

// Minimal JSON-schema checker covering the subset our schemas use: type,
// enum, const, required, properties, additionalProperties, items, minItems,
// maxItems, minimum, exclusiveMinimum, maximum, oneOf, and local
// "#/definitions/..." refs. Returns human-readable problems, empty = valid.
std::vector<std::string> schema_validate(const nlohmann::json& instance,
                                         const nlohmann::json& schema);

// Embedded copies of the schema documents shipped under schemas/. The CLI
// validates configs against these without touching the filesystem; a test
// pins them to the shipped files.
const nlohmann::json& config_schema();
const nlohmann::json& report_schema();

}  // namespace finvn::io
