#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "finvn/demos.hpp"
#include "finvn/io.hpp"
#include "finvn/limits.hpp"

using namespace finvn;
using nlohmann::json;

namespace {

//============================================================================
// Process plumbing
//============================================================================

int exit_code_for(errc c) {
  switch (c) {
    case errc::bad_config:
    case errc::shape_mismatch:
    case errc::horizon_too_short:
    case errc::dimension_too_large:
    case errc::resource_limit:
      return 2;
    case errc::not_a_gauge:
    case errc::law_violation:
    case errc::not_hermitian:
    case errc::not_psd:
    case errc::singular:
    case errc::not_2_positive:
    case errc::non_commuting_family:
      return 3;
    case errc::not_c1:
    case errc::singular_ei:
      return 4;
    case errc::not_regular_gauge:
    case errc::not_dominated:
    case errc::not_compatible:
      return 5;
    case errc::no_convergence:
    case errc::not_almost_convergent:
    case errc::unitarity_defect:
    case errc::commutation_defect:
      return 6;
  }
  return 1;
}

struct CliOptions {
  std::string config_path;
  std::string sequence_path;
  std::string demo_name;
  std::optional<std::int64_t> horizon;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  bool want_text = false;
  bool want_json = false;
  bool dump_matrices = false;
  bool reproducible = false;
  int max_block = 8;
  int demo_dim = 6;
};

struct OutputOptions {
  bool as_json = true;
  bool dump_matrices = false;
  bool reproducible = false;
};

std::string iso_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void render_text(const json& j, std::ostream& os, int depth) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.value().is_object() ||
          (it.value().is_array() && it.value().size() > 12)) {
        os << pad << it.key() << ":\n";
        render_text(it.value(), os, depth + 1);
      } else {
        os << pad << it.key() << ": " << it.value().dump() << "\n";
      }
    }
  } else if (j.is_array()) {
    if (!j.empty() && j[0].is_number()) {
      os << pad << j.dump() << "\n";
    } else {
      for (const json& item : j) render_text(item, os, depth);
    }
  } else {
    os << pad << j.dump() << "\n";
  }
}

int emit(json report, const std::string& command, bool ok, const OutputOptions& out,
         int code_on_error = 1) {
  report["version"] = "finvn-1";
  report["command"] = command;
  report["verdict"] = ok ? "ok" : "error";
  if (!out.reproducible) report["timestamp"] = iso_timestamp();
  if (out.as_json) {
    std::cout << report.dump(2) << "\n";
  } else {
    render_text(report, std::cout, 0);
  }
  return ok ? 0 : code_on_error;
}

int emit_error(const std::string& command, const Error& e,
               const OutputOptions& out) {
  json report;
  report["error"] = {{"code", errc_name(e.code())}, {"message", e.what()}};
  return emit(std::move(report), command, false, out, exit_code_for(e.code()));
}

//============================================================================
// Config handling
//============================================================================

int max_dim_cap() {
  if (const char* env = std::getenv("FINVN_MAX_DIM")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 256;
}

json load_config(const CliOptions& cli) {
  if (cli.config_path.empty())
    fail(errc::bad_config, "this command needs --config FILE");
  std::ifstream in(cli.config_path);
  if (!in.good())
    fail(errc::bad_config, "cannot open config file " + cli.config_path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(errc::bad_config, std::string("config is not valid JSON: ") + e.what());
  }
  const auto problems = io::schema_validate(cfg, io::config_schema());
  if (!problems.empty()) {
    std::string msg = "config fails the schema:";
    for (const auto& p : problems) msg += "\n  " + p;
    fail(errc::bad_config, msg);
  }
  return cfg;
}

AlgebraPtr config_algebra(const json& cfg) {
  if (!cfg.contains("algebra"))
    fail(errc::bad_config, "config needs an \"algebra\"");
  AlgebraPtr alg = io::algebra_from_json(cfg["algebra"]);
  if (alg->total_dim() > max_dim_cap())
    fail(errc::dimension_too_large,
         "algebra dimension " + std::to_string(alg->total_dim()) +
             " exceeds FINVN_MAX_DIM = " + std::to_string(max_dim_cap()));
  return alg;
}

LimitOptions make_options(const json& cfg, const CliOptions& cli) {
  LimitOptions o;
  if (cfg.contains("horizon")) o.horizon = cfg["horizon"].get<std::int64_t>();
  if (cfg.contains("tol")) o.tol = cfg["tol"].get<double>();
  if (cfg.contains("gauge_tol")) o.gauge_tol = cfg["gauge_tol"].get<double>();
  if (cfg.contains("seed")) o.seed = cfg["seed"].get<std::uint64_t>();
  if (cfg.contains("allow_nonregular"))
    o.allow_nonregular = cfg["allow_nonregular"].get<bool>();
  if (cfg.contains("strict_domination"))
    o.strict_domination = cfg["strict_domination"].get<bool>();
  if (cli.horizon) o.horizon = *cli.horizon;
  if (cli.tol) o.tol = *cli.tol;
  if (cli.seed) o.seed = *cli.seed;
  return o;
}

OutputOptions make_output(const json& cfg, const CliOptions& cli) {
  OutputOptions o;
  if (cfg.contains("output")) {
    const json& out = cfg["output"];
    if (out.contains("format")) o.as_json = out["format"] == "json";
    if (out.contains("dump_matrices"))
      o.dump_matrices = out["dump_matrices"].get<bool>();
    if (out.contains("reproducible"))
      o.reproducible = out["reproducible"].get<bool>();
  }
  if (cli.want_json) o.as_json = true;
  if (cli.want_text) o.as_json = false;
  if (cli.dump_matrices) o.dump_matrices = true;
  if (cli.reproducible) o.reproducible = true;
  return o;
}

// The operator a single-operator command acts on: the head of "family",
// else the unique entry of "operators", else the entry named "T".
AlgebraElement resolve_operator(const json& cfg, const AlgebraPtr& alg) {
  if (!cfg.contains("operators") || cfg["operators"].empty())
    fail(errc::bad_config, "config needs a non-empty \"operators\" table");
  const json& ops = cfg["operators"];
  std::string name;
  if (cfg.contains("family")) {
    name = cfg["family"][0].get<std::string>();
  } else if (ops.size() == 1) {
    name = ops.begin().key();
  } else if (ops.contains("T")) {
    name = "T";
  } else {
    fail(errc::bad_config,
         "several operators given; pick one with \"family\" or name it \"T\"");
  }
  if (!ops.contains(name))
    fail(errc::bad_config, "family names unknown operator \"" + name + "\"");
  return io::element_from_json(alg, ops[name]);
}

std::vector<AlgebraElement> resolve_family(const json& cfg,
                                           const AlgebraPtr& alg) {
  if (!cfg.contains("operators") || cfg["operators"].empty())
    fail(errc::bad_config, "config needs a non-empty \"operators\" table");
  const json& ops = cfg["operators"];
  std::vector<AlgebraElement> family;
  if (cfg.contains("family")) {
    for (const json& n : cfg["family"]) {
      const std::string name = n.get<std::string>();
      if (!ops.contains(name))
        fail(errc::bad_config, "family names unknown operator \"" + name + "\"");
      family.push_back(io::element_from_json(alg, ops[name]));
    }
  } else {
    for (auto it = ops.begin(); it != ops.end(); ++it)
      family.push_back(io::element_from_json(alg, it.value()));
  }
  return family;
}

std::vector<Gauge> resolve_gauges(const json& cfg, std::size_t count) {
  std::vector<Gauge> gauges;
  if (cfg.contains("gauges")) {
    for (const json& g : cfg["gauges"]) gauges.push_back(io::gauge_from_json(g));
    if (gauges.size() != count)
      fail(errc::bad_config, "config lists " + std::to_string(gauges.size()) +
                                 " gauges for " + std::to_string(count) +
                                 " operators");
  } else if (cfg.contains("gauge")) {
    gauges.assign(count, io::gauge_from_json(cfg["gauge"]));
  }
  return gauges;  // empty = caller decides (similarity falls back to auto)
}

//============================================================================
// Report fragments
//============================================================================

json almost_json(const AlmostLimitResult& r) {
  return {{"converged", r.converged},
          {"estimate", r.estimate},
          {"spread", r.spread},
          {"step_delta", r.step_delta},
          {"window", r.window}};
}

json gauge_analysis_json(const GaugeAnalysis& a) {
  return {{"valid", a.valid},
          {"regular", a.regular},
          {"growth", a.growth},
          {"growth_spread", a.growth_spread},
          {"regularity_defect", a.regularity_defect},
          {"gamma", a.gamma},
          {"gamma_converged", a.gamma_converged},
          {"rho", a.rho},
          {"rho_converged", a.rho_converged},
          {"root_growth", a.root_growth},
          {"root_gap_warning", a.root_gap_warning},
          {"horizon", a.horizon}};
}

json domination_json(const DominationReport& d) {
  return {{"dominated", d.dominated},
          {"strict", d.strict},
          {"max_ratio", d.max_ratio},
          {"tail_head_ratio", d.tail_head_ratio},
          {"worst_n", d.worst_n}};
}

json qprime_json(const QPrimeResult& q) {
  return {{"value", q.value},
          {"witness", q.witness},
          {"subsets_tried", q.subsets_tried}};
}

json projection_json(const ProjectionStats& p) {
  return {{"residual_idempotent", p.residual_idempotent},
          {"residual_intertwine", p.residual_intertwine},
          {"trace_defect", p.trace_defect},
          {"rank", p.rank},
          {"eig_count", p.eig_count},
          {"iterations", p.iterations},
          {"used_eigen_path", p.used_eigen_path}};
}

json window_json(const WindowCertificate& w) {
  return {{"defect", w.defect},
          {"trend", w.trend},
          {"window", w.window},
          {"certified", w.certified}};
}

json cp_json(const CpCertificate& c) {
  return {{"cp", c.cp},
          {"min_choi_eig", c.min_eig},
          {"herm_defect", c.herm_defect},
          {"block_min_eigs", c.block_min_eigs}};
}

json orbit_limit_json(const OrbitLimit& lim, const OutputOptions& out) {
  json j = {{"gauge_analysis", gauge_analysis_json(lim.gauge)},
            {"domination", domination_json(lim.domination)},
            {"growth", lim.growth},
            {"rho", lim.rho},
            {"compat_value", lim.compat_value},
            {"compat_via_qprime", lim.compat_via_qprime},
            {"projection", projection_json(lim.projection)},
            {"window", window_json(lim.window)},
            {"diagnostics_only", lim.diagnostics_only}};
  if (out.dump_matrices) j["action"] = io::matrix_to_json(lim.value.action());
  return j;
}

json similarity_json(const SimilarityReport& rep, const OutputOptions& out) {
  json j;
  j["success"] = rep.success;
  if (!rep.success) {
    j["code"] = errc_name(rep.code);
    j["message"] = rep.message;
  }
  j["growths"] = rep.growths;
  j["defects"] = {{"unitarity", rep.max_unitarity_defect},
                  {"commutation", rep.max_commutation_defect}};
  json spectra = json::object();
  if (rep.fixed_identity)
    spectra["e_identity"] = spectrum_hermitian(*rep.fixed_identity, 1e-6);
  if (!rep.r_spectrum.empty()) {
    spectra["r"] = rep.r_spectrum;
    j["r_min"] = rep.r_min;
  }
  if (!spectra.empty()) j["spectra"] = spectra;
  if (rep.joint) {
    j["joint"] = {{"commutation_defect", rep.joint->commutation_defect},
                  {"idempotent_residual", rep.joint->idempotent_residual},
                  {"absorption_defect", rep.joint->absorption_defect},
                  {"cp", cp_json(rep.joint->cp)},
                  {"iterations", rep.joint->iterations}};
  }
  if (rep.nullspace_witness) {
    json w = json::array();
    for (int i = 0; i < rep.nullspace_witness->size(); ++i)
      w.push_back(json::array({(*rep.nullspace_witness)(i).real(),
                               (*rep.nullspace_witness)(i).imag()}));
    j["nullspace_witness"] = w;
  }
  if (out.dump_matrices) {
    if (rep.similarity_root)
      j["similarity_root"] = io::to_json(*rep.similarity_root);
    json us = json::array();
    for (const AlgebraElement& u : rep.unitaries) us.push_back(io::to_json(u));
    if (!us.empty()) j["unitaries"] = us;
  }
  return j;
}

//============================================================================
// Commands
//============================================================================

int cmd_gauge(const CliOptions& cli) {
  json cfg = cli.config_path.empty() ? json::object() : load_config(cli);
  const OutputOptions out = make_output(cfg, cli);
  const LimitOptions opts = make_options(cfg, cli);
  try {
    json report;
    std::vector<double> sequence;
    if (!cli.sequence_path.empty()) {
      std::ifstream in(cli.sequence_path);
      if (!in.good())
        fail(errc::bad_config, "cannot open sequence file " + cli.sequence_path);
      sequence = io::read_sequence_csv(in);
    } else if (cfg.contains("sequence")) {
      sequence = cfg["sequence"].get<std::vector<double>>();
    }
    if (!sequence.empty()) {
      report["samples"] = sequence.size();
      report["almost_limit"] = almost_json(almost_limit(sequence, opts.tol));
      report["q_prime"] = qprime_json(q_prime(sequence));
      return emit(std::move(report), "gauge", true, out);
    }
    if (!cfg.contains("gauge"))
      fail(errc::bad_config,
           "gauge command needs a \"gauge\" or a sequence (config "
           "\"sequence\" or --sequence FILE)");
    Gauge p = io::gauge_from_json(cfg["gauge"]);
    report["gauge"] = io::to_json(p);
    if (cfg.contains("operators")) {
      AlgebraPtr alg = config_algebra(cfg);
      AlgebraElement t = resolve_operator(cfg, alg);
      AsymptoticControlReport rep = asymptotic_control_report(t, p, opts);
      report["analysis"] = gauge_analysis_json(rep.gauge);
      report["strict_domination"] = domination_json(rep.strict_domination);
      report["bounded_domination"] = domination_json(rep.bounded_domination);
      report["ratio_almost"] = almost_json(rep.ratio_almost);
      report["ratio_qprime"] = qprime_json(rep.ratio_qprime);
      report["compatible"] = rep.compatible;
    } else {
      const std::int64_t n = std::min(opts.horizon, p.horizon());
      report["analysis"] = gauge_analysis_json(
          analyze_gauge(p, std::max<std::int64_t>(n, 64), opts.gauge_tol));
    }
    return emit(std::move(report), "gauge", true, out);
  } catch (const Error& e) {
    return emit_error("gauge", e, out);
  }
}

int cmd_adjoint(const CliOptions& cli) {
  json cfg = load_config(cli);
  const OutputOptions out = make_output(cfg, cli);
  const LimitOptions opts = make_options(cfg, cli);
  try {
    AlgebraPtr alg = config_algebra(cfg);
    if (!cfg.contains("map"))
      fail(errc::bad_config, "adjoint command needs a \"map\"");
    SuperOperator phi = io::supermap_from_json(alg, cfg["map"], opts);
    SuperOperator hat = tau_adjoint(phi);

    // Duality residual tau(phi(X) Y) = tau(X hat(Y)) on seeded probes.
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> g(0.0, 1.0);
    auto probe = [&] {
      Vector v(alg->elem_dim());
      for (int i = 0; i < v.size(); ++i) v(i) = complexd(g(rng), g(rng));
      return AlgebraElement::from_coords(alg, v);
    };
    double duality = 0.0;
    for (int k = 0; k < 8; ++k) {
      AlgebraElement x = probe(), y = probe();
      duality = std::max(duality,
                         std::abs(trace(phi(x) * y) - trace(x * hat(y))));
    }
    const double involution = (tau_adjoint(hat).action() - phi.action()).norm();
    const double l2_gap =
        std::abs(phi.l2_extension_norm() - hat.l2_extension_norm());

    json report;
    report["defects"] = {{"duality", duality},
                         {"involution", involution},
                         {"l2_norm_gap", l2_gap}};
    report["l2_norm"] = phi.l2_extension_norm();
    report["hermiticity_preserving_defect"] =
        hermiticity_preservation_defect(phi);
    report["unital"] = is_unital(phi);
    report["trace_preserving"] = is_trace_preserving(phi);
    if (out.dump_matrices)
      report["adjoint_action"] = io::matrix_to_json(hat.action());
    if (cfg.contains("element")) {
      AlgebraElement x = io::element_from_json(alg, cfg["element"]);
      report["adjoint_of_element"] = io::to_json(hat(x));
    }

    const double bar = cli.tol.value_or(
        cfg.contains("tol") ? cfg["tol"].get<double>() : tol::algebraic);
    const double scale = 1.0 + phi.l2_extension_norm();
    if (duality > bar * scale || involution > bar * scale)
      fail(errc::law_violation,
           "adjoint laws exceed tolerance (duality " + std::to_string(duality) +
               ", involution " + std::to_string(involution) + ")");
    return emit(std::move(report), "adjoint", true, out);
  } catch (const Error& e) {
    return emit_error("adjoint", e, out);
  }
}

int cmd_cp(const CliOptions& cli) {
  json cfg = load_config(cli);
  const OutputOptions out = make_output(cfg, cli);
  const LimitOptions opts = make_options(cfg, cli);
  try {
    AlgebraPtr alg = config_algebra(cfg);
    if (!cfg.contains("map"))
      fail(errc::bad_config, "cp command needs a \"map\"");
    SuperOperator phi = io::supermap_from_json(alg, cfg["map"], opts);
    json report;
    report["choi"] = cp_json(cp_certificate(phi));
    const int level = cfg.contains("amplification")
                          ? cfg["amplification"].get<int>()
                          : 1;
    PositivityReport pos = positivity_check(phi, level, tol::algebraic, opts.seed);
    json pj = {{"level", level},
               {"verdict", pos.verdict == PositivityVerdict::positive
                               ? "positive"
                               : pos.verdict == PositivityVerdict::violated
                                     ? "violated"
                                     : "inconclusive"},
               {"choi_min_eig", pos.choi_min_eig},
               {"note", pos.note}};
    if (pos.witness && out.dump_matrices) {
      pj["witness"] = io::to_json(*pos.witness);
      pj["witness_output_min_eig"] = pos.witness_output_min_eig;
    }
    report["positivity"] = pj;
    return emit(std::move(report), "cp", true, out);
  } catch (const Error& e) {
    return emit_error("cp", e, out);
  }
}

int cmd_limit(const CliOptions& cli) {
  json cfg = load_config(cli);
  const OutputOptions out = make_output(cfg, cli);
  const LimitOptions opts = make_options(cfg, cli);
  try {
    AlgebraPtr alg = config_algebra(cfg);
    AlgebraElement t = resolve_operator(cfg, alg);
    if (!cfg.contains("gauge"))
      fail(errc::bad_config, "limit command needs a \"gauge\"");
    Gauge p = io::gauge_from_json(cfg["gauge"]);
    OrbitLimit lim = orbit_limit(t, p, opts);

    json report = orbit_limit_json(lim, out);
    report["e_identity_spectrum"] =
        spectrum_hermitian(lim.value(AlgebraElement::identity(alg)), 1e-6);
    if (cfg.contains("element")) {
      AlgebraElement x = io::element_from_json(alg, cfg["element"]);
      report["value_on_element"] = io::to_json(lim.value(x));
    }

    auto laws = verify_orbit_laws(t, lim, std::max(opts.tol, 1e-7), opts.seed);
    json defects = json::object();
    bool laws_pass = true;
    for (const LawReport& law : laws) {
      defects[law.name] = law.defect;
      laws_pass = laws_pass && law.pass;
    }
    report["defects"] = defects;
    report["laws_pass"] = laws_pass;
    if (!laws_pass && !lim.diagnostics_only)
      fail(errc::law_violation, "orbit limit laws exceed tolerance");
    return emit(std::move(report), "limit", true, out);
  } catch (const Error& e) {
    return emit_error("limit", e, out);
  }
}

int cmd_similarity(const CliOptions& cli) {
  json cfg = load_config(cli);
  const OutputOptions out = make_output(cfg, cli);
  const LimitOptions opts = make_options(cfg, cli);
  try {
    AlgebraPtr alg = config_algebra(cfg);
    std::vector<AlgebraElement> family = resolve_family(cfg, alg);
    std::vector<Gauge> gauges = resolve_gauges(cfg, family.size());
    SimilarityReport rep = gauges.empty()
                               ? similarity_auto(family, opts)
                               : similarity(family, gauges, opts);
    json report = similarity_json(rep, out);
    if (rep.success) return emit(std::move(report), "similarity", true, out);
    // Failed pipeline: full report body plus the error envelope.
    report["error"] = {{"code", errc_name(rep.code)}, {"message", rep.message}};
    return emit(std::move(report), "similarity", false, out,
                exit_code_for(rep.code));
  } catch (const Error& e) {
    return emit_error("similarity", e, out);
  }
}

int cmd_demo(const CliOptions& cli) {
  json cfg = cli.config_path.empty() ? json::object() : load_config(cli);
  const OutputOptions out = make_output(cfg, cli);
  try {
    json report;
    report["demo"] = cli.demo_name;
    if (cli.demo_name == "remark-2.5.2") {
      demos::AdjointNormGrowth d = demos::adjoint_norm_growth(cli.max_block);
      json table = json::array();
      for (std::size_t k = 0; k < d.n.size(); ++k)
        table.push_back({{"n", d.n[k]},
                         {"map_norm", d.map_norm[k]},
                         {"adjoint_norm", d.adjoint_norm[k]},
                         {"predicted", d.predicted[k]},
                         {"formula_defect", d.formula_defect[k]},
                         {"choi_min_map", d.choi_min_map[k]},
                         {"choi_min_adjoint", d.choi_min_adjoint[k]}});
      report["max_block"] = cli.max_block;
      report["table"] = table;
      report["note"] =
          "Each map has norm 1, yet its trace adjoint has norm n - 1: no "
          "single gauge dominates the adjoint family once blocks keep "
          "growing.";
    } else if (cli.demo_name == "remark-2.1.1") {
      demos::TraceSensitivity d = demos::trace_sensitivity(cli.max_block);
      report["max_block"] = d.max_block;
      report["weights"] = {{"cubic", d.weight_cubic},
                           {"spiked", d.weight_spiked}};
      report["weight_ratios"] = {{"cubic", d.ratio_cubic},
                                 {"spiked", d.ratio_spiked}};
      report["shift_norm"] = d.shift_norm;
      report["adjoint_norm"] = {{"cubic", d.adjoint_norm_cubic},
                                {"spiked", d.adjoint_norm_spiked}};
      report["defects"] = {{"formula_cubic", d.formula_defect_cubic},
                           {"formula_spiked", d.formula_defect_spiked}};
      report["note"] = d.note;
    } else if (cli.demo_name == "theorem-3.2") {
      const std::uint64_t seed = cli.seed.value_or(7);
      demos::SimilarityShowcase d =
          demos::similarity_showcase(seed, cli.demo_dim);
      report["seed"] = seed;
      report["dim"] = cli.demo_dim;
      report["radius"] = d.radius;
      report["pipeline"] = similarity_json(d.report, out);
      if (out.dump_matrices) report["operator"] = io::to_json(d.t);
    } else {
      fail(errc::bad_config,
           "unknown demo \"" + cli.demo_name +
               "\"; available: remark-2.5.2, remark-2.1.1, theorem-3.2");
    }
    return emit(std::move(report), "demo", true, out);
  } catch (const Error& e) {
    return emit_error("demo", e, out);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block-algebra orbit limits, trace adjoints and similarity"};
  app.require_subcommand(1);
  CliOptions cli;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", cli.config_path, "Job configuration file");
    sub->add_option("--horizon", cli.horizon, "Iteration horizon");
    sub->add_option("--tol", cli.tol, "Tolerance override");
    sub->add_option("--seed", cli.seed, "Seed for randomized probes");
    auto* jf = sub->add_flag("--json", cli.want_json, "JSON output (default)");
    sub->add_flag("--text", cli.want_text, "Plain text output")->excludes(jf);
    sub->add_flag("--dump-matrices", cli.dump_matrices,
                  "Embed matrices in the report");
    sub->add_flag("--reproducible", cli.reproducible,
                  "Suppress the timestamp for byte-identical reruns");
  };

  CLI::App* gauge = app.add_subcommand("gauge", "Classify a gauge or sequence");
  gauge->add_option("--sequence", cli.sequence_path,
                    "Sequence file, one value per line");
  add_common(gauge);
  CLI::App* adjoint =
      app.add_subcommand("adjoint", "Trace adjoint of a map, with law checks");
  add_common(adjoint);
  CLI::App* cp =
      app.add_subcommand("cp", "Complete-positivity certificate of a map");
  add_common(cp);
  CLI::App* limit = app.add_subcommand("limit", "Gauged orbit limit of an operator");
  add_common(limit);
  CLI::App* similarity =
      app.add_subcommand("similarity", "Similarity-to-unitary pipeline");
  add_common(similarity);
  CLI::App* demo = app.add_subcommand("demo", "Built-in model families");
  demo->add_option("name", cli.demo_name, "Demo name")->required();
  demo->add_option("--max-block", cli.max_block, "Largest block size")
      ->check(CLI::Range(2, 64));
  demo->add_option("--dim", cli.demo_dim, "Operator dimension (theorem-3.2)")
      ->check(CLI::Range(2, 32));
  add_common(demo);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gauge->parsed()) return cmd_gauge(cli);
    if (adjoint->parsed()) return cmd_adjoint(cli);
    if (cp->parsed()) return cmd_cp(cli);
    if (limit->parsed()) return cmd_limit(cli);
    if (similarity->parsed()) return cmd_similarity(cli);
    if (demo->parsed()) return cmd_demo(cli);
  } catch (const Error& e) {
    // Config loading failures happen before a command-specific catch exists.
    OutputOptions out;
    out.reproducible = cli.reproducible;
    out.as_json = !cli.want_text;
    std::string command = app.get_subcommands().empty()
                              ? "unknown"
                              : app.get_subcommands()[0]->get_name();
    return emit_error(command, e, out);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
