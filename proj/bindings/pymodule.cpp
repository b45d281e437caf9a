// Python bindings for the core library. Algebras are exposed through a thin
// handle class (the C++ side shares them as immutable shared_ptr values),
// elements and maps convert to and from numpy arrays via Eigen.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "finvn/demos.hpp"
#include "finvn/limits.hpp"

namespace py = pybind11;
using namespace finvn;

namespace {

// Shared immutable algebra handle. Wrapping the shared_ptr<const ...> keeps
// the C++ aliasing rules out of the binding layer.
struct Algebra {
  AlgebraPtr p;
  bool operator==(const Algebra& o) const { return p->same_structure(*o.p); }
};

std::vector<Matrix> element_blocks(const AlgebraElement& x) {
  std::vector<Matrix> out;
  for (int b = 0; b < x.block_count(); ++b) out.push_back(x.block(b));
  return out;
}

}  // namespace

PYBIND11_MODULE(_finvn, m) {
  m.doc() =
      "Finite-dimensional block algebras with weighted traces: trace "
      "adjoints of superoperators, gauged orbit limits, and the "
      "similarity-to-unitary pipeline.";

  py::register_exception<Error>(m, "Error");

  //--------------------------------------------------------------------------
  // Algebra and elements
  //--------------------------------------------------------------------------

  py::class_<Algebra>(m, "Algebra")
      .def(py::init([](std::vector<int> dims, std::vector<double> weights) {
             return Algebra{BlockAlgebra::make(std::move(dims),
                                               std::move(weights))};
           }),
           py::arg("dims"), py::arg("weights"),
           "Direct sum of full matrix blocks with per-block trace weights.")
      .def_property_readonly("dims",
                             [](const Algebra& a) { return a.p->dims(); })
      .def_property_readonly("weights",
                             [](const Algebra& a) { return a.p->weights(); })
      .def_property_readonly("total_dim",
                             [](const Algebra& a) { return a.p->total_dim(); })
      .def_property_readonly("elem_dim",
                             [](const Algebra& a) { return a.p->elem_dim(); })
      .def_property_readonly(
          "block_count", [](const Algebra& a) { return a.p->block_count(); })
      .def("__eq__", &Algebra::operator==)
      .def("__repr__", [](const Algebra& a) {
        std::string s = "Algebra(dims=[";
        for (int b = 0; b < a.p->block_count(); ++b)
          s += (b ? "," : "") + std::to_string(a.p->dim(b));
        return s + "])";
      });

  py::class_<AlgebraElement>(m, "Element")
      .def(py::init([](const Algebra& a, std::vector<Matrix> mats) {
             return AlgebraElement(a.p, std::move(mats));
           }),
           py::arg("algebra"), py::arg("blocks"))
      .def_static(
          "zero", [](const Algebra& a) { return AlgebraElement::zero(a.p); })
      .def_static(
          "identity",
          [](const Algebra& a) { return AlgebraElement::identity(a.p); })
      .def_static("from_block",
                  [](const Algebra& a, int b, const Matrix& mat) {
                    return AlgebraElement::from_block(a.p, b, mat);
                  })
      .def_static("from_coords",
                  [](const Algebra& a, const Vector& v) {
                    return AlgebraElement::from_coords(a.p, v);
                  })
      .def_property_readonly(
          "algebra", [](const AlgebraElement& x) { return Algebra{x.algebra()}; })
      .def_property_readonly("blocks", &element_blocks)
      .def("block",
           [](const AlgebraElement& x, int b) -> Matrix { return x.block(b); })
      .def("adjoint", &AlgebraElement::adjoint)
      .def("coords", &AlgebraElement::coords)
      .def("dense", &AlgebraElement::dense)
      .def(py::self + py::self)
      .def(py::self - py::self)
      .def(py::self * py::self)
      .def("__rmul__",
           [](const AlgebraElement& x, complexd s) { return s * x; })
      .def("__mul__",
           [](const AlgebraElement& x, complexd s) { return s * x; });

  m.def("trace", &trace);
  m.def("l2_inner", &l2_inner);
  m.def("l2_norm", &l2_norm);
  m.def("op_norm", &op_norm);
  m.def("spectrum_hermitian", &spectrum_hermitian, py::arg("a"),
        py::arg("tol") = tol::algebraic);
  m.def("spectrum", &spectrum);
  m.def("spectral_radius", &spectral_radius);
  m.def("sqrt_psd", &sqrt_psd, py::arg("a"), py::arg("tol") = 1e-10);
  m.def("invert", &invert, py::arg("a"), py::arg("tol") = 1e-12);
  m.def("is_unitary", &is_unitary, py::arg("a"),
        py::arg("tol") = tol::algebraic);
  m.def("is_positive", &is_positive_el, py::arg("a"),
        py::arg("tol") = tol::algebraic);
  m.def("commute", &commute, py::arg("a"), py::arg("b"),
        py::arg("tol") = tol::algebraic);

  //--------------------------------------------------------------------------
  // Gauges and almost limits
  //--------------------------------------------------------------------------

  py::class_<Gauge>(m, "Gauge")
      .def_static("constant", &Gauge::constant, py::arg("value") = 1.0)
      .def_static("geometric", &Gauge::geometric, py::arg("c"))
      .def_static("poly", &Gauge::poly, py::arg("k"))
      .def_static("custom", &Gauge::custom, py::arg("values"))
      .def_static("custom_log", &Gauge::custom_log, py::arg("log_values"))
      .def("at", &Gauge::at)
      .def("log_at", &Gauge::log_at)
      .def("horizon", &Gauge::horizon)
      .def("label", &Gauge::label)
      .def("__repr__",
           [](const Gauge& g) { return "Gauge(" + g.label() + ")"; });

  py::class_<AlmostLimitResult>(m, "AlmostLimitResult")
      .def_readonly("converged", &AlmostLimitResult::converged)
      .def_readonly("estimate", &AlmostLimitResult::estimate)
      .def_readonly("spread", &AlmostLimitResult::spread)
      .def_readonly("step_delta", &AlmostLimitResult::step_delta)
      .def_readonly("window", &AlmostLimitResult::window);

  py::class_<GaugeAnalysis>(m, "GaugeAnalysis")
      .def_readonly("valid", &GaugeAnalysis::valid)
      .def_readonly("regular", &GaugeAnalysis::regular)
      .def_readonly("growth", &GaugeAnalysis::growth)
      .def_readonly("growth_spread", &GaugeAnalysis::growth_spread)
      .def_readonly("regularity_defect", &GaugeAnalysis::regularity_defect)
      .def_readonly("gamma", &GaugeAnalysis::gamma)
      .def_readonly("gamma_converged", &GaugeAnalysis::gamma_converged)
      .def_readonly("rho", &GaugeAnalysis::rho)
      .def_readonly("rho_converged", &GaugeAnalysis::rho_converged)
      .def_readonly("root_growth", &GaugeAnalysis::root_growth)
      .def_readonly("root_gap_warning", &GaugeAnalysis::root_gap_warning)
      .def_readonly("horizon", &GaugeAnalysis::horizon);

  py::class_<DominationReport>(m, "DominationReport")
      .def_readonly("dominated", &DominationReport::dominated)
      .def_readonly("strict", &DominationReport::strict)
      .def_readonly("max_ratio", &DominationReport::max_ratio)
      .def_readonly("tail_head_ratio", &DominationReport::tail_head_ratio)
      .def_readonly("worst_n", &DominationReport::worst_n);

  py::class_<QPrimeResult>(m, "QPrimeResult")
      .def_readonly("value", &QPrimeResult::value)
      .def_readonly("witness", &QPrimeResult::witness)
      .def_readonly("subsets_tried", &QPrimeResult::subsets_tried);

  m.def("almost_limit", &almost_limit, py::arg("u"), py::arg("tol") = 1e-6);
  m.def("strong_almost_limit", &strong_almost_limit, py::arg("u"),
        py::arg("tol") = 1e-6);
  m.def("analyze_gauge", &analyze_gauge, py::arg("p"),
        py::arg("horizon") = 4096, py::arg("tol") = 1e-2);
  m.def("q_prime", &q_prime, py::arg("u"), py::arg("subset_budget") = 200);
  m.def("q_tilde", &q_tilde, py::arg("u"), py::arg("shape"),
        py::arg("subset_budget") = 200);

  //--------------------------------------------------------------------------
  // Superoperators and the trace adjoint
  //--------------------------------------------------------------------------

  py::class_<SuperOperator>(m, "SuperOperator")
      .def(py::init([](const Algebra& a, Matrix action) {
             return SuperOperator(a.p, std::move(action));
           }),
           py::arg("algebra"), py::arg("action"))
      .def_static("identity_map",
                  [](const Algebra& a) {
                    return SuperOperator::identity_map(a.p);
                  })
      .def_static("sandwich", &SuperOperator::sandwich, py::arg("a"),
                  py::arg("b"))
      .def_static("conjugation", &SuperOperator::conjugation, py::arg("a"))
      .def_static(
          "from_function",
          [](const Algebra& a,
             const std::function<AlgebraElement(const AlgebraElement&)>& fn) {
            return SuperOperator::from_function(a.p, fn);
          },
          py::arg("algebra"), py::arg("fn"))
      .def_property_readonly(
          "algebra", [](const SuperOperator& s) { return Algebra{s.algebra()}; })
      .def_property_readonly(
          "action", [](const SuperOperator& s) -> Matrix { return s.action(); })
      .def("__call__", &SuperOperator::apply)
      .def("compose", &SuperOperator::compose)
      .def("l2_extension_norm", &SuperOperator::l2_extension_norm);

  py::class_<CpCertificate>(m, "CpCertificate")
      .def_readonly("cp", &CpCertificate::cp)
      .def_readonly("min_eig", &CpCertificate::min_eig)
      .def_readonly("herm_defect", &CpCertificate::herm_defect)
      .def_readonly("block_min_eigs", &CpCertificate::block_min_eigs);

  py::enum_<PositivityVerdict>(m, "PositivityVerdict")
      .value("positive", PositivityVerdict::positive)
      .value("violated", PositivityVerdict::violated)
      .value("inconclusive", PositivityVerdict::inconclusive);

  py::class_<PositivityReport>(m, "PositivityReport")
      .def_readonly("verdict", &PositivityReport::verdict)
      .def_readonly("choi_min_eig", &PositivityReport::choi_min_eig)
      .def_readonly("witness", &PositivityReport::witness)
      .def_readonly("witness_output_min_eig",
                    &PositivityReport::witness_output_min_eig)
      .def_readonly("note", &PositivityReport::note);

  m.def("tau_adjoint", &tau_adjoint);
  m.def("cp_certificate", &cp_certificate, py::arg("phi"),
        py::arg("tol") = tol::algebraic);
  m.def("positivity_check", &positivity_check, py::arg("phi"),
        py::arg("level") = 1, py::arg("tol") = tol::algebraic,
        py::arg("seed") = 0xc0ffee);
  m.def("hermiticity_preservation_defect", &hermiticity_preservation_defect);
  m.def("is_unital", &is_unital, py::arg("phi"),
        py::arg("tol") = tol::algebraic);
  m.def("is_trace_preserving", &is_trace_preserving, py::arg("phi"),
        py::arg("tol") = tol::algebraic);
  m.def("amplify", &amplify, py::arg("phi"), py::arg("n"));
  m.def("positive_map_norm", &positive_map_norm, py::arg("phi"),
        py::arg("tol") = tol::algebraic);

  //--------------------------------------------------------------------------
  // Orbit limits and the similarity pipeline
  //--------------------------------------------------------------------------

  py::class_<LimitOptions>(m, "LimitOptions")
      .def(py::init<>())
      .def_readwrite("horizon", &LimitOptions::horizon)
      .def_readwrite("tol", &LimitOptions::tol)
      .def_readwrite("gauge_tol", &LimitOptions::gauge_tol)
      .def_readwrite("compat_tol", &LimitOptions::compat_tol)
      .def_readwrite("allow_nonregular", &LimitOptions::allow_nonregular)
      .def_readwrite("strict_domination", &LimitOptions::strict_domination)
      .def_readwrite("probes", &LimitOptions::probes)
      .def_readwrite("seed", &LimitOptions::seed);

  py::class_<ProjectionStats>(m, "ProjectionStats")
      .def_readonly("residual_idempotent", &ProjectionStats::residual_idempotent)
      .def_readonly("residual_intertwine", &ProjectionStats::residual_intertwine)
      .def_readonly("trace_defect", &ProjectionStats::trace_defect)
      .def_readonly("rank", &ProjectionStats::rank)
      .def_readonly("eig_count", &ProjectionStats::eig_count)
      .def_readonly("iterations", &ProjectionStats::iterations)
      .def_readonly("used_eigen_path", &ProjectionStats::used_eigen_path)
      .def_readonly("final_delta", &ProjectionStats::final_delta);

  py::class_<WindowCertificate>(m, "WindowCertificate")
      .def_readonly("defect", &WindowCertificate::defect)
      .def_readonly("trend", &WindowCertificate::trend)
      .def_readonly("window", &WindowCertificate::window)
      .def_readonly("certified", &WindowCertificate::certified);

  py::class_<OrbitLimit>(m, "OrbitLimit")
      .def_readonly("value", &OrbitLimit::value)
      .def_readonly("growth", &OrbitLimit::growth)
      .def_readonly("rho", &OrbitLimit::rho)
      .def_readonly("gauge", &OrbitLimit::gauge)
      .def_readonly("domination", &OrbitLimit::domination)
      .def_readonly("compat_value", &OrbitLimit::compat_value)
      .def_readonly("compat_via_qprime", &OrbitLimit::compat_via_qprime)
      .def_readonly("projection", &OrbitLimit::projection)
      .def_readonly("window", &OrbitLimit::window)
      .def_readonly("diagnostics_only", &OrbitLimit::diagnostics_only);

  py::class_<LawReport>(m, "LawReport")
      .def_readonly("name", &LawReport::name)
      .def_readonly("defect", &LawReport::defect)
      .def_readonly("passed", &LawReport::pass);

  py::class_<SemigroupLimitResult>(m, "SemigroupLimitResult")
      .def_readonly("limit", &SemigroupLimitResult::limit)
      .def_readonly("commutation_defect",
                    &SemigroupLimitResult::commutation_defect)
      .def_readonly("idempotent_residual",
                    &SemigroupLimitResult::idempotent_residual)
      .def_readonly("absorption_defect",
                    &SemigroupLimitResult::absorption_defect)
      .def_readonly("cp", &SemigroupLimitResult::cp)
      .def_readonly("iterations", &SemigroupLimitResult::iterations);

  py::class_<SimilarityReport>(m, "SimilarityReport")
      .def_readonly("success", &SimilarityReport::success)
      .def_property_readonly(
          "code", [](const SimilarityReport& r) { return errc_name(r.code); })
      .def_readonly("message", &SimilarityReport::message)
      .def_readonly("growths", &SimilarityReport::growths)
      .def_readonly("limits", &SimilarityReport::limits)
      .def_readonly("joint", &SimilarityReport::joint)
      .def_readonly("fixed_identity", &SimilarityReport::fixed_identity)
      .def_readonly("similarity_root", &SimilarityReport::similarity_root)
      .def_readonly("unitaries", &SimilarityReport::unitaries)
      .def_readonly("max_unitarity_defect",
                    &SimilarityReport::max_unitarity_defect)
      .def_readonly("max_commutation_defect",
                    &SimilarityReport::max_commutation_defect)
      .def_readonly("r_spectrum", &SimilarityReport::r_spectrum)
      .def_readonly("r_min", &SimilarityReport::r_min)
      .def_readonly("nullspace_witness", &SimilarityReport::nullspace_witness);

  py::class_<AsymptoticControlReport>(m, "AsymptoticControlReport")
      .def_readonly("gauge", &AsymptoticControlReport::gauge)
      .def_readonly("strict_domination",
                    &AsymptoticControlReport::strict_domination)
      .def_readonly("bounded_domination",
                    &AsymptoticControlReport::bounded_domination)
      .def_readonly("ratio_almost", &AsymptoticControlReport::ratio_almost)
      .def_readonly("ratio_qprime", &AsymptoticControlReport::ratio_qprime)
      .def_readonly("compatible", &AsymptoticControlReport::compatible)
      .def_readonly("gamma", &AsymptoticControlReport::gamma)
      .def_readonly("rho", &AsymptoticControlReport::rho);

  m.def(
      "fixed_space_projection",
      [](const Matrix& s, double fix_window) {
        return fixed_space_projection(s, nullptr, fix_window);
      },
      py::arg("s"), py::arg("fix_window") = 1e-6);
  m.def("log_orbit_norms", &log_orbit_norms, py::arg("t"), py::arg("horizon"));
  m.def("orbit_limit", &orbit_limit, py::arg("t"), py::arg("gauge"),
        py::arg("options") = LimitOptions{});
  m.def("power_sequence_limit", &power_sequence_limit, py::arg("psi"),
        py::arg("gauge"), py::arg("options") = LimitOptions{});
  m.def("verify_orbit_laws", &verify_orbit_laws, py::arg("t"), py::arg("limit"),
        py::arg("tol") = 1e-7, py::arg("seed") = 0xc0ffee,
        py::arg("probes") = 5);
  m.def("hat_transport_defect", &hat_transport_defect);
  m.def("semigroup_limit", &semigroup_limit, py::arg("family"),
        py::arg("tol") = 1e-9);
  m.def("similarity", &similarity, py::arg("family"), py::arg("gauges"),
        py::arg("options") = LimitOptions{});
  m.def("similarity_auto", &similarity_auto, py::arg("family"),
        py::arg("options") = LimitOptions{});
  m.def("asymptotic_control_report", &asymptotic_control_report, py::arg("t"),
        py::arg("gauge"), py::arg("options") = LimitOptions{});
}
