#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "aperiodic/bde.hpp"
#include "aperiodic/cutproject.hpp"
#include "aperiodic/discrepancy.hpp"
#include "aperiodic/fractal.hpp"
#include "aperiodic/registry.hpp"
#include "aperiodic/substitution.hpp"
#include "cli.hpp"
#include "scheme_file.hpp"

namespace py = pybind11;
using namespace aperiodic;

namespace {

py::list int_matrix(const IntMatrix& m) {
    py::list rows;
    for (const auto& r : m) {
        py::list row;
        for (const auto& x : r) {
            row.append(py::int_(py::str(x.get_str())));
        }
        rows.append(row);
    }
    return rows;
}

PerronData perron_of(const Example& ex) { return example_perron(ex); }

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Substitution sequences, cut-and-project sets, discrepancy, bounded displacement and fractal windows";

    static py::exception<Error> base(m, "AperiodicError");
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<UnknownExample>(m, "UnknownExample", base.ptr());
    py::register_exception<NotPisot>(m, "NotPisot", base.ptr());
    py::register_exception<NotPrimitive>(m, "NotPrimitive", base.ptr());
    py::register_exception<NoMatching>(m, "NoMatching", base.ptr());
    py::register_exception<NotAPartition>(m, "NotAPartition", base.ptr());
    py::register_exception<CapacityExceeded>(m, "CapacityExceeded", base.ptr());
    py::register_exception<NotContractive>(m, "NotContractive", base.ptr());
    py::register_exception<DegenerateFit>(m, "DegenerateFit", base.ptr());
    py::register_exception<UnsupportedFormat>(m, "UnsupportedFormat", base.ptr());
    py::register_exception<EmptyRange>(m, "EmptyRange", base.ptr());

    py::class_<RealValue>(m, "Real")
        .def(py::init([](const std::string& s) { return parse_real(s); }), py::arg("expression"))
        .def(py::init([](long n) { return RealValue::integer(n); }))
        .def("is_exact", &RealValue::is_exact)
        .def("__float__", &RealValue::to_double)
        .def("__str__", [](const RealValue& v) { return format_symbolic(v); })
        .def("__repr__", [](const RealValue& v) { return "Real('" + format_symbolic(v) + "')"; })
        .def("__eq__", [](const RealValue& a, const RealValue& b) { return exact_compare(a, b) == 0; })
        .def("__lt__", [](const RealValue& a, const RealValue& b) { return exact_compare(a, b) < 0; })
        .def("__add__", [](const RealValue& a, const RealValue& b) { return a + b; })
        .def("__sub__", [](const RealValue& a, const RealValue& b) { return a - b; })
        .def("__mul__", [](const RealValue& a, const RealValue& b) { return a * b; })
        .def("__truediv__", [](const RealValue& a, const RealValue& b) { return a / b; });
    py::implicitly_convertible<std::string, RealValue>();
    py::implicitly_convertible<long, RealValue>();

    py::class_<Substitution>(m, "Substitution")
        .def(py::init([](const std::string& rules) { return parse_substitution(rules); }), py::arg("rules"))
        .def_property_readonly("alphabet",
                               [](const Substitution& s) { return std::string(s.alphabet().begin(), s.alphabet().end()); })
        .def("matrix", [](const Substitution& s) { return int_matrix(substitution_matrix(s)); })
        .def("expand", [](const Substitution& s, char letter, unsigned level) {
            const int i = s.index_of(letter);
            if (i < 0) {
                throw py::value_error(std::string("unknown letter '") + letter + "'");
            }
            return expand_supertile(s, i, level);
        })
        .def("__str__", &format_substitution)
        .def("__repr__", [](const Substitution& s) { return "Substitution('" + format_substitution(s) + "')"; })
        .def("__eq__", [](const Substitution& a, const Substitution& b) { return a == b; });

    py::class_<PerronData>(m, "PerronData")
        .def_readonly("lambda_", &PerronData::lambda)
        .def_readonly("tile_lengths", &PerronData::left_eigvec)
        .def_readonly("frequencies", &PerronData::right_eigvec_normalized)
        .def_readonly("conjugates", &PerronData::conjugates)
        .def_readonly("c_sigma", &PerronData::c_sigma)
        .def_readonly("is_pisot", &PerronData::is_pisot)
        .def_readonly("is_primitive", &PerronData::is_primitive)
        .def_readonly("diagonalizable_power", &PerronData::diagonalizable_power)
        .def_readonly("mean_spacing", &PerronData::mean_spacing)
        .def_readonly("density", &PerronData::density);

    py::class_<PointSet>(m, "PointSet")
        .def_property_readonly("values", &PointSet::values)
        .def_property_readonly("anchor_index", &PointSet::anchor_index)
        .def_property_readonly("density_hint", &PointSet::density_hint)
        .def("slice", &PointSet::slice)
        .def("__len__", &PointSet::size)
        .def("__getitem__", [](const PointSet& p, std::size_t i) {
            if (i >= p.size()) {
                throw py::index_error();
            }
            return p[i];
        });

    py::class_<CutProjectScheme>(m, "CutProjectScheme")
        .def_property_readonly("dim_internal", &CutProjectScheme::dim_internal)
        .def_property_readonly("basis", &CutProjectScheme::basis)
        .def("determinant", &CutProjectScheme::determinant);

    py::class_<Example>(m, "Example")
        .def_readonly("name", &Example::name)
        .def_readonly("description", &Example::description)
        .def_readonly("substitution", &Example::substitution)
        .def_readonly("scheme", &Example::scheme);

    py::class_<DeviationReport>(m, "DeviationReport")
        .def_readonly("a", &DeviationReport::a)
        .def_readonly("max_dev", &DeviationReport::max_dev)
        .def_readonly("dev_series", &DeviationReport::dev_series)
        .def_property_readonly("verdict", [](const DeviationReport& r) { return to_string(r.verdict); })
        .def_readonly("growth_ratio", &DeviationReport::growth_ratio)
        .def_readonly("count", &DeviationReport::count)
        .def("summary_json", [](const DeviationReport& r) { return summary_json(r); });

    py::class_<LaczkovichReport>(m, "LaczkovichReport")
        .def_readonly("C_estimate", &LaczkovichReport::C_estimate)
        .def_readonly("C_half", &LaczkovichReport::C_half)
        .def_property_readonly("verdict", [](const LaczkovichReport& r) { return to_string(r.verdict); })
        .def_readonly("trials", &LaczkovichReport::trials)
        .def_readonly("seed", &LaczkovichReport::seed);

    py::class_<MatchingCertificate>(m, "MatchingCertificate")
        .def_readonly("radius", &MatchingCertificate::radius)
        .def_readonly("pairs", &MatchingCertificate::pairs)
        .def_readonly("unmatched_boundary", &MatchingCertificate::unmatched_boundary)
        .def("summary_json", [](const MatchingCertificate& c) { return summary_json(c); });

    py::class_<DiscrepancyProfile>(m, "DiscrepancyProfile")
        .def_readonly("horizons", &DiscrepancyProfile::horizons)
        .def_readonly("max_abs_D", &DiscrepancyProfile::max_abs_D)
        .def_property_readonly("verdict", [](const DiscrepancyProfile& p) { return to_string(p.verdict); })
        .def_readonly("growth_ratio", &DiscrepancyProfile::growth_ratio)
        .def_readonly("exact_orbit", &DiscrepancyProfile::exact_orbit);

    py::class_<KestenCertificate>(m, "KestenCertificate")
        .def_readonly("holds", &KestenCertificate::holds)
        .def_readonly("witness", &KestenCertificate::witness)
        .def_readonly("search_bound", &KestenCertificate::search_bound)
        .def_readonly("reason", &KestenCertificate::reason);

    py::class_<BoxCloud>(m, "BoxCloud")
        .def_property_readonly("dim", &BoxCloud::dim)
        .def_property_readonly("h", &BoxCloud::h)
        .def_property_readonly("cells", &BoxCloud::cells)
        .def("bounds", &BoxCloud::bounds)
        .def("__len__", &BoxCloud::size);

    py::class_<AttractorApprox>(m, "AttractorApprox")
        .def_readonly("iteration_count", &AttractorApprox::iteration_count)
        .def_readonly("hausdorff_gap", &AttractorApprox::hausdorff_gap)
        .def_readonly("gap_history", &AttractorApprox::gap_history)
        .def_readonly("measure_history", &AttractorApprox::measure_history)
        .def_readonly("exact_endpoints", &AttractorApprox::exact_endpoints)
        .def("total_measure", &AttractorApprox::total_measure);

    py::class_<DimensionEstimate>(m, "DimensionEstimate")
        .def_readonly("estimate", &DimensionEstimate::estimate)
        .def_readonly("r2", &DimensionEstimate::r2)
        .def_readonly("scales", &DimensionEstimate::scales)
        .def_readonly("counts", &DimensionEstimate::counts);

    m.def("examples", &example_names);
    m.def("example", &get_example, py::arg("name"));
    m.def("golden_ratio", &golden_ratio);
    m.def("fibonacci_scheme", &fibonacci_scheme);
    m.def("parse_scheme", &parse_scheme_file, py::arg("text"));

    m.def("classify", &classify, py::arg("substitution"), py::arg("tol") = kDefaultTol);
    m.def("classify", &perron_of, py::arg("example"));
    m.def(
        "generate_point_set",
        [](const Substitution& s, std::size_t n) { return generate_point_set(s, n); }, py::arg("substitution"),
        py::arg("count_each_side"));
    m.def(
        "generate_point_set",
        [](const Example& ex, std::size_t n) {
            if (!ex.substitution) {
                throw py::value_error("example '" + ex.name + "' has no substitution");
            }
            return generate_point_set(*ex.substitution, example_perron(ex), fixed_point_seed(*ex.substitution), n);
        },
        py::arg("example"), py::arg("count_each_side"));
    m.def("cps_points", &cps_points, py::arg("scheme"), py::arg("lo"), py::arg("hi"));
    m.def("cps_density", &cps_density, py::arg("scheme"));
    m.def("lattice_points", &PointSet::lattice, py::arg("a"), py::arg("lo"), py::arg("hi"));

    m.def("kesten_test", &kesten_test, py::arg("a"), py::arg("b"), py::arg("alpha"), py::arg("search_bound") = 1000);
    m.def(
        "discrepancy_profile",
        [](const RealValue& alpha, const RealValue& a, const RealValue& b, int K) {
            RotationSystem sys{{alpha}, IntervalUnion({{a, b}}), default_start_points(1)};
            sys.validate();
            return discrepancy_profile(sys, K);
        },
        py::arg("alpha"), py::arg("a"), py::arg("b"), py::arg("K"));
    m.def(
        "brs_verdict_for_cps", [](const CutProjectScheme& s, int K) { return brs_verdict_for_cps(s, K); },
        py::arg("scheme"), py::arg("K"));

    m.def(
        "lattice_deviation", [](const PointSet& p, const RealValue& a) { return lattice_deviation(p, a); },
        py::arg("points"), py::arg("a"));
    m.def(
        "laczkovich_interval_check",
        [](const PointSet& p, const RealValue& a, int trials, std::uint64_t seed) {
            return laczkovich_interval_check(p, a, trials, seed);
        },
        py::arg("points"), py::arg("a"), py::arg("trials"), py::arg("seed") = 0x1ac2024);
    m.def(
        "bottleneck_matching",
        [](const PointSet& A, const PointSet& B, double radius) { return bottleneck_matching(A, B, radius); },
        py::arg("A"), py::arg("B"), py::arg("radius"));
    m.def(
        "minimal_matching_radius",
        [](const PointSet& A, const PointSet& B, double resolution) {
            return minimal_matching_radius(A, B, resolution).radius;
        },
        py::arg("A"), py::arg("B"), py::arg("resolution") = 1e-6);

    m.def(
        "substitution_ifs_attractor",
        [](const Example& ex, int iterations, double resolution) {
            if (!ex.substitution) {
                throw py::value_error("example '" + ex.name + "' has no substitution");
            }
            CoupledIFS ifs = substitution_ifs(*ex.substitution, example_perron(ex));
            IfsOptions o;
            o.merge_resolution = resolution;
            return ifs_attractor(ifs, iterations, ifs_hull_seed(ifs), o);
        },
        py::arg("example"), py::arg("iterations"), py::arg("resolution") = 1e-7);
    m.def(
        "rauzy_window_cloud",
        [](const Substitution& s, std::size_t n, std::optional<double> h) { return rauzy_window_cloud(s, n, h); },
        py::arg("substitution"), py::arg("prefix_count"), py::arg("h") = py::none());
    m.def(
        "box_dimension",
        [](const BoxCloud& c, bool boundary_only, std::optional<std::vector<double>> scales) {
            return box_dimension(c, boundary_only, scales ? *scales : default_box_scales(c));
        },
        py::arg("cloud"), py::arg("boundary_only") = false, py::arg("scales") = py::none());
    m.def(
        "render",
        [](const BoxCloud& c, const std::string& format, int pixels) {
            return py::bytes(render(c, parse_image_format(format), pixels));
        },
        py::arg("cloud"), py::arg("format"), py::arg("pixels") = 512);
    m.def(
        "render",
        [](const CutProjectScheme& s, const std::string& format, int pixels) {
            return py::bytes(render(s.window(), parse_image_format(format), pixels));
        },
        py::arg("scheme"), py::arg("format"), py::arg("pixels") = 512);

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = cli::run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
