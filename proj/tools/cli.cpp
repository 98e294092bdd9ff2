#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "aperiodic/bde.hpp"
#include "aperiodic/cutproject.hpp"
#include "aperiodic/discrepancy.hpp"
#include "aperiodic/fractal.hpp"
#include "aperiodic/registry.hpp"
#include "aperiodic/substitution.hpp"
#include "scheme_file.hpp"

namespace aperiodic::cli {

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Globals {
    double range = 1000;
    std::size_t count = 10000;
    int levels = 20;
    std::string out;
    std::uint64_t seed = 0x1ac2024;
    double tol = kDefaultTol;
};

std::string show(const RealValue& v) {
    if (!v.is_exact()) {
        // Enough digits to read the double back unchanged.
        char buf[40];
        std::snprintf(buf, sizeof buf, "~%.17g", v.to_double());
        return buf;
    }
    return format_symbolic(v) + " [" + format_decimal(v.to_double()) + "]";
}

std::string show_list(const std::vector<RealValue>& vs) {
    std::string s;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        s += (i ? ", " : "") + show(vs[i]);
    }
    return s;
}

std::string show_poly(const Polynomial& p) {
    std::string s;
    for (std::size_t k = p.size(); k-- > 0;) {
        const Rational& c = p[k];
        if (c == 0) {
            continue;
        }
        Rational a = abs(c);
        std::string mono = k == 0 ? "" : (k == 1 ? "x" : "x^" + std::to_string(k));
        std::string coef = (a == 1 && k > 0) ? "" : a.get_str() + (k > 0 ? "*" : "");
        if (s.empty()) {
            s = (c < 0 ? "-" : "") + coef + mono;
        } else {
            s += (c < 0 ? " - " : " + ") + coef + mono;
        }
    }
    return s.empty() ? "0" : s;
}

std::string show_complex(std::complex<double> z) {
    if (std::abs(z.imag()) < 1e-12) {
        return format_decimal(z.real());
    }
    return format_decimal(z.real()) + (z.imag() < 0 ? "-" : "+") + format_decimal(std::abs(z.imag())) + "i";
}

void header(std::ostream& os, const std::string& cmd, const Globals& g) {
    os << "# aperiodic " << cmd << " seed=" << g.seed << "\n";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw UsageError("cannot read '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class OutFile {
public:
    explicit OutFile(const std::string& path) : path_(path), os_(path, std::ios::binary) {
        if (!os_) {
            throw Error("cannot write '" + path + "'");
        }
    }
    std::ostream& stream() { return os_; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ofstream os_;
};

// @example, lattice:<a>, a rules or scheme file, or literal rules text.
struct Source {
    std::string label;
    std::optional<Substitution> subst;
    std::optional<CutProjectScheme> scheme;
    std::optional<RealValue> first_tile_length;
    std::optional<RealValue> lattice;
};

Source load_source(const std::string& spec) {
    Source s;
    s.label = spec;
    if (!spec.empty() && spec[0] == '@') {
        Example ex = get_example(spec.substr(1));
        s.subst = ex.substitution;
        s.scheme = ex.scheme;
        s.first_tile_length = ex.first_tile_length;
        return s;
    }
    if (spec.rfind("lattice:", 0) == 0) {
        s.lattice = parse_real(spec.substr(8));
        if (s.lattice->to_double() <= 0) {
            throw UsageError("lattice spacing must be positive");
        }
        return s;
    }
    std::string text = spec;
    std::error_code ec;
    if (std::filesystem::is_regular_file(spec, ec)) {
        text = read_file(spec);
    } else if (spec.find("->") == std::string::npos) {
        throw UsageError("'" + spec + "' is not an example, a file or substitution rules");
    }
    if (text.find("->") != std::string::npos) {
        s.subst = parse_substitution(text);
    } else {
        s.scheme = parse_scheme_file(text);
    }
    return s;
}

const Substitution& need_subst(const Source& s) {
    if (!s.subst) {
        throw UsageError("'" + s.label + "' has no substitution");
    }
    return *s.subst;
}

const CutProjectScheme& need_scheme(const Source& s) {
    if (!s.scheme) {
        throw UsageError("'" + s.label + "' has no cut-and-project scheme");
    }
    return *s.scheme;
}

PerronData perron(const Source& s, const Globals& g) {
    PerronData pd = classify(need_subst(s), g.tol);
    if (s.first_tile_length) {
        pd = with_first_tile_length(pd, *s.first_tile_length);
    }
    return pd;
}

// Points of the source in [-range, range).
PointSet points_in_range(const Source& s, const Globals& g, bool prefer_cps, RealValue* spacing = nullptr) {
    const double R = g.range;
    if (!(R > 0)) {
        throw UsageError("--range must be positive");
    }
    if (s.lattice) {
        if (spacing) {
            *spacing = *s.lattice;
        }
        return PointSet::lattice(*s.lattice, -R, R);
    }
    if (s.subst && !(prefer_cps && s.scheme)) {
        const Substitution& sub = *s.subst;
        PerronData pd = perron(s, g);
        if (!pd.is_primitive) {
            throw NotPrimitive("point sets need a primitive substitution");
        }
        if (spacing) {
            *spacing = pd.mean_spacing;
        }
        double min_len = pd.left_eigvec[0].to_double();
        for (const auto& l : pd.left_eigvec) {
            min_len = std::min(min_len, l.to_double());
        }
        const auto n = static_cast<std::size_t>(std::ceil(R / min_len)) + 1;
        return generate_point_set(sub, pd, fixed_point_seed(sub), n).slice(-R, R);
    }
    const CutProjectScheme& sc = need_scheme(s);
    if (spacing) {
        *spacing = RealValue(Rational(1)) / cps_density(sc);
    }
    return cps_points(sc, -R, R);
}

void write_points_csv(std::ostream& os, const PointSet& p) {
    os << "index,x\n";
    char buf[64];
    for (std::size_t i = 0; i < p.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.15g", p[i]);
        os << p.index_of(i) << "," << buf << "\n";
    }
}

// CSV artifact: to --out when given, else after the report on stdout.
template <class F>
void emit_csv(std::ostream& out, const Globals& g, F&& write) {
    if (g.out.empty()) {
        write(out);
        return;
    }
    OutFile f(g.out);
    write(f.stream());
    out << "wrote = " << f.path() << "\n";
}

ImageFormat image_format(const std::string& path, const std::string& format) {
    if (!format.empty()) {
        return parse_image_format(format);
    }
    const std::string ext = std::filesystem::path(path).extension().string();
    return parse_image_format(ext.empty() ? ext : ext.substr(1));
}

void write_image(std::ostream& out, const Globals& g, const Window& w, const std::string& format, int pixels) {
    if (g.out.empty()) {
        throw UsageError("an image needs --out FILE");
    }
    const ImageFormat f = image_format(g.out, format);
    std::string img = render(w, f, pixels);
    OutFile file(g.out);
    file.stream() << img;
    out << "wrote = " << file.path() << "\n";
}

void print_deviation(std::ostream& out, const DeviationReport& r) {
    out << "a = " << show(r.a) << "\n";
    out << "points = " << r.count << "\n";
    out << "max_dev = " << format_decimal(r.max_dev) << "\n";
    out << "growth_ratio = " << format_decimal(r.growth_ratio) << "\n";
    out << "verdict = " << to_string(r.verdict) << "\n";
    out << r.policy.describe() << "\n";
}

// --- subcommands ---

int cmd_subst_analyze(std::ostream& out, const Globals& g, const std::string& src) {
    Source s = load_source(src);
    const Substitution& sub = need_subst(s);
    PerronData pd = perron(s, g);
    header(out, "subst analyze", g);
    out << "source = " << s.label << "\n";
    out << "rules = " << format_substitution(sub) << "\n";
    out << "matrix = " << format_matrix(substitution_matrix(sub)) << "\n";
    out << "char_poly = " << show_poly(pd.char_poly) << "\n";
    out << "lambda = " << show(pd.lambda) << "\n";
    std::string conj;
    for (std::size_t i = 0; i < pd.conjugates.size(); ++i) {
        conj += (i ? ", " : "") + show_complex(pd.conjugates[i]);
    }
    out << "conjugates = " << conj << "\n";
    out << "tile_lengths = " << show_list(pd.left_eigvec) << "\n";
    out << "frequencies = " << show_list(pd.right_eigvec_normalized) << "\n";
    out << "mean_spacing = " << show(pd.mean_spacing) << "\n";
    out << "density = " << show(pd.density) << "\n";
    out << "primitive = " << (pd.is_primitive ? "true" : "false") << "\n";
    out << "pisot = " << (pd.is_pisot ? "true" : "false") << "\n";
    out << "diagonalizable_power = " << (pd.diagonalizable_power ? std::to_string(*pd.diagonalizable_power) : "none")
        << "\n";
    out << "c_sigma = " << format_decimal(pd.c_sigma) << "\n";
    return 0;
}

int cmd_subst_points(std::ostream& out, const Globals& g, const std::string& src) {
    Source s = load_source(src);
    const Substitution& sub = need_subst(s);
    PerronData pd = perron(s, g);
    PointSet p = generate_point_set(sub, pd, fixed_point_seed(sub), g.count);
    header(out, "subst points", g);
    out << "source = " << s.label << "\n";
    out << "points = " << p.size() << "\n";
    emit_csv(out, g, [&](std::ostream& os) { write_points_csv(os, p); });
    return 0;
}

int cmd_cps_points(std::ostream& out, const Globals& g, const std::string& src) {
    Source s = load_source(src);
    PointSet p = points_in_range(s, g, true);
    header(out, "cps points", g);
    out << "source = " << s.label << "\n";
    out << "range = [" << format_decimal(-g.range) << ", " << format_decimal(g.range) << ")\n";
    out << "points = " << p.size() << "\n";
    emit_csv(out, g, [&](std::ostream& os) { write_points_csv(os, p); });
    return 0;
}

int cmd_cps_density(std::ostream& out, const Globals& g, const std::string& src) {
    Source s = load_source(src);
    const CutProjectScheme& sc = need_scheme(s);
    header(out, "cps density", g);
    out << "source = " << s.label << "\n";
    out << "determinant = " << show(sc.determinant()) << "\n";
    out << "window_measure = " << show(window_measure(sc.window())) << "\n";
    out << "density = " << show(cps_density(sc)) << "\n";
    return 0;
}

int cmd_brs_profile(std::ostream& out, const Globals& g, const std::string& src) {
    Source s = load_source(src);
    DiscrepancyProfile p = brs_verdict_for_cps(need_scheme(s), g.levels);
    header(out, "brs profile", g);
    out << "source = " << s.label << "\n";
    out << "levels = " << g.levels << "\n";
    out << "exact_orbit = " << (p.exact_orbit ? "true" : "false") << "\n";
    out << "max_abs_D = " << format_decimal(p.max_abs_D.empty() ? 0.0 : p.max_abs_D.back()) << "\n";
    out << "growth_ratio = " << format_decimal(p.growth_ratio) << "\n";
    out << "verdict = " << to_string(p.verdict) << "\n";
    out << p.policy.describe() << "\n";
    emit_csv(out, g, [&](std::ostream& os) { write_profile_csv(os, p); });
    return 0;
}

int cmd_kesten(std::ostream& out, const Globals& g, const std::vector<std::string>& args, std::int64_t bound) {
    const RealValue a = parse_real(args.at(0)), b = parse_real(args.at(1)), alpha = parse_real(args.at(2));
    KestenCertificate k = kesten_test(a, b, alpha, bound);
    RotationSystem sys{{alpha}, IntervalUnion({{a, b}}), default_start_points(1)};
    sys.validate();
    DiscrepancyProfile p = discrepancy_profile(sys, g.levels);
    header(out, "kesten", g);
    out << "interval = [" << show(a) << ", " << show(b) << ")\n";
    out << "alpha = " << show(alpha) << "\n";
    out << "kesten = " << (k.holds ? "true" : "false") << "\n";
    if (k.witness) {
        out << "witness = b - a = " << k.witness->first << "*alpha + " << k.witness->second << "\n";
    }
    out << "search_bound = " << k.search_bound << "\n";
    out << "reason = " << k.reason << "\n";
    out << "levels = " << g.levels << "\n";
    out << "max_abs_D = " << format_decimal(p.max_abs_D.empty() ? 0.0 : p.max_abs_D.back()) << "\n";
    out << "verdict = " << to_string(p.verdict) << "\n";
    out << p.policy.describe() << "\n";
    out << "agree = " << ((k.holds == (p.verdict == Verdict::bounded)) ? "true" : "false") << "\n";
    if (!g.out.empty()) {
        emit_csv(out, g, [&](std::ostream& os) { write_profile_csv(os, p); });
    }
    return 0;
}

int cmd_bde_deviation(std::ostream& out, const Globals& g, const std::string& src, const std::string& against,
                      bool prefer_cps, int trials) {
    Source s = load_source(src);
    RealValue spacing;
    PointSet p = points_in_range(s, g, prefer_cps, &spacing);
    const RealValue a = against.empty() ? spacing : parse_real(against);
    DeviationReport r = lattice_deviation(p, a);
    header(out, "bde deviation", g);
    out << "source = " << s.label << "\n";
    out << "range = [" << format_decimal(-g.range) << ", " << format_decimal(g.range) << ")\n";
    print_deviation(out, r);
    if (trials > 0) {
        LaczkovichReport l = laczkovich_interval_check(p, a, trials, g.seed);
        out << "interval_trials = " << l.trials << "\n";
        out << "interval_C = " << format_decimal(l.C_estimate) << "\n";
        out << "interval_C_half = " << format_decimal(l.C_half) << "\n";
        out << "interval_verdict = " << to_string(l.verdict) << "\n";
    }
    out << "summary = " << summary_json(r) << "\n";
    if (!g.out.empty()) {
        emit_csv(out, g, [&](std::ostream& os) { write_deviation_csv(os, r); });
    }
    return 0;
}

int cmd_bde_match(std::ostream& out, const Globals& g, const std::string& src_a, const std::string& src_b,
                  std::optional<double> radius, bool prefer_cps) {
    Source sa = load_source(src_a), sb = load_source(src_b);
    PointSet A = points_in_range(sa, g, prefer_cps), B = points_in_range(sb, g, prefer_cps);
    header(out, "bde match", g);
    out << "A = " << sa.label << " (" << A.size() << " points)\n";
    out << "B = " << sb.label << " (" << B.size() << " points)\n";
    MatchingCertificate c;
    try {
        if (radius) {
            c = bottleneck_matching(A, B, *radius);
        } else {
            RadiusSearch rs = minimal_matching_radius(A, B);
            out << "infeasible_below = " << format_decimal(rs.infeasible_below) << "\n";
            out << "probes = " << rs.probes << "\n";
            c = rs.certificate;
        }
    } catch (const NoMatching& e) {
        const HallWitness& w = e.witness();
        out << "matching = none\n";
        out << "hall_side = " << w.side << "\n";
        out << "hall_set = " << w.X.size() << "\n";
        out << "hall_neighbours = " << w.neighbours.size() << "\n";
        throw;
    }
    out << "matching = found\n";
    out << "radius = " << format_decimal(c.radius) << "\n";
    out << "pairs = " << c.pairs.size() << "\n";
    out << "unmatched_boundary = " << c.unmatched_boundary << "\n";
    out << "summary = " << summary_json(c) << "\n";
    if (!g.out.empty()) {
        emit_csv(out, g, [&](std::ostream& os) { write_matching_csv(os, A, B, c); });
    }
    return 0;
}

int cmd_bde_divide(std::ostream& out, const Globals& g, const std::string& src, int k, const std::string& against) {
    Source s = load_source(src);
    const CutProjectScheme& sc = need_scheme(s);
    if (k < 2) {
        throw UsageError("--parts must be at least 2");
    }
    RealValue spacing;
    PointSet all = points_in_range(s, g, true, &spacing);
    std::vector<PointSet> parts;
    for (const auto& part : split_scheme(sc, k)) {
        parts.push_back(cps_points(part, -g.range, g.range));
    }
    const RealValue a = against.empty() ? spacing : parse_real(against);
    DivideReport r = divide_experiment(all, parts, a);
    header(out, "bde divide", g);
    out << "source = " << s.label << "\n";
    out << "parts = " << r.n << "\n";
    for (std::size_t i = 0; i < r.parts.size(); ++i) {
        const auto& p = r.parts[i];
        out << "part " << i << ": count = " << p.count << ", predicted max_dev = " << format_decimal(p.predicted.max_dev)
            << " (" << to_string(p.predicted.verdict) << ")";
        if (p.own) {
            out << ", own max_dev = " << format_decimal(p.own->max_dev) << " (" << to_string(p.own->verdict) << ")";
        }
        out << "\n";
    }
    out << "summary = " << summary_json(r) << "\n";
    return 0;
}

struct WindowOpts {
    double resolution = 1e-7;
    bool integer = false;
    std::size_t set = 0;
    std::optional<double> box;
    std::string format;
    int pixels = 512;
    bool boundary = false;
    int scales = 5;
};

int cmd_window_ifs(std::ostream& out, const Globals& g, const std::string& src, const WindowOpts& w) {
    Source s = load_source(src);
    CoupledIFS ifs;
    if (w.integer) {
        if (!s.subst || !(*s.subst == parse_substitution("a -> aab; b -> ba"))) {
            throw UsageError("--integer-translations is defined for a -> aab, b -> ba only");
        }
        ifs = fibonacci_square_ifs_integer();
    } else {
        ifs = substitution_ifs(need_subst(s), perron(s, g));
    }
    IfsOptions o;
    o.merge_resolution = w.resolution;
    if (w.box) {
        o.box_h = *w.box;
    }
    AttractorApprox at = ifs_attractor(ifs, g.levels, ifs_hull_seed(ifs), o);
    header(out, "window ifs", g);
    out << "source = " << s.label << "\n";
    out << "sets = ";
    for (std::size_t i = 0; i < ifs.set_names.size(); ++i) {
        out << (i ? ", " : "") << ifs.set_names[i];
    }
    out << "\n";
    out << "max_ratio = " << format_decimal(ifs.max_ratio()) << "\n";
    out << "iterations = " << at.iteration_count << "\n";
    out << "exact_endpoints = " << (at.exact_endpoints ? "true" : "false") << "\n";
    out << "total_measure = " << format_decimal(at.total_measure()) << "\n";
    out << "hausdorff_gap = " << format_decimal(at.hausdorff_gap) << "\n";
    out << "iteration,measure,hausdorff_gap,gap_ratio\n";
    for (std::size_t k = 0; k < at.measure_history.size(); ++k) {
        out << k << "," << format_decimal(at.measure_history[k]);
        if (k == 0) {
            out << ",,\n";
            continue;
        }
        const double gap = at.gap_history[k - 1];
        out << "," << format_decimal(gap) << ",";
        if (k >= 2 && at.gap_history[k - 2] > 0) {
            out << format_decimal(gap / at.gap_history[k - 2]);
        }
        out << "\n";
    }
    if (!g.out.empty()) {
        if (w.set >= at.sets.size()) {
            throw UsageError("--set out of range");
        }
        write_image(out, g, at.sets[w.set], w.format, w.pixels);
    }
    return 0;
}

BoxCloud cloud_for(const Source& s, const Globals& g, const WindowOpts& w) {
    if (s.subst) {
        return rauzy_window_cloud(*s.subst, g.count, w.box);
    }
    return rasterize(need_scheme(s).window(), w.box.value_or(1e-3));
}

void print_cloud(std::ostream& out, const BoxCloud& c) {
    out << "box = " << format_decimal(c.h()) << "\n";
    out << "cells = " << c.size() << "\n";
    if (c.size() > 0) {
        auto b = c.bounds();
        out << "bounds = [" << format_decimal(b.first[0]) << ", " << format_decimal(b.second[0]) << "]";
        if (c.dim() == 2) {
            out << " x [" << format_decimal(b.first[1]) << ", " << format_decimal(b.second[1]) << "]";
        }
        out << "\n";
    }
}

int cmd_window_rauzy(std::ostream& out, const Globals& g, const std::string& src, const WindowOpts& w) {
    Source s = load_source(src);
    BoxCloud c = rauzy_window_cloud(need_subst(s), g.count, w.box);
    header(out, "window rauzy", g);
    out << "source = " << s.label << "\n";
    out << "prefixes = " << g.count << "\n";
    print_cloud(out, c);
    if (!g.out.empty()) {
        write_image(out, g, c, w.format, w.pixels);
    }
    return 0;
}

int cmd_window_render(std::ostream& out, const Globals& g, const std::string& src, const WindowOpts& w) {
    Source s = load_source(src);
    header(out, "window render", g);
    out << "source = " << s.label << "\n";
    if (s.scheme) {
        write_image(out, g, s.scheme->window(), w.format, w.pixels);
    } else {
        BoxCloud c = rauzy_window_cloud(need_subst(s), g.count, w.box);
        print_cloud(out, c);
        write_image(out, g, c, w.format, w.pixels);
    }
    return 0;
}

int cmd_window_dimension(std::ostream& out, const Globals& g, const std::string& src, const WindowOpts& w) {
    Source s = load_source(src);
    BoxCloud c = cloud_for(s, g, w);
    DimensionEstimate d = box_dimension(c, w.boundary, default_box_scales(c, w.scales));
    header(out, "window dimension", g);
    out << "source = " << s.label << "\n";
    print_cloud(out, c);
    out << "boundary_only = " << (w.boundary ? "true" : "false") << "\n";
    out << "dimension = " << format_decimal(d.estimate) << "\n";
    out << "r2 = " << format_decimal(d.r2) << "\n";
    out << "scale,count\n";
    for (std::size_t i = 0; i < d.scales.size(); ++i) {
        out << format_decimal(d.scales[i]) << "," << d.counts[i] << "\n";
    }
    return 0;
}

int cmd_examples_list(std::ostream& out) {
    for (const auto& name : example_names()) {
        out << name << "\t" << get_example(name).description << "\n";
    }
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Substitution tilings, cut-and-project sets, bounded remainder and bounded displacement tests"};
    app.name("aperiodic");
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--range", g.range, "Physical range [-R, R) for point sets");
    app.add_option("--count", g.count, "Points per side, or prefixes for window clouds");
    app.add_option("--levels", g.levels, "Dyadic levels K, or IFS iterations");
    app.add_option("--out", g.out, "Output file for CSV or image artifacts");
    app.add_option("--seed", g.seed, "Seed for randomised checks");
    app.add_option("--tol", g.tol, "Numerical tolerance for eigen data");

    std::string src, src_b, against, format;
    bool prefer_cps = false;
    int trials = 0, parts = 2;
    std::optional<double> radius;
    std::int64_t bound = 1000;
    std::vector<std::string> kesten_args;
    WindowOpts w;

    auto group = [&](const std::string& name, const std::string& desc) {
        CLI::App* s = app.add_subcommand(name, desc);
        s->require_subcommand(1);
        s->fallthrough();
        return s;
    };
    auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& desc) {
        CLI::App* s = parent->add_subcommand(name, desc);
        s->fallthrough();
        return s;
    };

    CLI::App* subst = group("subst", "Substitution analysis");
    CLI::App* analyze = leaf(subst, "analyze", "Matrix, eigenvalue, frequencies and flags");
    analyze->add_option("source", src, "rules, rules file or @example")->required();
    CLI::App* spoints = leaf(subst, "points", "Tile endpoints of the fixed point");
    spoints->add_option("source", src)->required();

    CLI::App* cps = group("cps", "Cut-and-project sets");
    CLI::App* cpoints = leaf(cps, "points", "Model set points in [-range, range)");
    cpoints->add_option("source", src, "scheme file or @example")->required();
    CLI::App* cdensity = leaf(cps, "density", "Exact density");
    cdensity->add_option("source", src)->required();

    CLI::App* brs = group("brs", "Bounded remainder sets");
    CLI::App* profile = leaf(brs, "profile", "Discrepancy profile of the associated rotation");
    profile->add_option("source", src)->required();

    CLI::App* kesten = app.add_subcommand("kesten", "Kesten criterion for [a, b) under rotation by alpha");
    kesten->fallthrough();
    kesten->add_option("args", kesten_args, "a b alpha")->expected(3)->required();
    kesten->add_option("--bound", bound, "Search bound for the witness");

    CLI::App* bde = group("bde", "Bounded displacement");
    CLI::App* deviation = leaf(bde, "deviation", "Deviation from a lattice");
    deviation->add_option("source", src)->required();
    deviation->add_option("--against", against, "Lattice spacing (default: mean spacing)");
    deviation->add_flag("--cps", prefer_cps, "Use the cut-and-project scheme of an example");
    deviation->add_option("--trials", trials, "Random interval trials");
    CLI::App* match = leaf(bde, "match", "Bottleneck matching between two point sets");
    match->add_option("A", src)->required();
    match->add_option("B", src_b, "second source, e.g. lattice:3/2")->required();
    match->add_option("--radius", radius, "Fixed radius (default: minimal radius search)");
    match->add_flag("--cps", prefer_cps);
    CLI::App* divide = leaf(bde, "divide", "Split a scheme into k^(1+d) sub-schemes");
    divide->add_option("source", src)->required();
    divide->add_option("--parts", parts, "Split modulus k");
    divide->add_option("--against", against);

    CLI::App* window = group("window", "Windows and fractal windows");
    CLI::App* ifs = leaf(window, "ifs", "Coupled IFS attractor of a two-letter Pisot substitution");
    ifs->add_option("source", src)->required();
    ifs->add_option("--resolution", w.resolution, "Gap merge resolution");
    ifs->add_flag("--integer-translations", w.integer);
    ifs->add_option("--set", w.set, "Set to render");
    CLI::App* rauzy = leaf(window, "rauzy", "Box cloud of projected prefixes");
    rauzy->add_option("source", src)->required();
    CLI::App* wrender = leaf(window, "render", "Render a window to SVG or PGM");
    wrender->add_option("source", src)->required();
    CLI::App* dimension = leaf(window, "dimension", "Box-counting dimension");
    dimension->add_option("source", src)->required();
    dimension->add_flag("--boundary", w.boundary, "Count boundary boxes only");
    dimension->add_option("--scales", w.scales, "Number of scales");
    for (CLI::App* s : {ifs, rauzy, wrender, dimension}) {
        s->add_option("--box", w.box, "Box size");
        s->add_option("--format", format, "svg or pgm (default: from --out)");
        s->add_option("--pixels", w.pixels, "Image size");
    }

    CLI::App* examples = group("examples", "Example registry");
    CLI::App* list = leaf(examples, "list", "Names of the built-in examples");

    std::vector<std::string> argv_store{"aperiodic"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "aperiodic: " << e.what() << "\n";
        err << "run 'aperiodic --help' for usage\n";
        return 2;
    }
    w.format = format;

    try {
        if (analyze->parsed()) {
            return cmd_subst_analyze(out, g, src);
        }
        if (spoints->parsed()) {
            return cmd_subst_points(out, g, src);
        }
        if (cpoints->parsed()) {
            return cmd_cps_points(out, g, src);
        }
        if (cdensity->parsed()) {
            return cmd_cps_density(out, g, src);
        }
        if (profile->parsed()) {
            return cmd_brs_profile(out, g, src);
        }
        if (kesten->parsed()) {
            return cmd_kesten(out, g, kesten_args, bound);
        }
        if (deviation->parsed()) {
            return cmd_bde_deviation(out, g, src, against, prefer_cps, trials);
        }
        if (match->parsed()) {
            return cmd_bde_match(out, g, src, src_b, radius, prefer_cps);
        }
        if (divide->parsed()) {
            return cmd_bde_divide(out, g, src, parts, against);
        }
        if (ifs->parsed()) {
            return cmd_window_ifs(out, g, src, w);
        }
        if (rauzy->parsed()) {
            return cmd_window_rauzy(out, g, src, w);
        }
        if (wrender->parsed()) {
            return cmd_window_render(out, g, src, w);
        }
        if (dimension->parsed()) {
            return cmd_window_dimension(out, g, src, w);
        }
        if (list->parsed()) {
            return cmd_examples_list(out);
        }
    } catch (const UsageError& e) {
        err << "aperiodic: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        err << "aperiodic: " << e.what() << "\n";
        return 2;
    } catch (const UnknownExample& e) {
        err << "aperiodic: " << e.what() << "\n";
        return 2;
    } catch (const UnsupportedFormat& e) {
        err << "aperiodic: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "aperiodic: error: " << e.what() << "\n";
        return 1;
    }
    err << "aperiodic: no command\n";
    return 2;
}

} // namespace aperiodic::cli
