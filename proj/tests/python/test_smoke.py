import math

import pytest

import aperiodic as ap

TAU = (1 + math.sqrt(5)) / 2


def test_registry():
    names = ap.examples()
    assert len(names) == 7
    assert "fibonacci" in names
    with pytest.raises(ap.UnknownExample):
        ap.example("nope")


def test_real_values():
    tau = ap.golden_ratio()
    assert str(tau) == "(1+sqrt(5))/2"
    assert float(tau) == pytest.approx(TAU)
    assert tau * tau == tau + ap.Real(1)
    assert ap.Real("1/tau") == tau - ap.Real(1)
    with pytest.raises(ap.ParseError):
        ap.Real("sqrt(")


def test_classify_fibonacci():
    s = ap.Substitution("a -> ab; b -> a")
    assert s.matrix() == [[1, 1], [1, 0]]
    assert s.alphabet == "ab"
    assert s.expand("a", 4) == "abaababa"
    pd = ap.classify(s)
    assert str(pd.lambda_) == "(1+sqrt(5))/2"
    assert pd.is_pisot and pd.is_primitive
    assert float(pd.tile_lengths[0]) == pytest.approx(1.0)
    scaled = ap.classify(ap.example("fibonacci"))
    assert float(scaled.density) == pytest.approx((1 + TAU) / (2 + TAU))
    assert sum(float(f) for f in pd.frequencies) == pytest.approx(1.0)


def test_substitution_and_cps_agree():
    pts = ap.generate_point_set(ap.example("fibonacci"), 200).slice(-100, 100)
    cps = ap.cps_points(ap.fibonacci_scheme(), -100, 100)
    assert pts.values == cps.values
    assert len(cps) > 100


def test_scheme_text():
    s = ap.parse_scheme("column = 1, -1\ncolumn = tau, 1/tau\nwindow = [-1/tau, 1)\n")
    assert s.dim_internal == 1
    assert ap.cps_density(s) == ap.cps_density(ap.fibonacci_scheme())
    with pytest.raises(ap.ParseError):
        ap.parse_scheme("column = 1\nwindw = [0, 1)\n")


def test_bounded_displacement():
    ex = ap.example("fibonacci")
    pts = ap.generate_point_set(ex, 20000)
    a = ap.classify(ex).mean_spacing
    rep = ap.lattice_deviation(pts, a)
    assert rep.verdict == "bounded"
    lat = ap.lattice_points(a, pts[0], pts[len(pts) - 1])
    cert = ap.bottleneck_matching(pts, lat, rep.max_dev + float(a))
    assert cert.unmatched_boundary >= 0
    assert cert.radius == pytest.approx(rep.max_dev + float(a))
    with pytest.raises(ap.NoMatching):
        ap.bottleneck_matching(pts, lat, 0.01)
    lz = ap.laczkovich_interval_check(pts, a, 100, seed=3)
    assert lz.seed == 3
    assert lz.C_estimate < 2.5


def test_kesten_and_profile():
    k = ap.kesten_test("0", "1/tau", "tau - 1")
    assert k.holds
    p = ap.discrepancy_profile("tau - 1", "0", "1/tau", 12)
    assert p.verdict == "bounded"
    assert list(p.max_abs_D) == sorted(p.max_abs_D)


def test_fractal_window():
    ex = ap.example("tribo_abc_ab_b")
    cloud = ap.rauzy_window_cloud(ex.substitution, 300000)
    assert cloud.dim == 2
    dim = ap.box_dimension(cloud, boundary_only=True)
    assert 1.0 < dim.estimate < 2.0
    img = ap.render(cloud, "pgm", 64)
    assert img.startswith(b"P5\n64 64\n255\n")
    with pytest.raises(ap.UnsupportedFormat):
        ap.render(cloud, "png", 64)
    at = ap.substitution_ifs_attractor(ap.example("aab_ba"), 8, 1e-6)
    assert at.exact_endpoints
    assert at.measure_history == sorted(at.measure_history, reverse=True)


def test_cli_entry():
    code, out, err = ap.run_cli(["examples", "list"])
    assert code == 0
    assert out.count("\n") == 7
    code, out, err = ap.run_cli(["subst", "analyze", "@nope"])
    assert code == 2
    assert "unknown example" in err
