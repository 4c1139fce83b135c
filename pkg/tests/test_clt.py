import math

import numpy as np
import pytest

from steinkit import (
    CltCurve,
    DistributionSpec,
    SpecError,
    Uniform,
    clt_bound,
    clt_curve,
    convolution_tv,
    convolution_tv_result,
    rate_fit,
    stein_kernel,
)
from steinkit.corpus import KERNEL_SPECS

import oracle_utils as oracle

E1 = KERNEL_SPECS["exponential1"]
U01 = KERNEL_SPECS["uniform01"]
N01 = KERNEL_SPECS["normal_std"]


def test_bound_exponential_n4():
    assert clt_bound(E1, 4) == pytest.approx(1.0, abs=1e-12)


def test_bound_uniform_n100():
    want = 2.0 * math.sqrt(1.0 / 720.0) / ((1.0 / 12.0) * 10.0)
    assert clt_bound(U01, 100) == pytest.approx(want, abs=1e-12)


def test_bound_normal_any_n():
    assert clt_bound(N01, 7) == pytest.approx(0.0, abs=1e-9)


def test_bound_scaling_is_exact():
    kernel = stein_kernel(E1, 64)
    for n in [1, 3, 10, 25]:
        assert clt_bound(E1, 4 * n, kernel=kernel) == clt_bound(E1, n, kernel=kernel) / 2


def test_bound_rejects_bad_n():
    with pytest.raises(SpecError):
        clt_bound(E1, 0)


def test_convolution_normal_recovers_normal():
    assert convolution_tv(N01, 4, 4096) < 1e-6
    assert convolution_tv(N01, 16, 4096) < 1e-6


def test_convolution_matches_gamma_oracle():
    for n, tol in [(4, 1e-4), (16, 1e-5)]:
        got = convolution_tv(E1, n, 1 << 14)
        want = oracle.gamma_standardized_tv_oracle(n)
        assert got == pytest.approx(want, abs=tol)


def test_convolution_uniform_pair_matches_triangle_oracle():
    # sum of two uniforms is the triangle density on [0, 2]
    sd = math.sqrt(1.0 / 6.0)

    def tri_std(z):
        y = 1.0 + sd * z
        p = y if 0 <= y <= 1 else (2 - y if 1 < y <= 2 else 0.0)
        return p * sd

    from scipy import integrate, optimize
    from scipy.special import ndtr

    def diff(z):
        return tri_std(z) - math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)

    zmax = 1.0 / sd
    zs = np.linspace(-zmax + 1e-12, zmax - 1e-12, 2001)
    vals = [diff(z) for z in zs]
    roots = [optimize.brentq(diff, a, b) for a, b, fa, fb
             in zip(zs[:-1], zs[1:], vals[:-1], vals[1:]) if fa * fb < 0]
    pts = [-zmax, *roots, zmax]
    total = sum(abs(integrate.quad(diff, a, b, limit=200)[0])
                for a, b in zip(pts[:-1], pts[1:]))
    want = 0.5 * (total + 2.0 * float(ndtr(-zmax)))

    got = convolution_tv(U01, 2, 4096)
    assert got == pytest.approx(want, abs=1e-5)


def test_convolution_is_decreasing_and_dominated():
    kernel = stein_kernel(E1, 64)
    values = []
    for n in [4, 16, 64]:
        tv = convolution_tv(E1, n, 4096)
        assert tv <= clt_bound(E1, n, kernel=kernel)
        values.append(tv)
    assert values[0] > values[1] > values[2]


def test_convolution_rejects_singular_specs():
    with pytest.raises(SpecError):
        convolution_tv(KERNEL_SPECS["mixed_atoms_uniform"], 4)
    with pytest.raises(SpecError):
        convolution_tv(KERNEL_SPECS["uniform_cantor"], 4)


def test_convolution_rejects_bad_grid():
    with pytest.raises(SpecError):
        convolution_tv(U01, 4, 1000)
    with pytest.raises(SpecError):
        convolution_tv(U01, 4, 4095)


def test_convolution_detects_unresolved_density():
    from steinkit import NumericsError
    # a spike 1e-6 wide is invisible to 1024 midpoints spanning [0, 1]
    spike = DistributionSpec((Uniform(0.0, 1e-6, 0.5), Uniform(0.0, 1.0, 0.5)))
    with pytest.raises(NumericsError):
        convolution_tv(spike, 2, 1024)


def test_convolution_result_reports_error_estimate():
    res = convolution_tv_result(U01, 4, 4096)
    assert res.error_estimate is not None
    assert res.error_estimate < 1e-4
    assert res.mass_defect < 1e-8


def test_rate_fit_trivial_series():
    ns = (4, 8, 16, 32, 64)
    half = CltCurve(ns=ns, bounds=tuple(3.0 / math.sqrt(n) for n in ns),
                    empirical=tuple(5.0 / n for n in ns))
    slope_bound, slope_emp = rate_fit(half)
    assert slope_bound == pytest.approx(-0.5, abs=1e-12)
    assert slope_emp == pytest.approx(-1.0, abs=1e-12)


def test_rate_fit_insufficient_points():
    with pytest.raises(SpecError):
        rate_fit(CltCurve(ns=(4, 8), bounds=(1.0, 0.7)))
    with pytest.raises(SpecError):
        rate_fit(CltCurve(ns=(4, 8, 16), bounds=(1.0, 0.7, 0.5)))


def test_curve_for_exponential():
    curve = clt_curve(E1, [4, 8, 16, 32], grid_size=2048)
    for b, n in zip(curve.bounds, curve.ns):
        assert b == pytest.approx(2.0 / math.sqrt(n), abs=1e-10)
    assert curve.empirical is not None
    assert curve.slope_bound == pytest.approx(-0.5, abs=1e-12)
    assert all(e <= b for e, b in zip(curve.empirical, curve.bounds))


def test_curve_mixed_spec_has_no_empirical():
    curve = clt_curve(KERNEL_SPECS["mixed_atoms_uniform"], [4, 8, 16, 64],
                      grid_size=1024)
    assert curve.empirical is None
    assert curve.slope_bound == pytest.approx(-0.5, abs=1e-12)
    assert curve.slope_empirical is None


def test_centered_uniform_empirical_can_beat_the_rate():
    # symmetric summands kill the third cumulant; the exact distance then
    # decays near n^-1, strictly faster than the bound's n^-1/2
    sym = DistributionSpec((Uniform(-1.0, 1.0, 1.0),))
    curve = clt_curve(sym, [4, 8, 16, 32, 64], grid_size=4096)
    assert curve.slope_empirical < -0.8
    assert curve.slope_bound == pytest.approx(-0.5, abs=1e-12)


def test_curve_csv_format():
    from steinkit.clt import curve_to_csv
    curve = clt_curve(KERNEL_SPECS["mixed_atoms_uniform"], [4, 16], grid_size=1024)
    lines = curve_to_csv(curve).strip().split("\n")
    assert lines[0] == "n,bound,empirical"
    assert lines[1].startswith("4,") and lines[1].endswith(",")
