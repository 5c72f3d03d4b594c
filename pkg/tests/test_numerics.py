import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wlcnoise.errors import (
    AccuracyError,
    DegenerateEquationError,
    MarginalStabilityError,
    SingularMatrixError,
)
from wlcnoise.numerics import (
    accumulate_winding,
    derivative_central,
    identity2,
    integrate_adaptive,
    inv2,
    mat2,
    scalar_block,
    solve_quadratic,
    winding_number,
)


# ---------------------------------------------------------------------------
# 2x2 blocks
# ---------------------------------------------------------------------------

def test_identity_neutral():
    m = mat2(1 + 2j, -0.5j, 3.0, 0.25 + 1j)
    assert np.allclose(m @ identity2(), m)
    assert np.allclose(identity2() @ m, m)


def test_multiplication_associative():
    rng = np.random.default_rng(1)
    for _ in range(20):
        a, b, c = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
                   for _ in range(3))
        assert np.allclose((a @ b) @ c, a @ (b @ c), rtol=1e-12, atol=1e-12)


def test_inverse_residual():
    rng = np.random.default_rng(2)
    for _ in range(50):
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        if abs(np.linalg.det(m)) < 1e-3:
            continue
        residual = m @ inv2(m) - identity2()
        assert np.abs(residual).max() <= 1e-12 * np.abs(m).max()


def test_singular_inverse_raises():
    with pytest.raises(SingularMatrixError):
        inv2(mat2(1.0, 2.0, 2.0, 4.0), det_tol=1e-12)


def test_scalar_block():
    assert np.allclose(scalar_block(2j), 2j * identity2())


# ---------------------------------------------------------------------------
# quadratic roots
# ---------------------------------------------------------------------------

def test_quadratic_factorable():
    sol = solve_quadratic(1.0, -3.0, 2.0)
    assert sol.roots == (1.0, 2.0)
    assert not sol.is_double


def test_quadratic_linear_fallback():
    sol = solve_quadratic(0.0, 2.0, -4.0)
    assert sol.roots == (2.0,)


def test_quadratic_double_root():
    sol = solve_quadratic(1.0, -2.0, 1.0)
    assert sol.roots == (1.0,)
    assert sol.is_double


def test_quadratic_no_real_roots():
    assert solve_quadratic(1.0, 0.0, 1.0).roots == ()


def test_quadratic_degenerate():
    with pytest.raises(DegenerateEquationError):
        solve_quadratic(0.0, 0.0, 0.0)
    # contradictory equation: no roots rather than an error
    assert solve_quadratic(0.0, 0.0, 3.0).roots == ()


def test_quadratic_cancellation_stability():
    # b^2 >> 4ac: the naive formula loses the small root entirely
    sol = solve_quadratic(1.0, -1e8, 1.0)
    small, large = sol.roots
    for r in sol.roots:
        residual = abs(r * r - 1e8 * r + 1.0)
        assert residual <= 1e-10 * max(r * r, 1e8 * abs(r), 1.0)
    assert small == pytest.approx(1e-8, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
def test_quadratic_residual_property(a, b, c):
    if a == b == c == 0.0:
        return
    sol = solve_quadratic(a, b, c)
    scale = max(abs(a), abs(b), abs(c), 1e-30)
    for r in sol.roots:
        # Horner grouping keeps the residual itself in float range
        residual = abs((a * r + b) * r + c)
        bound = 1e-10 * max(abs(a * r) * abs(r), abs(b * r), abs(c),
                            scale * 1e-6)
        assert residual <= bound


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def test_integrate_constant():
    res = integrate_adaptive(lambda x: 1.0, 0.0, 2.0, rel_tol=1e-12)
    assert res.value == pytest.approx(2.0, abs=1e-12)


def test_integrate_sine():
    res = integrate_adaptive(math.sin, 0.0, math.pi, rel_tol=1e-9)
    assert res.value == pytest.approx(2.0, rel=1e-9)
    assert abs(res.value - 2.0) <= 10.0 * max(res.error_estimate, 1e-15)
    assert res.evaluations > 0


def test_integrate_poisson_kernel():
    # closed form pi / (1 - r^2); cross-checked against a dense
    # trapezoid sum that shares nothing with the adaptive code path
    r = 0.8
    f = lambda x: 1.0 / (1.0 - 2.0 * r * math.cos(2.0 * x) + r * r)
    res = integrate_adaptive(f, 0.0, math.pi, rel_tol=1e-10)
    closed_form = math.pi / (1.0 - r * r)
    assert closed_form == pytest.approx(8.726646259971648, rel=1e-15)
    xs = np.linspace(0.0, math.pi, 200001)
    trapezoid = np.trapezoid([f(x) for x in xs], xs)
    assert res.value == pytest.approx(closed_form, rel=1e-10)
    assert res.value == pytest.approx(trapezoid, rel=1e-8)
    assert abs(res.value - closed_form) <= 10.0 * max(res.error_estimate, 1e-15)


def test_integrate_cubics_exact():
    rng = np.random.default_rng(3)
    for _ in range(25):
        c = rng.uniform(-5, 5, size=4)
        lo, hi = sorted(rng.uniform(-3, 3, size=2))
        if hi - lo < 1e-3:
            continue
        f = lambda x: c[0] + c[1] * x + c[2] * x**2 + c[3] * x**3
        truth = sum(c[k] * (hi ** (k + 1) - lo ** (k + 1)) / (k + 1)
                    for k in range(4))
        res = integrate_adaptive(f, lo, hi, rel_tol=1e-9)
        assert res.value == pytest.approx(truth, rel=1e-12, abs=1e-12)


def test_integrate_breakpoints_catch_narrow_spike():
    # a spike of width 1e-6 hiding between coarse panel nodes
    spike = lambda x: 1.0 / (1e-12 + (x - 0.3) ** 2)
    truth = (math.atan(0.7 / 1e-6) + math.atan(0.3 / 1e-6)) / 1e-6
    res = integrate_adaptive(spike, 0.0, 1.0, rel_tol=1e-8,
                             breakpoints=(0.3,))
    assert res.value == pytest.approx(truth, rel=1e-7)


def test_integrate_depth_exhaustion():
    f = lambda x: math.sqrt(abs(x)) if x != 0 else 0.0
    with pytest.raises(AccuracyError) as info:
        integrate_adaptive(f, -1.0, 1.0, rel_tol=1e-14, max_depth=3)
    best = info.value.best_estimate
    assert best == pytest.approx(4.0 / 3.0, rel=1e-2)


def test_integrate_rejects_bad_bounds():
    with pytest.raises(ValueError):
        integrate_adaptive(math.sin, 1.0, 0.0)


def test_integrate_deterministic():
    f = lambda x: math.exp(-x) * math.cos(7 * x)
    a = integrate_adaptive(f, 0.0, 5.0, rel_tol=1e-10)
    b = integrate_adaptive(f, 0.0, 5.0, rel_tol=1e-10)
    assert a == b


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------

def test_derivative_central():
    d = derivative_central(math.sin, 0.3, 1e-6)
    assert d == pytest.approx(math.cos(0.3), abs=1e-10)
    with pytest.raises(ValueError):
        derivative_central(math.sin, 0.0, 0.0)


# ---------------------------------------------------------------------------
# winding numbers
# ---------------------------------------------------------------------------

def _circle(n, turns=1.0, radius=1.0, center=0j):
    t = np.linspace(0.0, 2.0 * math.pi * turns, n, endpoint=False)
    return center + radius * np.exp(1j * t)


def test_winding_unit_circle():
    assert winding_number(_circle(64), 0.0) == 1


def test_winding_exterior_point():
    assert winding_number(_circle(64), 2.0 + 0.0j) == 0


def test_winding_double_clockwise():
    curve = np.conj(_circle(128, turns=2.0))
    assert winding_number(curve, 0.0) == -2


def test_winding_resampling_invariance():
    for n in (32, 64, 128, 256):
        assert winding_number(_circle(n, radius=2.5, center=1j), 1j) == 1


@settings(max_examples=50, deadline=None)
@given(st.complex_numbers(max_magnitude=50.0, allow_nan=False,
                          allow_infinity=False))
def test_winding_translation_invariance(shift):
    curve = _circle(48, radius=1.0, center=0.2 + 0.1j)
    base = winding_number(curve, 0.0)
    assert winding_number(curve + shift, shift) == base


def test_winding_on_curve_raises():
    with pytest.raises(MarginalStabilityError):
        winding_number(_circle(64), 1.0 + 0.0j)


def test_winding_producer_refinement():
    # three base points cannot resolve the circle; the producer can
    producer = lambda t: np.exp(1j * t)
    params = np.array([0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0,
                       2.0 * math.pi])
    curve = producer(params)
    assert winding_number(curve, 0.0, producer=producer, params=params) == 1


def test_winding_producer_needs_params():
    with pytest.raises(ValueError):
        winding_number(_circle(8), 0.0, producer=lambda t: np.exp(1j * t))


def test_accumulate_winding_distance():
    total, dist = accumulate_winding(_circle(256), 0.0)
    assert total == pytest.approx(2.0 * math.pi, rel=1e-9)
    assert dist == pytest.approx(math.cos(math.pi / 256), rel=1e-6)
