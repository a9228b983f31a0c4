from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from resonator.errors import DomainError, NotHyperbolic, PoleHit, PoleInsideDisk
from resonator.hyperbolic import (
    UNIT_DISK,
    Disk,
    MoebiusMap,
    attracting_fixed_point,
    disk_image,
    hexagon_side,
    log_derivative,
    moebius_apply,
    moebius_derivative,
    translation_length,
    unit_translation,
)

coef = st.floats(min_value=-3, max_value=3, allow_nan=False)


@st.composite
def hyperbolic_maps(draw):
    a = draw(st.floats(min_value=0.2, max_value=4))
    b, c = draw(coef), draw(coef)
    d = (1 + b * c) / a
    m = MoebiusMap(a, b, c, d)
    assume(abs(m.trace) > 2.05)
    return m


def random_hyperbolic(rng) -> MoebiusMap:
    while True:
        a = rng.uniform(0.2, 4)
        b, c = rng.uniform(-3, 3, 2)
        m = MoebiusMap(a, b, c, (1 + b * c) / a)
        if abs(m.trace) > 2.05:
            return m


def hexagon_oracle(x, y, z):
    with mpmath.workdps(40):
        x, y, z = (mpmath.mpf(v) for v in (x, y, z))
        return mpmath.acosh((mpmath.cosh(y) * mpmath.cosh(z) + mpmath.cosh(x)) / (mpmath.sinh(y) * mpmath.sinh(z)))


def test_apply_examples():
    assert moebius_apply(MoebiusMap(1, 1, 0, 1), 1j) == pytest.approx(1 + 1j)
    assert moebius_apply(MoebiusMap(1 / math.sqrt(2), 0, 0, math.sqrt(2)), 1) == pytest.approx(0.5)
    assert moebius_apply(MoebiusMap(0, 1, -1, 0), 1j) == pytest.approx(1j)


def test_pole_hit():
    m = MoebiusMap(0, 1, -1, 2)
    with pytest.raises(PoleHit):
        moebius_apply(m, 2.0)
    with pytest.raises(PoleHit):
        moebius_derivative(m, 2.0)


def test_derivative_examples():
    assert moebius_derivative(MoebiusMap(1 / math.sqrt(2), 0, 0, math.sqrt(2)), 0.3 + 2j) == pytest.approx(0.5)
    assert moebius_derivative(MoebiusMap(1, 5, 0, 1), -7j) == pytest.approx(1)
    m = MoebiusMap(2, 0, 0, 0.5)
    h = 1e-6
    fd = (moebius_apply(m, h) - moebius_apply(m, -h)) / (2 * h)
    assert moebius_derivative(m, 0) == pytest.approx(4)
    assert abs(fd - 4) < 1e-6


def test_log_derivative_real():
    m = MoebiusMap(2, 1, 1, 1)
    assert log_derivative(m, 0.3).real == pytest.approx(math.log(moebius_derivative(m, 0.3)))


def test_fixed_point_examples():
    u, d = attracting_fixed_point(MoebiusMap(1 / math.sqrt(2), 0, 0, math.sqrt(2)))
    assert u == pytest.approx(0) and d == pytest.approx(0.5)

    m = MoebiusMap(2, 1, 1, 1)
    u, d = attracting_fixed_point(m)
    x = 0.123
    for _ in range(200):
        x = moebius_apply(m, x)
    assert u == pytest.approx(x, abs=1e-12)
    assert 0 < d < 1
    with pytest.raises(NotHyperbolic):
        attracting_fixed_point(MoebiusMap(math.cos(0.3), -math.sin(0.3), math.sin(0.3), math.cos(0.3)))


def test_translation_length_examples():
    t = 3.0
    m = MoebiusMap(math.exp(t / 2), 0, 0, math.exp(-t / 2))
    assert translation_length(m) == pytest.approx(3.0, abs=1e-12)
    assert translation_length(m @ m) == pytest.approx(6.0, abs=1e-12)
    g = MoebiusMap(2, 1, 1, 1)
    assert translation_length(g) == pytest.approx(2 * math.acosh(1.5), abs=1e-12)
    assert translation_length(g) == pytest.approx(-math.log(attracting_fixed_point(g)[1]), abs=1e-10)
    with pytest.raises(NotHyperbolic):
        translation_length(MoebiusMap.identity())


def test_disk_image_examples():
    d = disk_image(MoebiusMap.identity(), Disk(0.3 + 0.1j, 0.5))
    assert d.center == pytest.approx(0.3 + 0.1j) and d.radius == pytest.approx(0.5)
    d = disk_image(MoebiusMap(1 / math.sqrt(2), 0, 0, math.sqrt(2)), UNIT_DISK)
    assert d.center == pytest.approx(0) and d.radius == pytest.approx(0.5)
    m = MoebiusMap(0, 1, -1, 2)  # u -> 1/(2 - u)
    d = disk_image(m, UNIT_DISK)
    assert d.center == pytest.approx(2 / 3, abs=1e-14) and d.radius == pytest.approx(1 / 3, abs=1e-14)
    pts = m(UNIT_DISK.boundary(100))
    assert np.max(np.abs(np.abs(pts - d.center) - d.radius)) < 1e-10
    with pytest.raises(PoleInsideDisk):
        disk_image(MoebiusMap(0, 1, -1, 0.5), UNIT_DISK)


def test_hexagon_side_against_oracle():
    assert hexagon_side(1, 1, 1) == pytest.approx(float(hexagon_oracle(1, 1, 1)), abs=1e-13)
    assert hexagon_side(1, 1, 1) == pytest.approx(1.704913, abs=1e-6)
    assert hexagon_side(4, 4, 4) == pytest.approx(0.27485, abs=1e-5)
    assert hexagon_side(4, 4, 4) == pytest.approx(float(hexagon_oracle(4, 4, 4)), rel=1e-13)
    vals = [hexagon_side(a, a, a) for a in (6, 8, 10)]
    assert vals[0] > vals[1] > vals[2] > 0
    assert hexagon_side(3, 5, 7) == pytest.approx(float(hexagon_oracle(3, 5, 7)), rel=1e-12)
    with pytest.raises(DomainError):
        hexagon_side(0, 1, 1)


def test_unit_translation_preserves_unit_circle():
    g = unit_translation(0.7)
    pts = g(np.exp(1j * np.linspace(0.1, 3.0, 7)))
    assert np.allclose(np.abs(pts), 1)
    assert g(1.0) == pytest.approx(1.0) and g(-1.0) == pytest.approx(-1.0)


@pytest.mark.property
@given(hyperbolic_maps(), hyperbolic_maps(), st.complex_numbers(max_magnitude=3))
def test_composition_homomorphism(m1, m2, u):
    assume(abs(m2.c * u + m2.d) > 0.1)
    v = moebius_apply(m2, u)
    assume(abs(m1.c * v + m1.d) > 0.1)
    lhs = moebius_apply(m1 @ m2, u)
    assert abs(lhs - moebius_apply(m1, v)) <= 1e-12 * max(1.0, abs(lhs))


@pytest.mark.property
@given(st.lists(hyperbolic_maps(), min_size=2, max_size=8), st.floats(min_value=-0.5, max_value=0.5))
def test_chain_rule(maps, u):
    comp = MoebiusMap.identity()
    log_prod = 0.0
    x = u
    for m in reversed(maps):
        den = m.c * x + m.d
        assume(abs(den) > 1e-2)
        log_prod += -2 * math.log(abs(den))
        x = moebius_apply(m, x)
        comp = m @ comp
    den = comp.c * u + comp.d
    assume(den != 0)
    assert -2 * math.log(abs(den)) == pytest.approx(log_prod, abs=1e-10 * max(1.0, abs(log_prod)))


@pytest.mark.property
@given(hyperbolic_maps(), st.integers(min_value=1, max_value=10))
def test_translation_length_power_law(m, j):
    assume(translation_length(m) * j < 60)
    assert translation_length(m.power(j)) == pytest.approx(j * translation_length(m), abs=1e-9 * max(1, j))


def test_derivative_finite_differences_100_maps():
    rng = np.random.default_rng(20240601)
    h = 1e-6
    for _ in range(100):
        m = random_hyperbolic(rng)
        while True:
            u = complex(*rng.uniform(-2, 2, 2))
            if abs(u - m.pole) > 0.1:
                break
        fd = (moebius_apply(m, u + h) - moebius_apply(m, u - h)) / (2 * h)
        exact = moebius_derivative(m, u)
        assert abs(fd - exact) <= 1e-6 * abs(exact)


@pytest.mark.property
@given(hyperbolic_maps())
def test_disk_image_boundary_residual(m):
    assume(abs(m.pole) > 1.05)
    d = disk_image(m, UNIT_DISK)
    pts = m(UNIT_DISK.boundary(100))
    assert np.max(np.abs(np.abs(pts - d.center) - d.radius)) <= 1e-10 * max(d.radius, 1e-300) + 1e-15
