"""Lattice layer: periods, Weierstrass evaluators, quasi-periods, Eisenstein.

The reference ("oracle") route is the truncated lattice sum with exact
Eisenstein tail assists; the primary route is theta-based.  The two share
only the period data, so their agreement is a real cross-check.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ellbar import (
    CurveSpec,
    DegenerateCurve,
    LatticeError,
    NearPole,
    eisenstein,
    eta_lambda,
    lattice_from_curve,
    lattice_from_periods,
    latsum_weierstrass,
    reduce_mod_lattice,
    wp,
    wsigma,
    wzeta,
)
from ellbar.wlattice import eisenstein_from_invariants, fundamental_points

# Gamma(1/4)^2 / (2 sqrt(2 pi)), the lemniscatic period of y^2 = 4x^3 - 4x
LEMNISCATIC = 2.6220575542921198


CURVES = [CurveSpec(4, 0), CurveSpec(0, 4), CurveSpec(5, 2)]


@pytest.fixture(scope="module")
def lattices():
    return [lattice_from_curve(c) for c in CURVES]


def test_lemniscatic_period():
    L = lattice_from_curve(CurveSpec(4, 0))
    assert abs(abs(L.omega1) - LEMNISCATIC) < 1e-12
    assert abs(L.tau - 1j) < 1e-12


def test_equianharmonic_tau():
    L = lattice_from_curve(CurveSpec(0, 4))
    assert abs(L.tau - complex(0.5, math.sqrt(3) / 2)) < 1e-12


def test_degenerate_curve_rejected():
    with pytest.raises(DegenerateCurve):
        CurveSpec(3, 1)
    with pytest.raises(DegenerateCurve):
        CurveSpec(0, 0)


def test_curvespec_exact_rationals():
    c = CurveSpec("1/2", "1/64")
    assert c.discriminant != 0
    with pytest.raises(ValueError):
        CurveSpec(0.5, 1)  # floats are not exact


def test_ode_identity_all_curves(lattices):
    for L in lattices:
        zs = fundamental_points(L, 20, seed=11)
        p, pp = wp(L, zs)
        res = pp * pp - (4 * p ** 3 - L.g2 * p - L.g3)
        scale = np.maximum(1.0, np.abs(pp) ** 2)
        assert np.max(np.abs(res) / scale) < 1e-9


@settings(max_examples=25, deadline=None)
@given(st.floats(0.06, 0.94), st.floats(0.06, 0.94))
def test_ode_identity_property(u, v):
    L = lattice_from_curve(CurveSpec(5, 2))
    z = u * L.omega1 + v * L.omega2
    try:
        p, pp = wp(L, z)
    except NearPole:
        return
    res = pp * pp - (4 * p ** 3 - L.g2 * p - L.g3)
    assert abs(res) / max(1.0, abs(pp) ** 2) < 1e-9


def test_theta_vs_lattice_sum_oracle(lattices):
    for L in lattices:
        zs = fundamental_points(L, 20, seed=7)
        po, ppo, zo, so = latsum_weierstrass(L, zs, M=60)
        p, pp = wp(L, zs)
        scale = np.maximum(1.0, np.abs(p))
        assert np.max(np.abs(p - po) / scale) < 1e-8
        assert np.max(np.abs(pp - ppo) / np.maximum(1.0, np.abs(pp))) < 1e-8
        assert np.max(np.abs(wzeta(L, zs) - zo)) < 1e-8
        assert np.max(np.abs(wsigma(L, zs) - so)) < 1e-8


def test_zeta_quasi_periodicity(lattices):
    for L in lattices:
        z = 0.23 * L.omega1 + 0.37 * L.omega2
        for (m, n) in [(1, 0), (0, 1), (1, 1), (-2, 1)]:
            lam = m * L.omega1 + n * L.omega2
            lhs = wzeta(L, z + lam)
            rhs = wzeta(L, z) - eta_lambda(L, (m, n))
            assert abs(lhs - rhs) < 1e-9 * max(1.0, abs(lhs))


def test_sigma_quasi_periodicity(lattices):
    for L in lattices:
        z = 0.29 * L.omega1 + 0.18 * L.omega2
        for (m, n) in [(1, 0), (0, 1), (1, 1)]:
            lam = m * L.omega1 + n * L.omega2
            eps = -1.0 if (m + n + m * n) % 2 else 1.0
            # sigma(z + lam) = eps * exp(H(lam) (z + lam/2)) sigma(z),
            # with H(lam) = -eta(lam)
            pred = eps * np.exp(-eta_lambda(L, (m, n)) * (z + lam / 2)) * wsigma(L, z)
            got = wsigma(L, z + lam)
            assert abs(got - pred) < 1e-9 * max(1.0, abs(got))


def test_eta_additivity(lattices):
    for L in lattices:
        e11 = eta_lambda(L, (1, 1))
        assert abs(e11 - (L.eta1 + L.eta2)) < 1e-9 * max(1.0, abs(e11))
        e23 = eta_lambda(L, 2 * L.omega1 + 3 * L.omega2)
        assert abs(e23 - (2 * L.eta1 + 3 * L.eta2)) < 1e-9 * max(1.0, abs(e23))


def test_legendre_relation(lattices):
    for L in lattices:
        rel = L.eta1 * L.omega2 - L.eta2 * L.omega1
        assert abs(abs(rel) - 2 * math.pi) < 1e-9
        assert abs(rel - L.legendre_sign * 2j * math.pi) < 1e-9
        assert L.legendre_sign in (-1, 1)


def test_eta_against_contour_integral(lattices):
    # eta(lam) equals the period of the second-kind differential, i.e. the
    # integral of wp along a straight segment of length lam
    x, w = np.polynomial.legendre.leggauss(120)
    t = 0.5 * (x + 1)
    wt = 0.5 * w
    for L in lattices:
        z0 = 0.13 * L.omega1 + 0.41 * L.omega2
        for lam, eta in [(L.omega1, L.eta1), (L.omega2, L.eta2)]:
            p, _ = wp(L, z0 + t * lam)
            contour = np.sum(wt * p) * lam
            assert abs(contour - eta) < 1e-9 * max(1.0, abs(eta))


def test_eisenstein_direct_vs_invariants():
    L = lattice_from_curve(CurveSpec(5, 2))
    g4 = eisenstein(L, 4, tol=2e-7)
    assert abs(60 * g4 - L.g2) < 1e-5
    g6 = eisenstein(L, 6, tol=1e-10)
    assert abs(140 * g6 - L.g3) < 1e-8
    g8 = eisenstein(L, 8, tol=1e-11)
    G = eisenstein_from_invariants(L.g2, L.g3, 8)
    assert abs(g8 - G[8]) < 1e-10


def test_eisenstein_bad_k():
    L = lattice_from_curve(CurveSpec(4, 0))
    for k in (3, 5, 2, 14):
        with pytest.raises(ValueError):
            eisenstein(L, k)


def test_near_pole_guard(lattices):
    L = lattices[0]
    for z in (0.0, L.omega1, 1e-9 * L.omega1, L.omega1 + L.omega2 + 1e-10):
        with pytest.raises(NearPole):
            wp(L, z)
        with pytest.raises(NearPole):
            wsigma(L, z)


def test_reduce_mod_lattice(lattices):
    for L in lattices:
        z0, (m, n) = reduce_mod_lattice(L, L.omega1 + L.omega2)
        assert (m, n) == (1, 1)
        assert abs(z0) < 1e-12 * max(abs(L.omega1), abs(L.omega2))
        rng = np.random.default_rng(3)
        inv = np.linalg.inv(
            np.array(
                [
                    [L.omega1.real, L.omega2.real],
                    [L.omega1.imag, L.omega2.imag],
                ]
            )
        )
        for _ in range(25):
            z = complex(*rng.normal(scale=7.0, size=2))
            z0, (m, n) = reduce_mod_lattice(L, z)
            assert abs(z0 + m * L.omega1 + n * L.omega2 - z) < 1e-9
            u, v = inv @ np.array([z0.real, z0.imag])
            assert -0.5 - 1e-12 <= u < 0.5 + 1e-12
            assert -0.5 - 1e-12 <= v < 0.5 + 1e-12


def test_lattice_from_periods_roundtrip():
    L = lattice_from_periods(LEMNISCATIC, LEMNISCATIC * 1j)
    assert abs(L.g2 - 4.0) < 1e-10
    assert abs(L.g3) < 1e-10
    with pytest.raises(LatticeError):
        lattice_from_periods(1.0, 1j * -2.0)  # wrong orientation
    with pytest.raises(LatticeError):
        lattice_from_periods(1.0, 2.0)  # dependent over R


def test_tol_precondition():
    with pytest.raises(ValueError):
        lattice_from_curve(CurveSpec(4, 0), tol=1e-3)
    with pytest.raises(ValueError):
        lattice_from_curve(CurveSpec(4, 0), tol=1e-16)


def test_eta_lambda_rejects_non_lattice(lattices):
    L = lattices[2]
    with pytest.raises(LatticeError):
        eta_lambda(L, 0.5 * L.omega1)


def test_wp_array_shape(lattices):
    L = lattices[1]
    zs = fundamental_points(L, 5, seed=1)
    p, pp = wp(L, zs)
    assert p.shape == (5,) and pp.shape == (5,)
    ps, pps = wp(L, complex(zs[0]))
    assert isinstance(ps, complex)
    assert abs(ps - p[0]) == 0.0
