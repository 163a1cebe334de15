"""Transport contract: path algebra, word series, homotopy, regularization."""

import json
import math

import numpy as np
import pytest

from ellbar.barcx import BarElement, shuffle
from ellbar.chenint import (
    ArcSeg,
    EdaggerModel,
    LineSeg,
    P1Model,
    PathSpec,
    _word_table,
    chen_transport,
    compose_paths,
    compose_series,
    eval_bar_element,
    eval_bar_with_result,
    homotopy_certificate,
    homotopy_report,
    line_path,
    loop_deck,
    loop_pair_library,
    loop_path,
    path_from_json,
    path_to_json,
    regularized_integral_p1,
    reverse_path,
    stokes_defect,
    translate_path,
)
from ellbar.errors import (
    EndpointMismatch,
    FitInstability,
    GuardViolation,
    QuadratureFailure,
)
from ellbar.kzbword import c_w, canonical_series
from ellbar.logforms import ExtLattice
from ellbar.wlattice import CurveSpec, eta_lambda, lattice_from_curve

ZETA2 = math.pi**2 / 6
ZETA3 = 1.2020569031595942854
ZETA4 = math.pi**4 / 90
Z5 = 1.0369277551433699263


@pytest.fixture(scope="module")
def ext():
    return ExtLattice(lattice_from_curve(CurveSpec(5, 2)), nmax=6)


@pytest.fixture(scope="module")
def model(ext):
    return EdaggerModel(ext)


def _base(ext):
    L = ext.lattice
    return 0.31 * L.omega1 + 0.22 * L.omega2


class TestPathSpec:
    def test_json_roundtrip_edagger(self, ext):
        L = ext.lattice
        z0 = _base(ext)
        g = PathSpec(
            model="edagger",
            segments=(
                LineSeg(z0, z0 + 0.3 * L.omega1, 0.1 + 0.2j, 0.3 - 0.1j),
                ArcSeg(z0 + 0.3 * L.omega1 + 0.1, 0.1, math.pi, 0.0, 0.3 - 0.1j, 0.5j),
            ),
        )
        g2 = path_from_json(path_to_json(g))
        assert g2.model == "edagger"
        assert len(g2.segments) == 2
        for a, b in zip(g.segments, g2.segments):
            assert abs(complex(a.start[0]) - complex(b.start[0])) < 1e-15
            assert abs(complex(a.end[1]) - complex(b.end[1])) < 1e-15

    def test_json_roundtrip_p1(self):
        g = line_path("p1", 0.2 + 0j, 0.8 + 0.1j)
        g2 = path_from_json(path_to_json(g))
        assert isinstance(g2.segments[0], LineSeg)
        assert abs(g2.segments[0].z1 - (0.8 + 0.1j)) < 1e-15

    def test_discontinuous_rejected(self):
        with pytest.raises(ValueError, match="discontinuous"):
            PathSpec(
                model="p1",
                segments=(LineSeg(0.2, 0.5), LineSeg(0.6, 0.8)),
            )

    def test_bad_model_and_kind(self):
        with pytest.raises(ValueError):
            PathSpec(model="weird", segments=(LineSeg(0, 1),))
        with pytest.raises(ValueError):
            path_from_json(json.dumps({"model": "p1", "segments": [{"kind": "spline"}]}))

    def test_arc_endpoints(self):
        a = ArcSeg(1j, 2.0, 0.0, math.pi / 2)
        assert abs(a.start[0] - (2 + 1j)) < 1e-15
        assert abs(a.end[0] - 3j) < 1e-15

    def test_global_parameter(self):
        g = PathSpec(model="p1", segments=(LineSeg(0.1, 0.5), LineSeg(0.5, 0.9)))
        z, s = g.at([0.0, 0.5, 1.0])
        assert abs(z[0] - 0.1) < 1e-15
        assert abs(z[1] - 0.5) < 1e-15
        assert abs(z[2] - 0.9) < 1e-15


class TestPathAlgebra:
    def test_compose_exact(self, ext):
        z0 = _base(ext)
        zm = z0 + 0.1 * ext.lattice.omega1
        z1 = zm + 0.2 * ext.lattice.omega2
        gA = line_path("edagger", z0, zm, 0j, 1j)
        gB = line_path("edagger", zm, z1, 1j, 2j)
        g = compose_paths(gB, gA)
        assert len(g.segments) == 2
        assert g.start == gA.start
        assert g.end == gB.end
        assert g.deck_offset is None

    def test_compose_mod_lattice(self, ext):
        L = ext.lattice
        z0 = _base(ext)
        s0 = 0.4 - 0.1j
        gA = translate_path(L, (1, 0), z0, s0)
        # gB starts back at the original point: congruent, not equal
        gB = line_path("edagger", z0, z0 + 0.1 * L.omega2, s0, s0 + 1j)
        # the later path gets translated by +omega1 onto gA's sheet
        g = compose_paths(gB, gA, lattice=L)
        assert g.deck_offset == (1, 0)
        # the composed path is continuous
        for a, b in zip(g.segments, g.segments[1:]):
            assert abs(a.end[0] - b.start[0]) < 1e-12

    def test_compose_mismatch(self, ext):
        z0 = _base(ext)
        gA = line_path("edagger", z0, z0 + 1.0)
        gB = line_path("edagger", z0 + 0.5j, z0 + 1.5)
        with pytest.raises(EndpointMismatch):
            compose_paths(gB, gA)
        with pytest.raises(EndpointMismatch):
            compose_paths(line_path("p1", 0.2, 0.5), gA)

    def test_reverse(self, ext):
        z0 = _base(ext)
        g = PathSpec(
            model="edagger",
            segments=(LineSeg(z0, z0 + 1, 0j, 1j), LineSeg(z0 + 1, z0 + 1 + 1j, 1j, 0j)),
        )
        r = reverse_path(g)
        assert r.start == g.end
        assert r.end == g.start
        assert len(r.segments) == 2

    def test_loop_deck(self, ext):
        L = ext.lattice
        z0 = _base(ext)
        circ = loop_path(0j, 0.3 * L.min_period(), s0=0.1j)
        assert loop_deck(L, circ) == (0, 0)
        tr = translate_path(L, (1, -2), z0, 0.2j)
        assert loop_deck(L, tr) == (1, -2)
        open_path = line_path("edagger", z0, z0 + 0.3 * L.omega1)
        assert loop_deck(L, open_path) is None


class TestLengthOnePeriods:
    @pytest.mark.parametrize("mn", [(1, 0), (0, 1)])
    def test_translate_periods(self, ext, model, mn):
        L = ext.lattice
        lam = mn[0] * L.omega1 + mn[1] * L.omega2
        g = translate_path(L, mn, _base(ext), 0.4 - 0.1j)
        res = chen_transport(model, g, letters=("nu", "w0"), lmax=1, tol=1e-12)
        assert abs(res.coeff(("w0",)) - lam) < 1e-10
        assert abs(res.coeff(("nu",)) + eta_lambda(L, mn)) < 1e-10


class TestWordSeries:
    def test_composition_rule(self, ext, model):
        L = ext.lattice
        z0 = _base(ext)
        zm = z0 + 0.1 * L.omega1 + 0.2 * L.omega2
        z1 = z0 + 0.4 * L.omega1 + 0.23 * L.omega2
        s0, sm, s1 = 0.4 - 0.1j, 0.1 + 0.2j, -0.3 + 0.05j
        gA = line_path("edagger", z0, zm, s0, sm)
        gB = line_path("edagger", zm, z1, sm, s1)
        letters = ("nu", "w0", "w1")
        tab = _word_table(letters, 3)
        vA = chen_transport(model, gA, letters=letters, lmax=3, tol=1e-12)
        vB = chen_transport(model, gB, letters=letters, lmax=3, tol=1e-12)
        vG = chen_transport(model, compose_paths(gB, gA), letters=letters, lmax=3, tol=1e-12)
        a = np.array([vA.values[w] for w in tab.words])
        b = np.array([vB.values[w] for w in tab.words])
        whole = np.array([vG.values[w] for w in tab.words])
        assert np.max(np.abs(compose_series(b, a, tab) - whole)) < 1e-11

    def test_reversal_antipode(self, ext, model):
        L = ext.lattice
        z0 = _base(ext)
        g = line_path(
            "edagger", z0, z0 + 0.3 * L.omega1 + 0.2 * L.omega2, 0.4 - 0.1j, 0.1j
        )
        letters = ("nu", "w0", "w1")
        tab = _word_table(letters, 3)
        fwd = chen_transport(model, g, letters=letters, lmax=3, tol=1e-12)
        bwd = chen_transport(model, reverse_path(g), letters=letters, lmax=3, tol=1e-12)
        for w in tab.words:
            expect = (-1) ** len(w) * fwd.values[w[::-1]]
            assert abs(bwd.values[w] - expect) < 1e-11

    def test_shuffle_identity(self, ext, model):
        L = ext.lattice
        z0 = _base(ext)
        g = PathSpec(
            model="edagger",
            segments=(
                LineSeg(z0, z0 + 0.2 * L.omega1, 0.1j, 0.3),
                LineSeg(z0 + 0.2 * L.omega1, z0 + 0.2 * L.omega1 + 0.25 * L.omega2, 0.3, -0.2j),
            ),
        )
        letters = ("nu", "w0", "w1")
        res = chen_transport(model, g, letters=letters, lmax=4, tol=1e-12)
        pairs = [
            (("nu",), ("w0",)),
            (("w1",), ("w1",)),
            (("nu", "w0"), ("w1",)),
            (("w0", "w1"), ("nu", "w1")),
        ]
        for u, v in pairs:
            lhs = res.values[u] * res.values[v]
            rhs = sum(c * res.values[w] for w, c in shuffle(u, v).items())
            assert abs(lhs - rhs) < 1e-11

    def test_grouplike_empty_word(self, ext, model):
        g = line_path("edagger", _base(ext), _base(ext) + 0.5, 0j, 1j)
        res = chen_transport(model, g, letters=("nu",), lmax=2, tol=1e-10)
        assert res.coeff(()) == 1.0
        with pytest.raises(KeyError):
            res.coeff(("w0", "w0", "w0"))

    def test_result_metadata(self, ext, model):
        g = line_path("edagger", _base(ext), _base(ext) + 0.5, 0j, 1j)
        res = chen_transport(model, g, letters=("nu", "w0"), lmax=2, tol=1e-10)
        assert res.model == "edagger"
        assert set(res.err_by_length) == {0, 1, 2}
        assert len(res.panels_by_segment) == 1
        assert res.panels_by_segment[0] >= 3


class TestLoops:
    def test_p1_circle(self):
        res = chen_transport(P1Model(), loop_path(0j, 0.3, model="p1"), lmax=2, tol=1e-12)
        assert abs(res.coeff(("om0",)) - 2j * math.pi) < 1e-12
        # om1 is holomorphic inside: integral vanishes
        assert abs(res.coeff(("om1",))) < 1e-12

    def test_loop_residue_w1(self, ext, model):
        # f_1 has residue 1 at each lattice point
        L = ext.lattice
        vals = {}
        for f in (0.25, 0.125):
            lp = loop_path(0j, f * L.min_period(), s0=0.4 - 0.1j)
            r = chen_transport(model, lp, letters=("w1",), lmax=1, tol=1e-12)
            vals[f] = r.coeff(("w1",))
            assert abs(vals[f] - 2j * math.pi) < 1e-10
        rich = 2 * vals[0.125] - vals[0.25]
        assert abs(rich - 2j * math.pi) < 1e-10

    def test_loop_residue_w2_translated(self, ext, model):
        # f_2 has residue -s + eta-shift structure; at the origin with s
        # fixed the residue is -s (second kernel coefficient: t = -s)
        L = ext.lattice
        s0 = 0.4 - 0.1j
        lp = loop_path(0j, 0.2 * L.min_period(), s0=s0)
        r = chen_transport(model, lp, letters=("w2",), lmax=1, tol=1e-12)
        from ellbar.logforms import residue_expected

        expect = 2j * math.pi * residue_expected(2, s0)
        assert abs(r.coeff(("w2",)) - expect) < 1e-10


class TestGuardsAndFailure:
    def test_guard_violation(self, ext, model):
        g = line_path("edagger", -0.5 * ext.lattice.omega1, 0.5 * ext.lattice.omega1)
        with pytest.raises(GuardViolation):
            chen_transport(model, g, letters=("w1",), lmax=1, tol=1e-8)

    def test_p1_guard(self):
        g = line_path("p1", -0.5, 0.5)
        with pytest.raises(GuardViolation):
            chen_transport(P1Model(guard=1e-6), g, lmax=1, tol=1e-8)

    def test_quadrature_failure_near_pole(self, ext, model):
        # legal approach (outside the guard) but too steep for the allowed
        # subdivision depth
        L = ext.lattice
        d = 3e-3 * L.min_period()
        c = L.omega1 + 1j * d * L.omega1 / abs(L.omega1)
        g = PathSpec(
            model="edagger",
            segments=(LineSeg(c - 0.4 * L.omega1, c + 0.4 * L.omega1),),
        )
        with pytest.raises(QuadratureFailure):
            chen_transport(model, g, letters=("w1",), lmax=1, tol=1e-13, max_depth=4)
        # the same geometry converges once allowed to subdivide
        r = chen_transport(model, g, letters=("w1",), lmax=1, tol=1e-13, max_depth=10)
        assert r.panels_by_segment[0] > 30

    def test_origin_shift_consistency(self):
        # same physical path in absolute and 1-based local coordinates
        tab = _word_table(("om0", "om1"), 2)
        r0 = chen_transport(P1Model(), line_path("p1", 0.3, 0.7), lmax=2, tol=1e-12)
        r1 = chen_transport(
            P1Model(origin=1.0), line_path("p1", -0.7, -0.3), lmax=2, tol=1e-12
        )
        for w in tab.words:
            assert abs(r0.values[w] - r1.values[w]) < 1e-13


class TestBarPairing:
    def test_counit_and_empty(self, ext, model):
        g = line_path("edagger", _base(ext), _base(ext) + 0.5, 0j, 0.5j)
        empty = BarElement()
        assert eval_bar_element(model, empty, g) == 0j
        unit = BarElement()
        unit.add_term((), 3)
        assert eval_bar_element(model, unit, g) == 3.0 + 0j

    def test_single_letter_element(self, ext, model):
        L = ext.lattice
        S = canonical_series(3, 2)
        g = translate_path(L, (1, 0), _base(ext), 0.4 - 0.1j)
        # c_"0" = -[nu]; transport of nu along the translate gives -eta1
        val = eval_bar_element(model, c_w(S, "0"), g, tol=1e-12)
        assert abs(val - eta_lambda(L, (1, 0))) < 1e-10

    def test_eval_with_shared_result(self, ext, model):
        S = canonical_series(3, 2)
        xi = c_w(S, "01")
        g = line_path("edagger", _base(ext), _base(ext) + 0.4, 0.1j, 0.7)
        res = chen_transport(model, g, letters=("nu", "w0", "w1"), lmax=2, tol=1e-12)
        direct = eval_bar_element(model, xi, g, tol=1e-12)
        assert abs(eval_bar_with_result(xi, res) - direct) < 1e-12


class TestHomotopy:
    def test_curated_pairs_certified(self, ext, model):
        pairs = loop_pair_library(ext)
        assert len(pairs) == 3
        for name, g1, g2 in pairs:
            cert = homotopy_certificate(model, g1, g2)
            assert cert["ok"], f"pair {name} failed its certificate"
            assert all(w == 0 for w in cert["windings"].values())

    def test_closed_element_invariant(self, ext, model):
        S = canonical_series(4, 2)
        xi = c_w(S, "01")
        for name, g1, g2 in loop_pair_library(ext):
            rep = homotopy_report(model, xi, g1, g2, tol=1e-12)
            assert rep.difference < 1e-9, f"pair {name}: {rep.difference}"

    def test_non_closed_letter_stokes(self, ext, model):
        name, g1, g2 = loop_pair_library(ext)[0]
        w1 = BarElement()
        w1.add_term(("w1",), 1)
        rep = homotopy_report(model, w1, g1, g2, tol=1e-12)
        predicted = stokes_defect(ext, "w1", g1, g2)
        actual = rep.value1 - rep.value2
        assert abs(actual) > 1e-3
        assert abs(actual - predicted) < 1e-8

    def test_mismatched_endpoints_rejected(self, ext, model):
        z0 = _base(ext)
        g1 = line_path("edagger", z0, z0 + 0.5)
        g2 = line_path("edagger", z0, z0 + 0.5j)
        xi = BarElement()
        xi.add_term(("nu",), 1)
        with pytest.raises(EndpointMismatch):
            homotopy_report(model, xi, g1, g2)


class TestRegularized:
    def test_single_letters_vanish(self):
        assert abs(regularized_integral_p1("0")) < 1e-10
        assert abs(regularized_integral_p1("1")) < 1e-10

    def test_depth_one(self):
        assert abs(regularized_integral_p1("01") + ZETA2) < 1e-10
        assert abs(regularized_integral_p1("001") + ZETA3) < 1e-10
        assert abs(regularized_integral_p1("0001") + ZETA4) < 1e-10

    def test_depth_two(self):
        # om0 om1 om1 is the depth-2 pair (2,1)
        assert abs(regularized_integral_p1("011") - ZETA3) < 1e-10
        v41 = regularized_integral_p1("00011")
        assert abs(v41 - (2 * Z5 - ZETA2 * ZETA3)) < 1e-9

    def test_weight_eight(self):
        v = regularized_integral_p1("01010101")
        assert abs(v - math.pi**8 / math.factorial(9)) < 1e-9

    def test_shuffle_regularization(self):
        # I(0)I(1) = I(01) + I(10) with both single letters regularized to 0
        full = regularized_integral_p1("10", full=True)
        assert abs(full["value"] - ZETA2) < 1e-9
        # I(0) ~ -log eps and I(1) ~ +log eps, so I(10) carries -log^2 eps
        assert abs(full["log_coefficients"][0]) < 1e-8
        assert abs(full["log_coefficients"][1] + 1.0) < 1e-8

    def test_word_forms(self):
        a = regularized_integral_p1("01")
        b = regularized_integral_p1((0, 1))
        c = regularized_integral_p1(("om0", "om1"))
        assert a == b == c
        with pytest.raises(ValueError):
            regularized_integral_p1("02")
        with pytest.raises(ValueError):
            regularized_integral_p1("")
