"""Iterated path integrals by truncated word-series transport.

Paths are piecewise smooth curves, either in C^2 (curve model: coordinates
(z, s) on the universal cover, punctures at z in the period lattice) or in
C (genus-zero model: punctures at 0 and 1).  A transport run computes every
iterated integral

    I(b1 ... bn) = int_{1 >= t1 >= ... >= tn >= 0} phi_1(t1) ... phi_n(tn)

over words of pulled-back one-form letters up to a length cutoff, with the
first letter integrated at the latest time.  Each segment is covered by
Gauss-Legendre panels; a panel contributes the word series of its local
time-ordered expansion and panels/segments combine by the splitting rule

    I_{AB}(w) = sum_{w = uv} I_B(u) I_A(v)        (B later than A)

which doubles as the accuracy test: one panel versus its composed halves,
bisecting adaptively until the discrepancy fits the error budget.

The genus-zero regularized integrals shrink a cutoff eps toward the
punctures on a geometric schedule and strip the divergence by a fit against
{log^j eps, eps log^j eps, eps^2 log^j eps}; the constant term is the
regularized value.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import (
    EndpointMismatch,
    FitInstability,
    GuardViolation,
    QuadratureFailure,
)
from .logforms import ExtLattice, f_batch, letters as form_letters
from .wlattice import LatticeData, eta_lambda, reduce_mod_lattice

__all__ = [
    "LineSeg",
    "ArcSeg",
    "PathSpec",
    "path_from_json",
    "path_to_json",
    "line_path",
    "translate_path",
    "loop_path",
    "EdaggerModel",
    "P1Model",
    "compose_paths",
    "reverse_path",
    "loop_deck",
    "TransportResult",
    "chen_transport",
    "compose_series",
    "eval_bar_element",
    "eval_bar_with_result",
    "homotopy_report",
    "winding_number",
    "homotopy_certificate",
    "loop_pair_library",
    "surface_difference",
    "stokes_defect",
    "regularized_integral_p1",
]


# --------------------------------------------------------------------------
# path segments


@dataclass(frozen=True)
class LineSeg:
    """Straight segment in (z, s); s is carried linearly."""

    z0: complex
    z1: complex
    s0: complex = 0j
    s1: complex = 0j

    def at(self, t):
        t = np.asarray(t, dtype=float)
        z = self.z0 + t * (self.z1 - self.z0)
        s = self.s0 + t * (self.s1 - self.s0)
        dz = np.full(t.shape, self.z1 - self.z0)
        ds = np.full(t.shape, self.s1 - self.s0)
        return z, dz, s, ds

    @property
    def start(self):
        return (self.z0, self.s0)

    @property
    def end(self):
        return (self.z1, self.s1)

    def reversed(self):
        return LineSeg(self.z1, self.z0, self.s1, self.s0)

    def shifted(self, dz, ds):
        return LineSeg(self.z0 + dz, self.z1 + dz, self.s0 + ds, self.s1 + ds)


@dataclass(frozen=True)
class ArcSeg:
    """Circular arc around a center; s is carried linearly in the parameter."""

    center: complex
    radius: float
    a0: float
    a1: float
    s0: complex = 0j
    s1: complex = 0j

    def at(self, t):
        t = np.asarray(t, dtype=float)
        ang = self.a0 + t * (self.a1 - self.a0)
        rot = np.exp(1j * ang)
        z = self.center + self.radius * rot
        dz = 1j * self.radius * (self.a1 - self.a0) * rot
        s = self.s0 + t * (self.s1 - self.s0)
        ds = np.full(t.shape, self.s1 - self.s0)
        return z, dz, s, ds

    @property
    def start(self):
        return (self.center + self.radius * np.exp(1j * self.a0), self.s0)

    @property
    def end(self):
        return (self.center + self.radius * np.exp(1j * self.a1), self.s1)

    def reversed(self):
        return ArcSeg(self.center, self.radius, self.a1, self.a0, self.s1, self.s0)

    def shifted(self, dz, ds):
        return ArcSeg(
            self.center + dz, self.radius, self.a0, self.a1, self.s0 + ds, self.s1 + ds
        )


def _close(p, q, scale=1.0):
    return abs(p[0] - q[0]) + abs(p[1] - q[1]) <= 1e-12 * max(1.0, scale)


@dataclass(frozen=True)
class PathSpec:
    """Ordered piecewise-smooth path; earliest segment first."""

    model: str
    segments: tuple
    deck_offset: tuple = None

    def __post_init__(self):
        if self.model not in ("edagger", "p1"):
            raise ValueError(f"unknown model {self.model!r}")
        segs = tuple(self.segments)
        if not segs:
            raise ValueError("a path needs at least one segment")
        object.__setattr__(self, "segments", segs)
        scale = max(abs(segs[0].start[0]), 1.0)
        for a, b in zip(segs, segs[1:]):
            if not _close(a.end, b.start, scale):
                raise ValueError(
                    f"segments are discontinuous: {a.end} then {b.start}"
                )

    @property
    def start(self):
        return self.segments[0].start

    @property
    def end(self):
        return self.segments[-1].end

    def at(self, t):
        """Point (z, s) at global parameter t in [0, 1]; vectorized."""
        z, _, s, _ = self.at_with_deriv(t)
        return z, s

    def at_with_deriv(self, t):
        """(z, dz/dt, s, ds/dt) at global parameter t; derivatives are with
        respect to the global parameter (segments traversed at equal parameter
        speed)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        m = len(self.segments)
        u = np.clip(t, 0.0, 1.0) * m
        idx = np.minimum(u.astype(int), m - 1)
        frac = u - idx
        z = np.empty(t.shape, dtype=complex)
        s = np.empty(t.shape, dtype=complex)
        dz = np.empty(t.shape, dtype=complex)
        ds = np.empty(t.shape, dtype=complex)
        for j, seg in enumerate(self.segments):
            mask = idx == j
            if np.any(mask):
                zz, dzz, ss, dss = seg.at(frac[mask])
                z[mask] = zz
                s[mask] = ss
                dz[mask] = dzz * m
                ds[mask] = dss * m
        return z, dz, s, ds


def _c2(x) -> complex:
    return complex(x[0], x[1])


def _pair(c) -> list:
    c = complex(c)
    return [c.real, c.imag]


def path_from_json(text: str) -> PathSpec:
    """Parse the documented path schema (complex numbers as [re, im])."""
    payload = json.loads(text) if isinstance(text, str) else text
    model = payload["model"]
    segs = []
    for item in payload["segments"]:
        kind = item["kind"]
        if kind == "line":
            fr, to = item["from"], item["to"]
            if model == "edagger":
                if len(fr) != 4 or len(to) != 4:
                    raise ValueError("curve-model line endpoints are [re,im,re,im]")
                segs.append(LineSeg(_c2(fr[:2]), _c2(to[:2]), _c2(fr[2:]), _c2(to[2:])))
            else:
                if len(fr) != 2 or len(to) != 2:
                    raise ValueError("genus-zero line endpoints are [re,im]")
                segs.append(LineSeg(_c2(fr), _c2(to)))
        elif kind == "arc":
            a0, a1 = item["angles"]
            s0 = s1 = 0j
            if "s" in item and item["s"]:
                sv = item["s"]
                if len(sv) != 4:
                    raise ValueError("arc s-range is [re,im,re,im]")
                s0, s1 = _c2(sv[:2]), _c2(sv[2:])
            segs.append(
                ArcSeg(_c2(item["center"]), float(item["radius"]), float(a0), float(a1), s0, s1)
            )
        else:
            raise ValueError(f"unknown segment kind {kind!r}")
    return PathSpec(model=model, segments=tuple(segs))


def path_to_json(path: PathSpec) -> str:
    items = []
    for seg in path.segments:
        if isinstance(seg, LineSeg):
            if path.model == "edagger":
                items.append(
                    {
                        "kind": "line",
                        "from": _pair(seg.z0) + _pair(seg.s0),
                        "to": _pair(seg.z1) + _pair(seg.s1),
                    }
                )
            else:
                items.append({"kind": "line", "from": _pair(seg.z0), "to": _pair(seg.z1)})
        else:
            item = {
                "kind": "arc",
                "center": _pair(seg.center),
                "radius": seg.radius,
                "angles": [seg.a0, seg.a1],
            }
            if path.model == "edagger":
                item["s"] = _pair(seg.s0) + _pair(seg.s1)
            items.append(item)
    return json.dumps({"model": path.model, "segments": items}, sort_keys=True)


def line_path(model: str, z0, z1, s0=0j, s1=0j) -> PathSpec:
    return PathSpec(model=model, segments=(LineSeg(z0, z1, s0, s1),))


def translate_path(L: LatticeData, mn, z0, s0) -> PathSpec:
    """The straight translate path (z0, s0) -> (z0 + lam, s0 - eta(lam))."""
    m, n = mn
    lam = m * L.omega1 + n * L.omega2
    eta = eta_lambda(L, (m, n))
    return line_path("edagger", z0, z0 + lam, s0, s0 - eta)


def loop_path(center, radius, s0=0j, model="edagger", turns=1) -> PathSpec:
    """Closed circle around a point at constant s."""
    return PathSpec(
        model=model,
        segments=(ArcSeg(center, radius, 0.0, 2 * math.pi * turns, s0, s0),),
    )


# --------------------------------------------------------------------------
# ambient models: letters, pullbacks, guard distances


def _point_seg_dist(a, b, p) -> float:
    """Distance from point p to the straight segment [a, b] in C."""
    ab = b - a
    denom = abs(ab) ** 2
    if denom == 0.0:
        return abs(a - p)
    t = ((p - a) * np.conj(ab)).real / denom
    t = min(1.0, max(0.0, t))
    return abs(a + t * ab - p)


def _point_arc_dist(seg: ArcSeg, p) -> float:
    v = p - seg.center
    d0 = abs(v)
    span = seg.a1 - seg.a0
    if abs(span) >= 2 * math.pi - 1e-12:
        return abs(d0 - seg.radius)
    theta = math.atan2(v.imag, v.real)
    sgn = 1.0 if span >= 0 else -1.0
    delta = ((theta - seg.a0) * sgn) % (2 * math.pi)
    if delta <= abs(span):
        return abs(d0 - seg.radius)
    return min(abs(p - seg.start[0]), abs(p - seg.end[0]))


def _seg_puncture_dist(seg, punctures) -> float:
    out = math.inf
    for p in punctures:
        if isinstance(seg, ArcSeg):
            d = _point_arc_dist(seg, p)
        else:
            d = _point_seg_dist(seg.z0, seg.z1, p)
        out = min(out, d)
    return out


class EdaggerModel:
    """Letter evaluation on the extended curve: nu = ds, w{n} = f_n dz."""

    name = "edagger"

    def __init__(self, ext: ExtLattice, guard: float = None):
        self.ext = ext
        self.guard = ext.lattice.guard if guard is None else guard

    def letters(self):
        return form_letters(self.ext.nmax)

    def dist(self, z):
        from .wlattice import _dist_to_lattice

        return _dist_to_lattice(self.ext.lattice, np.asarray(z, dtype=complex))

    def segment_min_dist(self, seg) -> float:
        """Exact distance from the segment to the nearest lattice point."""
        L = self.ext.lattice
        if isinstance(seg, ArcSeg):
            corners = [
                seg.center + seg.radius * (dx + 1j * dy)
                for dx in (-1, 1)
                for dy in (-1, 1)
            ]
        else:
            corners = [seg.z0, seg.z1]
        ms, ns = [], []
        for c in corners:
            _, (m, n) = reduce_mod_lattice(L, c)
            ms.append(m)
            ns.append(n)
        pts = []
        for m in range(min(ms) - 2, max(ms) + 3):
            for n in range(min(ns) - 2, max(ns) + 3):
                pts.append(m * L.omega1 + n * L.omega2)
        return _seg_puncture_dist(seg, pts)

    def phi_rows(self, letters, z, s, dz, ds):
        rows = np.empty((len(letters), z.shape[0]), dtype=complex)
        fb = None
        for i, letter in enumerate(letters):
            if letter == "nu":
                rows[i] = ds
            elif letter == "w0":
                rows[i] = dz
            else:
                if fb is None:
                    fb = f_batch(self.ext, z, s)
                rows[i] = fb[int(letter[1:])] * dz
        return rows

    def congruence_offset(self, p, q, tol=1e-8):
        """If q = p + (lam, -eta(lam)): return (dz, ds, (m, n)); else None."""
        L = self.ext.lattice
        dz = q[0] - p[0]
        z0r, (m, n) = reduce_mod_lattice(L, dz)
        scale = max(1.0, abs(dz))
        if abs(z0r) > tol * scale:
            return None
        lam = m * L.omega1 + n * L.omega2
        if m == 0 and n == 0:
            eta = 0j
        else:
            eta = eta_lambda(L, (m, n))
        ds = q[1] - p[1]
        if abs(ds + eta) > tol * max(1.0, abs(ds)):
            return None
        return (lam, -eta, (m, n))


class P1Model:
    """Letters om0 = dz/z and om1 = dz/(z - 1) on C minus {0, 1}.

    An origin offset makes path coordinates local: points are origin + w.
    Integrating a piece that hugs the puncture at 1 in w = z - 1 keeps
    dz/(z - 1) = dw/w exact where the absolute coordinate would cancel
    catastrophically.
    """

    name = "p1"

    def __init__(self, guard: float = 1e-12, origin: complex = 0j):
        self.guard = guard
        self.origin = complex(origin)

    def letters(self):
        return ("om0", "om1")

    def dist(self, z):
        z = np.asarray(z, dtype=complex) + self.origin
        return np.minimum(np.abs(z), np.abs(z - 1.0))

    def segment_min_dist(self, seg) -> float:
        punctures = (-self.origin, 1.0 - self.origin)
        return _seg_puncture_dist(seg, punctures)

    def phi_rows(self, letters, z, s, dz, ds):
        rows = np.empty((len(letters), z.shape[0]), dtype=complex)
        for i, letter in enumerate(letters):
            if letter == "om0":
                rows[i] = dz / (z + self.origin)
            elif letter == "om1":
                rows[i] = dz / (z + (self.origin - 1.0))
            else:
                raise ValueError(f"unknown genus-zero letter {letter!r}")
        return rows

    def congruence_offset(self, p, q, tol=1e-10):
        if abs(q[0] - p[0]) <= tol and abs(q[1] - p[1]) <= tol:
            return (0j, 0j, (0, 0))
        return None


# --------------------------------------------------------------------------
# path algebra


def compose_paths(g1: PathSpec, g2: PathSpec, lattice: LatticeData = None) -> PathSpec:
    """The path "g2 first, then g1".

    g1 must start where g2 ends, either exactly or (curve model, when a
    lattice is supplied) up to a lattice translation (lam, -eta(lam)); in
    the latter case g1 is rigidly shifted onto the cover sheet of g2's
    endpoint and the applied deck offset is recorded.
    """
    if g1.model != g2.model:
        raise EndpointMismatch("cannot compose paths from different models")
    p, q = g2.end, g1.start
    scale = max(1.0, abs(p[0]))
    if _close(p, q, scale):
        return PathSpec(model=g1.model, segments=g2.segments + g1.segments)
    if g1.model == "edagger" and lattice is not None:
        from .logforms import ExtLattice as _EL

        model = EdaggerModel(_EL(lattice, nmax=0))
        off = model.congruence_offset(q, p)
        if off is not None:
            # shift by the exact endpoint gap (a float-level lattice
            # translation) so the joined path is continuous to roundoff
            dz, ds = p[0] - q[0], p[1] - q[1]
            mn = off[2]
            shifted = tuple(seg.shifted(dz, ds) for seg in g1.segments)
            return PathSpec(
                model=g1.model, segments=g2.segments + shifted, deck_offset=mn
            )
    raise EndpointMismatch(f"g2 ends at {p} but g1 starts at {q}")


def reverse_path(g: PathSpec) -> PathSpec:
    return PathSpec(
        model=g.model,
        segments=tuple(seg.reversed() for seg in reversed(g.segments)),
    )


def loop_deck(L: LatticeData, g: PathSpec, tol: float = 1e-10):
    """Deck element (m, n) closing the path in the quotient, or None.

    The path is a loop when end - start = (lam, -eta(lam)) for lam =
    m omega1 + n omega2; (0, 0) means an honest closed loop in the cover.
    """
    from .logforms import ExtLattice as _EL

    model = EdaggerModel(_EL(L, nmax=0))
    off = model.congruence_offset(g.start, g.end, tol=max(tol, 1e-10))
    return None if off is None else off[2]


# --------------------------------------------------------------------------
# word tables


class WordTable:
    """All words over a letter alphabet up to a length cutoff, graded-lex,
    with the first/suffix recursion arrays and the split lists used by the
    composition rule."""

    def __init__(self, letters, lmax):
        self.letters = tuple(letters)
        self.lmax = int(lmax)
        words = [()]
        prev = [()]
        for _ in range(self.lmax):
            nxt = []
            for w in prev:
                for a in self.letters:
                    nxt.append(w + (a,))
            words.extend(nxt)
            prev = nxt
        self.words = tuple(words)
        self.index = {w: i for i, w in enumerate(words)}
        nw = len(words)
        self.first = np.empty(nw - 1, dtype=np.int64)
        self.suffix = np.empty(nw - 1, dtype=np.int64)
        letter_idx = {a: i for i, a in enumerate(self.letters)}
        for i, w in enumerate(words[1:], start=1):
            self.first[i - 1] = letter_idx[w[0]]
            self.suffix[i - 1] = self.index[w[1:]]
        # composition splits, CSR layout
        off = [0]
        su, sv = [], []
        for w in words:
            for k in range(len(w) + 1):
                su.append(self.index[w[:k]])
                sv.append(self.index[w[k:]])
            off.append(len(su))
        self.split_u = np.asarray(su, dtype=np.int64)
        self.split_v = np.asarray(sv, dtype=np.int64)
        self.split_off = np.asarray(off, dtype=np.int64)
        self.lengths = np.asarray([len(w) for w in words], dtype=np.int64)


@lru_cache(maxsize=32)
def _word_table(letters, lmax) -> WordTable:
    return WordTable(letters, lmax)


def compose_series(later, earlier, table: WordTable):
    """Series of the concatenated path from the two halves' series."""
    prod = later[table.split_u] * earlier[table.split_v]
    return np.add.reduceat(prod, table.split_off[:-1])


# --------------------------------------------------------------------------
# Gauss-Legendre panel machinery


@lru_cache(maxsize=8)
def _ref_quad(order):
    """Reference nodes/weights plus the node-to-node cumulative matrix.

    The cumulative matrix integrates the interpolating polynomial from -1 to
    each node: values -> Legendre coefficients (discrete orthogonality,
    exact at this order) -> antiderivative evaluated at the nodes.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    P = np.zeros((order + 1, order))
    P[0] = 1.0
    P[1] = x
    for m in range(1, order):
        P[m + 1] = ((2 * m + 1) * x * P[m] - m * P[m - 1]) / (m + 1)
    norms = 2.0 / (2 * np.arange(order) + 1)
    proj = (P[:order] * w) / norms[:, None]
    anti = np.zeros((order, order))
    anti[:, 0] = x + 1.0
    for m in range(1, order):
        anti[:, m] = (P[m + 1] - P[m - 1]) / (2 * m + 1)
    Q = anti @ proj
    return x, w, Q


class _SegmentTransport:
    """Adaptive panel transport over one segment."""

    def __init__(self, model, seg, table, tol, order, guard, max_depth):
        self.model = model
        self.seg = seg
        self.table = table
        self.tol = tol
        self.order = order
        self.guard = guard
        self.max_depth = max_depth
        if guard and guard > 0:
            dmin = model.segment_min_dist(seg)
            if dmin < guard:
                raise GuardViolation(
                    f"segment passes within {dmin:.3e} of a puncture "
                    f"(guard {guard:.3e})"
                )
        self.x, self.w, self.Q = _ref_quad(order)
        self.err = np.zeros(len(table.words))
        self.npanels = 0

    def panel(self, t0, t1):
        jac = 0.5 * (t1 - t0)
        nodes = t0 + (self.x + 1.0) * jac
        z, dz, s, ds = self.seg.at(nodes)
        phi = self.model.phi_rows(self.table.letters, z, s, dz * jac, ds * jac)
        self.npanels += 1
        return _kernels.panel_transport(
            self.table.first, self.table.suffix, phi, self.Q, self.w
        )

    def run(self, t0=0.0, t1=1.0, depth=0):
        whole = self.panel(t0, t1)
        tm = 0.5 * (t0 + t1)
        left = self.panel(t0, tm)
        right = self.panel(tm, t1)
        comp = compose_series(right, left, self.table)
        err = np.abs(comp - whole)
        # budget per unit parameter, plus a tolerance-proportional allowance
        # for roundoff in the panel's own values (keeps deep bisection near
        # steep-but-legal regions from chasing noise; tolerances below double
        # precision still fail as they should)
        scale = max(1.0, float(np.max(np.abs(whole))))
        budget = self.tol * ((t1 - t0) + 0.01 * scale)
        if np.max(err) <= budget:
            self.err += err
            return comp
        if depth >= self.max_depth:
            raise QuadratureFailure(
                f"panel [{t0:.6f}, {t1:.6f}] still off by {np.max(err):.3e} "
                f"(budget {budget:.3e}) at depth {depth}"
            )
        a = self.run(t0, tm, depth + 1)
        b = self.run(tm, t1, depth + 1)
        return compose_series(b, a, self.table)


@dataclass(frozen=True)
class TransportResult:
    """Every iterated integral over the requested alphabet up to lmax."""

    model: str
    letters: tuple
    lmax: int
    values: dict  # word tuple -> complex
    err_by_length: dict  # word length -> summed panel error estimate
    panels_by_segment: tuple

    def coeff(self, word) -> complex:
        word = tuple(word)
        if word not in self.values:
            raise KeyError(f"word {word!r} not transported")
        return self.values[word]


def chen_transport(
    model,
    path: PathSpec,
    letters=None,
    lmax: int = 3,
    tol: float = 1e-10,
    order: int = 24,
    max_depth: int = 14,
    guard: float = None,
) -> TransportResult:
    """All iterated integrals of the letter alphabet along the path.

    Words are filled to length lmax over the given letters (default: the
    model's full alphabet).  Error control is per panel against the
    composed-halves series, with budget tol per unit of path parameter.
    """
    if path.model != model.name:
        raise ValueError(f"path has model {path.model!r}, transport {model.name!r}")
    if lmax < 0 or lmax > 8:
        raise ValueError("lmax must lie in [0, 8]")
    letters = tuple(letters) if letters is not None else tuple(model.letters())
    table = _word_table(letters, lmax)
    guard = model.guard if guard is None else guard
    acc = None
    err = np.zeros(len(table.words))
    panels = []
    for seg in path.segments:
        st = _SegmentTransport(model, seg, table, tol, order, guard, max_depth)
        vals = st.run()
        err += st.err
        panels.append(st.npanels)
        acc = vals if acc is None else compose_series(vals, acc, table)
    ebl = {}
    for i, w in enumerate(table.words):
        n = len(w)
        ebl[n] = max(ebl.get(n, 0.0), float(err[i]))
    return TransportResult(
        model=model.name,
        letters=letters,
        lmax=lmax,
        values={w: complex(acc[i]) for i, w in enumerate(table.words)},
        err_by_length=ebl,
        panels_by_segment=tuple(panels),
    )


# --------------------------------------------------------------------------
# bar elements along paths


def _bar_letters(xi) -> tuple:
    seen = []
    for w in xi.terms:
        for a in w:
            if a not in seen:
                seen.append(a)
    return tuple(sorted(seen))


def eval_bar_with_result(xi, result: TransportResult) -> complex:
    out = 0j
    for w, c in xi.terms.items():
        out += complex(Fraction(c)) * result.coeff(w)
    return out


def eval_bar_element(model, xi, path: PathSpec, tol: float = 1e-10, **kw) -> complex:
    """Pair a degree-0 bar element with the path: sum of coefficient times
    iterated integral, one transport run."""
    if not xi.terms:
        return 0j
    lmax = max(len(w) for w in xi.terms)
    letters = _bar_letters(xi)
    if not letters:  # only the empty word
        return complex(sum(Fraction(c) for c in xi.terms.values()))
    res = chen_transport(model, path, letters=letters, lmax=lmax, tol=tol, **kw)
    return eval_bar_with_result(xi, res)


@dataclass(frozen=True)
class HomotopyReport:
    value1: complex
    value2: complex
    difference: float


def homotopy_report(model, xi, g1: PathSpec, g2: PathSpec, tol: float = 1e-10, **kw):
    """Evaluate the element on both paths and report the discrepancy.

    The paths must share endpoints (up to lattice translation in the curve
    model); no judgment is made about whether the discrepancy is small.
    """
    for p, q, name in ((g1.start, g2.start, "start"), (g1.end, g2.end, "end")):
        if model.congruence_offset(p, q) is None:
            raise EndpointMismatch(f"paths differ at {name}: {p} vs {q}")
    v1 = eval_bar_element(model, xi, g1, tol=tol, **kw)
    v2 = eval_bar_element(model, xi, g2, tol=tol, **kw)
    return HomotopyReport(value1=v1, value2=v2, difference=abs(v1 - v2))


# --------------------------------------------------------------------------
# homotopy certificates for curated pairs


def winding_number(zs, p) -> int:
    """Winding of a discretely sampled closed curve about p."""
    v = np.asarray(zs, dtype=complex) - p
    ang = np.angle(v[1:] / v[:-1])
    total = float(np.sum(ang)) + float(np.angle(v[0] / v[-1]))
    return int(round(total / (2 * math.pi)))


def _sample_loop(g1: PathSpec, g2: PathSpec, n=512):
    t = np.linspace(0.0, 1.0, n)
    z1, _ = g1.at(t)
    z2, _ = g2.at(t)
    return np.concatenate([z1, z2[::-1]])


def homotopy_certificate(model, g1: PathSpec, g2: PathSpec, samples=512, grid=48):
    """Certify that the straight-line homotopy between the paths avoids the
    punctures: returns winding numbers of the difference loop about every
    nearby puncture (all must vanish) and the minimum puncture distance over
    the swept surface."""
    loop = _sample_loop(g1, g2, samples)
    if model.name == "edagger":
        L = model.ext.lattice
        lo, hi = np.min(loop), np.max(loop)
        pts = []
        span = 3
        # lattice points near the loop's bounding box
        cre = (lo.real + hi.real) / 2
        cim = (lo.imag + hi.imag) / 2
        _, (m0, n0) = reduce_mod_lattice(L, complex(cre, cim))
        for dm in range(-span, span + 1):
            for dn in range(-span, span + 1):
                pts.append((m0 + dm) * L.omega1 + (n0 + dn) * L.omega2)
    else:
        pts = [0j, 1.0 + 0j]
    windings = {}
    for p in pts:
        # skip punctures far outside the loop's bounding box
        if p.real < np.min(loop.real) - 1 or p.real > np.max(loop.real) + 1:
            continue
        if p.imag < np.min(loop.imag) - 1 or p.imag > np.max(loop.imag) + 1:
            continue
        windings[p] = winding_number(loop, p)
    t = np.linspace(0.0, 1.0, grid)
    z1, _ = g1.at(t)
    z2, _ = g2.at(t)
    u = np.linspace(0.0, 1.0, grid)[:, None]
    surface = (1 - u) * z1[None, :] + u * z2[None, :]
    dmin = float(np.min(model.dist(surface.ravel())))
    ok = all(wn == 0 for wn in windings.values()) and dmin > 10 * model.guard
    return {"windings": windings, "min_distance": dmin, "ok": ok}


def loop_pair_library(ext: ExtLattice, s0=0.4 - 0.1j):
    """Three curated pairs of paths with matching endpoints, each pair
    homotopic (straight-line homotopy avoids the lattice).  Used by the
    homotopy contract tests."""
    L = ext.lattice
    w1, w2 = L.omega1, L.omega2
    z0 = 0.31 * w1 + 0.22 * w2
    pairs = []

    # 1: open wiggle, s varying on both routes
    z1 = z0 + 0.25 * w1 + 0.10 * w2
    s1 = s0 + 0.30 + 0.20j
    g1 = line_path("edagger", z0, z1, s0, s1)
    zm = z0 + 0.05 * w1 + 0.18 * w2
    sm = s0 - 0.25 + 0.10j
    g2 = PathSpec(
        model="edagger",
        segments=(LineSeg(z0, zm, s0, sm), LineSeg(zm, z1, sm, s1)),
    )
    pairs.append(("wiggle", g1, g2))

    # 2: translate path omega1 rerouted through a bulge
    eta1 = eta_lambda(L, (1, 0))
    ze, se = z0 + w1, s0 - eta1
    g1 = line_path("edagger", z0, ze, s0, se)
    zm = z0 + 0.5 * w1 + 0.15 * w2
    sm = s0 - 0.5 * eta1 + 0.20 - 0.10j
    g2 = PathSpec(
        model="edagger",
        segments=(LineSeg(z0, zm, s0, sm), LineSeg(zm, ze, sm, se)),
    )
    pairs.append(("translate-bulge", g1, g2))

    # 3: loop around the origin, circle versus octagon, s wandering
    r0 = 0.35 * min(abs(w1), abs(w2))
    start = r0 + 0j
    g1 = loop_path(0j, r0, s0=s0)
    corners = []
    for k in range(9):
        ang = 2 * math.pi * k / 8
        rad = r0 * (1.25 if k % 2 else 1.05)
        corners.append(rad * np.exp(1j * ang))
    corners[0] = corners[8] = start
    svals = [s0 + 0.15 * math.sin(math.pi * k / 8) * (1 + 0.5j) for k in range(9)]
    svals[0] = svals[8] = s0
    segs = tuple(
        LineSeg(corners[k], corners[k + 1], svals[k], svals[k + 1]) for k in range(8)
    )
    g2 = PathSpec(model="edagger", segments=segs)
    # rotate the circle to start at the same point (it already does: angle 0)
    pairs.append(("loop-octagon", g1, g2))
    return pairs


# --------------------------------------------------------------------------
# two-form surface oracle


def surface_difference(ext: ExtLattice, two_form_name: str, g1: PathSpec, g2: PathSpec, order=32):
    """Integral of a two-form letter over the straight-line homotopy surface
    between the paths: the Stokes value of int_{g1} a - int_{g2} a for a
    single letter a with d(a) equal to the given two-form combination.

    Independently computed from the transport machinery (2-d quadrature of
    the dz^ds coefficient), so it can serve as the oracle for the failure
    of homotopy invariance of non-closed elements.
    """
    from .logforms import two_form_coeff

    x, w = np.polynomial.legendre.leggauss(order)
    # t-panels aligned to both paths' segment corners so every panel sees a
    # smooth integrand
    breaks = {0.0, 1.0}
    for g in (g1, g2):
        m = len(g.segments)
        breaks.update(k / m for k in range(1, m))
    breaks = sorted(breaks)
    tnodes, twts = [], []
    for a, b in zip(breaks, breaks[1:]):
        tnodes.append(a + (x + 1.0) * 0.5 * (b - a))
        twts.append(w * 0.5 * (b - a))
    t = np.concatenate(tnodes)
    wt = np.concatenate(twts)
    z1, dt1z, s1, dt1s = g1.at_with_deriv(t)
    z2, dt2z, s2, dt2s = g2.at_with_deriv(t)
    uu = 0.5 * (x + 1.0)
    wu = 0.5 * w
    total = 0j
    for iu in range(order):
        u = uu[iu]
        zu = (1 - u) * z1 + u * z2
        su = (1 - u) * s1 + u * s2
        z_t = (1 - u) * dt1z + u * dt2z
        s_t = (1 - u) * dt1s + u * dt2s
        z_u = z2 - z1
        s_u = s2 - s1
        F = two_form_coeff(ext, two_form_name, zu, su)
        jac = z_t * s_u - z_u * s_t
        total += wu[iu] * np.sum(wt * F * jac)
    return complex(total)


def stokes_defect(ext: ExtLattice, letter: str, g1: PathSpec, g2: PathSpec, order=32):
    """Predicted int_{g1}[a] - int_{g2}[a] for a single non-closed letter a,
    from the surface integral of its differential over the straight-line
    homotopy between the paths."""
    from .logforms import dga_presentation

    P = dga_presentation(ext.nmax)
    out = 0j
    for name, coef in P.d_letter(letter).items():
        out += complex(Fraction(coef)) * surface_difference(ext, name, g1, g2, order=order)
    return out


# --------------------------------------------------------------------------
# genus-zero regularized integrals


def _p1_word(word) -> tuple:
    """Accept "01", (0,1), or ("om0","om1"); return letter-name tuple."""
    if isinstance(word, str):
        if not all(ch in "01" for ch in word):
            raise ValueError(f"genus-zero word string must be over 0/1, got {word!r}")
        return tuple(f"om{ch}" for ch in word)
    out = []
    for a in word:
        if a in (0, 1):
            out.append(f"om{a}")
        elif a in ("om0", "om1"):
            out.append(a)
        elif a in ("0", "1"):
            out.append(f"om{a}")
        else:
            raise ValueError(f"unknown genus-zero letter {a!r}")
    return tuple(out)


def regularized_integral_p1(
    word,
    tol: float = 1e-9,
    direction=("0+", "1-"),
    kmin: int = 14,
    kmax: int = 30,
    substeps: int = 2,
    full: bool = False,
):
    """Regularized iterated integral on the interval with tangential ends.

    The integral I(eps) over the straight path from eps to 1 - eps is
    computed on the geometric schedule eps = 2^{-k}, k = kmin .. kmax in
    1/substeps increments, extended incrementally by composing the short
    end pieces onto the previous series.  A least-squares fit against
    {log^j eps} + {eps log^j eps} + {eps^2 log^j eps}, j <= word length,
    strips the divergence; the constant term is returned.

    For admissible words (leading om0, trailing om1) the log coefficients
    must come out zero within tolerance; any fit residual above tolerance
    raises FitInstability.
    """
    if direction != ("0+", "1-"):
        raise ValueError("only the standard tangential pair (0+, 1-) is supported")
    letters = _p1_word(word)
    if not letters:
        raise ValueError("word must be nonempty")
    n = len(letters)
    alphabet = ("om0", "om1")
    table = _word_table(alphabet, n)
    # pieces near 0 run in the absolute coordinate, pieces near 1 in the
    # local coordinate w = z - 1 so that dz/(z-1) never cancels
    model0 = P1Model(guard=0.0)
    model1 = P1Model(guard=0.0, origin=1.0)
    ks = np.arange(kmin * substeps, kmax * substeps + 1) / substeps
    eps = 2.0 ** (-ks)
    vals = []
    widx = table.index[letters]

    def seg_series(model, z0, z1):
        st = _SegmentTransport(
            model,
            LineSeg(z0, z1),
            table,
            tol=min(tol, 1e-11),
            order=24,
            guard=0.0,
            max_depth=16,
        )
        return st.run()

    # transport over [eps_0, 1 - eps_0] split at 1/2, then extend both ends
    acc = compose_series(
        seg_series(model1, -0.5, -eps[0]),
        seg_series(model0, eps[0], 0.5),
        table,
    )
    vals.append(acc[widx])
    for j in range(1, len(eps)):
        lo = seg_series(model0, eps[j], eps[j - 1])
        hi = seg_series(model1, -eps[j - 1], -eps[j])
        acc = compose_series(hi, compose_series(acc, lo, table), table)
        vals.append(acc[widx])
    vals = np.asarray(vals, dtype=complex)
    # Fit columns: log^j eps for the divergent part, eps log^j and
    # eps^2 log^j for the cutoff corrections.  An admissible word (leading
    # om0, trailing om1) converges outright, so its divergent block is
    # dropped; keeping those near-collinear columns would let the solver
    # smear noise into them.  A first full fit cross-checks that choice.
    admissible = letters[0] == "om0" and letters[-1] == "om1"
    lg = np.log(eps)

    def dofit(with_logs):
        cols = [eps**0]
        if with_logs:
            cols.extend(lg**j for j in range(1, n + 1))
        nlog = len(cols) - 1
        for p in (1, 2):
            cols.extend(eps**p * lg**j for j in range(n + 1))
        A = np.stack(cols, axis=1)
        norms = np.max(np.abs(A), axis=0)
        c, _, _, _ = np.linalg.lstsq(A / norms, vals, rcond=None)
        c = c / norms
        resid = float(np.max(np.abs(A @ c - vals)))
        return c, resid, nlog

    scale = max(1.0, float(np.max(np.abs(vals))))
    c, resid, nlog = dofit(with_logs=not admissible)
    if admissible:
        cfull, _, nfull = dofit(with_logs=True)
        worst_log = float(np.max(np.abs(cfull[1 : nfull + 1]), initial=0.0))
        if worst_log > 1e-4 * scale:
            raise FitInstability(
                "word should converge but the cutoff fit found a divergent "
                f"part of size {worst_log:.3e}"
            )
    if resid > max(tol, 1e-10) * scale:
        raise FitInstability(
            f"cutoff fit residual {resid:.3e} exceeds tolerance (scale {scale:.1e})"
        )
    value = complex(c[0])
    logcoeffs = c[1 : nlog + 1]
    if full:
        return {
            "value": value,
            "log_coefficients": [complex(x) for x in logcoeffs],
            "residual": resid,
            "n_points": len(eps),
        }
    return value
