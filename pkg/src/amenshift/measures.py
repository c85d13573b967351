"""Cylinder-marginal measures, empirical measures, the weak* metric, and
exact entropies for product and Markov classes.

A measure is a stack of marginal tables on centered windows up to a depth
(window radius).  Every pairing needed by the truncated weak* metric is a
finite table lookup, so distances are exact dyadic rationals and the
triangle inequality can be asserted with zero tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

from .errors import DimensionMismatch, SpecMissing
from .group import FiniteSubset, add, exact_fraction
from .shift import (
    DEFAULT_TRUNCATION,
    Configuration,
    ShiftSystem,
    get_family,
)

STATIONARITY_TOL = Fraction(1, 10**10)
# depth is 1-based: depth d holds marginals on centered windows of radius
# 0 .. d-1, so depth 1 is single-site frequencies and depth 3 (the rank-1
# default) is exactly what the truncated weak* metric at L=24 consumes.
DEFAULT_DEPTH_1D = 3
DEFAULT_DEPTH_2D = 2


def _window(radius: int, dim: int) -> list[tuple]:
    rng = range(-radius, radius + 1)
    if dim == 1:
        return [(i,) for i in rng]
    return [(i, j) for i in rng for j in rng]


@dataclass
class CylinderMeasure:
    """Marginal tables on centered windows of radius 0..depth-1."""

    alphabet_size: int
    dim: int
    depth: int  # 1-based: tables cover radii 0 .. depth-1
    tables: dict  # radius -> {pattern tuple: Fraction}
    invariant: bool
    spec: tuple | None  # generating spec, None for bare tables

    @property
    def max_radius(self) -> int:
        return self.depth - 1

    def mass(self, radius: int, pattern: tuple) -> Fraction:
        if radius > self.max_radius:
            raise ValueError(f"depth {self.depth} cannot answer radius {radius}")
        return self.tables[radius].get(tuple(pattern), Fraction(0))

    def mass_fn(self):
        return lambda r, pattern: self.mass(r, pattern)

    def marginal(self, offsets: Sequence[tuple], pattern: Sequence[int]) -> Fraction:
        """Mass of the cylinder fixing `pattern` on arbitrary offsets, read
        off the smallest centered window containing them."""
        offsets = [tuple(o) for o in offsets]
        radius = max(max(abs(c) for c in o) for o in offsets)
        if radius > self.max_radius:
            raise ValueError(f"cylinder at radius {radius} exceeds depth {self.depth}")
        window = _window(radius, self.dim)
        fixed = dict(zip(offsets, pattern))
        total = Fraction(0)
        free = [w for w in window if w not in fixed]
        for fill in product(range(self.alphabet_size), repeat=len(free)):
            assign = dict(zip(free, fill))
            assign.update(fixed)
            total += self.mass(radius, tuple(assign[w] for w in window))
        return total

    def check_consistency(self) -> list[str]:
        """Nonnegativity, total mass one, restriction consistency."""
        problems = []
        for r, table in self.tables.items():
            s = sum(table.values())
            if any(v < 0 for v in table.values()):
                problems.append(f"radius {r}: negative mass")
            if s != 1:
                problems.append(f"radius {r}: total mass {s}")
        for r in range(1, self.max_radius + 1):
            inner = _window(r - 1, self.dim)
            outer = _window(r, self.dim)
            keep = [outer.index(w) for w in inner]
            collapsed: dict = {}
            for pat, v in self.tables[r].items():
                key = tuple(pat[i] for i in keep)
                collapsed[key] = collapsed.get(key, Fraction(0)) + v
            for pat, v in self.tables[r - 1].items():
                if collapsed.get(pat, Fraction(0)) != v:
                    problems.append(f"radius {r} does not restrict to radius {r-1}")
                    break
        return problems


def _bernoulli_tables(p: Sequence[Fraction], dim: int, depth: int) -> dict:
    tables = {}
    for r in range(depth):
        cells = len(_window(r, dim))
        table = {}
        for pat in product(range(len(p)), repeat=cells):
            m = Fraction(1)
            for s in pat:
                m *= p[s]
            table[pat] = m
        tables[r] = table
    return tables


def _markov_tables(P, pi, depth: int) -> dict:
    tables = {}
    for r in range(depth):
        cells = 2 * r + 1
        table = {}
        for pat in product(range(len(pi)), repeat=cells):
            m = pi[pat[0]]
            for a, b in zip(pat, pat[1:]):
                m *= P[a][b]
            table[pat] = m
        tables[r] = table
    return tables


def make_measure(spec, dim: int = 1, depth: int | None = None) -> CylinderMeasure:
    """Measures from generating specs.

    spec is ("bernoulli", p_vector), ("markov", P, pi), or
    ("convex", weights, [measures]).  Probability inputs are read with
    decimal semantics and normalized exactly when within tolerance.
    """
    if depth is None:
        depth = DEFAULT_DEPTH_1D if dim == 1 else DEFAULT_DEPTH_2D
    kind = spec[0]
    if kind == "bernoulli":
        p = [exact_fraction(v) for v in spec[1]]
        if any(v < 0 for v in p):
            raise ValueError("negative probability")
        s = sum(p)
        if s == 0:
            raise ValueError("zero vector")
        if abs(s - 1) > STATIONARITY_TOL:
            raise ValueError(f"probabilities sum to {float(s)}")
        p = [v / s for v in p]
        return CylinderMeasure(
            len(p), dim, depth, _bernoulli_tables(p, dim, depth), True,
            ("bernoulli", tuple(p)),
        )
    if kind == "markov":
        if dim != 1:
            raise DimensionMismatch("Markov measures are rank-1 only")
        P = [[exact_fraction(v) for v in row] for row in spec[1]]
        pi = [exact_fraction(v) for v in spec[2]]
        n = len(pi)
        if len(P) != n or any(len(r) != n for r in P):
            raise ValueError("shape mismatch")
        for row in P:
            s = sum(row)
            if abs(s - 1) > STATIONARITY_TOL:
                raise ValueError("non-stochastic row")
        P = [[v / sum(row) for v in row] for row in P]
        s = sum(pi)
        if abs(s - 1) > STATIONARITY_TOL:
            raise ValueError("pi does not sum to one")
        pi = [v / s for v in pi]
        for j in range(n):
            drift = sum(pi[i] * P[i][j] for i in range(n)) - pi[j]
            if abs(drift) > STATIONARITY_TOL:
                raise ValueError("pi is not stationary for P")
        return CylinderMeasure(
            n, dim, depth, _markov_tables(P, pi, depth), True,
            ("markov", tuple(map(tuple, P)), tuple(pi)),
        )
    if kind == "convex":
        weights = [exact_fraction(w) for w in spec[1]]
        comps: list[CylinderMeasure] = list(spec[2])
        if len(weights) != len(comps) or not comps:
            raise ValueError("weights and components mismatch")
        if any(w < 0 for w in weights) or sum(weights) != 1:
            raise ValueError("weights must be a probability vector")
        A = comps[0].alphabet_size
        d = min(c.depth for c in comps)
        if depth > d:
            depth = d
        tables: dict = {}
        for r in range(depth):
            table: dict = {}
            for c, w in zip(comps, weights):
                for pat, v in c.tables[r].items():
                    table[pat] = table.get(pat, Fraction(0)) + w * v
            tables[r] = table
        return CylinderMeasure(
            A, dim, depth, tables, all(c.invariant for c in comps),
            ("convex", tuple(weights), tuple(comps)),
        )
    raise ValueError(f"unknown measure spec {kind}")


def bernoulli(p, dim: int = 1, depth: int | None = None) -> CylinderMeasure:
    """Binary convenience: bernoulli(p) puts mass p on symbol 1."""
    if isinstance(p, (int, float, Fraction, str)):
        q = exact_fraction(p)
        return make_measure(("bernoulli", (1 - q, q)), dim, depth)
    return make_measure(("bernoulli", tuple(p)), dim, depth)


def empirical_measure(x: Configuration, F: FiniteSubset, depth: int | None = None) -> CylinderMeasure:
    """E_F(x) evaluated on cylinders of radius <= depth, exact rationals.

    The configuration's extension rule makes the orbit total, so there is
    no boundary convention here: every s in F contributes.
    """
    if depth is None:
        depth = DEFAULT_DEPTH_1D if x.system.dim == 1 else DEFAULT_DEPTH_2D
    dim = x.system.dim
    n = len(F)
    if n == 0:
        raise ValueError("empirical measure over an empty window")
    tables: dict = {}
    for r in range(depth):
        window = _window(r, dim)
        counts: dict = {}
        for s in F.elements:
            pat = tuple(x.value_at(add(w, s)) for w in window)
            counts[pat] = counts.get(pat, 0) + 1
        tables[r] = {pat: Fraction(c, n) for pat, c in counts.items()}
    return CylinderMeasure(x.system.alphabet_size, dim, depth, tables, False,
                           ("empirical", None))


# -- the weak* metric ---------------------------------------------------------


def _family_for_measure(mu: CylinderMeasure, truncation: int):
    return get_family(ShiftSystem.full(mu.alphabet_size, mu.dim), truncation)


def depth_level(mu_alphabet: int, dim: int, depth: int,
                truncation: int = DEFAULT_TRUNCATION) -> int:
    """Last enumeration index measurable at the given 1-based depth."""
    fam = get_family(ShiftSystem.full(mu_alphabet, dim), truncation)
    r = min(depth - 1, fam.max_radius)
    return min(fam.block_end(r), truncation)


def weakstar_distance(mu: CylinderMeasure, nu: CylinderMeasure,
                      level: int | None = None,
                      truncation: int = DEFAULT_TRUNCATION) -> Fraction:
    """Truncated D(mu, nu); exact dyadic rational with tail error < 2^-level."""
    if (mu.alphabet_size, mu.dim) != (nu.alphabet_size, nu.dim):
        raise DimensionMismatch("measures over different lattices or alphabets")
    fam = _family_for_measure(mu, truncation)
    L = truncation if level is None else min(level, truncation)
    needed = 0
    for r in range(fam.max_radius + 1):
        if fam.block_start(r) <= L:
            needed = r
    if needed > mu.max_radius or needed > nu.max_radius:
        raise ValueError(
            f"truncation level {L} needs window radius {needed}, have depths "
            f"{mu.depth} and {nu.depth}"
        )
    return fam.measure_gap(mu.mass_fn(), nu.mass_fn(), level=L)


@dataclass
class MeasureSet:
    """Compact connected target set: polyline through vertices, or their
    convex hull; distance queries run over a uniform parameter grid whose
    step is part of every answer."""

    vertices: list[CylinderMeasure]
    mode: str = "polyline"  # or "convex-hull"
    step: Fraction = field(default_factory=lambda: Fraction(1, 64))

    def __post_init__(self):
        if not self.vertices:
            raise ValueError("a measure set needs at least one vertex")
        if self.mode not in ("polyline", "convex-hull"):
            raise ValueError(f"unknown mode {self.mode}")
        self.step = exact_fraction(self.step)

    @property
    def depth(self) -> int:
        return min(v.depth for v in self.vertices)

    def discretization(self) -> list[CylinderMeasure]:
        if len(self.vertices) == 1:
            return list(self.vertices)
        pts: list[CylinderMeasure] = []
        if self.mode == "polyline" or len(self.vertices) == 2:
            for a, b in zip(self.vertices, self.vertices[1:]):
                t = Fraction(0)
                while t < 1:
                    pts.append(make_measure(("convex", (1 - t, t), (a, b)),
                                            a.dim, self.depth))
                    t += self.step
            pts.append(self.vertices[-1])
            return pts
        # convex hull over >2 vertices: simplex grid at the same step
        k = len(self.vertices)
        denom = int(1 / self.step)

        def simplex(total, parts):
            if parts == 1:
                yield (total,)
                return
            for i in range(total + 1):
                for rest in simplex(total - i, parts - 1):
                    yield (i,) + rest

        for comp in simplex(denom, k):
            w = [Fraction(c, denom) for c in comp]
            pts.append(make_measure(("convex", tuple(w), tuple(self.vertices)),
                                    self.vertices[0].dim, self.depth))
        return pts

    def max_entropy_vertex(self) -> int:
        """Index of the vertex with maximal metric entropy (first wins)."""
        best, arg = None, 0
        for i, v in enumerate(self.vertices):
            h = metric_entropy(v)
            if best is None or h > best + 1e-15:
                best, arg = h, i
        return arg


@dataclass
class SetDistance:
    value: Fraction
    step: Fraction
    argmin_index: int


def distance_to_set(mu: CylinderMeasure, K: MeasureSet,
                    level: int | None = None,
                    truncation: int = DEFAULT_TRUNCATION) -> SetDistance:
    """min over the discretized set of truncated D, with the step reported."""
    best = None
    arg = 0
    for i, nu in enumerate(K.discretization()):
        d = weakstar_distance(mu, nu, level=level, truncation=truncation)
        if best is None or d < best:
            best, arg = d, i
    return SetDistance(best, K.step, arg)


def discretization_slack(K: MeasureSet, level: int | None = None,
                         truncation: int = DEFAULT_TRUNCATION) -> Fraction:
    """Half the largest D-gap between adjacent grid points: how far the
    discretized minimum can sit above the true set distance."""
    pts = K.discretization()
    if len(pts) <= 1:
        return Fraction(0)
    worst = max(
        weakstar_distance(a, b, level=level, truncation=truncation)
        for a, b in zip(pts, pts[1:])
    )
    return worst / 2


# -- entropies ----------------------------------------------------------------


def metric_entropy(mu: CylinderMeasure) -> float:
    """Exact-formula entropy in nats for spec-backed measures."""
    if mu.spec is None or mu.spec[0] == "empirical":
        raise SpecMissing("empirical measures have no exact entropy formula; "
                          "use entropy_rate_estimate")
    kind = mu.spec[0]
    if kind == "bernoulli":
        p = mu.spec[1]
        return -sum(float(v) * math.log(float(v)) for v in p if v > 0)
    if kind == "markov":
        P, pi = mu.spec[1], mu.spec[2]
        total = 0.0
        for i, row in enumerate(P):
            for v in row:
                if v > 0:
                    total -= float(pi[i]) * float(v) * math.log(float(v))
        return total
    if kind == "convex":
        weights, comps = mu.spec[1], mu.spec[2]
        return sum(float(w) * metric_entropy(c) for w, c in zip(weights, comps))
    raise SpecMissing(f"no entropy formula for {kind}")


def entropy_rate_estimate(mu: CylinderMeasure, depths: Sequence[int] | None = None):
    """H(window_r)/|window_r| per window radius; non-increasing for
    invariant measures, reported with the last decrement as an error proxy."""
    if depths is None:
        depths = range(mu.depth)
    values = []
    for r in depths:
        h = 0.0
        cells = len(_window(r, mu.dim))
        for v in mu.tables[r].values():
            if v > 0:
                h -= float(v) * math.log(float(v))
        values.append((r, h / cells))
    increments = [abs(b[1] - a[1]) for a, b in zip(values, values[1:])]
    return {
        "values": values,
        "last_increment": increments[-1] if increments else 0.0,
    }
