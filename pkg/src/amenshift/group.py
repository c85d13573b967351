"""Lattice groups Z and Z^2: finite subsets, boundaries, Folner diagnostics.

Group elements are integer tuples of length 1 or 2; composition is
coordinate-wise addition and the identity is the zero vector.  All ratios
are carried as exact `fractions.Fraction` values so that strict-inequality
invariance tests never hinge on float rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .errors import DimensionMismatch, EmptySetError


def exact_fraction(x) -> Fraction:
    """Tolerances/ratios as exact fractions with decimal semantics.

    Floats are read through their shortest decimal repr, so 0.1 means 1/10
    rather than the binary float just above it; strict-inequality tests
    then behave the way the written constant suggests.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


def as_element(g, dim: int | None = None) -> tuple:
    """Normalize ints / sequences to a coordinate tuple."""
    if isinstance(g, int):
        t = (g,)
    else:
        t = tuple(int(c) for c in g)
    if dim is not None and len(t) != dim:
        raise DimensionMismatch(f"element {t} has rank {len(t)}, expected {dim}")
    return t


def add(a: tuple, b: tuple) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def neg(a: tuple) -> tuple:
    return tuple(-x for x in a)


class FiniteSubset:
    """A finite set of lattice points with a fixed rank tag."""

    __slots__ = ("elements", "dim")

    def __init__(self, elements: Iterable, dim: int | None = None):
        pts = frozenset(as_element(g) for g in elements)
        if pts:
            ranks = {len(p) for p in pts}
            if len(ranks) != 1:
                raise DimensionMismatch("mixed-rank elements")
            inferred = ranks.pop()
            if dim is not None and dim != inferred:
                raise DimensionMismatch(f"elements have rank {inferred}, tag says {dim}")
            dim = inferred
        elif dim is None:
            raise EmptySetError("empty set needs an explicit dimension tag")
        self.elements = pts
        self.dim = dim

    # -- constructors ----------------------------------------------------

    @classmethod
    def interval(cls, a: int, b: int) -> "FiniteSubset":
        """[a, b) in Z."""
        return cls(((i,) for i in range(a, b)), dim=1)

    @classmethod
    def box(cls, lo: Sequence[int], hi: Sequence[int]) -> "FiniteSubset":
        """Product of [lo_i, hi_i); rank = len(lo)."""
        lo = tuple(lo)
        hi = tuple(hi)
        if len(lo) == 1:
            return cls(((i,) for i in range(lo[0], hi[0])), dim=1)
        if len(lo) == 2:
            return cls(
                ((i, j) for i in range(lo[0], hi[0]) for j in range(lo[1], hi[1])),
                dim=2,
            )
        raise DimensionMismatch("only rank 1 and 2 are supported")

    @classmethod
    def standard_box(cls, n: int, dim: int) -> "FiniteSubset":
        """[0, n)^dim."""
        return cls.box((0,) * dim, (n,) * dim)

    # -- set behaviour ---------------------------------------------------

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[tuple]:
        return iter(self.elements)

    def __contains__(self, g) -> bool:
        return as_element(g) in self.elements

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteSubset) and self.elements == other.elements

    def __hash__(self) -> int:
        return hash(self.elements)

    def __repr__(self) -> str:
        return f"FiniteSubset({len(self.elements)} pts, dim={self.dim})"

    def translate(self, g) -> "FiniteSubset":
        g = as_element(g, self.dim)
        return FiniteSubset((add(p, g) for p in self.elements), dim=self.dim)

    def dilate(self, other: "FiniteSubset") -> "FiniteSubset":
        """Minkowski sum self + other."""
        self._check_dim(other)
        return FiniteSubset(
            (add(p, q) for p in self.elements for q in other.elements), dim=self.dim
        )

    def negate(self) -> "FiniteSubset":
        return FiniteSubset((neg(p) for p in self.elements), dim=self.dim)

    def union(self, other: "FiniteSubset") -> "FiniteSubset":
        self._check_dim(other)
        return FiniteSubset(self.elements | other.elements, dim=self.dim)

    def difference(self, other: "FiniteSubset") -> "FiniteSubset":
        self._check_dim(other)
        return FiniteSubset(self.elements - other.elements, dim=self.dim)

    def issubset(self, other: "FiniteSubset") -> bool:
        return self.elements <= other.elements

    def bounding_box(self) -> tuple[tuple, tuple]:
        """(lo, hi) with hi exclusive."""
        if not self.elements:
            raise EmptySetError("empty set has no bounding box")
        lo = tuple(min(p[i] for p in self.elements) for i in range(self.dim))
        hi = tuple(max(p[i] for p in self.elements) + 1 for i in range(self.dim))
        return lo, hi

    def is_box(self) -> bool:
        lo, hi = self.bounding_box()
        size = 1
        for a, b in zip(lo, hi):
            size *= b - a
        return size == len(self.elements)

    def sorted_points(self) -> list[tuple]:
        return sorted(self.elements)

    def canonical_lines(self) -> str:
        """Canonical textual form: one comma-separated coordinate tuple per line."""
        return "\n".join(",".join(str(c) for c in p) for p in self.sorted_points())

    def _check_dim(self, other: "FiniteSubset") -> None:
        if self.dim != other.dim:
            raise DimensionMismatch(f"rank {self.dim} vs {other.dim}")


# -- boundary and invariance ----------------------------------------------


def boundary(K: FiniteSubset, F: FiniteSubset) -> FiniteSubset:
    """K-boundary of F: centers c with Kc meeting both F and its complement.

    Candidate centers are exactly F + (-K), since Kc intersects F iff
    c lies in that Minkowski sum; among candidates keep those whose
    translate is not fully inside F.
    """
    if len(K) == 0:
        raise EmptySetError("K must be nonempty")
    K._check_dim(F)
    felems = F.elements
    out = set()
    kpts = list(K.elements)
    for f in felems:
        for k in kpts:
            c = tuple(fc - kc for fc, kc in zip(f, k))
            if c in out:
                continue
            if any(add(k2, c) not in felems for k2 in kpts):
                out.add(c)
    return FiniteSubset(out, dim=F.dim)


def _box_widths(S: FiniteSubset) -> tuple | None:
    """Side lengths if S is a full box, else None."""
    if len(S) == 0:
        return None
    lo, hi = S.bounding_box()
    if not S.is_box():
        return None
    return tuple(b - a for a, b in zip(lo, hi))


def box_boundary_size(widths: Sequence[int], n: int) -> int:
    """|boundary of [0,n)^d w.r.t. a box K of the given side widths|.

    Centers with Kc meeting F form a box of side n+w-1 per axis; those with
    Kc inside F form a box of side max(0, n-w+1).
    """
    outer = 1
    inner = 1
    for w in widths:
        outer *= n + w - 1
        inner *= max(0, n - w + 1)
    return outer - inner


def invariance_defect(K: FiniteSubset, F: FiniteSubset) -> Fraction:
    """|boundary_K(F)| / |F| as an exact fraction.

    F is (K, delta)-invariant iff the returned ratio is strictly below delta.
    """
    if len(F) == 0:
        raise EmptySetError("F must be nonempty")
    K._check_dim(F)
    kw = _box_widths(K)
    if kw is not None and F.is_box():
        lo, hi = F.bounding_box()
        sides = tuple(b - a for a, b in zip(lo, hi))
        if len(set(sides)) == 1:
            return Fraction(box_boundary_size(kw, sides[0]), len(F))
        # non-square box: per-axis product form
        outer = 1
        inner = 1
        for w, s in zip(kw, sides):
            outer *= s + w - 1
            inner *= max(0, s - w + 1)
        return Fraction(outer - inner, len(F))
    return Fraction(len(boundary(K, F)), len(F))


def folner_defect(g, F: FiniteSubset) -> Fraction:
    """|gF symmetric-difference F| / |F|."""
    if len(F) == 0:
        raise EmptySetError("F must be nonempty")
    g = as_element(g, F.dim)
    shifted = {add(p, g) for p in F.elements}
    return Fraction(len(shifted ^ F.elements), len(F))


# -- Folner sequences ------------------------------------------------------


class FolnerSequence:
    """Rule producing the window F_n for each n >= 1."""

    def __init__(self, rule, dim: int, name: str = "custom"):
        self._rule = rule
        self.dim = dim
        self.name = name

    @classmethod
    def standard_boxes(cls, dim: int) -> "FolnerSequence":
        """F_n = [0, n)^dim, the default sequence everywhere in this package."""
        return cls(lambda n: FiniteSubset.standard_box(n, dim), dim, name=f"boxes-z{dim}")

    @classmethod
    def from_list(cls, subsets: Sequence[FiniteSubset]) -> "FolnerSequence":
        subsets = list(subsets)
        if not subsets:
            raise EmptySetError("need at least one window")
        dim = subsets[0].dim

        def rule(n):
            if not 1 <= n <= len(subsets):
                raise IndexError(f"custom sequence has {len(subsets)} windows")
            return subsets[n - 1]

        return cls(rule, dim, name="custom-list")

    def subset(self, n: int) -> FiniteSubset:
        if n < 1:
            raise IndexError("Folner index starts at 1")
        F = self._rule(n)
        if len(F) == 0:
            raise EmptySetError(f"F_{n} is empty")
        return F

    def size(self, n: int) -> int:
        if self.name.startswith("boxes-z"):
            return n**self.dim
        return len(self.subset(n))

    @property
    def is_standard_boxes(self) -> bool:
        return self.name.startswith("boxes-z")


@dataclass
class SequenceDiagnostics:
    n: int
    size: int
    temperedness_ratio: Fraction | None  # |U_{k<n} F_k^{-1} F_n| / |F_n|
    growth_ratio: float  # |F_n| / log n


def sequence_diagnostics(seq: FolnerSequence, up_to: int) -> dict:
    """Temperedness and superlogarithmic-growth diagnostics for n <= up_to.

    The temperedness ratio is computed by exhaustive union; the growth flag
    records whether |F_n|/log n is monotone increasing over 2..up_to.
    """
    if up_to < 2:
        raise ValueError("up_to must be at least 2")
    rows = []
    prior: list[FiniteSubset] = []
    for n in range(1, up_to + 1):
        F = seq.subset(n)
        if n == 1:
            ratio = None
        else:
            union = set()
            Fpts = list(F.elements)
            for Fk in prior:
                for a in Fk.elements:
                    na = neg(a)
                    for b in Fpts:
                        union.add(add(na, b))
            ratio = Fraction(len(union), len(F))
        growth = len(F) / math.log(n) if n >= 2 else float("inf")
        rows.append(SequenceDiagnostics(n, len(F), ratio, growth))
        prior.append(F)
    growths = [r.growth_ratio for r in rows if r.n >= 2]
    monotone = all(b > a for a, b in zip(growths, growths[1:]))
    return {
        "rows": rows,
        "growth_monotone_increasing": monotone,
        "max_temperedness_ratio": max(
            (r.temperedness_ratio for r in rows if r.temperedness_ratio is not None),
            default=None,
        ),
    }
