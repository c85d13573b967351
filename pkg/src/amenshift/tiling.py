"""Quasi-tilings, congruent dyadic tilings, and Folner decompositions.

The greedy tiler is the constructive Ornstein--Weiss placement specialized
to lattices: scan candidate centers in lexicographic order, largest shape
first, and accept a translate when it fits inside the target and brings
strictly more than (1-eps)|shape| cells that are new for its own family.
Strictness keeps every accepted family certifiably eps-disjoint under the
strict definition, which the validator re-checks through a separate path.

Congruent tiling hierarchies are realized as aligned dyadic box partitions
of Z^d; congruence is then divisibility, and invariance of the shapes can
be made as strong as requested by growing the side.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import (
    CoverageShortfall,
    DimensionMismatch,
    EmptySetError,
    UnreachableThreshold,
)
from .group import (
    FiniteSubset,
    FolnerSequence,
    add,
    box_boundary_size,
    exact_fraction,
    invariance_defect,
)

EXACT_DISJOINT_SETS = 3
EXACT_DISJOINT_POINTS = 24


# -- eps-disjointness -------------------------------------------------------


@dataclass
class DisjointWitness:
    """Result of an eps-disjointness search.

    `shrunk` holds the B_i when a witness was found.  A refusal is certain
    only when the exact assignment ran; greedy refusals may be false
    negatives and say so.
    """

    shrunk: list[FiniteSubset] | None
    method: str  # "trivial" | "exact" | "greedy"
    certain: bool

    @property
    def found(self) -> bool:
        return self.shrunk is not None


def _quota(size: int, epsilon: Fraction) -> int:
    """Smallest integer strictly greater than (1-eps)*size."""
    bound = (1 - Fraction(epsilon)) * size
    if bound.denominator == 1:
        return int(bound) + 1
    return int(-(-bound // 1))


def _greedy_peel(sets: Sequence[FiniteSubset], epsilon: Fraction):
    used: set = set()
    shrunk = []
    for A in sets:
        B = A.elements - used
        if len(B) <= (1 - epsilon) * len(A):
            return None
        used |= B
        shrunk.append(FiniteSubset(B, dim=A.dim))
    return shrunk


def _exact_assignment(sets: Sequence[FiniteSubset], epsilon: Fraction):
    """Quota feasibility via Kuhn-style augmenting paths: every set must
    own at least its quota of its own points, each point owned once."""
    quotas = [_quota(len(A), epsilon) for A in sets]
    points = sorted(set().union(*(A.elements for A in sets)))
    pindex = {p: i for i, p in enumerate(points)}
    members = [sorted(A.elements) for A in sets]
    owner = [-1] * len(points)

    def find_point(si: int, visited: set) -> bool:
        for p in members[si]:
            pi = pindex[p]
            if pi in visited:
                continue
            visited.add(pi)
            if owner[pi] == -1 or find_point(owner[pi], visited):
                owner[pi] = si
                return True
        return False

    for si, q in enumerate(quotas):
        for _ in range(q):
            if not find_point(si, set()):
                return None
    shrunk = [
        FiniteSubset(
            [points[pi] for pi in range(len(points)) if owner[pi] == si],
            dim=sets[0].dim,
        )
        for si in range(len(sets))
    ]
    return shrunk


def check_eps_disjoint(sets: Sequence[FiniteSubset], epsilon) -> DisjointWitness:
    """Search for shrunk subsets B_i in A_i, pairwise disjoint, with
    |B_i|/|A_i| strictly above 1-eps.

    Small instances (<= 3 sets of <= 24 points) get an exact assignment;
    larger ones get greedy peeling in the given order, whose refusals are
    reported as inconclusive rather than definitive.
    """
    sets = list(sets)
    epsilon = exact_fraction(epsilon)
    if not sets:
        return DisjointWitness([], "trivial", True)
    dim = sets[0].dim
    for A in sets:
        if A.dim != dim:
            raise DimensionMismatch("mixed ranks in eps-disjointness check")
    allpts = [A.elements for A in sets]
    if all(not (a & b) for i, a in enumerate(allpts) for b in allpts[i + 1 :]):
        return DisjointWitness(
            [FiniteSubset(A.elements, dim=dim) for A in sets], "trivial", True
        )
    if len(sets) <= EXACT_DISJOINT_SETS and all(
        len(A) <= EXACT_DISJOINT_POINTS for A in sets
    ):
        shrunk = _exact_assignment(sets, epsilon)
        return DisjointWitness(shrunk, "exact", True)
    shrunk = _greedy_peel(sets, epsilon)
    return DisjointWitness(shrunk, "greedy", shrunk is not None)


def verify_witness(sets, epsilon, shrunk) -> bool:
    epsilon = exact_fraction(epsilon)
    seen: set = set()
    for A, B in zip(sets, shrunk):
        if not B.issubset(A):
            return False
        if len(B) <= (1 - epsilon) * len(A):
            return False
        if B.elements & seen:
            return False
        seen |= B.elements
    return True


# -- quasi-tiles -------------------------------------------------------------


@dataclass
class QuasiTile:
    """An eps-quasi-tile of `target`: per-shape center sets whose translate
    blocks sit inside the target, are disjoint across shapes, eps-disjoint
    within each shape family, and jointly cover at least (1-eps) of it."""

    shapes: list[FiniteSubset]
    centers: list[list[tuple]]  # acceptance order per shape
    target: FiniteSubset
    epsilon: Fraction
    coverage: Fraction = field(init=False)

    def __post_init__(self):
        self.epsilon = exact_fraction(self.epsilon)
        covered = set()
        for K, Cs in zip(self.shapes, self.centers):
            for c in Cs:
                covered |= {add(k, c) for k in K.elements}
        self.coverage = Fraction(len(covered & self.target.elements), len(self.target))

    def tile_count(self) -> int:
        return sum(len(c) for c in self.centers)

    def translates(self, i: int) -> list[FiniteSubset]:
        K = self.shapes[i]
        return [K.translate(c) for c in self.centers[i]]

    def validate(self) -> list[str]:
        """Re-check properties (1)-(4) of the definition; returns violations.

        Separate code path from the greedy constructor: it only sees
        (shapes, centers, target, epsilon).
        """
        problems = []
        eps = Fraction(self.epsilon)
        blocks = []
        for i, K in enumerate(self.shapes):
            block: set = set()
            for c in self.centers[i]:
                t = {add(k, c) for k in K.elements}
                if not t <= self.target.elements:
                    problems.append(f"shape {i} center {c}: translate leaves target")
                block |= t
            blocks.append(block)
        for i in range(len(blocks)):
            for j in range(i + 1, len(blocks)):
                if blocks[i] & blocks[j]:
                    problems.append(f"shape blocks {i} and {j} intersect")
        for i in range(len(self.shapes)):
            fam = self.translates(i)
            if len(fam) > 1:
                w = check_eps_disjoint(fam, eps)
                if not w.found:
                    problems.append(f"shape family {i} not certifiably {eps}-disjoint")
        covered = set().union(*blocks) if blocks else set()
        if len(covered & self.target.elements) < (1 - eps) * len(self.target):
            problems.append("coverage below 1-eps")
        return problems


def _lex_centers(target: FiniteSubset, shape: FiniteSubset):
    """Candidate centers c with shape+c inside the target, lexicographic."""
    lo, hi = target.bounding_box()
    slo, shi = shape.bounding_box()
    ranges = [
        range(lo[i] - slo[i], hi[i] - shi[i] + 1) for i in range(target.dim)
    ]
    if target.dim == 1:
        cands = [(i,) for i in ranges[0]]
    else:
        cands = [(i, j) for i in ranges[0] for j in ranges[1]]
    tele = target.elements
    for c in cands:
        if all(add(k, c) in tele for k in shape.elements):
            yield c


def quasi_tile(target: FiniteSubset, shapes: Sequence[FiniteSubset], epsilon) -> QuasiTile:
    """Greedy Ornstein--Weiss placement of `shapes` (increasing cardinality)
    into `target`; deterministic.

    Raises CoverageShortfall with the achieved ratio when the greedy pass
    stops below (1-eps) coverage.
    """
    epsilon = exact_fraction(epsilon)
    shapes = list(shapes)
    if not shapes:
        raise EmptySetError("need at least one shape")
    if any(len(s) == 0 for s in shapes):
        raise EmptySetError("shapes must be nonempty")
    sizes = [len(s) for s in shapes]
    if sizes != sorted(sizes):
        raise ValueError("shapes must be indexed by increasing cardinality")
    centers: list[list[tuple]] = [[] for _ in shapes]
    family_cov: dict[int, set] = {i: set() for i in range(len(shapes))}
    covered_other: set = set()
    for i in sorted(range(len(shapes)), key=lambda i: -sizes[i]):
        K = shapes[i]
        need = (1 - epsilon) * len(K)
        for c in _lex_centers(target, K):
            t = {add(k, c) for k in K.elements}
            if t & covered_other:
                continue
            if len(t - family_cov[i]) > need:
                centers[i].append(c)
                family_cov[i] |= t
        covered_other |= family_cov[i]
    qt = QuasiTile(shapes, centers, target, epsilon)
    if qt.coverage < 1 - epsilon:
        raise CoverageShortfall(qt.coverage, 1 - epsilon)
    return qt


# -- disjointification (shrunken covers) ------------------------------------


@dataclass
class CoverPiece:
    shape_index: int
    center: tuple
    cells: FiniteSubset  # absolute positions, already translated


@dataclass
class DisjointCover:
    """Pairwise disjoint shrunken translates covering >= (1-eps)^2 of the
    target; each piece keeps at least (1-eps) of its parent shape."""

    pieces: list[CoverPiece]
    target: FiniteSubset
    epsilon: Fraction

    @property
    def covered(self) -> FiniteSubset:
        cells: set = set()
        for p in self.pieces:
            cells |= p.cells.elements
        return FiniteSubset(cells, dim=self.target.dim)

    @property
    def coverage(self) -> Fraction:
        return Fraction(len(self.covered), len(self.target))

    def validate(self, shapes: Sequence[FiniteSubset]) -> list[str]:
        problems = []
        eps = Fraction(self.epsilon)
        seen: set = set()
        for p in self.pieces:
            parent = shapes[p.shape_index].translate(p.center)
            if not p.cells.issubset(parent):
                problems.append("piece escapes its parent translate")
            if len(p.cells) < (1 - eps) * len(parent):
                problems.append("piece kept less than (1-eps) of its parent")
            if p.cells.elements & seen:
                problems.append("pieces overlap")
            seen |= p.cells.elements
        if len(seen & self.target.elements) < (1 - eps) ** 2 * len(self.target):
            problems.append("coverage below (1-eps)^2")
        return problems


def disjointify(qt: QuasiTile) -> DisjointCover:
    """Shrink each translate family to pairwise disjoint pieces.

    Peeling in acceptance order reproduces the greedy constructor's own
    witness: each translate keeps exactly the cells that were new for its
    family, so the family union is unchanged and every piece keeps more
    than (1-eps) of its parent.
    """
    problems = qt.validate()
    if problems:
        raise ValueError("invalid quasi-tile: " + "; ".join(problems))
    eps = Fraction(qt.epsilon)
    pieces = []
    for i, K in enumerate(qt.shapes):
        used: set = set()
        for c in qt.centers[i]:
            t = {add(k, c) for k in K.elements}
            fresh = t - used
            if len(fresh) < (1 - eps) * len(K):
                raise ValueError("family peeling fell below 1-eps; quasi-tile invalid")
            used |= t
            pieces.append(CoverPiece(i, c, FiniteSubset(fresh, dim=qt.target.dim)))
    return DisjointCover(pieces, qt.target, eps)


# -- congruent dyadic tiling hierarchies -------------------------------------


def minimal_dyadic_side(K: FiniteSubset, epsilon) -> int:
    """Smallest power-of-two side s with [0,s)^d strictly (K,eps)-invariant."""
    epsilon = exact_fraction(epsilon)
    s = 1
    while s < 2**30:
        if invariance_defect(K, FiniteSubset.standard_box(s, K.dim)) < epsilon:
            return s
        s *= 2
    raise UnreachableThreshold("no dyadic side below 2^30 reaches the requested invariance")


@dataclass
class TilingHierarchy:
    """Aligned box partitions of Z^d with sides s_1 | s_2 | ...; the level-k
    tile at lattice point v is [s_k v, s_k (v+1))^d, so every level exactly
    partitions the group and each coarser tile is a union of finer ones."""

    sides: tuple[int, ...]
    dim: int

    def __post_init__(self):
        if not self.sides:
            raise ValueError("need at least one level")
        for a, b in zip(self.sides, self.sides[1:]):
            if b % a != 0 or b <= a:
                raise ValueError(f"side {b} does not properly extend {a}")

    @property
    def levels(self) -> int:
        return len(self.sides)

    def side(self, level: int) -> int:
        return self.sides[level - 1]

    def shape(self, level: int) -> FiniteSubset:
        return FiniteSubset.standard_box(self.side(level), self.dim)

    def tile_corner(self, level: int, point: tuple) -> tuple:
        s = self.side(level)
        return tuple((c // s) * s for c in point)

    def tile_cells(self, level: int, corner: tuple) -> FiniteSubset:
        s = self.side(level)
        return FiniteSubset.box(corner, tuple(c + s for c in corner))

    def tiles_meeting_box(self, level: int, lo: tuple, hi: tuple) -> list[tuple]:
        """Corners of level-`level` tiles meeting the box [lo, hi)."""
        s = self.side(level)
        axes = [range(l // s, -(-h // s)) for l, h in zip(lo, hi)]
        if self.dim == 1:
            return [(v * s,) for v in axes[0]]
        return [(v * s, w * s) for v in axes[0] for w in axes[1]]

    def subtiles(self, level: int, corner: tuple) -> list[tuple]:
        """Level-(level-1) tile corners partitioning the given tile."""
        if level < 2:
            raise ValueError("level 1 has no finer level")
        s_hi = self.side(level)
        return self.tiles_meeting_box(level - 1, corner, tuple(c + s_hi for c in corner))

    def validate_congruence(self, level: int, corner: tuple) -> bool:
        """The finer tiles meeting this tile exactly partition it."""
        cells = self.tile_cells(level, corner)
        seen: set = set()
        for c in self.subtiles(level, corner):
            p = self.tile_cells(level - 1, c)
            if p.elements & seen:
                return False
            seen |= p.elements
        return seen == cells.elements


def build_hierarchy(side_lengths: Sequence[int], dim: int = 1) -> TilingHierarchy:
    """Dyadic congruent hierarchy from increasing power-of-two sides."""
    sides = tuple(int(s) for s in side_lengths)
    for s in sides:
        if s < 1 or (s & (s - 1)) != 0:
            raise ValueError(f"side {s} is not a power of two")
    return TilingHierarchy(sides, dim)


# -- Folner decomposition (the layered brick structure) ----------------------


@dataclass
class FolnerDecomposition:
    """Indices M(0) < ... < M(kmax) plus nested regions H(k) realized as
    boxes [0, h_k)^d, with H(0) empty.  Layer-k bricks are the level-k
    tiles of H(k) \\ H(k-1); step conditions are recorded per level."""

    seq: FolnerSequence
    hier: TilingHierarchy
    beta: list[Fraction]  # beta_1, beta_2, ... strictly decreasing
    M: list[int]  # M[k] = M(k), k = 0..kmax
    h: list[int]  # h[k] bounds H(k); h[0] = 0 (H(0) empty)
    conditions: list[dict]

    @property
    def kmax(self) -> int:
        return len(self.M) - 1

    @property
    def dim(self) -> int:
        return self.hier.dim

    def layer_of(self, n: int) -> int:
        """k with M(k-1) < n <= M(k)."""
        for k in range(1, len(self.M)):
            if self.M[k - 1] < n <= self.M[k]:
                return k
        raise IndexError(f"index {n} outside built range ({self.M[0]}, {self.M[-1]}]")

    def region_bound(self) -> int:
        """Box bound of the full working region H(kmax)."""
        return self.h[self.kmax]

    def layer_brick_corners(self, k: int) -> list[tuple]:
        """Corners of the level-k bricks tiling H(k) \\ H(k-1)."""
        if not 1 <= k <= self.kmax:
            raise IndexError(f"layer {k} outside 1..{self.kmax}")
        s = self.hier.side(k)
        lo_excl, hi = self.h[k - 1], self.h[k]
        d = self.dim
        corners = []
        for corner in self.hier.tiles_meeting_box(k, (0,) * d, (hi,) * d):
            if all(c + s <= hi for c in corner) and not all(
                c + s <= lo_excl for c in corner
            ):
                corners.append(corner)
        return corners

    def brick_counts_in(self, n: int) -> tuple[int, int]:
        """(#Lambda^1, #Lambda^2): layer-k and layer-(k-1) bricks fully
        inside F_n, computed arithmetically from the box geometry."""
        k = self.layer_of(n)
        d = self.dim

        def count(level: int, lo_excl: int, hi: int) -> int:
            s = self.hier.side(level)
            reach = min(n, hi) // s
            start = lo_excl // s
            if reach <= start:
                return 0
            return reach**d - start**d

        c1 = count(k, self.h[k - 1], self.h[k])
        c2 = count(k - 1, self.h[k - 2], self.h[k - 1]) if k >= 2 else 0
        return c1, c2

    def fprime_size(self, n: int) -> int:
        k = self.layer_of(n)
        c1, c2 = self.brick_counts_in(n)
        size = c1 * self.hier.side(k) ** self.dim
        if k >= 2:
            size += c2 * self.hier.side(k - 1) ** self.dim
        return size

    def lemma_bound_holds(self, n: int) -> bool:
        """|F'_n| > (1 - 2 beta_k)|F_n| with exact arithmetic."""
        k = self.layer_of(n)
        return self.fprime_size(n) > (1 - 2 * self.beta[k - 1]) * self.seq.size(n)


def lambda_bricks(dec: FolnerDecomposition, n: int):
    """Materialized (Lambda^1, Lambda^2, F'_n) for one index.

    Brick lists hold (level, corner) descriptors; F'_n is the union of
    their cells.  The coverage bound of the lemma is asserted, not assumed.
    """
    k = dec.layer_of(n)
    d = dec.dim

    def bricks(level: int, lo_excl: int, hi: int) -> list[tuple[int, tuple]]:
        s = dec.hier.side(level)
        reach = min(n, hi) // s
        start = lo_excl // s
        if reach <= start:
            return []
        if d == 1:
            return [(level, (v * s,)) for v in range(start, reach)]
        return [
            (level, (v * s, w * s))
            for v in range(reach)
            for w in range(reach)
            if not (v < start and w < start)
        ]

    lam1 = bricks(k, dec.h[k - 1], dec.h[k])
    lam2 = bricks(k - 1, dec.h[k - 2], dec.h[k - 1]) if k >= 2 else []
    cells: set = set()
    for level, corner in lam1 + lam2:
        cells |= dec.hier.tile_cells(level, corner).elements
    fprime = FiniteSubset(cells, dim=d) if cells else FiniteSubset([], dim=d)
    Fn = dec.seq.subset(n)
    assert fprime.issubset(Fn)
    assert len(fprime) > (1 - 2 * dec.beta[k - 1]) * len(Fn)
    return lam1, lam2, fprime


def _box_defect(side: int, dim: int, n: int) -> Fraction:
    return Fraction(box_boundary_size((side,) * dim, n), n**dim)


def _first_invariant_index(side: int, dim: int, delta: Fraction, lo: int, cap: int) -> int:
    """Smallest n > lo with [0,n)^d strictly (box(side), delta)-invariant.

    The defect is monotone non-increasing for n >= side, so binary search
    over [side, cap] is exact.
    """
    base = max(lo + 1, side)
    if base > cap or _box_defect(side, dim, cap) >= delta:
        raise UnreachableThreshold(
            f"no index below cap {cap} reaches invariance {float(delta):.3g}"
        )
    a, b = base, cap
    if _box_defect(side, dim, a) < delta:
        return a
    while b - a > 1:
        mid = (a + b) // 2
        if _box_defect(side, dim, mid) < delta:
            b = mid
        else:
            a = mid
    return b


def build_decomposition(
    seq: FolnerSequence,
    hier: TilingHierarchy,
    beta: Sequence | None = None,
    kmax: int | None = None,
    cap: int = 10**6,
) -> FolnerDecomposition:
    """Layered decomposition of the standard-box Folner sequence.

    Step k picks the smallest M(k) > M(k-1) such that every n >= M(k) has
    F_n strictly (union S_{k+1}, beta_{k+1}/|union S_{k+1}|)-invariant and
    |H(k-1)| < beta_{k+1}|F_n|; then H(k) collects the level-(k+1) tiles
    meeting F_{M(k)}.  Box geometry makes both conditions monotone in n,
    so the recorded thresholds hold for the whole tail.
    """
    if not seq.is_standard_boxes:
        raise ValueError("decompositions are built over standard boxes only")
    if kmax is None:
        kmax = hier.levels - 1
    if kmax + 1 > hier.levels:
        raise ValueError("hierarchy too shallow for requested kmax")
    if kmax < 1:
        raise ValueError("kmax must be at least 1")
    if beta is None:
        beta = [Fraction(1, 2**k) for k in range(1, kmax + 2)]
    beta = [exact_fraction(b) for b in beta]
    if len(beta) < kmax + 1:
        raise ValueError("need beta_1 .. beta_{kmax+1}")
    for a, b in zip(beta, beta[1:]):
        if not 0 < b < a:
            raise ValueError("beta must be positive and strictly decreasing")
    dim = seq.dim
    M: list[int] = []
    h: list[int] = [0]  # H(0) = empty set
    conditions = []
    for k in range(kmax + 1):
        side = hier.side(k + 1)
        union_size = side**dim
        delta = beta[k] / union_size  # beta_{k+1} in the step numbering
        lo = M[-1] if M else 0
        n_inv = _first_invariant_index(side, dim, delta, lo, cap)
        n_h = lo + 1
        if k >= 1 and h[k - 1] > 0:
            need = Fraction(h[k - 1] ** dim, beta[k])  # n^dim must exceed this
            m = max(1, int(float(need) ** (1.0 / dim)) - 2)
            while Fraction(m**dim) <= need:
                m += 1
            n_h = m
        Mk = max(n_inv, n_h, lo + 1)
        if Mk > cap:
            raise UnreachableThreshold(f"M({k}) would exceed cap {cap}")
        defect = _box_defect(side, dim, Mk)
        assert defect < delta
        if k >= 1:
            assert h[k - 1] ** dim < beta[k] * Mk**dim
        M.append(Mk)
        conditions.append(
            {
                "k": k,
                "M": Mk,
                "shape_side": side,
                "delta": delta,
                "defect_at_M": defect,
                "H_prev_size": h[k - 1] ** dim if k >= 1 else 0,
            }
        )
        if k >= 1:
            hk = side * (-(-Mk // side))
            assert hk >= h[k - 1]
            h.append(hk)
        else:
            # H(0) stays empty; H(1) is produced at the k=1 step from T_2
            pass
    # h currently has kmax entries beyond the leading 0 except that H(1)..
    # H(kmax) come from steps k=1..kmax; verify length
    assert len(h) == kmax + 1
    return FolnerDecomposition(seq, hier, beta, M, h, conditions)
