"""Subshifts over Z and Z^2, the canonical point metric, and word counting.

Systems are full shifts (rank 1 or 2) or mixing one-step SFTs on Z given by
a 0/1 transition matrix.  Configurations are finite patterns with a declared
periodic or constant extension, so every orbit evaluation touches finitely
many cells and is computed on demand.

The metric comes from a fixed separating family of cylinder indicators:
enumerate the radius-0 window block first, then radius-1, and so on,
lexicographic within a block, with weight 2^-i for the i-th indicator.
Fixing the enumeration makes every distance reproducible bit for bit and
gives exact combinatorial meaning to separation at small scales: two points
are farther than eps at a site iff their symbols there differ, provided eps
sits between the family's tail bound and its floor (3 * 2^-A).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Callable, Iterable, Sequence

from .errors import (
    BudgetExceeded,
    DimensionMismatch,
    EmptySetError,
    ResolutionError,
)
from .group import FiniteSubset, add, as_element, exact_fraction

DEFAULT_TRUNCATION = 24
ENUMERATION_BUDGET = 1 << 22


# -- systems -----------------------------------------------------------------


class ShiftSystem:
    """Full shift or mixing one-step SFT (rank-1 only for SFTs)."""

    def __init__(self, alphabet_size: int, dim: int = 1, transitions=None):
        if alphabet_size < 2:
            raise ValueError("alphabet needs at least two symbols")
        if dim not in (1, 2):
            raise DimensionMismatch("only rank 1 and 2 lattices are supported")
        self.alphabet_size = alphabet_size
        self.dim = dim
        if transitions is None:
            self.kind = "full"
            self.transitions = None
            self.mixing_gap = 0
        else:
            if dim != 1:
                raise DimensionMismatch("SFTs are rank-1 only")
            T = [tuple(int(v) for v in row) for row in transitions]
            if len(T) != alphabet_size or any(len(r) != alphabet_size for r in T):
                raise ValueError("transition matrix must be square over the alphabet")
            if any(all(v == 0 for v in row) for row in T):
                raise ValueError("transition matrix has an all-zero row")
            if any(all(T[i][j] == 0 for i in range(alphabet_size)) for j in range(alphabet_size)):
                raise ValueError("transition matrix has an all-zero column")
            self.kind = "sft"
            self.transitions = T
            self.mixing_gap = self._mixing_gap(T)

    @staticmethod
    def _mixing_gap(T) -> int:
        """Least power with strictly positive matrix (Wielandt-bounded)."""
        n = len(T)
        cap = n * n - 2 * n + 2 if n > 1 else 1
        power = [row[:] for row in T]
        for m in range(1, max(cap, 1) + 1):
            if all(all(v > 0 for v in row) for row in power):
                return m
            power = [
                [sum(power[i][k] * T[k][j] for k in range(n)) for j in range(n)]
                for i in range(n)
            ]
        raise ValueError("transition matrix is not mixing")

    @classmethod
    def full(cls, alphabet_size: int = 2, dim: int = 1) -> "ShiftSystem":
        return cls(alphabet_size, dim)

    @classmethod
    def golden_mean(cls) -> "ShiftSystem":
        """Binary shift forbidding the word 11."""
        return cls(2, 1, transitions=[[1, 1], [1, 0]])

    def allowed(self, a: int, b: int) -> bool:
        """May symbol b follow symbol a (one step right)?"""
        return self.kind == "full" or self.transitions[a][b] == 1

    def matrix_power_positive(self, a: int, b: int, steps: int) -> bool:
        """Is there an admissible path of `steps` edges from a to b?"""
        if self.kind == "full":
            return True
        if steps >= self.mixing_gap:
            return True
        if steps == 0:
            return a == b
        cache = getattr(self, "_reach_cache", None)
        if cache is None:
            cache = self._reach_cache = {}
        key = (a, steps)
        row = cache.get(key)
        if row is None:
            n = self.alphabet_size
            vec = [1 if i == a else 0 for i in range(n)]
            for _ in range(steps):
                vec = [
                    min(1, sum(vec[i] * self.transitions[i][j] for i in range(n)))
                    for j in range(n)
                ]
            row = cache[key] = vec
        return row[b] > 0

    def __repr__(self):
        tag = self.kind if self.kind == "full" else f"sft gap={self.mixing_gap}"
        return f"ShiftSystem(A={self.alphabet_size}, dim={self.dim}, {tag})"


# -- configurations ----------------------------------------------------------


@dataclass
class Configuration:
    """Finite pattern plus extension rule (total on the lattice).

    `pattern` maps cells inside [origin, origin+shape) to symbols; outside
    the window, a periodic extension reads the pattern modulo the period
    and a constant extension reads the fill symbol.
    """

    system: ShiftSystem
    origin: tuple
    shape: tuple
    symbols: tuple  # row-major over the window
    extension: tuple  # ("constant", fill) or ("periodic", period_vector)

    def __post_init__(self):
        cells = 1
        for s in self.shape:
            cells *= s
        if len(self.symbols) != cells:
            raise ValueError("symbol count does not match window shape")
        kind = self.extension[0]
        if kind == "periodic":
            period = self.extension[1]
            if any(p <= 0 for p in period):
                raise ValueError("periods must be positive")
            if tuple(period) != tuple(self.shape):
                raise ValueError("periodic extension requires window = one period")
        elif kind != "constant":
            raise ValueError(f"unknown extension {kind}")

    # constructors ---------------------------------------------------------

    @classmethod
    def word(cls, system: ShiftSystem, symbols: Sequence[int], origin: int = 0,
             fill: int = 0) -> "Configuration":
        symbols = tuple(symbols)
        return cls(system, (origin,), (len(symbols),), symbols, ("constant", fill))

    @classmethod
    def periodic(cls, system: ShiftSystem, symbols: Sequence[int]) -> "Configuration":
        symbols = tuple(symbols)
        return cls(system, (0,), (len(symbols),), symbols, ("periodic", (len(symbols),)))

    @classmethod
    def constant(cls, system: ShiftSystem, symbol: int, dim: int | None = None) -> "Configuration":
        d = dim or system.dim
        return cls(system, (0,) * d, (1,) * d, (symbol,), ("constant", symbol))

    @classmethod
    def array2d(cls, system: ShiftSystem, rows: Sequence[Sequence[int]],
                origin: tuple = (0, 0), fill: int = 0) -> "Configuration":
        rows = [tuple(r) for r in rows]
        shape = (len(rows), len(rows[0]))
        flat = tuple(v for r in rows for v in r)
        return cls(system, tuple(origin), shape, flat, ("constant", fill))

    # evaluation -------------------------------------------------------------

    def value_at(self, t) -> int:
        t = as_element(t, len(self.shape))
        rel = tuple(c - o for c, o in zip(t, self.origin))
        kind = self.extension[0]
        if kind == "periodic":
            rel = tuple(r % p for r, p in zip(rel, self.extension[1]))
        elif any(not (0 <= r < s) for r, s in zip(rel, self.shape)):
            return self.extension[1]
        idx = 0
        for r, s in zip(rel, self.shape):
            idx = idx * s + r
        return self.symbols[idx]

    def pattern_on(self, window: Iterable[tuple]) -> tuple:
        return tuple(self.value_at(t) for t in window)

    def shift(self, s) -> "Configuration":
        """(s.x) at t equals x at t+s: move the window by -s."""
        s = as_element(s, len(self.origin))
        new_origin = tuple(o - c for o, c in zip(self.origin, s))
        return Configuration(self.system, new_origin, self.shape, self.symbols,
                             self.extension)

    def is_admissible(self) -> bool:
        """SFT constraints across the window and the extension seams."""
        sys = self.system
        if sys.kind == "full":
            return True
        lo = self.origin[0]
        hi = lo + self.shape[0]
        word = [self.value_at((i,)) for i in range(lo, hi)]
        for a, b in zip(word, word[1:]):
            if not sys.allowed(a, b):
                return False
        if self.extension[0] == "periodic":
            return sys.allowed(word[-1], word[0])
        fill = self.extension[1]
        return (
            sys.allowed(fill, fill)
            and sys.allowed(fill, word[0])
            and sys.allowed(word[-1], fill)
        )


def shift_act(s, x: Configuration) -> Configuration:
    return x.shift(s)


# -- the separating family and the point metric ------------------------------


class SeparatingFamily:
    """Canonical enumeration of cylinder indicators with weights 2^-i.

    Blocks by centered-window radius; radius-r block holds the A^(2r+1)^dim
    patterns on W_r = [-r, r]^dim in lexicographic order.  Truncation level
    L keeps indicators 1..L, giving a guaranteed tail error below 2^-L.
    """

    def __init__(self, system: ShiftSystem, truncation: int = DEFAULT_TRUNCATION):
        self.system = system
        self.truncation = truncation
        self._block_starts = [1]
        r = 0
        while self._block_starts[-1] <= truncation:
            size = system.alphabet_size ** ((2 * r + 1) ** system.dim)
            self._block_starts.append(self._block_starts[-1] + size)
            r += 1
        self.max_radius = len(self._block_starts) - 2

    def window(self, radius: int) -> list[tuple]:
        rng = range(-radius, radius + 1)
        if self.system.dim == 1:
            return [(i,) for i in rng]
        return [(i, j) for i in rng for j in rng]

    def block_start(self, radius: int) -> int:
        return self._block_starts[radius]

    def block_end(self, radius: int) -> int:
        return self._block_starts[radius + 1] - 1

    def tail_after_radius(self, radius: int) -> Fraction:
        """Bound on the weight of everything after the radius block."""
        return Fraction(1, 2 ** self.block_end(radius))

    @property
    def floor_threshold(self) -> Fraction:
        """Least distance forced by a center disagreement: 3 * 2^-A."""
        A = self.system.alphabet_size
        return Fraction(3, 2**A)

    def pattern_index(self, radius: int, pattern: Sequence[int]) -> int:
        rank = 0
        for v in pattern:
            rank = rank * self.system.alphabet_size + v
        return self.block_start(radius) + rank

    def point_distance(self, x: Configuration, y: Configuration) -> Fraction:
        """rho(x, y): truncated weighted count of flipped indicators."""
        total = Fraction(0)
        L = self.truncation
        for r in range(self.max_radius + 1):
            if self.block_start(r) > L:
                break
            w = self.window(r)
            px = x.pattern_on(w)
            py = y.pattern_on(w)
            if px == py:
                continue
            for p in (px, py):
                i = self.pattern_index(r, p)
                if i <= L:
                    total += Fraction(1, 2**i)
        return total

    def measure_gap(self, mass_x: Callable[[int, tuple], Fraction],
                    mass_y: Callable[[int, tuple], Fraction],
                    level: int | None = None) -> Fraction:
        """Truncated D between two mass assignments (radius, pattern) -> mass."""
        L = self.truncation if level is None else min(level, self.truncation)
        total = Fraction(0)
        for r in range(self.max_radius + 1):
            start = self.block_start(r)
            if start > L:
                break
            for rank, pattern in enumerate(product(range(self.system.alphabet_size),
                                                   repeat=len(self.window(r)))):
                i = start + rank
                if i > L:
                    break
                diff = mass_x(r, pattern) - mass_y(r, pattern)
                total += Fraction(abs(diff), 2**i)
        return total


@lru_cache(maxsize=16)
def family_for(system_key, truncation: int) -> SeparatingFamily:
    alphabet, dim, transitions = system_key
    sys = ShiftSystem(alphabet, dim, transitions=None if transitions is None else
                      [list(r) for r in transitions])
    return SeparatingFamily(sys, truncation)


def get_family(system: ShiftSystem, truncation: int = DEFAULT_TRUNCATION) -> SeparatingFamily:
    key = (system.alphabet_size, system.dim,
           None if system.transitions is None else tuple(map(tuple, system.transitions)))
    return family_for(key, truncation)


def rho(x: Configuration, y: Configuration, F: FiniteSubset | None = None,
        truncation: int = DEFAULT_TRUNCATION) -> Fraction:
    """Point metric rho(x,y), or rho_F = max over s in F of rho(sx, sy)."""
    if x.system.dim != y.system.dim or x.system.alphabet_size != y.system.alphabet_size:
        raise DimensionMismatch("configurations from different systems")
    fam = get_family(x.system, truncation)
    if F is None:
        return fam.point_distance(x, y)
    if len(F) == 0:
        raise EmptySetError("rho_F needs a nonempty F")
    return max(fam.point_distance(x.shift(s), y.shift(s)) for s in F.sorted_points())


@dataclass
class ResolutionWindow:
    window: FiniteSubset
    radius: int
    tail: Fraction  # agreement on the window forces rho <= tail <= eps
    floor: Fraction  # center disagreement forces rho >= floor > eps


def resolution_window(system: ShiftSystem, epsilon,
                      truncation: int = DEFAULT_TRUNCATION) -> ResolutionWindow:
    """Smallest centered window whose agreement forces rho <= eps, with the
    floor certificate; refuses when eps is at or above the floor."""
    epsilon = exact_fraction(epsilon)
    if epsilon <= 0:
        raise ResolutionError(epsilon, 0)
    fam = get_family(system, truncation)
    if epsilon >= fam.floor_threshold:
        raise ResolutionError(epsilon, fam.floor_threshold)
    for r in range(fam.max_radius + 1):
        tail = fam.tail_after_radius(r)
        if tail <= epsilon:
            return ResolutionWindow(
                FiniteSubset(fam.window(r)), r, tail, fam.floor_threshold
            )
    raise ResolutionError(epsilon, Fraction(1, 2**truncation))


# -- mistake balls -------------------------------------------------------------


class MistakeFunction:
    """Tabulated monotone mistake-density map on (0,1)."""

    def __init__(self, table: Sequence[tuple]):
        pts = sorted((exact_fraction(r), exact_fraction(v)) for r, v in table)
        if not pts:
            raise ValueError("empty mistake table")
        for (r1, v1), (r2, v2) in zip(pts, pts[1:]):
            if r1 == r2:
                raise ValueError("duplicate grid point")
            if v2 < v1:
                raise ValueError("mistake table must be monotone")
        if any(not (0 < v < 1) for _, v in pts):
            raise ValueError("values must lie in (0,1)")
        self.table = pts

    @classmethod
    def half(cls, points: int = 20) -> "MistakeFunction":
        """g(r) = r/2 tabulated on the dyadic grid 2^-1 .. 2^-points."""
        return cls([(Fraction(1, 2**j), Fraction(1, 2 ** (j + 1))) for j in range(1, points)])

    def __call__(self, epsilon) -> Fraction:
        epsilon = exact_fraction(epsilon)
        value = None
        for r, v in self.table:
            if r <= epsilon:
                value = v
            else:
                break
        if value is None:
            raise ValueError(f"epsilon {epsilon} below the tabulated grid")
        return value


def mistake_ball_contains(g: MistakeFunction, F: FiniteSubset, x: Configuration,
                          y: Configuration, epsilon,
                          truncation: int = DEFAULT_TRUNCATION) -> tuple[bool, int]:
    """Is y in B(g; F, x, eps)?  Returns (verdict, mistake count)."""
    epsilon = exact_fraction(epsilon)
    fam = get_family(x.system, truncation)
    mistakes = sum(
        1 for s in F.elements
        if fam.point_distance(x.shift(s), y.shift(s)) > epsilon
    )
    return mistakes <= g(epsilon) * len(F), mistakes


# -- word counting (separated / spanning / hamming) ---------------------------


@dataclass
class SeparationCount:
    count: int
    exact: bool
    mode: str
    lower_bound: bool = False
    note: str = ""

    @property
    def log_count(self) -> float:
        import math

        return math.log(self.count) if self.count > 0 else float("-inf")


def _interval_cells(F: FiniteSubset) -> list[int]:
    return sorted(p[0] for p in F.elements)


def count_admissible_words(system: ShiftSystem, F: FiniteSubset) -> int:
    """Number of distinct restrictions of points of X to F."""
    if system.kind == "full":
        return system.alphabet_size ** len(F)
    cells = _interval_cells(F)
    A = system.alphabet_size
    # DP across sorted cells with gap feasibility between consecutive cells
    counts = {a: 1 for a in range(A)}
    for prev, cur in zip(cells, cells[1:]):
        gap = cur - prev
        new = {}
        for b in range(A):
            total = 0
            for a in range(A):
                if counts.get(a, 0) and system.matrix_power_positive(a, b, gap):
                    total += counts[a]
            if total:
                new[b] = total
        counts = new
    return sum(counts.values())


def enumerate_words(system: ShiftSystem, F: FiniteSubset,
                    budget: int = ENUMERATION_BUDGET):
    """All admissible F-words in lexicographic order (cells sorted)."""
    cells = F.sorted_points()
    A = system.alphabet_size
    if A ** len(cells) > budget:
        raise BudgetExceeded(
            f"{A}^{len(cells)} words exceed the enumeration budget {budget}"
        )
    if system.kind == "full":
        yield from product(range(A), repeat=len(cells))
        return
    idx = [c[0] for c in cells]

    def extend(prefix):
        if len(prefix) == len(cells):
            yield tuple(prefix)
            return
        pos = len(prefix)
        for b in range(A):
            if pos == 0 or system.matrix_power_positive(
                prefix[-1], b, idx[pos] - idx[pos - 1]
            ):
                prefix.append(b)
                yield from extend(prefix)
                prefix.pop()

    yield from extend([])


def hamming_threshold(delta, size: int) -> int:
    """Least integer count satisfying count >= delta * size."""
    bound = exact_fraction(delta) * size
    if bound.denominator == 1:
        return int(bound)
    return int(-(-bound // 1))


def _greedy_code(words, threshold: int):
    chosen = []
    for w in words:
        if all(sum(a != b for a, b in zip(w, v)) >= threshold for v in chosen):
            chosen.append(w)
    return chosen


def _bb_max_code(words: list, threshold: int) -> list:
    """Exact maximum subset with pairwise Hamming distance >= threshold."""
    n = len(words)
    far = [[sum(a != b for a, b in zip(words[i], words[j])) >= threshold
            for j in range(n)] for i in range(n)]
    best = _greedy_code(words, threshold)
    best_idx = len(best)
    chosen: list[int] = []

    def walk(start: int, candidates: list[int]):
        nonlocal best_idx, best
        if len(chosen) + len(candidates) <= best_idx:
            return
        for pos, i in enumerate(candidates):
            rest = [j for j in candidates[pos + 1:] if far[i][j]]
            chosen.append(i)
            if len(chosen) > best_idx:
                best_idx = len(chosen)
                best = [words[j] for j in chosen]
            walk(i, rest)
            chosen.pop()
            if len(chosen) + (len(candidates) - pos - 1) <= best_idx:
                return

    walk(-1, list(range(n)))
    return best


def max_separated(system: ShiftSystem, F: FiniteSubset, epsilon,
                  mode: str = "separated", constraint=None,
                  hamming_delta=None, bb_cap: int = 64,
                  budget: int = ENUMERATION_BUDGET,
                  truncation: int = DEFAULT_TRUNCATION) -> SeparationCount:
    """Largest (F,eps)-separated / smallest spanning / largest
    (delta,F,eps)-separated cardinality under an optional word predicate.

    At word resolution the first two coincide with the number of distinct
    admissible F-words meeting the constraint: a center disagreement forces
    distance above the floor > eps, and agreement on F keeps every orbit
    distance at or below the tail <= eps.
    """
    resolution_window(system, epsilon, truncation)  # refusal guard
    if mode in ("separated", "spanning"):
        if constraint is None:
            return SeparationCount(count_admissible_words(system, F), True, mode)
        count = 0
        for w in enumerate_words(system, F, budget):
            if constraint(w):
                count += 1
        return SeparationCount(count, True, mode)
    if mode == "hamming":
        if hamming_delta is None:
            raise ValueError("hamming mode needs a delta")
        threshold = hamming_threshold(hamming_delta, len(F))
        words = [w for w in enumerate_words(system, F, budget)
                 if constraint is None or constraint(w)]
        if len(words) <= bb_cap:
            code = _bb_max_code(words, threshold)
            return SeparationCount(len(code), True, "hamming")
        code = _greedy_code(words, threshold)
        return SeparationCount(len(code), False, "hamming", lower_bound=True,
                               note=f"greedy over {len(words)} words")
    raise ValueError(f"unknown mode {mode}")
