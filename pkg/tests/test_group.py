"""Boundary / invariance / Folner diagnostics for the lattice groups."""

import random
from fractions import Fraction

import pytest

from amenshift.errors import DimensionMismatch, EmptySetError
from amenshift.group import (
    FiniteSubset,
    FolnerSequence,
    add,
    boundary,
    box_boundary_size,
    folner_defect,
    invariance_defect,
    sequence_diagnostics,
)


def brute_boundary(K, F, pad=3):
    """Oracle: scan a box well beyond F + (-K) and test the definition directly."""
    lo, hi = F.bounding_box()
    klo, khi = K.bounding_box()
    width = max(khi[i] - klo[i] for i in range(F.dim))
    out = set()
    ranges = [range(lo[i] - pad * width, hi[i] + pad * width) for i in range(F.dim)]
    if F.dim == 1:
        candidates = [(i,) for i in ranges[0]]
    else:
        candidates = [(i, j) for i in ranges[0] for j in ranges[1]]
    for c in candidates:
        translate = {add(k, c) for k in K.elements}
        if translate & F.elements and translate - F.elements:
            out.add(c)
    return out


def test_boundary_singleton_K_is_empty():
    K = FiniteSubset([0])
    F = FiniteSubset.interval(0, 10)
    assert len(boundary(K, F)) == 0


def test_boundary_window_interval():
    K = FiniteSubset([-1, 0, 1])
    F = FiniteSubset.interval(0, 10)
    got = boundary(K, F)
    assert got.elements == {(-1,), (0,), (9,), (10,)}
    assert got.elements == brute_boundary(K, F)


def test_boundary_2d_matches_bruteforce():
    K = FiniteSubset([(0, 0), (1, 0), (0, 1)])
    F = FiniteSubset.box((0, 0), (5, 5))
    got = boundary(K, F)
    oracle = brute_boundary(K, F)
    assert got.elements == oracle
    # frozen from the oracle: 35 candidate centers (union of the three
    # shifted 5x5 boxes) minus the 4x4 block of fully-interior translates
    assert len(oracle) == 19


def test_boundary_contained_in_search_box():
    rng = random.Random(11)
    for _ in range(20):
        dim = rng.choice([1, 2])
        if dim == 1:
            F = FiniteSubset.interval(0, rng.randint(3, 12))
            K = FiniteSubset([rng.randint(-2, 2) for _ in range(rng.randint(1, 3))])
        else:
            F = FiniteSubset.box((0, 0), (rng.randint(2, 6), rng.randint(2, 6)))
            K = FiniteSubset(
                [(rng.randint(-2, 2), rng.randint(-2, 2)) for _ in range(rng.randint(1, 3))]
            )
        search = F.dilate(K.negate())
        assert boundary(K, F).issubset(search)


def test_boundary_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        boundary(FiniteSubset([0]), FiniteSubset.box((0, 0), (2, 2)))


def test_invariance_defect_examples():
    K = FiniteSubset([-1, 0, 1])
    assert invariance_defect(K, FiniteSubset.interval(0, 10)) == Fraction(4, 10)
    assert invariance_defect(FiniteSubset([0]), FiniteSubset.interval(0, 7)) == 0
    # closed form 4/n checked against enumeration for n <= 50
    for n in range(3, 51):
        F = FiniteSubset.interval(0, n)
        assert invariance_defect(K, F) == Fraction(4, n)
        assert Fraction(len(brute_boundary(K, F)), n) == Fraction(4, n)


def test_invariance_defect_box_fast_path_matches_enumeration():
    K = FiniteSubset([(0, 0), (1, 0), (0, 1), (1, 1)])
    for n in (3, 5, 8):
        F = FiniteSubset.box((0, 0), (n, n))
        assert invariance_defect(K, F) == Fraction(len(brute_boundary(K, F)), n * n)
    assert box_boundary_size((2, 2), 5) == 36 - 16


def test_invariance_defect_translation_invariant():
    rng = random.Random(7)
    K = FiniteSubset([-1, 0, 2])
    F = FiniteSubset([rng.randint(0, 20) for _ in range(12)])
    base = invariance_defect(K, F)
    for c in (3, -5, 17):
        assert invariance_defect(K, F.translate(c)) == base


def test_invariance_defect_empty_F():
    with pytest.raises(EmptySetError):
        invariance_defect(FiniteSubset([0]), FiniteSubset([], dim=1))


def test_invariance_defect_monotone_for_boxes():
    K = FiniteSubset([-1, 0, 1])
    vals = [invariance_defect(K, FiniteSubset.interval(0, n)) for n in range(3, 101)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    K2 = FiniteSubset([(0, 0), (1, 1)])
    vals2 = [
        invariance_defect(K2, FiniteSubset.box((0, 0), (n, n))) for n in range(2, 40)
    ]
    assert all(b < a for a, b in zip(vals2, vals2[1:]))


def test_folner_defect_examples():
    F = FiniteSubset.interval(0, 10)
    assert folner_defect(1, F) == Fraction(2, 10)
    assert folner_defect(0, F) == 0
    F2 = FiniteSubset.box((0, 0), (8, 8))
    assert folner_defect((1, 0), F2) == Fraction(2 * 8, 64)


def test_folner_defect_inverse_symmetry():
    rng = random.Random(3)
    for _ in range(10):
        F = FiniteSubset([rng.randint(0, 15) for _ in range(8)])
        g = rng.randint(-4, 4)
        assert folner_defect(g, F) == folner_defect(-g, F.translate(g))


def test_sequence_diagnostics_boxes_z1():
    seq = FolnerSequence.standard_boxes(1)
    diag = sequence_diagnostics(seq, 10)
    for row in diag["rows"]:
        if row.temperedness_ratio is not None:
            assert row.temperedness_ratio <= 2
    # n/log n dips from n=2 to n=3 (minimum at e), so the whole-range flag
    # is off; past that the ratio climbs.
    assert not diag["growth_monotone_increasing"]
    growths = [r.growth_ratio for r in diag["rows"] if r.n >= 3]
    assert all(b > a for a, b in zip(growths, growths[1:]))


def test_sequence_diagnostics_boxes_z2_growth():
    seq = FolnerSequence.standard_boxes(2)
    diag = sequence_diagnostics(seq, 8)
    rows = [r for r in diag["rows"] if r.n >= 2]
    import math

    for r in rows:
        assert r.growth_ratio == pytest.approx(r.n**2 / math.log(r.n))
    assert diag["growth_monotone_increasing"]


def test_sequence_diagnostics_constant_sequence_fails_growth():
    seq = FolnerSequence.from_list([FiniteSubset([0]) for _ in range(8)])
    diag = sequence_diagnostics(seq, 8)
    assert not diag["growth_monotone_increasing"]


def test_folner_sequence_sizes_strictly_increase():
    for dim in (1, 2):
        seq = FolnerSequence.standard_boxes(dim)
        sizes = [seq.size(n) for n in range(1, 12)]
        assert all(b > a for a, b in zip(sizes, sizes[1:]))


def test_canonical_text_form():
    S = FiniteSubset([(1, 2), (0, 0), (0, 1)])
    assert S.canonical_lines() == "0,0\n0,1\n1,2"
