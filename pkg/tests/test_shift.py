"""Shift systems, the canonical point metric, and word counting."""

import random
from fractions import Fraction
from itertools import product

import pytest

from amenshift.errors import ResolutionError
from amenshift.group import FiniteSubset
from amenshift.shift import (
    Configuration,
    MistakeFunction,
    SeparationCount,
    ShiftSystem,
    count_admissible_words,
    enumerate_words,
    get_family,
    hamming_threshold,
    max_separated,
    mistake_ball_contains,
    resolution_window,
    rho,
    shift_act,
)

BIN = ShiftSystem.full(2)
GM = ShiftSystem.golden_mean()


def oracle_rho(x, y, truncation=24):
    """Direct summation over the canonical enumeration, written from the
    definition: weight 2^-i for every flipped indicator with index <= L."""
    fam = get_family(x.system, truncation)
    total = Fraction(0)
    for r in range(fam.max_radius + 1):
        start = fam.block_start(r)
        if start > truncation:
            break
        window = fam.window(r)
        for rank, pattern in enumerate(
            product(range(x.system.alphabet_size), repeat=len(window))
        ):
            i = start + rank
            if i > truncation:
                break
            fx = 1 if x.pattern_on(window) == pattern else 0
            fy = 1 if y.pattern_on(window) == pattern else 0
            total += Fraction(abs(fx - fy), 2**i)
    return total


def random_config(rng, system=BIN, span=8):
    kind = rng.choice(["word", "periodic", "constant"])
    if kind == "word":
        return Configuration.word(
            system,
            [rng.randrange(system.alphabet_size) for _ in range(rng.randint(1, span))],
            origin=rng.randint(-3, 3),
            fill=rng.randrange(system.alphabet_size),
        )
    if kind == "periodic":
        return Configuration.periodic(
            system, [rng.randrange(system.alphabet_size) for _ in range(rng.randint(1, span))]
        )
    return Configuration.constant(system, rng.randrange(system.alphabet_size))


# -- action -------------------------------------------------------------------


def test_shift_identity():
    x = Configuration.periodic(BIN, [0, 1])
    y = shift_act(0, x)
    window = [(i,) for i in range(-4, 5)]
    assert y.pattern_on(window) == x.pattern_on(window)


def test_shift_period_two_point():
    x = Configuration.periodic(BIN, [0, 1])
    y = shift_act(1, x)
    assert [y.value_at(i) for i in range(4)] == [1, 0, 1, 0]


def test_shift_composition_property():
    rng = random.Random(17)
    window = [(i,) for i in range(-6, 7)]
    for _ in range(50):
        x = random_config(rng)
        s, t = rng.randint(-4, 4), rng.randint(-4, 4)
        lhs = shift_act(s, shift_act(t, x))
        rhs = shift_act(s + t, x)
        assert lhs.pattern_on(window) == rhs.pattern_on(window)


def test_shift_act_definition():
    rng = random.Random(29)
    for _ in range(30):
        x = random_config(rng)
        s = rng.randint(-5, 5)
        y = shift_act(s, x)
        for t in range(-4, 5):
            assert y.value_at(t) == x.value_at(t + s)


# -- metric -------------------------------------------------------------------


def test_rho_zero_on_equal():
    x = Configuration.periodic(BIN, [0, 1, 1])
    assert rho(x, x) == 0


def test_rho_center_flip_frozen_value():
    """All-zero vs flip-at-origin: radius-0 block contributes exactly
    2^-1 + 2^-2 = 0.75; the full canonical sum adds the radius-1 and
    radius-2 pattern flips (indices 3,5,11,15), frozen below."""
    x = Configuration.constant(BIN, 0)
    y = Configuration.word(BIN, [1], fill=0)
    value = rho(x, y)
    assert value == oracle_rho(x, y)
    assert value == Fraction(29713, 32768)
    # the radius-0 contribution alone is the floor 3/4
    fam = get_family(BIN, 24)
    assert fam.floor_threshold == Fraction(3, 4)
    assert value >= Fraction(3, 4)


def test_rho_matches_oracle_on_random_pairs():
    rng = random.Random(41)
    for _ in range(25):
        x, y = random_config(rng), random_config(rng)
        assert rho(x, y) == oracle_rho(x, y)


def test_rho_symmetry_and_triangle():
    rng = random.Random(43)
    for _ in range(60):
        x, y, z = (random_config(rng) for _ in range(3))
        dxy, dyx = rho(x, y), rho(y, x)
        assert dxy == dyx
        assert rho(x, z) <= dxy + rho(y, z)


def test_rho_F_max_over_orbit():
    x = Configuration.periodic(BIN, [0, 1])
    y = Configuration.constant(BIN, 0)
    F = FiniteSubset.interval(0, 2)
    assert rho(x, y, F) == max(
        rho(shift_act(0, x), shift_act(0, y)), rho(shift_act(1, x), shift_act(1, y))
    )


# -- resolution windows ---------------------------------------------------------


def test_resolution_window_word_scale():
    rw = resolution_window(BIN, 0.5)
    assert rw.window.elements == {(0,)}
    assert rw.floor == Fraction(3, 4)
    assert rw.tail == Fraction(1, 4)


def test_resolution_window_fine_scale():
    rw = resolution_window(BIN, 0.2)
    assert rw.window.elements == {(-1,), (0,), (1,)}
    assert rw.floor == Fraction(3, 4)


def test_resolution_window_refusal():
    with pytest.raises(ResolutionError) as err:
        resolution_window(BIN, 0.9)
    assert err.value.threshold == Fraction(3, 4)


def test_resolution_certificates_hold():
    """Agreement on the window forces rho <= tail; center disagreement
    forces rho >= floor (random configurations)."""
    rng = random.Random(47)
    rw = resolution_window(BIN, 0.5)
    for _ in range(40):
        x, y = random_config(rng), random_config(rng)
        d = rho(x, y)
        if x.value_at(0) == y.value_at(0):
            pass  # may still differ off-center; only full-window agreement binds
        else:
            assert d >= rw.floor
        if all(x.value_at(w) == y.value_at(w) for w in rw.window.elements):
            assert d <= rw.tail


# -- mistake balls ---------------------------------------------------------------


def test_mistake_ball_center():
    g = MistakeFunction.half()
    F = FiniteSubset.interval(0, 10)
    x = Configuration.periodic(BIN, [0, 1])
    ok, count = mistake_ball_contains(g, F, x, x, 0.5)
    assert ok and count == 0


def test_mistake_ball_budget_exceeded():
    g = MistakeFunction.half()
    F = FiniteSubset.interval(0, 8)
    x = Configuration.constant(BIN, 0)
    # g(0.5) = 1/4, budget 2 mistakes on |F| = 8; three flips exceed it
    y = Configuration.word(BIN, [1, 0, 0, 1, 0, 0, 1, 0], fill=0)
    ok, count = mistake_ball_contains(g, F, x, y, 0.5)
    assert count == 3
    assert not ok


def test_mistake_ball_half_density():
    table = [(Fraction(1, 2**j), Fraction(1, 2)) for j in range(1, 10)]
    g = MistakeFunction(table)  # g == 1/2 on the grid
    F = FiniteSubset.interval(0, 8)
    x = Configuration.constant(BIN, 0)
    y = Configuration.word(BIN, [1, 1, 1, 0, 0, 0, 0, 0], fill=0)
    ok, count = mistake_ball_contains(g, F, x, y, 0.5)
    assert ok and count == 3


def test_mistake_ball_verdict_matches_definition():
    table = [(Fraction(1, 2**j), Fraction(99, 100)) for j in range(1, 10)]
    g = MistakeFunction(table)
    F = FiniteSubset.interval(0, 4)
    x = Configuration.constant(BIN, 0)
    rng = random.Random(3)
    for _ in range(15):
        y = random_config(rng)
        ok, count = mistake_ball_contains(g, F, x, y, 0.5)
        assert ok == (count <= g(0.5) * len(F))
        assert count <= len(F)
    # the all-ones word has a mistake at every site, beating the 3.96 budget
    y = Configuration.word(BIN, [1, 1, 1, 1], fill=1)
    ok, count = mistake_ball_contains(g, F, x, y, 0.5)
    assert count == 4 and not ok


# -- counting ---------------------------------------------------------------------


def test_max_separated_full_shift_words():
    F = FiniteSubset.interval(0, 3)
    res = max_separated(BIN, F, 0.5)
    assert res.count == 8 and res.exact


def test_max_separated_golden_mean_fibonacci():
    fib = [1, 1]
    while len(fib) < 20:
        fib.append(fib[-1] + fib[-2])
    for n in range(1, 13):
        F = FiniteSubset.interval(0, n)
        res = max_separated(GM, F, 0.5)
        assert res.count == fib[n + 1]  # F_{n+2} with F_1 = F_2 = 1
        brute = sum(
            1
            for w in product(range(2), repeat=n)
            if all(not (a == 1 and b == 1) for a, b in zip(w, w[1:]))
        )
        assert res.count == brute


def test_count_words_gap_feasibility():
    # golden-mean words on {0, 2}: gap 2 >= mixing gap, all 4 pairs reachable
    F = FiniteSubset([(0,), (2,)])
    assert count_admissible_words(GM, F) == 4
    # adjacent cells forbid 11
    F2 = FiniteSubset([(0,), (1,)])
    assert count_admissible_words(GM, F2) == 3


def test_spanning_equals_separated_at_word_resolution():
    rng = random.Random(53)
    for _ in range(20):
        n = rng.randint(1, 8)
        F = FiniteSubset.interval(0, n)
        sys = rng.choice([BIN, GM])
        s = max_separated(sys, F, 0.3)
        r = max_separated(sys, F, 0.3, mode="spanning")
        assert r.count <= s.count
        s2 = max_separated(sys, F, 0.6)  # 2 * 0.3
        assert s2.count <= r.count


def test_hamming_mode_upper_bounded_by_plain():
    F = FiniteSubset.interval(0, 4)
    plain = max_separated(BIN, F, 0.5)
    ham = max_separated(BIN, F, 0.5, mode="hamming", hamming_delta=0.5)
    assert ham.count <= plain.count
    assert ham.exact


def test_hamming_exact_matches_bruteforce():
    """Max pairwise-distance->=t code via exhaustive search on all subsets."""
    words = list(product(range(2), repeat=4))
    t = hamming_threshold(0.5, 4)  # 2

    def feasible(subset):
        return all(
            sum(a != b for a, b in zip(words[i], words[j])) >= t
            for k, i in enumerate(subset)
            for j in subset[k + 1 :]
        )

    best = 0
    for mask in range(1 << len(words)):
        subset = [i for i in range(len(words)) if mask >> i & 1]
        if len(subset) > best and feasible(subset):
            best = len(subset)
    res = max_separated(BIN, FiniteSubset.interval(0, 4), 0.5,
                        mode="hamming", hamming_delta=0.5)
    assert res.count == best == 8


def test_hamming_greedy_lower_bound_flagged():
    F = FiniteSubset.interval(0, 8)
    res = max_separated(BIN, F, 0.5, mode="hamming", hamming_delta=0.25, bb_cap=4)
    assert res.lower_bound and not res.exact
    assert res.count >= 1


def test_counting_refusal_above_floor():
    with pytest.raises(ResolutionError):
        max_separated(BIN, FiniteSubset.interval(0, 3), 0.8)


def test_sft_configuration_admissibility():
    ok = Configuration.word(GM, [1, 0, 1, 0], fill=0)
    assert ok.is_admissible()
    bad = Configuration.word(GM, [1, 1], fill=0)
    assert not bad.is_admissible()
    periodic_bad = Configuration.periodic(GM, [0, 1, 1])
    assert not periodic_bad.is_admissible()
    seam_bad = Configuration.word(GM, [0, 1], fill=1)
    assert not seam_bad.is_admissible()


def test_enumerate_words_lexicographic():
    F = FiniteSubset.interval(0, 2)
    assert list(enumerate_words(BIN, F)) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert list(enumerate_words(GM, F)) == [(0, 0), (0, 1), (1, 0)]


def test_mixing_gap_values():
    assert GM.mixing_gap == 2
    assert BIN.mixing_gap == 0
    with pytest.raises(ValueError):
        ShiftSystem(2, 1, transitions=[[0, 1], [1, 0]])
