import math
import pickle
import random
from fractions import Fraction
from itertools import product

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from correctdigits.expansions import (
    INFINITE_DIGIT,
    BetaCFMap,
    BolyaiMap,
    InadmissibleDigits,
    LurothMap,
    RadixMap,
    RCFMap,
    adjacent_ratio_scan,
    apply,
    cylinder,
    digit_of,
    expand,
    format_digits,
    golden_beta_map,
    make_map,
    parse_digits,
    pseudo_golden_cylinder_measure,
    rcf_cylinder_measure,
)
from correctdigits.numeric import GOLDEN, BetaInteger, Order, Side, compare, golden_power

ALL_SPECS = ["decimal", "binary", "radix:7", "rcf", "luroth", "alt-luroth", "bolyai", "beta-cf", "golden"]
MAPS = {s: make_map(s) for s in ALL_SPECS}
unit_rationals = st.fractions(min_value=0, max_value=1, max_denominator=10**6).filter(lambda x: x < 1)


# -- worked examples -------------------------------------------------------------


def test_digit_of_examples():
    assert digit_of(make_map("decimal"), Fraction(7, 20), Side.FROM_RIGHT) == 3
    rcf = RCFMap()
    assert digit_of(rcf, Fraction(1, 2), Side.FROM_LEFT) == 2
    assert digit_of(rcf, Fraction(1, 2), Side.FROM_RIGHT) == 1
    assert digit_of(rcf, Fraction(1, 2)) == 2  # 1/2 lies in the cell (1/3, 1/2]
    assert digit_of(BolyaiMap(), Fraction(1, 2)) == 1


def test_digit_of_zero_under_reciprocal_maps():
    assert RCFMap().digit_of(0, Side.FROM_RIGHT) is INFINITE_DIGIT
    assert RCFMap().digit_of(0) is None
    assert BetaCFMap().digit_of(0, Side.FROM_RIGHT) is INFINITE_DIGIT


def test_apply_examples():
    assert apply(RCFMap(), Fraction(6, 7), 1) == Fraction(1, 6)
    assert apply(BolyaiMap(), Fraction(1, 2), 1) == Fraction(1, 4)
    beta = BetaCFMap()
    d = beta.digit_of(Fraction(7, 10))
    assert d == BetaInteger("1")
    assert apply(beta, Fraction(7, 10), d) == Fraction(3, 7)


def test_cylinder_examples():
    c = cylinder(make_map("decimal"), (3, 5))
    assert (c.left, c.right) == (Fraction(35, 100), Fraction(36, 100))
    c = cylinder(RCFMap(), (2, 1))
    assert (c.left, c.right) == (Fraction(1, 3), Fraction(2, 5))
    assert c.width() == Fraction(1, 15)
    with pytest.raises(InadmissibleDigits):
        cylinder(golden_beta_map(), (1, 1))


def test_expand_examples():
    assert expand(make_map("decimal"), Fraction(1, 3), 4) == (3, 3, 3, 3)
    # orbit reaches 0 after two digits, so the expansion stops
    assert expand(RCFMap(), Fraction(6, 7), 3) == (1, 6)
    assert expand(BolyaiMap(), Fraction(1, 2), 2) == (1, 0)


def test_rcf_measure_examples():
    assert rcf_cylinder_measure((1,)) == Fraction(1, 2)
    assert rcf_cylinder_measure((2, 1)) == Fraction(1, 15)
    with pytest.raises(ValueError):
        rcf_cylinder_measure((0,))


def test_pseudo_golden_measure_examples():
    g = GOLDEN
    assert pseudo_golden_cylinder_measure(2, (0,)) == 1 / g
    assert pseudo_golden_cylinder_measure(2, (1, 0)) == golden_power(-2)
    c = cylinder(golden_beta_map(), (1, 0))
    assert c.width() == golden_power(-2)
    m3 = pseudo_golden_cylinder_measure(3, (0, 1)).ball(256).midpoint
    with mpmath.workdps(60):
        g3 = mpmath.findroot(lambda x: x**3 - x**2 - x - 1, 1.8)
        assert abs(mpmath.mpf(m3.numerator) / m3.denominator - (g3**-3 + g3**-4)) < mpmath.mpf(10) ** -45
    with pytest.raises(InadmissibleDigits):
        pseudo_golden_cylinder_measure(3, (1, 1, 1))


# -- measures -------------------------------------------------------------------


def test_rcf_measure_matches_endpoints_exhaustive():
    rcf = RCFMap()
    bad = 0
    for r in range(1, 5):
        for word in product(range(1, 5), repeat=r):
            c = rcf.cylinder(word)
            bad += c.width() != rcf_cylinder_measure(word)
            # closed Q-recurrence route: endpoints are p/q and (p+p')/(q+q')
            assert c.width() > 0
    assert bad == 0


def test_radix_widths_exact():
    for g in (2, 3, 7, 10):
        fmap = RadixMap(g)
        for r in range(1, 4):
            for word in product(range(g), repeat=r):
                assert fmap.cylinder(word).width() == Fraction(1, g**r)


@pytest.mark.parametrize("alternating", [False, True])
def test_luroth_width_is_product(alternating):
    fmap = LurothMap(alternating)
    for r in range(1, 5):
        for word in product(range(1, 6), repeat=r):
            expected = Fraction(1)
            for k in word:
                expected /= k * (k + 1)
            assert fmap.cylinder(word).width() == expected


def test_luroth_rank_one_measures_sum_to_one():
    for K in (10, 1000, 10**5):
        partial = sum(Fraction(1, k * (k + 1)) for k in range(1, K + 1)) if K <= 1000 else 1 - Fraction(1, K + 1)
        # telescoping tail is exactly 1/(K+1)
        assert partial + Fraction(1, K + 1) == 1
    fmap = LurothMap()
    assert sum(fmap.cylinder((k,)).width() for k in range(1, 200)) == 1 - Fraction(1, 200)


def test_golden_closed_form_vs_composed_branches():
    fmap = golden_beta_map()
    for r in range(1, 8):
        for word in product((0, 1), repeat=r):
            if not fmap.is_admissible(word):
                with pytest.raises(InadmissibleDigits):
                    fmap.compose_cylinder(word)
                continue
            closed = fmap.cylinder(word)
            composed = fmap.compose_cylinder(word)
            assert closed.left == composed.left and closed.right == composed.right


def _composed_in_mpmath(k, word):
    # inverse branches intersected with the cells, in 60-digit floats
    with mpmath.workdps(60):
        gamma = mpmath.findroot(lambda x: x**k - sum(x**j for j in range(k)), 1.9)
        lo, hi = mpmath.mpf(0), mpmath.mpf(1)
        for d in reversed(word):
            lo, hi = (lo + d) / gamma, (hi + d) / gamma
            lo, hi = (lo, min(hi, 1 / gamma)) if d == 0 else (max(lo, 1 / gamma), min(hi, 1))
            if hi - lo < mpmath.mpf(10) ** -50:
                return None
        return lo, hi


@pytest.mark.parametrize("k", [3, 4])
def test_pseudo_golden_closed_form_vs_mpmath_branches(k):
    fmap = golden_beta_map(k)
    for r in range(1, 7):
        for word in product((0, 1), repeat=r):
            oracle = _composed_in_mpmath(k, word)
            if not fmap.is_admissible(word):
                assert oracle is None
                continue
            c = fmap.cylinder(word)
            with mpmath.workdps(60):
                for end, ref in zip((c.left, c.right), oracle):
                    q = end.ball(256).midpoint if hasattr(end, "ball") else end
                    assert abs(mpmath.mpf(q.numerator) / q.denominator - ref) < mpmath.mpf(10) ** -45


def test_pseudo_golden_series_matches_cylinders():
    fmap = golden_beta_map()
    word = (0, 1, 0, 0, 1, 0, 1, 0, 0, 0, 1)
    for c in fmap.cylinder_series(word):
        d = fmap.cylinder(c.digits)
        assert (c.left, c.right) == (d.left, d.right)


# -- adjacency scans --------------------------------------------------------------


def test_adjacent_ratio_rcf():
    assert adjacent_ratio_scan(RCFMap(), 1, 3) == 3
    assert adjacent_ratio_scan(RCFMap(), 3, 4) == 3


def test_adjacent_ratio_radix():
    for g in (2, 3, 10):
        assert adjacent_ratio_scan(RadixMap(g), 2, g) == 1


def test_adjacent_ratio_alternating_luroth_value():
    # B(1) and B(2) touch at 1/2 with lengths 1/2 and 1/6
    assert adjacent_ratio_scan(LurothMap(True), 3, 6) == 3
    assert adjacent_ratio_scan(LurothMap(False), 2, 6) == 3


def test_adjacent_ratio_golden():
    assert adjacent_ratio_scan(golden_beta_map(), 4, 2) == GOLDEN


def test_adjacent_ratio_bolyai_is_bounded():
    ratio = adjacent_ratio_scan(BolyaiMap(), 2, 3)
    assert 1 < ratio < 2


# -- invariants ---------------------------------------------------------------------


def _neighbours(fmap, d):
    if isinstance(fmap, BetaCFMap):
        out = [d.successor()]
        if d.index > 1:
            out.append(d.predecessor())
        return out
    if isinstance(fmap, (RCFMap, LurothMap)):
        return [e for e in (d - 1, d + 1) if e >= 1]
    return [e for e in fmap.small_digits(20) if e != d]


@pytest.mark.parametrize("spec", ALL_SPECS)
def test_partition_on_grid(spec):
    fmap = MAPS[spec]
    step = 10 if spec == "bolyai" else 1
    for j in range(0, 10_000, step):
        x = Fraction(j, 10_000)
        d = fmap.digit_of(x)
        if d is None:
            # 0 has no digit under maps whose cells accumulate at 0
            assert x == 0 and isinstance(fmap, (RCFMap, LurothMap, BetaCFMap))
            continue
        assert fmap.cell(d).contains(x)
        for e in _neighbours(fmap, d):
            assert not fmap.cell(e).contains(x)


@pytest.mark.parametrize("spec", ALL_SPECS)
def test_conjugacy(spec):
    fmap = MAPS[spec]
    rng = random.Random(11)
    for _ in range(40):
        x = Fraction(rng.randrange(1, 10**9), 10**9)
        digits = expand(fmap, x, 8)
        if not digits:
            continue
        tail = expand(fmap, fmap.apply(x, digits[0]), 7)
        assert tail == digits[1:]
        assert fmap.digit_of(x) == digits[0]


@pytest.mark.parametrize("spec", ALL_SPECS)
def test_membership(spec):
    fmap = MAPS[spec]
    rng = random.Random(5)
    for _ in range(15):
        x = Fraction(rng.randrange(1, 10**12), 10**12)
        for n in (1, 5, 20):
            digits = expand(fmap, x, n)
            assert fmap.cylinder(digits).contains(x)


@settings(max_examples=60, deadline=None)
@given(unit_rationals, st.sampled_from(["decimal", "rcf", "luroth", "alt-luroth", "golden", "beta-cf"]))
def test_membership_property(x, spec):
    fmap = MAPS[spec]
    digits = expand(fmap, x, 12)
    if digits:
        assert fmap.cylinder(digits).contains(x)


def _inside(child, parent):
    return compare(parent.left, child.left) is not Order.GREATER and \
        compare(child.right, parent.right) is not Order.GREATER


@pytest.mark.parametrize("spec", ALL_SPECS)
def test_cylinder_nesting(spec):
    fmap = MAPS[spec]
    alphabet = fmap.small_digits(3)
    if len(alphabet) > 3:
        alphabet = alphabet[:3]
    for r in range(1, 4):
        for word in product(alphabet, repeat=r):
            if not fmap.is_admissible(word):
                continue
            parent = fmap.cylinder(word[:-1]) if r > 1 else None
            child = fmap.cylinder(word)
            assert compare(child.left, child.right) is Order.LESS
            if parent is not None:
                assert _inside(child, parent)


def test_cylinder_series_matches_cylinder():
    for spec in ("decimal", "rcf", "luroth", "alt-luroth"):
        fmap = MAPS[spec]
        word = tuple(fmap.small_digits(4)[i % 3] for i in range(9))
        for c in fmap.cylinder_series(word):
            d = fmap.cylinder(c.digits)
            assert (c.left, c.right, c.left_closed, c.right_closed) == (d.left, d.right, d.left_closed, d.right_closed)


def test_bolyai_rank_one_cells():
    fmap = BolyaiMap()
    c0, c1, c2 = (fmap.cell(d) for d in (0, 1, 2))
    # integer oracles: 41421356^2 < 2e16 < 41421357^2 and likewise for 3
    assert 141421356**2 < 2 * 10**16 < 141421357**2
    assert 173205080**2 < 3 * 10**16 < 173205081**2
    sqrt2m1 = Fraction(41421356, 10**8), Fraction(41421357, 10**8)
    sqrt3m1 = Fraction(73205080, 10**8), Fraction(73205081, 10**8)
    for end in (c0.right, c1.left):
        assert compare(end, sqrt2m1[0]) is Order.GREATER and compare(end, sqrt2m1[1]) is Order.LESS
    for end in (c1.right, c2.left):
        assert compare(end, sqrt3m1[0]) is Order.GREATER and compare(end, sqrt3m1[1]) is Order.LESS
    assert c0.left == 0 and c2.right == 1


def test_beta_cf_cells_follow_beta_integers():
    fmap = BetaCFMap()
    for i in range(1, 20):
        b = BetaInteger.from_index(i)
        c = fmap.cell(b)
        assert c.right == 1 / b.value and c.left == 1 / b.successor().value


def test_beta_cf_inadmissible_string():
    fmap = BetaCFMap()
    # branch of digit 1 maps (1/beta, 1] onto [0, beta - 1); beta - 1 < 1/2 fails for digit 1 next
    one = BetaInteger("1")
    assert not fmap.is_admissible((one, one))
    assert fmap.is_admissible((one, BetaInteger("10")))


# -- serialization and registry -------------------------------------------------------


def test_digit_serialization_roundtrip():
    assert format_digits((1, 2, 30)) == "1,2,30"
    assert parse_digits("1, 2,30", RCFMap()) == (1, 2, 30)
    beta = BetaCFMap()
    digits = (BetaInteger("1"), BetaInteger("101"), BetaInteger("1000"))
    text = format_digits(digits, beta)
    assert text == "1,101,1000"
    assert parse_digits(text, beta) == digits
    assert parse_digits("", beta) == ()


@pytest.mark.parametrize("spec", ALL_SPECS + ["pseudo-golden:3"])
def test_make_map_roundtrip(spec):
    fmap = make_map(spec)
    assert make_map(fmap.spec) == fmap
    assert pickle.loads(pickle.dumps(fmap)) == fmap


def test_make_map_aliases_and_errors():
    assert make_map("radix:10") == make_map("decimal")
    assert make_map("2-adic") == make_map("binary")
    assert make_map("golden") == golden_beta_map()
    with pytest.raises(ValueError):
        make_map("nonsense")
    with pytest.raises(ValueError):
        RadixMap(1)


def test_radix_digit_bounds():
    fmap = RadixMap(10)
    assert fmap.digit_of(Fraction(99, 100), Side.FROM_LEFT) == 9
    assert fmap.digit_of(Fraction(1), Side.FROM_LEFT) == 9
    assert fmap.digit_of(Fraction(3, 10), Side.FROM_LEFT) == 2
    assert fmap.digit_of(Fraction(3, 10), Side.FROM_RIGHT) == 3


def test_golden_digit_and_apply_exact():
    fmap = golden_beta_map()
    x = Fraction(7, 10)
    d = fmap.digit_of(x)
    assert d == 1
    y = fmap.apply(x, d)
    assert y == GOLDEN * Fraction(7, 10) - 1
    assert math.isclose(float(y), 0.7 * (1 + math.sqrt(5)) / 2 - 1)
