import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from helpers import random_matching_pair, random_word_pair
from tiro.errors import AlphabetError, DomainError, ParseError
from tiro.metrics import (
    DiffFunction,
    accumulated_delay,
    equality_diff,
    format_diff,
    generalized_manhattan,
    hamming_diff,
    parse_diff,
    retiming_objective,
    skorokhod,
    skorokhod_grid,
    timed_manhattan,
    zero_one_diff,
)
from tiro.values import INF
from tiro.words import TimedWord, step_timed_word

F = Fraction


def w(*pairs):
    return TimedWord.of(pairs)


D01_AB = zero_one_diff({"a", "b"})
D01_ABC = zero_one_diff({"a", "b", "c"})
D01_BITS = zero_one_diff({"0", "1"})


# ---------------------------------------------------------------------------
# diff tables
# ---------------------------------------------------------------------------

def test_diff_defaults_and_symmetry():
    d = DiffFunction(frozenset("ab"), {("a", "b"): F(1, 2)})
    assert d("a", "a") == 0
    assert d("a", "b") == d("b", "a") == F(1, 2)
    assert d("a", "#") == 1  # unlisted pairs default off-diagonal


def test_diff_rejects_asymmetry_and_bad_diagonal():
    with pytest.raises(DomainError):
        DiffFunction(frozenset("ab"), {("a", "b"): F(1), ("b", "a"): F(2)})
    with pytest.raises(DomainError):
        DiffFunction(frozenset("ab"), {("a", "a"): F(1)})


def test_diff_triangle_checked_at_load():
    with pytest.raises(DomainError):
        DiffFunction(frozenset("abc"), {("a", "b"): F(5)})  # 5 > 1 + 1


def test_diff_triangle_ignores_infinite_entries():
    equality_diff({"a", "b", "c"})  # 0/inf table loads fine


def test_diff_outside_alphabet():
    with pytest.raises(AlphabetError):
        D01_AB("a", "z")


def test_parse_diff_roundtrip():
    text = "diff {a, b}\na b 1/2\na # inf\n"
    d = parse_diff(text)
    assert d("a", "b") == F(1, 2)
    assert d("a", "#") is INF
    assert d("b", "#") == 1
    again = parse_diff(format_diff(d))
    assert again("a", "b") == F(1, 2) and again("a", "#") is INF


def test_parse_diff_errors():
    with pytest.raises(ParseError):
        parse_diff("a b 1\n")  # missing header
    with pytest.raises(ParseError):
        parse_diff("diff {a, b}\na z 1\n")


def test_hamming_diff_is_metric_and_extends_end_marker():
    d = hamming_diff(2)
    assert d("00", "11") == 2
    assert d("00", "#") == 1
    assert d("11", "#") == 3


# ---------------------------------------------------------------------------
# generalized Manhattan
# ---------------------------------------------------------------------------

def test_generalized_manhattan_identity():
    assert generalized_manhattan("abc", "abc", D01_ABC) == 0


def test_generalized_manhattan_positionwise_oracle():
    s, t = "0000000000", "1000000000"
    oracle = sum(1 for x, y in zip(s, t) if x != y)
    assert generalized_manhattan(s, t, D01_BITS) == oracle == 1


def test_generalized_manhattan_padding():
    assert generalized_manhattan("ab", "abc", D01_ABC) == 1  # c vs '#'


def test_generalized_manhattan_infinite():
    assert generalized_manhattan("a", "b", equality_diff({"a", "b"})) is INF


# ---------------------------------------------------------------------------
# timed Manhattan
# ---------------------------------------------------------------------------

PAPER_WORD = w(("a", 0), ("b", F(13, 10)), ("a", 2), ("a", F(29, 10)),
               ("c", F(37, 10)), ("a", 5))


def numeric_timed_manhattan(u, v, diff, cells=5000):
    """Independent numeric oracle: midpoint rule on a uniform grid."""
    fu, fv = u.to_cadlag(), v.to_cadlag()
    lo, hi = fu.domain
    total = 0.0
    h = (hi - lo) / cells
    for i in range(cells):
        mid = lo + h * i + h / 2
        total += float(diff(fu.value(mid), fv.value(mid))) * float(h)
    return total


def test_timed_manhattan_zero_on_self():
    assert timed_manhattan(PAPER_WORD, PAPER_WORD, D01_ABC) == 0


def test_timed_manhattan_worked_example():
    v = w(("a", 0), ("a", 5))
    # oracle first: numeric integration on a grid aligned to the breakpoints
    numeric = numeric_timed_manhattan(PAPER_WORD, v, D01_ABC)
    exact = timed_manhattan(PAPER_WORD, v, D01_ABC)
    assert abs(numeric - float(exact)) < 1e-6
    assert exact == F(7, 10) + F(13, 10) == 2


def test_timed_manhattan_oscillator_waveform():
    # 0 on [0,10] against 1 on [k, k+1/4) for k = 0..9
    zero = w(("0", 0)).pad_to(10)
    events = []
    for k in range(10):
        events.append(("1", F(k)))
        events.append(("0", F(k) + F(1, 4)))
    osc = TimedWord.of(events).pad_to(10)
    oracle = sum((F(1, 4) for _ in range(10)), F(0))  # segment-sum oracle
    assert timed_manhattan(zero, osc, D01_BITS) == oracle == F(5, 2)


def test_timed_manhattan_rejects_mismatched_domains():
    with pytest.raises(DomainError):
        timed_manhattan(w(("a", 0), ("b", 1)), w(("a", 0), ("b", 2)), D01_AB)


def test_timed_manhattan_infinite_needs_positive_measure():
    deq = equality_diff({"a", "b"})
    # b sits only at the closed right end: zero measure, so no contribution
    u = w(("a", 0), ("b", 1))
    v = w(("a", 0), ("a", 1))
    assert timed_manhattan(u, v, deq) == 0
    # with the mismatch stretched over [1, 2] the value is infinite
    assert timed_manhattan(u.pad_to(2), v.pad_to(2), deq) is INF


def test_timed_manhattan_on_step_words_matches_generalized():
    rng = random.Random(7)
    for _ in range(50):
        n = rng.randint(1, 6)
        s = "".join(rng.choice("01") for _ in range(n))
        t = "".join(rng.choice("01") for _ in range(n))
        assert timed_manhattan(step_timed_word(s), step_timed_word(t), D01_BITS) \
            == generalized_manhattan(s, t, D01_BITS)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_timed_manhattan_symmetry_and_triangle(seed):
    rng = random.Random(seed)
    u, v = random_word_pair(rng, "abc", domain_end=2)
    z, _ = random_word_pair(rng, "abc", domain_end=2)
    duv = timed_manhattan(u, v, D01_ABC)
    assert duv == timed_manhattan(v, u, D01_ABC)
    duz = timed_manhattan(u, z, D01_ABC)
    dzv = timed_manhattan(z, v, D01_ABC)
    assert duv <= duz + dzv


# ---------------------------------------------------------------------------
# accumulated delay
# ---------------------------------------------------------------------------

def test_accumulated_delay_zero_on_self():
    assert accumulated_delay(PAPER_WORD, PAPER_WORD) == 0


def test_accumulated_delay_breakpoint_oracle():
    u = w(("a", 0), ("b", 1), ("a", 2)).pad_to(3)
    v = w(("a", 0), ("b", F(6, 5)), ("a", 2)).pad_to(3)
    # oracle: independent per-index |delta - tau| sum
    su = [t for _, t in u.stutter_free()]
    sv = [t for _, t in v.stutter_free()]
    oracle = sum(abs(x - y) for x, y in zip(su, sv))
    assert accumulated_delay(u, v) == oracle == F(1, 5)


def test_accumulated_delay_untimed_mismatch_is_infinite():
    u = w(("a", 0), ("b", 1)).pad_to(2)
    v = w(("a", 0), ("c", 1)).pad_to(2)
    assert accumulated_delay(u, v) is INF


def test_accumulated_delay_symmetric():
    rng = random.Random(3)
    for _ in range(30):
        u, v = random_matching_pair(rng, "abc")
        assert accumulated_delay(u, v) == accumulated_delay(v, u)


# ---------------------------------------------------------------------------
# Skorokhod
# ---------------------------------------------------------------------------

def test_skorokhod_zero_on_self():
    assert skorokhod(PAPER_WORD, PAPER_WORD, D01_ABC) == 0


def test_skorokhod_equals_accumulated_delay_under_equality_diff():
    rng = random.Random(11)
    deq = equality_diff({"a", "b", "c"})
    for _ in range(60):
        u, v = random_matching_pair(rng, "abc")
        assert skorokhod(u, v, deq) == accumulated_delay(u, v)


def random_small_diff(rng, letters):
    """Random symmetric diff with entries in [1/2, 1] (triangle-safe)."""
    entries = {}
    pool = sorted(letters) + ["#"]
    for i, a in enumerate(pool):
        for b in pool[i + 1:]:
            entries[(a, b)] = F(rng.randint(4, 8), 8)
    return DiffFunction(frozenset(letters), entries)


def test_skorokhod_equals_timed_manhattan_for_small_diff():
    rng = random.Random(13)
    for _ in range(60):
        d = random_small_diff(rng, "abc")
        u, v = random_word_pair(rng, "abc", domain_end=2)
        assert skorokhod(u, v, d) == timed_manhattan(u, v, d)


def test_skorokhod_candidate_dp_validated_against_grid():
    # Grid oracle with step |I|/128; domains are powers of two so the grid
    # contains every candidate breakpoint and the values must agree exactly.
    rng = random.Random(17)
    for _ in range(30):
        d = random_small_diff(rng, "ab")
        u, v = random_word_pair(rng, "ab", domain_end=2)
        dp = skorokhod(u, v, d)
        grid = skorokhod_grid(u, v, d)
        assert dp <= grid
        assert grid - dp <= F(2, 128)


def test_skorokhod_never_above_sampled_retimings():
    rng = random.Random(19)
    for _ in range(30):
        d = random_small_diff(rng, "ab")
        u, v = random_word_pair(rng, "ab", domain_end=2)
        value = skorokhod(u, v, d)
        lo, hi = u.to_cadlag().domain
        m = len(v.to_cadlag().breakpoints)
        for _ in range(10):
            mus = [lo] + sorted(
                lo + (hi - lo) * F(rng.randint(0, 64), 64) for _ in range(m - 1))
            assert value <= retiming_objective(u, v, d, mus)


def test_skorokhod_asymmetric_example_with_large_diff():
    # With penalties above 1 the one-sided retiming value genuinely depends
    # on which word is retimed; symmetry only holds in the two regimes above.
    big = DiffFunction(frozenset("ab"), {("a", "b"): F(3), ("a", "#"): F(2),
                                         ("b", "#"): F(2)})
    u = w(("a", 0)).pad_to(2)
    v = w(("a", 0), ("b", 1)).pad_to(2)
    assert skorokhod(u, v, big) == 1  # push b's onset to the domain end
    assert skorokhod(v, u, big) == 3  # nothing to retime in a constant word


def test_retiming_objective_validates_input():
    u = w(("a", 0)).pad_to(2)
    v = w(("a", 0), ("b", 1)).pad_to(2)
    with pytest.raises(DomainError):
        retiming_objective(u, v, D01_AB, [F(0)])  # wrong arity
    with pytest.raises(DomainError):
        retiming_objective(u, v, D01_AB, [F(1), F(2)])  # start moved
