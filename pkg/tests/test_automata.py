import random
from fractions import Fraction

import pytest

from tiro.automata import (
    Switch,
    TimedAutomaton,
    WeightedTimedAutomaton,
    accepting_run,
    accepts,
    lift,
    synchronized_product,
    wta_from_json,
    wta_to_dict,
    wta_value,
)
from tiro.cpa import emptiness, quantitative_emptiness
from tiro.errors import AlphabetError, DomainError
from tiro.guards import TRUE, parse_guard
from tiro.values import INF
from tiro.words import TimedWord

F = Fraction


def w(*pairs):
    return TimedWord.of(pairs)


def ta(alphabet, locations, initial, clocks, switches, accepting):
    return TimedAutomaton(frozenset(alphabet), tuple(locations), initial,
                          tuple(clocks), tuple(switches), frozenset(accepting))


def sw(src, letter, guard, resets, dst):
    return Switch(src, letter, parse_guard(guard), frozenset(resets), dst)


# ---------------------------------------------------------------------------
# membership
# ---------------------------------------------------------------------------

def universal(alphabet):
    return ta(alphabet, ["q"], "q", [],
              [sw("q", a, "true", [], "q") for a in alphabet], ["q"])


def test_universal_accepts_everything():
    auto = universal("ab")
    assert accepts(auto, w(("a", 0), ("b", F(1, 2)), ("a", F(1, 2))))
    assert accepts(auto, TimedWord(()))


def test_guard_semantics():
    auto = ta("a", ["s", "t"], "s", ["x"], [sw("s", "a", "x = 1", [], "t")], ["t"])
    assert accepts(auto, w(("a", 1)))
    assert not accepts(auto, w(("a", F(1, 2))))
    assert not accepts(auto, w(("a", 2)))


def test_resets_measure_delay():
    auto = ta("a", ["s"], "s", ["x"], [sw("s", "a", "x = 1", ["x"], "s")], ["s"])
    assert accepts(auto, w(("a", 1), ("a", 2), ("a", 3)))
    assert not accepts(auto, w(("a", 1), ("a", F(5, 2))))


def test_alphabet_mismatch_raises():
    with pytest.raises(AlphabetError):
        accepts(universal("ab"), w(("z", 0)))


def test_accepting_run_reports_states():
    auto = ta("a", ["s", "t"], "s", ["x"], [sw("s", "a", "x = 1", [], "t")], ["t"])
    run = accepting_run(auto, w(("a", 1)))
    assert [loc for loc, _ in run] == ["s", "t"]
    assert run[1][1]["x"] == 1
    assert accepting_run(auto, w(("a", 2))) is None


def random_automaton(rng, n_locs=4, n_clocks=2, max_const=3, alphabet="ab"):
    locs = ["l%d" % i for i in range(n_locs)]
    clocks = ["x%d" % i for i in range(n_clocks)]
    switches = []
    for _ in range(rng.randint(n_locs, 2 * n_locs + 2)):
        atoms = []
        for _ in range(rng.randint(0, 2)):
            atoms.append("%s %s %d" % (
                rng.choice(clocks), rng.choice(["<", "<=", "=", ">=", ">"]),
                rng.randint(0, max_const)))
        switches.append(sw(rng.choice(locs), rng.choice(alphabet),
                           " && ".join(atoms),
                           [c for c in clocks if rng.random() < 0.3],
                           rng.choice(locs)))
    accepting = rng.sample(locs, rng.randint(1, n_locs))
    return ta(alphabet, locs, locs[0], clocks, switches, accepting)


def test_region_equivalent_words_accepted_identically():
    # shrinking every fractional part by the same factor preserves the whole
    # difference structure of the timestamps, hence the existence of runs
    rng = random.Random(5)
    for _ in range(40):
        auto = random_automaton(rng)
        times = sorted(F(rng.randint(0, 24), 8) for _ in range(rng.randint(1, 5)))
        letters = [rng.choice("ab") for _ in times]
        word = TimedWord(tuple(zip(letters, times)))
        squeezed = TimedWord(tuple(
            (a, F(int(t)) + (t - int(t)) / 2) for a, t in zip(letters, times)))
        assert accepts(auto, word) == accepts(auto, squeezed)


# ---------------------------------------------------------------------------
# emptiness vs granular search oracle
# ---------------------------------------------------------------------------

def emptiness_oracle(auto):
    """BFS over valuations on the 1/(n+1) grid, capped above the max constant."""
    step = F(1, len(auto.clocks) + 1)
    cap = auto.max_constant + 1
    start = (auto.initial, tuple(F(0) for _ in auto.clocks))
    seen = {start}
    stack = [start]
    while stack:
        loc, nu = stack.pop()
        if loc in auto.accepting:
            return True
        succs = [(loc, tuple(min(v + step, cap) for v in nu))]
        valuation = dict(zip(auto.clocks, nu))
        for s in auto.by_source[loc]:
            if s.guard.satisfied(valuation):
                succs.append((s.target,
                              tuple(F(0) if c in s.resets else v
                                    for c, v in zip(auto.clocks, nu))))
        for nxt in succs:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return False


def test_emptiness_trivial_cases():
    nonempty, witness = emptiness(universal("ab"))
    assert nonempty and witness is not None

    # without a reset the clock only grows, so x > 2 then x < 1 is an
    # inconsistent path (x < 1 then x > 2 would be satisfiable)
    blocked = ta("a", ["s", "m", "t"], "s", ["x"],
                 [sw("s", "a", "x > 2", [], "m"), sw("m", "a", "x < 1", [], "t")],
                 ["t"])
    assert emptiness(blocked) == (False, None)

    loose = ta("a", ["s", "m", "t"], "s", ["x"],
               [sw("s", "a", "x < 1", [], "m"), sw("m", "a", "x > 2", [], "t")],
               ["t"])
    nonempty, witness = emptiness(loose)
    assert nonempty and accepts(loose, witness)


def test_emptiness_witness_is_accepted():
    auto = ta("ab", ["s", "m", "t"], "s", ["x", "y"],
              [sw("s", "a", "x >= 1", ["x"], "m"),
               sw("m", "b", "x = 1 && y <= 3", [], "t")],
              ["t"])
    nonempty, witness = emptiness(auto)
    assert nonempty
    assert accepts(auto, witness)


def test_emptiness_matches_valuation_search_oracle():
    rng = random.Random(23)
    agreements = 0
    for _ in range(40):
        auto = random_automaton(rng, n_locs=rng.randint(2, 4),
                                n_clocks=rng.randint(1, 3))
        nonempty, witness = emptiness(auto)
        assert nonempty == emptiness_oracle(auto)
        if nonempty:
            assert accepts(auto, witness)
            agreements += 1
    assert agreements > 5  # the generator produces plenty of nonempty automata


# ---------------------------------------------------------------------------
# weighted values
# ---------------------------------------------------------------------------

def simple_wta():
    auto = ta("a", ["s", "t"], "s", ["x"],
              [sw("s", "a", "x >= 2", [], "t")], ["t"])
    return WeightedTimedAutomaton(auto, {"s": F(1), "t": F(0)}, (F(3),))


def test_wta_value_deterministic_run():
    wta = simple_wta()
    assert wta_value(wta, w(("a", 2))) == 2 + 3
    assert wta_value(wta, w(("a", F(7, 2)))) == F(7, 2) + 3


def test_wta_value_rejected_word():
    assert wta_value(simple_wta(), w(("a", 1))) is INF


def test_wta_value_minimizes_over_runs():
    auto = ta("a", ["s", "t"], "s", [],
              [sw("s", "a", "true", [], "t"), sw("s", "a", "true", [], "s")],
              ["t"])
    wta = WeightedTimedAutomaton(auto, {"s": F(5), "t": F(0)}, (F(1), F(7)))
    # two runs on (a,1): stay (weight 7, still in s, not accepting) or move
    assert wta_value(wta, w(("a", 1))) == 5 + 1


# ---------------------------------------------------------------------------
# quantitative emptiness
# ---------------------------------------------------------------------------

def test_quantitative_emptiness_threshold_sides():
    wta = simple_wta()  # infimum value is 2 (dwell to x = 2, then switch w=3)...
    # rate 1 until the switch at x >= 2 with weight 3: infimum 2 + 3 = 5
    assert quantitative_emptiness(wta, F(11, 2)).holds
    assert not quantitative_emptiness(wta, F(5)).holds


def test_quantitative_emptiness_zero_weights():
    zero = WeightedTimedAutomaton.from_ta(universal("ab"))
    assert quantitative_emptiness(zero, F(1)).holds  # empty run has value 0
    assert not quantitative_emptiness(zero, F(0)).holds  # values never below 0


def test_quantitative_emptiness_negative_cycle():
    auto = ta("a", ["s"], "s", [], [sw("s", "a", "true", [], "s")], ["s"])
    wta = WeightedTimedAutomaton(auto, {"s": F(-1)}, (F(0),))
    res = quantitative_emptiness(wta, F(-1000))
    assert res.holds and res.negative_cycle
    assert res.witness_value < -1000


def test_quantitative_emptiness_witness_validates():
    wta = simple_wta()
    res = quantitative_emptiness(wta, F(6))
    assert res.holds
    assert wta_value(wta, res.witness) < 6


def test_quantitative_emptiness_monotone_in_threshold():
    rng = random.Random(31)
    for _ in range(10):
        auto = random_automaton(rng, n_locs=3, n_clocks=1)
        rates = {l: F(rng.randint(-1, 2)) for l in auto.locations}
        weights = tuple(F(rng.randint(-1, 3)) for _ in auto.switches)
        wta = WeightedTimedAutomaton(auto, rates, weights)
        lam = F(rng.randint(-3, 5))
        low = quantitative_emptiness(wta, lam).holds
        high = quantitative_emptiness(wta, lam + rng.randint(1, 3)).holds
        assert not low or high


def test_strict_threshold_with_open_guard():
    # infimum 1 is not attained (guard x > 1): No at 1, Yes at any larger bound
    auto = ta("a", ["s", "t"], "s", ["x"],
              [sw("s", "a", "x > 1", [], "t")], ["t"])
    wta = WeightedTimedAutomaton(auto, {"s": F(1), "t": F(0)}, (F(0),))
    assert not quantitative_emptiness(wta, F(1)).holds
    res = quantitative_emptiness(wta, F(11, 10))
    assert res.holds
    assert 1 < wta_value(wta, res.witness) < F(11, 10)


# ---------------------------------------------------------------------------
# products and lifting
# ---------------------------------------------------------------------------

def test_product_with_universal_preserves_value():
    wta = simple_wta()
    unit = WeightedTimedAutomaton.from_ta(universal("a"))
    prod = synchronized_product([wta, unit])
    for word in (w(("a", 2)), w(("a", 3)), w(("a", 1))):
        assert wta_value(prod, word) == wta_value(wta, word)


def test_product_sums_component_values():
    rng = random.Random(41)
    for _ in range(20):
        comps = []
        for _ in range(2):
            auto = ta("ab", ["p", "q"], "p", ["x"],
                      [sw("p", "a", "x <= %d" % rng.randint(1, 3), ["x"], "q"),
                       sw("q", "b", "true", [], "p")],
                      ["p", "q"])
            rates = {l: F(rng.randint(0, 2)) for l in auto.locations}
            weights = tuple(F(rng.randint(0, 2)) for _ in auto.switches)
            comps.append(WeightedTimedAutomaton(auto, rates, weights))
        prod = synchronized_product(comps)
        word = w(("a", F(1, 2)), ("b", 1), ("a", F(3, 2)))
        values = [wta_value(c, word) for c in comps]
        expected = INF if INF in values else sum(values, F(0))
        assert wta_value(prod, word) == expected


def test_product_requires_shared_alphabet():
    with pytest.raises(AlphabetError):
        synchronized_product([WeightedTimedAutomaton.from_ta(universal("a")),
                              WeightedTimedAutomaton.from_ta(universal("b"))])


def test_lift_skips_and_maps():
    wta = simple_wta()
    lifted = lift(wta, {("a", 1): "a", ("z", 9): None},
                  {("a", 1), ("z", 9)})
    word = w((("z", 9), 1), (("a", 1), 2), (("z", 9), 2))
    assert wta_value(lifted, word) == 2 + 3


# ---------------------------------------------------------------------------
# JSON round trip
# ---------------------------------------------------------------------------

def test_json_roundtrip():
    doc = """
    {"alphabet": ["a", "b"], "locations": ["s", "t"], "initial": "s",
     "clocks": ["x"],
     "switches": [{"from": "s", "letter": "a", "guard": "x >= 1 && x < 2",
                   "resets": ["x"], "to": "t", "weight": "1/2"}],
     "location_weights": {"s": "1", "t": "0"},
     "accepting": ["t"]}
    """
    wta = wta_from_json(doc)
    assert wta_value(wta, w(("a", 1))) == 1 + F(1, 2)
    import json as _json
    again = wta_from_json(_json.dumps(wta_to_dict(wta)))
    assert wta_value(again, w(("a", 1))) == 1 + F(1, 2)
