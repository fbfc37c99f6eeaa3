"""Timed automata and weighted timed automata.

Structures are immutable.  Membership and word values are computed by exact
forward exploration over (location, clock valuation) states; silent switches
(an extension used by distance automata built elsewhere) are supported for
clock-free automata, where their closure is a plain graph computation.
Synchronized products and alphabet liftings are the building blocks of the
robustness reductions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import AlphabetError, DomainError, ParseError, ResourceExceededError
from .guards import TRUE, Guard, parse_guard
from .values import INF, format_value, parse_rational
from .words import Letter, TaggedTimedWord, TimedWord


@dataclass(frozen=True)
class Switch:
    source: object
    letter: Optional[Letter]  # None marks a silent switch
    guard: Guard
    resets: frozenset
    target: object

    def __str__(self):
        label = "ε" if self.letter is None else str(self.letter)
        return "%s --%s [%s] {%s}--> %s" % (
            self.source, label, self.guard, ",".join(sorted(self.resets)), self.target)


@dataclass(frozen=True)
class TimedAutomaton:
    alphabet: frozenset
    locations: Tuple[object, ...]
    initial: object
    clocks: Tuple[str, ...]
    switches: Tuple[Switch, ...]
    accepting: frozenset

    def __post_init__(self):
        locs = set(self.locations)
        if self.initial not in locs:
            raise DomainError("initial location missing")
        if not self.accepting <= locs:
            raise DomainError("accepting locations missing")
        clockset = set(self.clocks)
        for sw in self.switches:
            if sw.source not in locs or sw.target not in locs:
                raise DomainError("switch endpoints missing: %s" % (sw,))
            if sw.letter is not None and sw.letter not in self.alphabet:
                raise AlphabetError("switch letter %r not in alphabet" % (sw.letter,))
            if not sw.resets <= clockset:
                raise DomainError("switch resets unknown clocks: %s" % (sw,))
            if not sw.guard.clocks() <= clockset:
                raise DomainError("switch guard uses unknown clocks: %s" % (sw,))

    @cached_property
    def has_silent(self) -> bool:
        return any(sw.letter is None for sw in self.switches)

    @cached_property
    def by_source(self) -> Dict[object, Tuple[Switch, ...]]:
        out: Dict[object, list] = {l: [] for l in self.locations}
        for sw in self.switches:
            out[sw.source].append(sw)
        return {l: tuple(v) for l, v in out.items()}

    @cached_property
    def max_constant(self) -> Fraction:
        return max((sw.guard.max_constant() for sw in self.switches),
                   default=Fraction(0))

    def switch_index(self) -> Dict[Switch, int]:
        return {sw: i for i, sw in enumerate(self.switches)}


@dataclass(frozen=True)
class WeightedTimedAutomaton:
    """Timed automaton with rational location rates and switch weights."""

    automaton: TimedAutomaton
    rates: Mapping[object, Fraction] = field(default_factory=dict)
    switch_weights: Tuple[Fraction, ...] = ()

    def __post_init__(self):
        locs = set(self.automaton.locations)
        if set(self.rates) != locs:
            raise DomainError("every location needs a rate")
        if len(self.switch_weights) != len(self.automaton.switches):
            raise DomainError("every switch needs a weight")

    @staticmethod
    def from_ta(ta: TimedAutomaton) -> "WeightedTimedAutomaton":
        return WeightedTimedAutomaton(
            ta, {l: Fraction(0) for l in ta.locations},
            tuple(Fraction(0) for _ in ta.switches))

    def scaled(self, factor: Fraction) -> "WeightedTimedAutomaton":
        return WeightedTimedAutomaton(
            self.automaton,
            {l: r * factor for l, r in self.rates.items()},
            tuple(w * factor for w in self.switch_weights))

    @cached_property
    def weight_by_switch(self) -> Dict[Switch, Fraction]:
        return dict(zip(self.automaton.switches, self.switch_weights))


def _as_timed_word(word) -> TimedWord:
    if isinstance(word, TaggedTimedWord):
        return word.as_timed_word()
    return word


def _check_word_alphabet(ta: TimedAutomaton, word: TimedWord):
    extra = word.letters() - ta.alphabet
    if extra:
        raise AlphabetError("word letters %s outside automaton alphabet"
                            % sorted(map(repr, extra)))


def _silent_location_closure(ta: TimedAutomaton):
    """Reachability over silent switches (clock-free automata only)."""
    if ta.clocks:
        raise DomainError("silent switches are only supported on clock-free automata")
    adj: Dict[object, set] = {l: {l} for l in ta.locations}
    for sw in ta.switches:
        if sw.letter is None:
            adj[sw.source].add(sw.target)
    # transitive closure by BFS per location (graphs here are small)
    closure = {}
    for start in ta.locations:
        seen = {start}
        stack = [start]
        while stack:
            node = stack.pop()
            for nxt in adj[node]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        closure[start] = frozenset(seen)
    return closure


def accepting_run(ta: TimedAutomaton, word) -> Optional[List[Tuple[object, dict]]]:
    """One accepting run as a list of (location, valuation-after-step), or None.

    Silent moves are elided: the run records the state reached after each
    event of the word (plus the initial state).
    """
    word = _as_timed_word(word)
    _check_word_alphabet(ta, word)
    silent = _silent_location_closure(ta) if ta.has_silent else None

    def expand(states):
        if silent is None:
            return states
        out = dict(states)
        for (loc, nu), parent in list(states.items()):
            for nxt in silent[loc]:
                out.setdefault((nxt, nu), parent)
        return out

    zero = tuple(Fraction(0) for _ in ta.clocks)
    frontier = expand({(ta.initial, zero): None})
    trace = [frontier]
    prev_time = Fraction(0)
    for letter, time in word:
        dt = time - prev_time
        prev_time = time
        nxt: Dict[tuple, tuple] = {}
        for (loc, nu), _ in frontier.items():
            elapsed = tuple(v + dt for v in nu)
            valuation = dict(zip(ta.clocks, elapsed))
            for sw in ta.by_source[loc]:
                if sw.letter != letter or not sw.guard.satisfied(valuation):
                    continue
                after = tuple(Fraction(0) if c in sw.resets else v
                              for c, v in zip(ta.clocks, elapsed))
                nxt.setdefault((sw.target, after), (loc, nu))
        frontier = expand(nxt)
        if not frontier:
            return None
        trace.append(frontier)
    final = next(((loc, nu) for (loc, nu) in frontier if loc in ta.accepting), None)
    if final is None:
        return None
    path = [final]
    for depth in range(len(trace) - 1, 0, -1):
        path.append(trace[depth][path[-1]])
    path.reverse()
    return [(loc, dict(zip(ta.clocks, nu))) for loc, nu in path]


def accepts(ta: TimedAutomaton, word) -> bool:
    word = _as_timed_word(word)
    _check_word_alphabet(ta, word)
    silent = _silent_location_closure(ta) if ta.has_silent else None

    def expand(states):
        if silent is None:
            return states
        return {(nxt, nu) for (loc, nu) in states for nxt in silent[loc]}

    zero = tuple(Fraction(0) for _ in ta.clocks)
    frontier = expand({(ta.initial, zero)})
    prev_time = Fraction(0)
    for letter, time in word:
        dt = time - prev_time
        prev_time = time
        nxt = set()
        for loc, nu in frontier:
            elapsed = tuple(v + dt for v in nu)
            valuation = dict(zip(ta.clocks, elapsed))
            for sw in ta.by_source[loc]:
                if sw.letter == letter and sw.guard.satisfied(valuation):
                    nxt.add((sw.target,
                             tuple(Fraction(0) if c in sw.resets else v
                                   for c, v in zip(ta.clocks, elapsed))))
        frontier = expand(nxt)
        if not frontier:
            return False
    return any(loc in ta.accepting for loc, _ in frontier)


# ---------------------------------------------------------------------------
# word values
# ---------------------------------------------------------------------------

def _silent_gap_costs(wta: WeightedTimedAutomaton, sources: Dict[object, Fraction],
                      dt: Fraction) -> Dict[object, Fraction]:
    """Cheapest way to spend ``dt`` starting from weighted source locations.

    Any number of silent switches may fire during the gap; the elapsed time
    is distributed over the visited locations, so an optimal run parks the
    whole gap on the cheapest rate seen along the silent path.
    """
    ta = wta.automaton
    eps = [(sw.source, sw.target, wta.weight_by_switch[sw])
           for sw in ta.switches if sw.letter is None]
    if any(wta.rates[l] < 0 for l in ta.locations) and eps:
        raise DomainError("silent switches with negative rates are not supported")
    # state: (location, min rate seen); Bellman-Ford since weights may be 0
    best: Dict[tuple, Fraction] = {}
    for loc, base in sources.items():
        key = (loc, wta.rates[loc])
        if key not in best or base < best[key]:
            best[key] = base
    changed = True
    rounds = 0
    while changed:
        changed = False
        rounds += 1
        if rounds > 4 * (len(ta.locations) ** 2 + 4):
            raise DomainError("negative silent cycle: word value is unbounded below")
        for src, dst, w in eps:
            rate = wta.rates[dst]
            for (loc, seen), cost in list(best.items()):
                if loc != src:
                    continue
                key = (dst, min(seen, rate))
                cand = cost + w
                if key not in best or cand < best[key]:
                    best[key] = cand
                    changed = True
    out: Dict[object, Fraction] = {}
    for (loc, seen), cost in best.items():
        total = cost + seen * dt
        if loc not in out or total < out[loc]:
            out[loc] = total
    return out


def wta_value(wta: WeightedTimedAutomaton, word):
    """Infimum over accepting runs of the run value; INF when rejected."""
    word = _as_timed_word(word)
    ta = wta.automaton
    _check_word_alphabet(ta, word)
    if ta.has_silent and ta.clocks:
        raise DomainError("word values with silent switches need clock-free automata")

    if not ta.has_silent:
        zero = tuple(Fraction(0) for _ in ta.clocks)
        frontier: Dict[tuple, Fraction] = {(ta.initial, zero): Fraction(0)}
        prev_time = Fraction(0)
        for letter, time in word:
            dt = time - prev_time
            prev_time = time
            nxt: Dict[tuple, Fraction] = {}
            for (loc, nu), cost in frontier.items():
                elapsed = tuple(v + dt for v in nu)
                valuation = dict(zip(ta.clocks, elapsed))
                base = cost + wta.rates[loc] * dt
                for sw in ta.by_source[loc]:
                    if sw.letter != letter or not sw.guard.satisfied(valuation):
                        continue
                    after = tuple(Fraction(0) if c in sw.resets else v
                                  for c, v in zip(ta.clocks, elapsed))
                    cand = base + wta.weight_by_switch[sw]
                    key = (sw.target, after)
                    if key not in nxt or cand < nxt[key]:
                        nxt[key] = cand
            if not nxt:
                return INF
            frontier = nxt
        finals = [c for (loc, _), c in frontier.items() if loc in ta.accepting]
        return min(finals) if finals else INF

    # clock-free with silent switches
    frontier = {ta.initial: Fraction(0)}
    prev_time = Fraction(0)
    for letter, time in word:
        dt = time - prev_time
        prev_time = time
        at_event = _silent_gap_costs(wta, frontier, dt)
        nxt: Dict[object, Fraction] = {}
        for loc, cost in at_event.items():
            for sw in ta.by_source[loc]:
                if sw.letter != letter:
                    continue
                cand = cost + wta.weight_by_switch[sw]
                if sw.target not in nxt or cand < nxt[sw.target]:
                    nxt[sw.target] = cand
        if not nxt:
            return INF
        frontier = nxt
    closed = _silent_gap_costs(wta, frontier, Fraction(0))
    finals = [c for loc, c in closed.items() if loc in ta.accepting]
    return min(finals) if finals else INF


# ---------------------------------------------------------------------------
# products and liftings
# ---------------------------------------------------------------------------

def _renamed_clocks(components: Sequence[WeightedTimedAutomaton]):
    tables = []
    for i, comp in enumerate(components):
        tables.append({c: "c%d_%s" % (i, c) for c in comp.automaton.clocks})
    return tables


def synchronized_product(components: Sequence[WeightedTimedAutomaton],
                         max_locations: int = 500000) -> WeightedTimedAutomaton:
    """Sum-weighted synchronized product over a shared alphabet.

    Letter switches synchronize all components; a silent switch of one
    component moves alone.  Acceptance requires every component to accept.
    """
    if not components:
        raise DomainError("empty product")
    alphabet = components[0].automaton.alphabet
    for comp in components[1:]:
        if comp.automaton.alphabet != alphabet:
            raise AlphabetError("product components must share one alphabet")
    tables = _renamed_clocks(components)
    by_letter = []
    silents = []
    for comp in components:
        index: Dict[tuple, list] = {}
        sil: Dict[object, list] = {}
        for sw in comp.automaton.switches:
            if sw.letter is None:
                sil.setdefault(sw.source, []).append(sw)
            else:
                index.setdefault((sw.source, sw.letter), []).append(sw)
        by_letter.append(index)
        silents.append(sil)

    init = tuple(c.automaton.initial for c in components)
    locations = [init]
    seen = {init}
    switches: List[Switch] = []
    weights: List[Fraction] = []
    frontier = [init]
    while frontier:
        joint = frontier.pop()
        for letter in alphabet:
            options = [by_letter[i].get((joint[i], letter), ())
                       for i in range(len(components))]
            if any(not opts for opts in options):
                continue
            combos = [()]
            for opts in options:
                combos = [c + (sw,) for c in combos for sw in opts]
            for combo in combos:
                guard = TRUE
                resets = set()
                weight = Fraction(0)
                target = []
                for i, sw in enumerate(combo):
                    guard = guard.conjoin(sw.guard.renamed(tables[i]))
                    resets.update(tables[i][c] for c in sw.resets)
                    weight += components[i].weight_by_switch[sw]
                    target.append(sw.target)
                target = tuple(target)
                if target not in seen:
                    seen.add(target)
                    if len(seen) > max_locations:
                        raise ResourceExceededError(
                            "product exceeded %d locations" % max_locations,
                            explored=len(seen))
                    locations.append(target)
                    frontier.append(target)
                switches.append(Switch(joint, letter, guard,
                                       frozenset(resets), target))
                weights.append(weight)
        for i, comp in enumerate(components):
            for sw in silents[i].get(joint[i], ()):
                target = joint[:i] + (sw.target,) + joint[i + 1:]
                guard = sw.guard.renamed(tables[i])
                resets = frozenset(tables[i][c] for c in sw.resets)
                if target not in seen:
                    seen.add(target)
                    if len(seen) > max_locations:
                        raise ResourceExceededError(
                            "product exceeded %d locations" % max_locations,
                            explored=len(seen))
                    locations.append(target)
                    frontier.append(target)
                switches.append(Switch(joint, None, guard, resets, target))
                weights.append(components[i].weight_by_switch[sw])

    clocks = tuple(c for table in tables for c in table.values())
    accepting = frozenset(
        joint for joint in locations
        if all(joint[i] in components[i].automaton.accepting
               for i in range(len(components))))
    ta = TimedAutomaton(alphabet, tuple(locations), init, clocks,
                        tuple(switches), accepting)
    rates = {
        joint: sum((components[i].rates[joint[i]]
                    for i in range(len(components))), Fraction(0))
        for joint in locations
    }
    return WeightedTimedAutomaton(ta, rates, tuple(weights))


def lift(wta: WeightedTimedAutomaton, letter_map: Dict[Letter, Optional[Letter]],
         alphabet: Iterable[Letter]) -> WeightedTimedAutomaton:
    """Reinterpret a component over a larger alphabet.

    ``letter_map`` sends each new letter to the component letter it drives;
    ``None`` entries are skipped with a zero-weight self-loop everywhere.
    Silent switches are preserved.
    """
    alphabet = frozenset(alphabet)
    if set(letter_map) != alphabet:
        raise AlphabetError("letter map must cover the new alphabet")
    ta = wta.automaton
    switches: List[Switch] = []
    weights: List[Fraction] = []
    for sw in ta.switches:
        if sw.letter is None:
            switches.append(sw)
            weights.append(wta.weight_by_switch[sw])
    for new_letter, old_letter in letter_map.items():
        if old_letter is None:
            for loc in ta.locations:
                switches.append(Switch(loc, new_letter, TRUE, frozenset(), loc))
                weights.append(Fraction(0))
        else:
            if old_letter not in ta.alphabet:
                raise AlphabetError("mapped letter %r missing" % (old_letter,))
            for sw in ta.switches:
                if sw.letter == old_letter:
                    switches.append(Switch(sw.source, new_letter, sw.guard,
                                           sw.resets, sw.target))
                    weights.append(wta.weight_by_switch[sw])
    lifted = TimedAutomaton(alphabet, ta.locations, ta.initial, ta.clocks,
                            tuple(switches), ta.accepting)
    return WeightedTimedAutomaton(lifted, dict(wta.rates), tuple(weights))


def silenced(wta: WeightedTimedAutomaton, letters) -> WeightedTimedAutomaton:
    """Turn every switch on the given letters into a silent switch."""
    letters = frozenset(letters)
    ta = wta.automaton
    switches = tuple(
        Switch(sw.source, None, sw.guard, sw.resets, sw.target)
        if sw.letter in letters else sw
        for sw in ta.switches)
    slim = TimedAutomaton(ta.alphabet - letters, ta.locations, ta.initial,
                          ta.clocks, switches, ta.accepting)
    return WeightedTimedAutomaton(slim, dict(wta.rates), wta.switch_weights)


# ---------------------------------------------------------------------------
# JSON model format
# ---------------------------------------------------------------------------

def wta_from_json(text: str) -> WeightedTimedAutomaton:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError("invalid JSON: %s" % err) from None
    return wta_from_dict(doc)


def wta_from_dict(doc: dict) -> WeightedTimedAutomaton:
    for key in ("alphabet", "locations", "initial", "switches"):
        if key not in doc:
            raise ParseError("model is missing %r" % key)
    alphabet = frozenset(doc["alphabet"])
    locations = tuple(doc["locations"])
    clocks = tuple(doc.get("clocks", ()))
    switches = []
    weights = []
    for i, entry in enumerate(doc["switches"]):
        silent = entry.get("silent", False)
        letter = None if silent else entry.get("letter")
        if letter is None and not silent:
            raise ParseError("switch %d needs a letter or silent: true" % i)
        guard = parse_guard(entry.get("guard", "true"))
        switches.append(Switch(entry["from"], letter, guard,
                               frozenset(entry.get("resets", ())), entry["to"]))
        weights.append(parse_rational(str(entry.get("weight", 0))))
    ta = TimedAutomaton(alphabet, locations, doc["initial"], clocks,
                        tuple(switches), frozenset(doc.get("accepting", ())))
    rates = {l: Fraction(0) for l in locations}
    for loc, rate in doc.get("location_weights", {}).items():
        if loc not in rates:
            raise ParseError("weight for unknown location %r" % loc)
        rates[loc] = parse_rational(str(rate))
    return WeightedTimedAutomaton(ta, rates, tuple(weights))


def wta_to_dict(wta: WeightedTimedAutomaton) -> dict:
    ta = wta.automaton
    return {
        "alphabet": sorted(map(str, ta.alphabet)),
        "locations": [str(l) for l in ta.locations],
        "initial": str(ta.initial),
        "clocks": list(ta.clocks),
        "switches": [
            {
                "from": str(sw.source),
                **({"silent": True} if sw.letter is None else {"letter": str(sw.letter)}),
                "guard": str(sw.guard),
                "resets": sorted(sw.resets),
                "to": str(sw.target),
                "weight": format_value(w),
            }
            for sw, w in zip(ta.switches, wta.switch_weights)
        ],
        "location_weights": {str(l): format_value(r) for l, r in wta.rates.items()},
        "accepting": sorted(map(str, ta.accepting)),
    }
