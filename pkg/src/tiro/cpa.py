"""Quantitative emptiness of weighted timed automata via corner points.

After scaling guard constants to integers, runs are abstracted onto a finite
weighted graph over (location, region, corner) nodes: full-unit diagonal
flow inside open regions, zero-cost boundary crossings, and guarded switch
edges.  Shortest paths on this graph realize the infimum of run values, and
a reachable-and-co-reachable negative cycle certifies an infimum of minus
infinity.  Witness paths are decoded back into timed words by walking the
region sequence with exact rational representatives, shrinking the decode
margin until the witness re-validates below the threshold.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import floor, lcm
from typing import Dict, List, Optional, Tuple

from .automata import TimedAutomaton, WeightedTimedAutomaton
from .errors import DomainError, ResourceExceededError
from .regions import UNBOUNDED, Region
from .values import INF
from .words import TimedWord

DEFAULT_MARGIN = Fraction(1, 1024)


@dataclass
class QuantResult:
    holds: bool
    witness: Optional[TimedWord] = None
    witness_value: Optional[Fraction] = None
    negative_cycle: bool = False
    explored: int = 0


@dataclass(frozen=True)
class _Edge:
    dst: tuple
    cost: Fraction
    kind: str  # advance | cross | switch
    switch: Optional[object] = None


class _CornerGraph:
    """Reachable corner-point graph of a scaled automaton."""

    def __init__(self, wta: WeightedTimedAutomaton, max_nodes: int):
        ta = wta.automaton
        self.wta = wta
        self.ta = ta
        self.clock_index = {c: i for i, c in enumerate(ta.clocks)}
        denoms = [1]
        for sw in ta.switches:
            for atom in sw.guard.atoms:
                denoms.append(atom.constant.denominator)
        self.scale = lcm(*denoms)
        consts = [0]
        self.scaled_guards = {}
        for sw in ta.switches:
            atoms = []
            for atom in sw.guard.atoms:
                c = atom.constant * self.scale
                atoms.append((self.clock_index[atom.clock], atom.op, int(c)))
                consts.append(int(c))
            self.scaled_guards[sw] = tuple(atoms)
        self.ceiling = max(consts)
        self.unit = Fraction(1, self.scale)  # true duration of one advance

        start_region = Region.initial(len(ta.clocks), self.ceiling)
        self.initial = (ta.initial, start_region, 0)
        self.edges: Dict[tuple, List[_Edge]] = {}
        queue = deque([self.initial])
        known = {self.initial}
        while queue:
            node = queue.popleft()
            out = list(self._expand(node))
            self.edges[node] = out
            for edge in out:
                if edge.dst not in known:
                    known.add(edge.dst)
                    if len(known) > max_nodes:
                        raise ResourceExceededError(
                            "corner-point graph exceeded %d nodes" % max_nodes,
                            explored=len(known))
                    queue.append(edge.dst)
        self.nodes = known

    def _region_satisfies(self, region: Region, sw) -> bool:
        return all(region.atom_holds(i, op, c)
                   for i, op, c in self.scaled_guards[sw])

    def _expand(self, node):
        loc, region, k = node
        rate = self.wta.rates[loc]
        if region.can_advance():
            if region.all_unbounded:
                yield _Edge(node, rate * self.unit, "advance")
            elif k == 0:
                yield _Edge((loc, region, len(region.order)),
                            rate * self.unit, "advance")
        succ = region.successor()
        if succ is not None:
            if region.zero:
                yield _Edge((loc, succ, k), Fraction(0), "cross")
            elif k >= 1:
                yield _Edge((loc, succ, k - 1), Fraction(0), "cross")
        for sw in self.ta.by_source[loc]:
            if not self._region_satisfies(region, sw):
                continue
            resets = frozenset(self.clock_index[c] for c in sw.resets)
            target_region = region.reset(resets)
            up_groups = region.order[len(region.order) - k:] if k else ()
            k2 = sum(1 for g in up_groups if g - resets)
            yield _Edge((sw.target, target_region, k2),
                        self.wta.weight_by_switch[sw], "switch", sw)

    def accepting_nodes(self):
        return [n for n in self.nodes if n[0] in self.ta.accepting]


def _coreachable(graph: _CornerGraph, targets) -> set:
    reverse: Dict[tuple, list] = {n: [] for n in graph.nodes}
    for src, out in graph.edges.items():
        for edge in out:
            reverse[edge.dst].append(src)
    seen = set(targets)
    queue = deque(targets)
    while queue:
        node = queue.popleft()
        for prev in reverse[node]:
            if prev not in seen:
                seen.add(prev)
                queue.append(prev)
    return seen


def _bfs_path(graph: _CornerGraph, allowed, source, goals) -> Optional[list]:
    """Unweighted path as a list of (node, edge) steps."""
    if source in goals:
        return []
    parent: Dict[tuple, Tuple[tuple, _Edge]] = {source: None}
    queue = deque([source])
    while queue:
        node = queue.popleft()
        for edge in graph.edges[node]:
            if edge.dst in parent or edge.dst not in allowed:
                continue
            parent[edge.dst] = (node, edge)
            if edge.dst in goals:
                steps = []
                cur = edge.dst
                while parent[cur] is not None:
                    prev, via = parent[cur]
                    steps.append((prev, via))
                    cur = prev
                steps.reverse()
                return steps
            queue.append(edge.dst)
    return None


def _spfa(graph: _CornerGraph, allowed):
    """Shortest paths from the initial node; detects a negative cycle.

    Returns (dist, parent, cycle) where cycle is a list of (node, edge)
    steps around one reachable negative cycle, or None.
    """
    dist = {graph.initial: Fraction(0)}
    parent: Dict[tuple, Tuple[tuple, _Edge]] = {graph.initial: None}
    counts = {graph.initial: 0}
    in_queue = {graph.initial}
    queue = deque([graph.initial])
    bound = len(allowed) + 1
    while queue:
        node = queue.popleft()
        in_queue.discard(node)
        base = dist[node]
        for edge in graph.edges[node]:
            if edge.dst not in allowed:
                continue
            cand = base + edge.cost
            if edge.dst not in dist or cand < dist[edge.dst]:
                dist[edge.dst] = cand
                parent[edge.dst] = (node, edge)
                counts[edge.dst] = counts.get(edge.dst, 0) + 1
                if counts[edge.dst] > bound:
                    return dist, parent, _extract_cycle(parent, edge.dst)
                if edge.dst not in in_queue:
                    in_queue.add(edge.dst)
                    queue.append(edge.dst)
    return dist, parent, None


def _extract_cycle(parent, start):
    node = start
    for _ in range(len(parent) + 1):
        node = parent[node][0]
    cursor = node
    steps = []
    while True:
        prev, edge = parent[cursor]
        steps.append((prev, edge))
        cursor = prev
        if cursor == node:
            break
    steps.reverse()
    return steps


def _walk_parents(parent, node):
    steps = []
    while parent[node] is not None:
        prev, edge = parent[node]
        steps.append((prev, edge))
        node = prev
    steps.reverse()
    return steps


class _DecodeFailure(Exception):
    pass


def _decode(graph: _CornerGraph, steps, margin: Fraction):
    """Concrete run along a corner path; returns (word, run value)."""
    ta = graph.ta
    n = len(ta.clocks)
    nu = [Fraction(0)] * n
    now = Fraction(0)
    value = Fraction(0)
    events = []
    eps = margin / (len(steps) + 1)

    def fracs(region):
        return [nu[i] - region.ipart[i] for group in region.order for i in group]

    for node, edge in steps:
        loc, region, _ = node
        rate = graph.wta.rates[loc]
        if edge.kind == "advance":
            if region.all_unbounded:
                d = Fraction(1)
            else:
                top = max(fracs(region))
                d = 1 - top - eps
                if d <= 0:
                    raise _DecodeFailure()
        elif edge.kind == "cross":
            if region.zero:
                ceilingroom = [1 - f for f in fracs(region)]
                d = min([eps] + [c / 2 for c in ceilingroom])
                if d <= 0:
                    raise _DecodeFailure()
            else:
                d = 1 - max(fracs(region))
        else:
            d = Fraction(0)
        if d:
            nu = [v + d for v in nu]
            now += d
            value += rate * d / graph.scale
        if edge.kind == "switch":
            sw = edge.switch
            for i, op, c in graph.scaled_guards[sw]:
                holds = {"<": nu[i] < c, "<=": nu[i] <= c, "=": nu[i] == c,
                         ">=": nu[i] >= c, ">": nu[i] > c}[op]
                if not holds:
                    raise _DecodeFailure()
            value += graph.wta.weight_by_switch[sw]
            if sw.letter is not None:
                events.append((sw.letter, now / graph.scale))
            reset_idx = {graph.clock_index[c] for c in sw.resets}
            nu = [Fraction(0) if i in reset_idx else v for i, v in enumerate(nu)]
        _, target_region, _ = edge.dst
        if not target_region.contains(tuple(nu)):
            raise _DecodeFailure()
    return TimedWord(tuple(events)), value


def quantitative_emptiness(wta: WeightedTimedAutomaton, threshold,
                           margin: Fraction = DEFAULT_MARGIN,
                           max_nodes: int = 2000000) -> QuantResult:
    """Does some accepting run have value strictly below the threshold?

    ``threshold`` may be INF, in which case the question degenerates to
    Boolean emptiness and any accepting run qualifies.
    """
    graph = _CornerGraph(wta, max_nodes)
    accepting = set(graph.accepting_nodes())
    if not accepting:
        return QuantResult(False, explored=len(graph.nodes))
    allowed = _coreachable(graph, accepting)
    if graph.initial not in allowed:
        return QuantResult(False, explored=len(graph.nodes))

    if threshold is INF:
        steps = _bfs_path(graph, allowed, graph.initial, accepting)
        word, value = _decode_retry(graph, steps, margin, INF)
        return QuantResult(True, word, value, explored=len(graph.nodes))

    dist, parent, cycle = _spfa(graph, allowed)
    if cycle is not None:
        entry = cycle[0][0]
        prefix = _bfs_path(graph, allowed, graph.initial, {entry})
        suffix = _bfs_path(graph, allowed, entry, accepting)
        w_pre = sum((e.cost for _, e in prefix), Fraction(0))
        w_suf = sum((e.cost for _, e in suffix), Fraction(0))
        w_cyc = sum((e.cost for _, e in cycle), Fraction(0))
        if w_cyc >= 0:
            raise DomainError("internal: extracted cycle is not negative")
        need = w_pre + w_suf - threshold
        pumps = max(1, floor(need / -w_cyc) + 1)
        steps = prefix + cycle * pumps + suffix
        word, value = _decode_retry(graph, steps, margin, threshold)
        return QuantResult(True, word, value, negative_cycle=True,
                           explored=len(graph.nodes))

    best_node = None
    best = None
    for node in accepting:
        if node in dist and (best is None or dist[node] < best):
            best, best_node = dist[node], node
    if best is None or best >= threshold:
        return QuantResult(False, explored=len(graph.nodes))
    steps = _walk_parents(parent, best_node)
    word, value = _decode_retry(graph, steps, margin, threshold)
    return QuantResult(True, word, value, explored=len(graph.nodes))


def _decode_retry(graph: _CornerGraph, steps, margin, threshold):
    for _ in range(80):
        try:
            word, value = _decode(graph, steps, margin)
        except _DecodeFailure:
            margin /= 2
            continue
        if threshold is INF or value < threshold:
            return word, value
        margin /= 2
    raise DomainError("internal: could not realize corner path within margin")


def emptiness(ta: TimedAutomaton, max_nodes: int = 2000000):
    """Boolean emptiness with a witness word, via the region machinery."""
    result = quantitative_emptiness(WeightedTimedAutomaton.from_ta(ta), INF,
                                    max_nodes=max_nodes)
    return result.holds, result.witness
