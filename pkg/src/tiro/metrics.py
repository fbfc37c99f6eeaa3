"""Similarity functions between timed words.

Four similarity functions are computed directly (without automata):

* generalized Manhattan -- positionwise mismatch sum over discrete words,
  the shorter word padded with the end marker ``#``;
* timed Manhattan -- the mismatch penalty integrated over the shared domain
  of the two signal views;
* accumulated delay -- the sum of per-breakpoint timestamp offsets when the
  stutter-free letter sequences agree, infinite otherwise;
* Skorokhod -- the cheapest way to retime the second word so that it lines
  up with the first, paying the per-breakpoint retiming delay plus the timed
  Manhattan mismatch that remains.

All arithmetic is exact.  Words compared by the timed functions must share a
Càdlàg domain; callers align domains explicitly (``TimedWord.pad_to``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Sequence, Tuple

from .errors import AlphabetError, DomainError, ParseError
from .values import INF, format_value, parse_value
from .words import END_MARK, CadlagFunction, Letter, TimedWord


@dataclass(frozen=True)
class DiffFunction:
    """Symmetric mismatch-penalty table over an alphabet extended with ``#``.

    Unlisted pairs default to 0 on the diagonal and ``default`` off it.
    Finite entries must satisfy the triangle inequality.
    """

    letters: frozenset
    entries: Dict[Tuple[Letter, Letter], object] = field(default_factory=dict)
    default: object = Fraction(1)

    def __post_init__(self):
        full = self.letters | {END_MARK}
        for (a, b), v in self.entries.items():
            if a not in full or b not in full:
                raise AlphabetError("diff entry (%r, %r) outside alphabet" % (a, b))
            if a == b and v != 0:
                raise DomainError("diff(%r, %r) must be 0" % (a, a))
            mirror = self.entries.get((b, a), v)
            if mirror != v:
                raise DomainError("diff not symmetric at (%r, %r)" % (a, b))
            if v is not INF and v < 0:
                raise DomainError("negative diff at (%r, %r)" % (a, b))
        self._check_triangle(full)

    def _check_triangle(self, full):
        letters = sorted(full, key=repr)
        for a in letters:
            for b in letters:
                ab = self.value(a, b)
                if ab is INF:
                    continue
                for c in letters:
                    bc = self.value(b, c)
                    ac = self.value(a, c)
                    if bc is INF or ac is INF:
                        continue
                    if ac > ab + bc:
                        raise DomainError(
                            "triangle inequality fails: diff(%r,%r) > diff(%r,%r)+diff(%r,%r)"
                            % (a, c, a, b, b, c))

    def value(self, a, b):
        if a == b:
            return Fraction(0)
        full = self.letters | {END_MARK}
        if a not in full or b not in full:
            raise AlphabetError("diff undefined for (%r, %r)" % (a, b))
        if (a, b) in self.entries:
            return self.entries[(a, b)]
        if (b, a) in self.entries:
            return self.entries[(b, a)]
        return self.default

    __call__ = value

    @property
    def max_finite(self) -> Fraction:
        best = Fraction(0)
        if self.default is not INF:
            best = max(best, Fraction(self.default))
        for v in self.entries.values():
            if v is not INF:
                best = max(best, Fraction(v))
        return best

    def all_at_most_one(self) -> bool:
        if self.default is not INF and self.default > 1:
            return False
        if self.default is INF:
            full = sorted(self.letters | {END_MARK}, key=repr)
            for i, a in enumerate(full):
                for b in full[i + 1:]:
                    if self.value(a, b) > 1:
                        return False
            return True
        return all(v is not INF and v <= 1 for v in self.entries.values())


def zero_one_diff(letters) -> DiffFunction:
    """The plain Manhattan penalty: 1 between distinct letters."""
    return DiffFunction(frozenset(letters))


def equality_diff(letters) -> DiffFunction:
    """0 on equal letters, infinite otherwise (the accumulated-delay regime)."""
    return DiffFunction(frozenset(letters), default=INF)


def hamming_diff(width: int) -> DiffFunction:
    """Bit-vector penalty: Hamming distance, with ``#`` one beyond the zero word."""
    letters = frozenset(format(i, "0%db" % width) for i in range(2 ** width))
    entries = {}
    for a in letters:
        for b in letters:
            if a < b:
                d = sum(1 for x, y in zip(a, b) if x != y)
                entries[(a, b)] = Fraction(d)
        entries[(a, END_MARK)] = Fraction(a.count("1") + 1)
    return DiffFunction(letters, entries)


def parse_diff(text: str, alphabet=None) -> DiffFunction:
    """Parse the ``diff <alphabet>`` table format.

    Header ``diff <name>`` or ``diff {a, b, c}``; body lines ``a b <value>``
    with ``inf`` allowed.  Unlisted pairs default to 1 off the diagonal.
    """
    letters = None
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("diff"):
            if letters is not None:
                raise ParseError("duplicate diff header", line=lineno)
            rest = line[len("diff"):].strip()
            if rest.startswith("{"):
                if not rest.endswith("}"):
                    raise ParseError("unterminated alphabet set", line=lineno)
                letters = frozenset(
                    tok.strip() for tok in rest[1:-1].split(",") if tok.strip())
            else:
                if alphabet is None:
                    raise ParseError(
                        "diff header names alphabet %r but none was supplied" % rest,
                        line=lineno)
                letters = frozenset(alphabet)
            continue
        if letters is None:
            raise ParseError("missing 'diff <alphabet>' header", line=lineno)
        parts = line.split()
        if len(parts) != 3:
            raise ParseError("expected 'a b <value>', got %r" % raw, line=lineno)
        a, b, value_text = parts
        for x in (a, b):
            if x != END_MARK and x not in letters:
                raise ParseError("letter %r not in alphabet" % x, line=lineno)
        entries[(a, b)] = parse_value(value_text, line=lineno)
    if letters is None:
        raise ParseError("empty diff table")
    return DiffFunction(letters, entries)


def format_diff(diff: DiffFunction) -> str:
    lines = ["diff {%s}" % ", ".join(sorted(map(str, diff.letters)))]
    for (a, b), v in sorted(diff.entries.items(), key=repr):
        lines.append("%s %s %s" % (a, b, format_value(v)))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# the four similarity functions
# ---------------------------------------------------------------------------

def generalized_manhattan(s: Sequence[Letter], t: Sequence[Letter],
                          diff: DiffFunction):
    """Positionwise mismatch sum; the shorter word is padded with ``#``."""
    total = Fraction(0)
    for i in range(max(len(s), len(t))):
        a = s[i] if i < len(s) else END_MARK
        b = t[i] if i < len(t) else END_MARK
        d = diff.value(a, b)
        if d is INF:
            return INF
        total += d
    return total


def _require_shared_domain(u: TimedWord, v: TimedWord):
    fu, fv = u.to_cadlag(), v.to_cadlag()
    if fu.domain != fv.domain:
        raise DomainError(
            "words must share a Càdlàg domain: [%s, %s] vs [%s, %s]"
            % (fu.domain + fv.domain))
    return fu, fv


def timed_manhattan(u: TimedWord, v: TimedWord, diff: DiffFunction):
    """Integral of the pointwise mismatch penalty over the shared domain."""
    fu, fv = _require_shared_domain(u, v)
    cuts = sorted({t for t, _ in fu.breakpoints} | {t for t, _ in fv.breakpoints}
                  | {fu.end})
    total = Fraction(0)
    for lo, hi in zip(cuts, cuts[1:]):
        if hi <= lo:
            continue
        d = diff.value(fu.value(lo), fv.value(lo))
        if d is INF:
            return INF
        total += d * (hi - lo)
    return total


def accumulated_delay(u: TimedWord, v: TimedWord):
    """Sum of breakpoint offsets; infinite when the untimed projections differ."""
    fu, fv = _require_shared_domain(u, v)
    su, sv = fu.to_word(), fv.to_word()
    if su.untimed() != sv.untimed():
        return INF
    return sum((abs(ta - tb) for (_, ta), (_, tb) in zip(su, sv)), Fraction(0))


# -- Skorokhod ---------------------------------------------------------------
#
# The retiming lambda is pinned by the preimages mu_j of the second word's
# stutter-free breakpoints tau_j.  Its cost is the delay sum |tau_j - mu_j|
# plus the integral of diff(f_u, beta_j) over [mu_j, mu_{j+1}].  For each
# coordinate this objective is piecewise linear with kinks only at the two
# words' breakpoints, so some optimum places every mu_j on that candidate
# set; the DP below minimises exactly over monotone candidate assignments.
# The candidate-set claim is validated against a dense-grid oracle in the
# test suite before being trusted (see tests/test_metrics.py).

def _segment_cost(fu: CadlagFunction, diff: DiffFunction, beta, lo, hi):
    """Integral of diff(f_u(.), beta) over [lo, hi]."""
    if hi <= lo:
        return Fraction(0)
    cuts = [lo] + [t for t, _ in fu.breakpoints if lo < t < hi] + [hi]
    total = Fraction(0)
    for a, b in zip(cuts, cuts[1:]):
        d = diff.value(fu.value(a), beta)
        if d is INF:
            return INF
        total += d * (b - a)
    return total


def retiming_objective(u: TimedWord, v: TimedWord, diff: DiffFunction,
                       mus: Sequence[Fraction]):
    """Cost of one explicit retiming of v's breakpoints to positions ``mus``.

    ``mus`` must be weakly increasing within the shared domain, one entry per
    stutter-free breakpoint of v, the first equal to the domain start.
    """
    fu, fv = _require_shared_domain(u, v)
    taus = [t for t, _ in fv.breakpoints]
    betas = [a for _, a in fv.breakpoints]
    if len(mus) != len(taus):
        raise DomainError("need %d retimed positions, got %d" % (len(taus), len(mus)))
    lo, hi = fu.domain
    prev = lo
    for m in mus:
        if not (lo <= m <= hi) or m < prev:
            raise DomainError("retimed positions must increase within the domain")
        prev = m
    if mus[0] != lo:
        raise DomainError("the first breakpoint cannot be retimed away from the start")
    total = Fraction(0)
    for tau, mu in zip(taus, mus):
        total += abs(tau - mu)
    stops = list(mus) + [hi]
    for j, beta in enumerate(betas):
        cost = _segment_cost(fu, diff, beta, stops[j], stops[j + 1])
        if cost is INF:
            return INF
        total += cost
    return total


def _skorokhod_dp(u: TimedWord, v: TimedWord, diff: DiffFunction, candidates):
    fu, fv = _require_shared_domain(u, v)
    lo, hi = fu.domain
    taus = [t for t, _ in fv.breakpoints]
    betas = [a for _, a in fv.breakpoints]
    cands = sorted(set(candidates) | {lo, hi})
    n = len(cands)

    # per-letter costs of each candidate cell [cands[k], cands[k+1]]
    cells = {
        beta: [_segment_cost(fu, diff, beta, a, b) for a, b in zip(cands, cands[1:])]
        for beta in set(betas)
    }

    def sweep(dp, beta, tau=None):
        """min over i <= k of dp[i] + mismatch(beta, i..k), plus delay to tau."""
        cell = cells[beta]
        out = [INF] * n
        run = INF  # best dp[i] + mismatch so far; INF cells cut the run
        for k in range(n):
            if k > 0:
                c = cell[k - 1]
                run = INF if (c is INF or run is INF) else run + c
            if dp[k] is not INF and (run is INF or dp[k] < run):
                run = dp[k]
            if run is not INF:
                out[k] = run if tau is None else run + abs(tau - cands[k])
        return out

    dp = [INF] * n
    dp[cands.index(lo)] = Fraction(0)
    for j in range(1, len(taus)):
        dp = sweep(dp, betas[j - 1], taus[j])
    closed = sweep(dp, betas[-1])
    return closed[n - 1]


def skorokhod(u: TimedWord, v: TimedWord, diff: DiffFunction):
    """Cheapest retiming of v against u: delay sum plus residual mismatch.

    The value is an infimum; when ``diff`` has infinite entries it may be
    approached rather than attained by concrete retimings.
    """
    fu, fv = _require_shared_domain(u, v)
    candidates = {t for t, _ in fu.breakpoints} | {t for t, _ in fv.breakpoints}
    return _skorokhod_dp(u, v, diff, candidates)


def skorokhod_grid(u: TimedWord, v: TimedWord, diff: DiffFunction,
                   steps: int = 128):
    """Grid-restricted Skorokhod value used as an independent oracle."""
    fu, _ = _require_shared_domain(u, v)
    lo, hi = fu.domain
    if hi == lo:
        grid = {lo}
    else:
        grid = {lo + (hi - lo) * Fraction(i, steps) for i in range(steps + 1)}
    return _skorokhod_dp(u, v, diff, grid)
