"""Shared generators for randomized tests.

Random timed words use denominators from {1, 2, 4, 8} and domains of
power-of-two length so that the 2^-7 validation grid of the Skorokhod
oracle contains every breakpoint candidate exactly.
"""

from __future__ import annotations

import random
from fractions import Fraction

from tiro.words import TimedWord

DENOMS = (1, 2, 4, 8)


def rational(rng: random.Random, lo, hi, denom=8) -> Fraction:
    lo, hi = Fraction(lo), Fraction(hi)
    ticks = int((hi - lo) * denom)
    return lo + Fraction(rng.randint(0, ticks), denom)


def random_word(rng: random.Random, alphabet, domain_end, max_events=6) -> TimedWord:
    """Random word starting at 0 with Càdlàg domain [0, domain_end]."""
    letters = sorted(alphabet)
    n = rng.randint(1, max_events)
    times = sorted(rational(rng, 0, domain_end) for _ in range(n - 1))
    events = [(rng.choice(letters), Fraction(0))]
    for t in times:
        events.append((rng.choice(letters), t))
    word = TimedWord(tuple(events))
    return word.pad_to(Fraction(domain_end))


def random_word_pair(rng: random.Random, alphabet, domain_end=2, max_events=6):
    """Two random words sharing the Càdlàg domain [0, domain_end]."""
    u = random_word(rng, alphabet, domain_end, max_events)
    v = random_word(rng, alphabet, domain_end, max_events)
    return u, v


def random_matching_pair(rng: random.Random, alphabet, domain_end=4,
                         max_breaks=4, max_shift=None):
    """Two words with equal untimed stutter-free projections.

    Breakpoint timestamps differ but keep their order; the optional
    ``max_shift`` bounds each |delta_j - tau_j|.
    """
    letters = sorted(alphabet)
    ticks = int(Fraction(domain_end) * 8)
    m = rng.randint(0, min(max_breaks, ticks - 1))
    seq = [rng.choice(letters)]
    for _ in range(m):
        nxt = rng.choice([x for x in letters if x != seq[-1]])
        seq.append(nxt)

    def breakpoint_times():
        chosen = rng.sample(range(1, ticks + 1), m)
        return [Fraction(0)] + sorted(Fraction(t, 8) for t in chosen)

    ta = breakpoint_times()
    tb = ta
    for _ in range(200):
        cand = breakpoint_times()
        if max_shift is None or all(
                abs(x - y) <= max_shift for x, y in zip(ta, cand)):
            tb = cand
            break
    u = TimedWord(tuple(zip(seq, ta))).pad_to(Fraction(domain_end))
    v = TimedWord(tuple(zip(seq, tb))).pad_to(Fraction(domain_end))
    return u, v
