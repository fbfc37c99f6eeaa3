"""Timed words and their signal views.

A timed word is a finite sequence of (letter, timestamp) events with weakly
increasing nonnegative rational timestamps.  Every nonempty timed word induces
a right-continuous piecewise-constant function (its Càdlàg view) on the
interval from its first to its last timestamp; the breakpoints of that view
are the word's stutter-free events.  Words over a common alphabet can be
merged into a tagged word that remembers which source each event came from.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Optional, Sequence, Tuple

from .errors import AlphabetError, DomainError, ParseError
from .values import parse_rational

Letter = Hashable

#: Reserved framing symbols for automaton constructions.  They are not
#: writable in user-facing word files.
END_MARK = "#"
FRESH_MARK = "ε"
RESERVED = frozenset({END_MARK, FRESH_MARK})


@dataclass(frozen=True)
class TimedWord:
    """Finite event sequence with weakly increasing rational timestamps."""

    events: Tuple[Tuple[Letter, Fraction], ...]

    def __post_init__(self):
        prev = None
        for letter, time in self.events:
            if not isinstance(time, Fraction):
                raise DomainError("timestamps must be Fractions, got %r" % (time,))
            if time < 0:
                raise DomainError("negative timestamp %s" % time)
            if prev is not None and time < prev:
                raise DomainError(
                    "timestamps must be weakly increasing (%s after %s)" % (time, prev)
                )
            prev = time

    @staticmethod
    def of(pairs: Iterable[Tuple[Letter, object]]) -> "TimedWord":
        return TimedWord(tuple((a, Fraction(t)) for a, t in pairs))

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    @property
    def is_empty(self) -> bool:
        return not self.events

    @property
    def first_time(self) -> Fraction:
        self._require_nonempty()
        return self.events[0][1]

    @property
    def last_time(self) -> Fraction:
        self._require_nonempty()
        return self.events[-1][1]

    def untimed(self) -> Tuple[Letter, ...]:
        return tuple(a for a, _ in self.events)

    def letters(self) -> frozenset:
        return frozenset(a for a, _ in self.events)

    def check_alphabet(self, alphabet) -> None:
        extra = self.letters() - frozenset(alphabet)
        if extra:
            raise AlphabetError("letters %s not in alphabet" % sorted(map(repr, extra)))

    def pad_to(self, end) -> "TimedWord":
        """Extend the final segment so the Càdlàg domain reaches ``end``."""
        self._require_nonempty()
        end = Fraction(end)
        if end < self.last_time:
            raise DomainError("cannot pad to %s before last event at %s" % (end, self.last_time))
        if end == self.last_time:
            return self
        return TimedWord(self.events + ((self.events[-1][0], end),))

    def to_cadlag(self) -> "CadlagFunction":
        """Signal view: value a_j on [t_j, t_{j+1}), last letter at the right end."""
        self._require_nonempty()
        breaks = []
        for letter, time in self.events:
            while breaks and breaks[-1][0] == time:
                breaks.pop()  # a later event at the same instant shadows earlier ones
            if not breaks or breaks[-1][1] != letter:
                breaks.append((time, letter))
        return CadlagFunction(tuple(breaks), self.last_time)

    def stutter_free(self) -> "TimedWord":
        """Breakpoints of the Càdlàg view re-read as a timed word."""
        return self.to_cadlag().to_word()

    def _require_nonempty(self):
        if not self.events:
            raise DomainError("operation undefined on the empty timed word")


@dataclass(frozen=True)
class CadlagFunction:
    """Right-continuous piecewise-constant function on a closed interval.

    ``breakpoints`` holds (time, letter) pairs with strictly increasing times
    and distinct adjacent letters; the first breakpoint is the left end of the
    domain and ``end`` the right end.  The value at ``end`` is the last
    segment's letter.
    """

    breakpoints: Tuple[Tuple[Fraction, Letter], ...]
    end: Fraction

    def __post_init__(self):
        if not self.breakpoints:
            raise DomainError("a Càdlàg function needs at least one breakpoint")
        prev_t, prev_a = None, None
        for t, a in self.breakpoints:
            if prev_t is not None:
                if t <= prev_t:
                    raise DomainError("breakpoints must strictly increase")
                if a == prev_a:
                    raise DomainError("adjacent segments must carry distinct letters")
            prev_t, prev_a = t, a
        if self.end < self.breakpoints[-1][0]:
            raise DomainError("domain end before last breakpoint")

    @property
    def start(self) -> Fraction:
        return self.breakpoints[0][0]

    @property
    def domain(self) -> Tuple[Fraction, Fraction]:
        return (self.start, self.end)

    def value(self, t) -> Letter:
        t = Fraction(t)
        if not (self.start <= t <= self.end):
            raise DomainError("%s outside domain [%s, %s]" % (t, self.start, self.end))
        current = self.breakpoints[0][1]
        for bt, a in self.breakpoints:
            if bt <= t:
                current = a
            else:
                break
        return current

    def segments(self):
        """Yield (letter, start, end) with consecutive half-open extents.

        The final segment is closed at the domain end; a trailing zero-length
        segment appears when the last breakpoint sits at the right end.
        """
        for i, (t, a) in enumerate(self.breakpoints):
            nxt = self.breakpoints[i + 1][0] if i + 1 < len(self.breakpoints) else self.end
            yield a, t, nxt

    def to_word(self) -> TimedWord:
        return TimedWord(tuple((a, t) for t, a in self.breakpoints))


def same_domain(f: CadlagFunction, g: CadlagFunction) -> bool:
    return f.domain == g.domain


@dataclass(frozen=True)
class TaggedTimedWord:
    """Merged view of several timed words; each event keeps its source tag."""

    events: Tuple[Tuple[Letter, int, Fraction], ...]
    width: int

    def __post_init__(self):
        prev_t = None
        prev_tag = 0
        for letter, tag, time in self.events:
            if not 1 <= tag <= self.width:
                raise DomainError("tag %d outside 1..%d" % (tag, self.width))
            if prev_t is not None and time < prev_t:
                raise DomainError("timestamps must be weakly increasing")
            if prev_t is not None and time == prev_t and tag < prev_tag:
                raise DomainError("events at equal times must be ordered by tag")
            prev_t, prev_tag = time, tag

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def project(self, tag: int) -> TimedWord:
        return TimedWord(tuple((a, t) for a, g, t in self.events if g == tag))

    def as_timed_word(self) -> TimedWord:
        """View over the product alphabet of (letter, tag) pairs."""
        return TimedWord(tuple(((a, g), t) for a, g, t in self.events))


def disjoint_union(words: Sequence[TimedWord]) -> TaggedTimedWord:
    """Time-ordered merge with source tags; ascending tag breaks timestamp ties."""
    if len(words) < 2:
        raise DomainError("disjoint union needs at least two words")
    merged = []
    for tag, word in enumerate(words, start=1):
        for letter, time in word:
            merged.append((letter, tag, time))
    merged.sort(key=lambda e: (e[2], e[1]))  # stable: same-word order preserved
    return TaggedTimedWord(tuple(merged), width=len(words))


# ---------------------------------------------------------------------------
# step functions <-> discrete words
# ---------------------------------------------------------------------------

def step_function(word: Sequence[Letter]) -> CadlagFunction:
    """Step function on [0, len(word)] holding word[i] on [i, i+1)."""
    if not word:
        raise DomainError("the empty word has no step function")
    breaks = [(Fraction(0), word[0])]
    for i in range(1, len(word)):
        if word[i] != word[i - 1]:
            breaks.append((Fraction(i), word[i]))
    return CadlagFunction(tuple(breaks), Fraction(len(word)))


def step_word(f: CadlagFunction) -> Tuple[Letter, ...]:
    """Inverse of :func:`step_function`: read f(0) f(1) ... f(T-1)."""
    lo, hi = f.domain
    if lo != 0 or hi.denominator != 1:
        raise DomainError("step functions live on [0, T] with natural T")
    for t, _ in f.breakpoints:
        if t.denominator != 1:
            raise DomainError("breakpoint at %s is not an integer" % t)
    return tuple(f.value(Fraction(i)) for i in range(int(hi)))


def step_timed_word(word: Sequence[Letter]) -> TimedWord:
    """Timed-word encoding of a step function, padded to domain [0, len(word)]."""
    return step_function(word).to_word().pad_to(Fraction(len(word)))


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------

_ALPHABET_RE = re.compile(r"^alphabet\s+(\w+)\s*=\s*\{([^}]*)\}\s*$")


def parse_alphabet_decl(line: str, lineno=None):
    m = _ALPHABET_RE.match(line.strip())
    if not m:
        raise ParseError("malformed alphabet declaration: %r" % line, line=lineno)
    name = m.group(1)
    letters = [tok.strip() for tok in m.group(2).split(",") if tok.strip()]
    for letter in letters:
        if letter in RESERVED:
            raise ParseError("letter %r is reserved" % letter, line=lineno)
    if len(set(letters)) != len(letters):
        raise ParseError("duplicate letters in alphabet", line=lineno)
    return name, frozenset(letters)


def parse_timed_word(text: str):
    """Parse the line-oriented ``<letter> @ <rational>`` word format.

    An optional leading ``alphabet name = {...}`` header declares the
    alphabet; when present, all event letters are checked against it.
    Returns ``(word, alphabet_or_None)``.
    """
    alphabet = None
    events = []
    prev_time = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("alphabet"):
            if events or alphabet is not None:
                raise ParseError("alphabet header must come first", line=lineno)
            _, alphabet = parse_alphabet_decl(line, lineno)
            continue
        if "@" not in line:
            raise ParseError("expected '<letter> @ <rational>', got %r" % raw, line=lineno)
        letter_part, _, time_part = line.partition("@")
        letter = letter_part.strip()
        if not letter:
            raise ParseError("missing letter", line=lineno)
        if letter in RESERVED:
            raise ParseError("letter %r is reserved" % letter, line=lineno)
        if alphabet is not None and letter not in alphabet:
            raise ParseError("letter %r not in declared alphabet" % letter, line=lineno)
        time = parse_rational(time_part, line=lineno)
        if time < 0:
            raise ParseError("negative timestamp %s" % time, line=lineno)
        if prev_time is not None and time < prev_time:
            raise ParseError(
                "timestamp %s decreases below %s" % (time, prev_time), line=lineno
            )
        prev_time = time
        events.append((letter, time))
    return TimedWord(tuple(events)), alphabet


def format_timed_word(word: TimedWord, alphabet_name: Optional[str] = None,
                      alphabet=None) -> str:
    lines = []
    if alphabet_name is not None and alphabet is not None:
        lines.append("alphabet %s = {%s}" % (alphabet_name, ", ".join(sorted(alphabet))))
    for letter, time in word:
        frac = Fraction(time)
        stamp = str(frac.numerator) if frac.denominator == 1 else "%d/%d" % (
            frac.numerator, frac.denominator)
        lines.append("%s @ %s" % (letter, stamp))
    return "\n".join(lines) + "\n"
