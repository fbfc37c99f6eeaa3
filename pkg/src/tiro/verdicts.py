"""Robustness verdicts shared by the transducer, circuit and FST checkers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

from .values import format_value

ROBUST = "Robust"
NOT_ROBUST = "NotRobust"
UNKNOWN = "Unknown"
RESOURCE_EXCEEDED = "ResourceExceeded"

_EXIT_CODES = {ROBUST: 0, NOT_ROBUST: 1, UNKNOWN: 2, RESOURCE_EXCEEDED: 4}


@dataclass
class RobustnessVerdict:
    outcome: str
    k: object
    witness_inputs: Optional[Tuple[object, object]] = None
    witness_outputs: Optional[Tuple[object, object]] = None
    input_distance: Optional[object] = None
    output_distance: Optional[object] = None
    note: str = ""

    def __post_init__(self):
        if self.outcome not in _EXIT_CODES:
            raise ValueError("bad outcome %r" % self.outcome)
        if self.outcome == NOT_ROBUST and self.witness_inputs is None:
            raise ValueError("a NotRobust verdict needs a witness pair")

    @property
    def exit_code(self) -> int:
        return _EXIT_CODES[self.outcome]

    def as_dict(self) -> dict:
        def render(word):
            if word is None:
                return None
            if hasattr(word, "events"):
                return [[str(a), format_value(t)] for a, t in word.events]
            return [str(a) for a in word]

        doc = {"verdict": self.outcome, "K": format_value(self.k),
               "note": self.note}
        if self.witness_inputs is not None:
            doc["witness"] = {
                "inputs": [render(self.witness_inputs[0]),
                           render(self.witness_inputs[1])],
                "outputs": [render(self.witness_outputs[0]),
                            render(self.witness_outputs[1])]
                if self.witness_outputs else None,
                "input_distance": format_value(self.input_distance)
                if self.input_distance is not None else None,
                "output_distance": format_value(self.output_distance)
                if self.output_distance is not None else None,
            }
        return doc
