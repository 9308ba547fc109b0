"""Vowel/consonant transition counts shipped with the package.

First state is vowel, second consonant; rows are the current letter.
"""
from dataclasses import dataclass

import numpy as np

from ..chain import StateSpace, TupleCounts
from ..utils.errors import InvalidSpec


@dataclass(frozen=True)
class Fixture:
    name: str
    description: str
    counts: tuple[tuple[int, int], tuple[int, int]]

    def tuple_counts(self) -> TupleCounts:
        return TupleCounts.from_array(np.array(self.counts, dtype=float), LETTER_STATES)


LETTER_STATES = StateSpace(2, ("V", "C"))

FIXTURES = {
    "pushkin": Fixture(
        "pushkin",
        "First 20,000 letters of Yevgeniy Onegin, tabulated by A. A. Markov (1913)",
        ((1104, 7534), (7533, 3829)),
    ),
    "english": Fixture(
        "english",
        "Same tabulation for an English translation",
        ((1484, 6396), (6397, 5723)),
    ),
}


def load_fixture(name: str) -> TupleCounts:
    try:
        return FIXTURES[name.lower()].tuple_counts()
    except KeyError:
        raise InvalidSpec(f"Unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None
