"""Channel objects: the two-sender, two-receiver tensor and its structure.

The channel has three inputs (the primary sender's symbol ``x1``, the
cognitive sender's symbol ``x2``, and the symbol ``x3`` transmitted by the
cooperating second destination) and two outputs (``y1`` at destination 1,
``y2`` at destination 2).  A :class:`ChannelSpec` is the single-letter
transition tensor p(y1,y2 | x1,x2,x3) over finite alphabets.

This module also hosts the structural classifiers (one-sided interference,
degradedness, semi-determinism) and the slice operation that pins the
cooperative symbol to a constant.
"""

from __future__ import annotations

import dataclasses
import json
from collections.abc import Sequence

import numpy as np

from .errors import (
    IndexOutOfRange,
    NegativeEntry,
    ParseError,
    RowSumError,
    ShapeMismatch,
)
from .pmf import ConditionalFactor

AXES = ("x1", "x2", "x3", "y1", "y2")
SUM_TOL = 1e-9
NEG_TOL = 1e-12


@dataclasses.dataclass(frozen=True, eq=False)
class ChannelSpec:
    """Transition tensor p(y1,y2|x1,x2,x3), indexed (x1,x2,x3,y1,y2)."""

    cards: tuple[int, int, int, int, int]
    transition: np.ndarray

    def __post_init__(self):
        cards = tuple(int(c) for c in self.cards)
        if len(cards) != 5 or any(c < 1 for c in cards):
            raise ShapeMismatch(f"need five cardinalities >= 1, got {cards}")
        t = np.asarray(self.transition, dtype=np.float64)
        if t.shape != cards:
            raise ShapeMismatch(
                f"transition shape {t.shape} does not match cardinalities {cards}"
            )
        low = float(t.min()) if t.size else 0.0
        if low < -NEG_TOL:
            raise NegativeEntry(f"transition has negative entry {low!r}")
        t = np.clip(t, 0.0, None)
        sums = t.sum(axis=(3, 4))
        gap = np.abs(sums - 1.0)
        if float(gap.max()) > SUM_TOL:
            where = tuple(
                int(i) for i in np.unravel_index(int(np.argmax(gap)), sums.shape)
            )
            raise RowSumError(
                f"rows for inputs (x1,x2,x3)={where} sum to {float(sums[where])!r}"
            )
        t = t / sums[:, :, :, None, None]
        object.__setattr__(self, "cards", cards)
        object.__setattr__(self, "transition", t)

    def card(self, name: str) -> int:
        return self.cards[AXES.index(name)]

    @property
    def output1_given_inputs(self) -> np.ndarray:
        """p(y1|x1,x2,x3), shape (x1,x2,x3,y1)."""
        return self.transition.sum(axis=4)

    @property
    def output2_given_inputs(self) -> np.ndarray:
        """p(y2|x1,x2,x3), shape (x1,x2,x3,y2)."""
        return self.transition.sum(axis=3)

    def as_factor(self) -> ConditionalFactor:
        """The channel as a conditional factor (y1,y2) given (x1,x2,x3)."""
        c = self.cards
        return ConditionalFactor(
            (("y1", c[3]), ("y2", c[4])),
            (("x1", c[0]), ("x2", c[1]), ("x3", c[2])),
            self.transition,
        )

    @classmethod
    def from_outputs(cls, cards: Sequence[int], fn) -> "ChannelSpec":
        """Deterministic channel: ``fn(x1,x2,x3) -> (y1,y2)``."""
        cards = tuple(int(c) for c in cards)
        t = np.zeros(cards)
        for x1 in range(cards[0]):
            for x2 in range(cards[1]):
                for x3 in range(cards[2]):
                    y1, y2 = fn(x1, x2, x3)
                    t[x1, x2, x3, int(y1), int(y2)] = 1.0
        return cls(cards, t)


@dataclasses.dataclass(frozen=True)
class ClassReport:
    """Structural classification flags for a channel.

    ``hi_regime`` stays None here; the capacity-classes layer fills it in
    after running its distribution search.
    """

    is_z: bool
    is_degraded: bool
    is_semi_deterministic: bool
    hi_regime: object | None = None


def load_channel(text: str) -> ChannelSpec:
    """Parse a channel document.

    The document is JSON with integer fields "x1","x2","x3","y1","y2" and
    a flat array "p" of length x1*x2*x3*y1*y2, row-major over
    (x1,x2,x3,y1,y2).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"channel document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("channel document must be a JSON object")
    try:
        cards = tuple(int(doc[name]) for name in AXES)
        flat = doc["p"]
    except KeyError as exc:
        raise ParseError(f"channel document lacks field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise ParseError(f"channel cardinalities must be integers: {exc}") from exc
    if not isinstance(flat, list):
        raise ParseError('channel field "p" must be a flat array of numbers')
    expected = int(np.prod(cards))
    if len(flat) != expected:
        raise ShapeMismatch(
            f'field "p" has {len(flat)} entries, expected {expected}'
        )
    try:
        tensor = np.asarray(flat, dtype=np.float64).reshape(cards)
    except ValueError as exc:
        raise ParseError(f'field "p" holds non-numeric data: {exc}') from exc
    return ChannelSpec(cards, tensor)


def dump_channel(channel: ChannelSpec) -> str:
    """Inverse of :func:`load_channel`, stable formatting."""
    doc = {name: channel.card(name) for name in AXES}
    doc["p"] = [float(v) for v in channel.transition.reshape(-1)]
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def classify(channel: ChannelSpec, tol: float = 1e-9) -> ClassReport:
    """Structural flags; the high-interference flag is filled elsewhere.

    One-sided interference needs the first output to ignore the cognitive
    sender and the two outputs to be conditionally independent given the
    inputs.  Degradedness asks the first output to be reachable from the
    second output plus the cooperative symbol alone.  Semi-determinism
    asks the second output to be a function of the inputs.
    """
    t = channel.transition
    p_y1 = channel.output1_given_inputs
    p_y2 = channel.output2_given_inputs

    constant_in_x2 = float(np.max(np.abs(p_y1 - p_y1[:, :1, :, :]))) <= tol
    product_form = (
        float(np.max(np.abs(t - p_y1[..., :, None] * p_y2[..., None, :]))) <= tol
    )
    is_z = constant_in_x2 and product_form

    # degraded: p(y1 | y2, x1, x2, x3) must not depend on (x1, x2),
    # checked only where the conditioning event is realizable
    is_degraded = True
    n1, n2, n3, m1, m2 = channel.cards
    for y2 in range(m2):
        for x3 in range(n3):
            reference = None
            for x1 in range(n1):
                for x2 in range(n2):
                    mass = p_y2[x1, x2, x3, y2]
                    if mass <= tol:
                        continue
                    row = t[x1, x2, x3, :, y2] / mass
                    if reference is None:
                        reference = row
                    elif float(np.max(np.abs(row - reference))) > tol:
                        is_degraded = False
            if not is_degraded:
                break
        if not is_degraded:
            break

    rounded = np.minimum(np.abs(p_y2), np.abs(p_y2 - 1.0))
    is_semi_deterministic = float(rounded.max()) <= tol

    return ClassReport(
        is_z=is_z,
        is_degraded=is_degraded,
        is_semi_deterministic=is_semi_deterministic,
    )


def pin_x3(channel: ChannelSpec, symbol: int) -> ChannelSpec:
    """Freeze the cooperative transmit symbol, leaving |X3| = 1."""
    symbol = int(symbol)
    if not 0 <= symbol < channel.cards[2]:
        raise IndexOutOfRange(
            f"symbol {symbol} out of range for |X3| = {channel.cards[2]}"
        )
    sliced = channel.transition[:, :, symbol : symbol + 1, :, :]
    cards = channel.cards[:2] + (1,) + channel.cards[3:]
    return ChannelSpec(cards, sliced.copy())
