"""Capacity regions for two solvable channel classes.

Degraded Z-geometry channels have a three-bound capacity formula over
p(x1,x2,x3).  Semi-deterministic channels in the high-interference regime
have a three-bound formula over p(x1,v12,x2,x3) whose premise is a
universally quantified inequality pair; that premise is never assumed
here.  A falsification search runs first and its report travels with
every region it guards.  The module also carries the achievability chain
connecting the general inner bound to the five-bound reduced region via
a copy-factor specialization.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import ChannelSpec, classify
from .errors import (
    CardinalityMismatch,
    EmptyList,
    HiRegimeFalsified,
    NegativeEntry,
    NotDegraded,
    NotSemiDeterministic,
    NotZChannel,
    NumericsError,
    ShapeMismatch,
    SumNotOne,
)
from .inner import InnerFactorization
from .outer import (
    SearchConfig,
    V12Joint,
    _corner_joints,
    ascent_refine,
    default_v12_card,
    fan_directions,
    marginal_entropies,
    polygon_from_bounds,
    support_of_caps,
)
from .pmf import ConditionalFactor, JointPMF, conditional_table, marginalize
from .polytope import Region2D, hull_union, region_from_vertices, regions_close

VIOLATION_TOL = 1e-9
DROP_CONSISTENCY_TOL = 1e-8

SUM_TOL = 1e-9
NEG_TOL = 1e-12

CONDITION_A = "I(Y2;X1|X3) >= I(Y1;X1,X3)"
CONDITION_B = "I(Y1;V12|X1,X3) >= I(Y2;V12|X1,X3)"


def _validated_pmf(cards, pmf) -> np.ndarray:
    pmf = np.asarray(pmf, dtype=float)
    if pmf.shape != cards:
        raise ShapeMismatch(f"pmf shape {pmf.shape} does not match {cards}")
    if pmf.size and float(pmf.min()) < -NEG_TOL:
        raise NegativeEntry(f"pmf entry {float(pmf.min())!r} is negative")
    pmf = np.clip(pmf, 0.0, None)
    total = float(pmf.sum())
    if abs(total - 1.0) > SUM_TOL:
        raise SumNotOne(f"pmf sums to {total!r}")
    return pmf / total


@dataclass(frozen=True)
class InputJoint:
    """Joint p(x1, x2, x3) over the physical channel inputs."""

    cards: tuple[int, int, int]
    pmf: np.ndarray

    def __post_init__(self):
        cards = tuple(int(c) for c in self.cards)
        if len(cards) != 3 or any(c < 1 for c in cards):
            raise ShapeMismatch("need three positive cardinalities")
        object.__setattr__(self, "cards", cards)
        object.__setattr__(self, "pmf", _validated_pmf(cards, self.pmf))

    @classmethod
    def uniform(cls, cards) -> "InputJoint":
        cards = tuple(int(c) for c in cards)
        return cls(cards, np.full(cards, 1.0 / int(np.prod(cards))))

    @classmethod
    def random(cls, cards, rng: np.random.Generator, alpha: float = 1.0):
        cards = tuple(int(c) for c in cards)
        size = int(np.prod(cards))
        return cls(cards, rng.dirichlet(np.full(size, float(alpha))).reshape(cards))

    def lifted(self, channel: ChannelSpec) -> np.ndarray:
        """Joint tensor over (x1, x2, x3, y1, y2)."""
        ch_cards = tuple(channel.card(n) for n in ("x1", "x2", "x3"))
        if self.cards != ch_cards:
            raise CardinalityMismatch(
                f"input cards {self.cards} do not match channel {ch_cards}"
            )
        return self.pmf[..., None, None] * channel.transition


@dataclass(frozen=True)
class V12V2Joint:
    """Joint p(x1, v12, v2, x2, x3) with both reduced-region auxiliaries."""

    cards: tuple[int, int, int, int, int]
    pmf: np.ndarray

    def __post_init__(self):
        cards = tuple(int(c) for c in self.cards)
        if len(cards) != 5 or any(c < 1 for c in cards):
            raise ShapeMismatch("need five positive cardinalities")
        object.__setattr__(self, "cards", cards)
        object.__setattr__(self, "pmf", _validated_pmf(cards, self.pmf))

    @classmethod
    def uniform(cls, cards) -> "V12V2Joint":
        cards = tuple(int(c) for c in cards)
        return cls(cards, np.full(cards, 1.0 / int(np.prod(cards))))

    @classmethod
    def random(cls, cards, rng: np.random.Generator, alpha: float = 1.0):
        cards = tuple(int(c) for c in cards)
        size = int(np.prod(cards))
        return cls(cards, rng.dirichlet(np.full(size, float(alpha))).reshape(cards))

    def lifted(self, channel: ChannelSpec) -> np.ndarray:
        """Joint tensor over (x1, v12, v2, x2, x3, y1, y2)."""
        ch_cards = tuple(channel.card(n) for n in ("x1", "x2", "x3"))
        if (self.cards[0], self.cards[3], self.cards[4]) != ch_cards:
            raise CardinalityMismatch(
                f"input cards {self.cards} do not match channel {ch_cards}"
            )
        return np.einsum(
            self.pmf, [0, 1, 2, 3, 4],
            channel.transition, [0, 3, 4, 5, 6],
            [0, 1, 2, 3, 4, 5, 6],
        )


def with_constant_v12(d: InputJoint, card_v12: int) -> V12Joint:
    """Lift p(x1,x2,x3) to p(x1,v12,x2,x3) with a constant auxiliary."""
    cx1, cx2, cx3 = d.cards
    pmf = np.zeros((cx1, card_v12, cx2, cx3))
    pmf[:, 0, :, :] = d.pmf
    return V12Joint((cx1, card_v12, cx2, cx3), pmf)


# ---------------------------------------------------------------------------
# bound evaluators; all accept an optional leading batch axis

def degraded_z_bounds(j: np.ndarray) -> np.ndarray:
    """Rate caps (R1, R2, R1+R2) for the degraded Z class.

    Tensor axes: (x1, x2, x3, y1, y2).
    """
    groups = (
        (0, 2),            # 0: x1 x3
        (3,),              # 1: y1
        (0, 2, 3),         # 2: x1 x3 y1
        (0, 1, 2),         # 3: x1 x2 x3
        (0, 2, 4),         # 4: x1 x3 y2
        (0, 1, 2, 4),      # 5: x1 x2 x3 y2
        (2,),              # 6: x3
        (2, 4),            # 7: x3 y2
    )
    h = marginal_entropies(j, groups, ndim=5)
    a = h[..., 0] + h[..., 1] - h[..., 2]
    b = h[..., 3] + h[..., 4] - h[..., 0] - h[..., 5]
    c = h[..., 3] + h[..., 7] - h[..., 6] - h[..., 5]
    return np.clip(np.stack([a, b, c], axis=-1), 0.0, None)


def semidet_hi_bounds(j: np.ndarray) -> np.ndarray:
    """Rate caps (R1, R2, R1+R2) for the semi-deterministic class.

    Tensor axes: (x1, v12, x2, x3, y1, y2).
    """
    groups = (
        (0, 1, 3),         # 0: x1 v12 x3
        (4,),              # 1: y1
        (0, 1, 3, 4),      # 2: x1 v12 x3 y1
        (0, 3, 5),         # 3: x1 x3 y2
        (0, 3),            # 4: x1 x3
        (0, 1, 3, 5),      # 5: x1 v12 x3 y2
    )
    h = marginal_entropies(j, groups, ndim=6)
    a = h[..., 0] + h[..., 1] - h[..., 2]
    h2 = h[..., 3] - h[..., 4]
    hv = h[..., 5] - h[..., 0]
    return np.clip(np.stack([a, h2, a + hv], axis=-1), 0.0, None)


def _reduced_terms_v2(j: np.ndarray):
    """Information terms of the five-bound reduced region.

    Tensor axes: (x1, v12, v2, x2, x3, y1, y2).
    Returns (a, b, delta, n, k2) each clipped at zero.
    """
    groups = (
        (0, 1, 4),         # 0: x1 v12 x3
        (5,),              # 1: y1
        (0, 1, 4, 5),      # 2: x1 v12 x3 y1
        (0, 4),            # 3: x1 x3
        (0, 4, 5),         # 4: x1 x3 y1
        (0, 2, 4),         # 5: x1 v2 x3
        (0, 4, 6),         # 6: x1 x3 y2
        (0, 2, 4, 6),      # 7: x1 v2 x3 y2
        (0, 1, 2, 4),      # 8: x1 v12 v2 x3
        (4,),              # 9: x3
        (4, 6),            # 10: x3 y2
    )
    h = marginal_entropies(j, groups, ndim=7)
    a = h[..., 0] + h[..., 1] - h[..., 2]
    delta = h[..., 0] + h[..., 4] - h[..., 3] - h[..., 2]
    b = h[..., 5] + h[..., 6] - h[..., 3] - h[..., 7]
    n = h[..., 0] + h[..., 5] - h[..., 3] - h[..., 8]
    k2 = h[..., 5] + h[..., 10] - h[..., 9] - h[..., 7]
    clip = lambda v: np.clip(v, 0.0, None)
    return clip(a), clip(b), clip(delta), clip(n), clip(k2)


def _reduced_terms_y2(j: np.ndarray):
    """Reduced-region terms with the second auxiliary set to the y2 output.

    Tensor axes: (x1, v12, x2, x3, y1, y2).
    Returns (a, h2, delta, m, h3) each clipped at zero.
    """
    groups = (
        (0, 1, 3),         # 0: x1 v12 x3
        (4,),              # 1: y1
        (0, 1, 3, 4),      # 2: x1 v12 x3 y1
        (0, 3),            # 3: x1 x3
        (0, 3, 4),         # 4: x1 x3 y1
        (0, 3, 5),         # 5: x1 x3 y2
        (0, 1, 3, 5),      # 6: x1 v12 x3 y2
        (3,),              # 7: x3
        (3, 5),            # 8: x3 y2
    )
    h = marginal_entropies(j, groups, ndim=6)
    a = h[..., 0] + h[..., 1] - h[..., 2]
    delta = h[..., 0] + h[..., 4] - h[..., 3] - h[..., 2]
    m = h[..., 0] + h[..., 5] - h[..., 3] - h[..., 6]
    h2 = h[..., 5] - h[..., 3]
    h3 = h[..., 8] - h[..., 7]
    clip = lambda v: np.clip(v, 0.0, None)
    return clip(a), clip(h2), clip(delta), clip(m), clip(h3)


def violation_gaps(j: np.ndarray):
    """High-interference premise gaps; positive means the premise fails.

    Tensor axes: (x1, v12, x2, x3, y1, y2).  Returns (gap_a, gap_b) where
    gap_a = I(Y1;X1,X3) - I(Y2;X1|X3) and
    gap_b = I(Y2;V12|X1,X3) - I(Y1;V12|X1,X3).
    """
    groups = (
        (0, 3),            # 0: x1 x3
        (3, 5),            # 1: x3 y2
        (3,),              # 2: x3
        (0, 3, 5),         # 3: x1 x3 y2
        (4,),              # 4: y1
        (0, 3, 4),         # 5: x1 x3 y1
        (0, 1, 3),         # 6: x1 v12 x3
        (0, 1, 3, 4),      # 7: x1 v12 x3 y1
        (0, 1, 3, 5),      # 8: x1 v12 x3 y2
    )
    h = marginal_entropies(j, groups, ndim=6)
    i_y2_x1 = h[..., 0] + h[..., 1] - h[..., 2] - h[..., 3]
    i_y1_x1x3 = h[..., 0] + h[..., 4] - h[..., 5]
    i_y1_v12 = h[..., 6] + h[..., 5] - h[..., 0] - h[..., 7]
    i_y2_v12 = h[..., 6] + h[..., 3] - h[..., 0] - h[..., 8]
    return i_y1_x1x3 - i_y2_x1, i_y2_v12 - i_y1_v12


# ---------------------------------------------------------------------------
# per-distribution polygons

def _require_degraded_z(channel: ChannelSpec):
    report = classify(channel)
    if not report.is_z:
        raise NotZChannel(
            "the first output must not depend on the second sender's input"
        )
    if not report.is_degraded:
        raise NotDegraded(
            "the first output must be conditionally determined by "
            "(second output, helper input)"
        )


def _require_semidet(channel: ChannelSpec):
    if not classify(channel).is_semi_deterministic:
        raise NotSemiDeterministic(
            "the second output must be a deterministic function of the inputs"
        )


def degraded_z_polygon(
    d: InputJoint, channel: ChannelSpec, force: bool = False
) -> Region2D:
    """Capacity-formula polygon for one input distribution."""
    if not force:
        _require_degraded_z(channel)
    b = degraded_z_bounds(d.lifted(channel))
    return polygon_from_bounds([b[0]], [b[1]], [b[2]])


def semidet_hi_polygon(d: V12Joint, channel: ChannelSpec) -> Region2D:
    """Capacity-formula polygon for one auxiliary-carrying distribution."""
    _require_semidet(channel)
    b = semidet_hi_bounds(d.lifted(channel))
    return polygon_from_bounds([b[0]], [b[1]], [b[2]])


def _closed(region: Region2D) -> Region2D:
    # binning penalties can empty the raw polygon; zero rates stay achievable
    if region.empty:
        return region_from_vertices([(0.0, 0.0)])
    return region


def reduced_region(d: V12V2Joint, channel: ChannelSpec) -> Region2D:
    """Five-bound achievable polygon over p(x1, v12, v2, x2, x3)."""
    a, b, delta, n, k2 = _reduced_terms_v2(d.lifted(channel))
    return _closed(polygon_from_bounds(
        [a], [b, b + delta - n], [delta + k2 - n, a + b - n]
    ))


def reduced_region_semidet(d: V12Joint, channel: ChannelSpec) -> Region2D:
    """Reduced polygon with the second auxiliary fixed to the y2 output."""
    _require_semidet(channel)
    a, h2, delta, m, h3 = _reduced_terms_y2(d.lifted(channel))
    return _closed(polygon_from_bounds(
        [a], [h2, h2 + delta - m], [delta + h3 - m, a + h2 - m]
    ))


def y2_output_map(channel: ChannelSpec) -> np.ndarray:
    """The deterministic input-to-y2 map of a semi-deterministic channel."""
    _require_semidet(channel)
    p_y2 = channel.transition.sum(axis=3)
    return np.argmax(p_y2, axis=-1)


def v2_equals_y2_lift(d: V12Joint, channel: ChannelSpec) -> V12V2Joint:
    """Embed p(x1,v12,x2,x3) as p(x1,v12,v2,x2,x3) with v2 = y2(x1,x2,x3)."""
    fmap = y2_output_map(channel)
    cx1, cv12, cx2, cx3 = d.cards
    cy2 = channel.card("y2")
    pmf = np.zeros((cx1, cv12, cy2, cx2, cx3))
    for x1 in range(cx1):
        for x2 in range(cx2):
            for x3 in range(cx3):
                pmf[x1, :, fmap[x1, x2, x3], x2, x3] = d.pmf[x1, :, x2, x3]
    return V12V2Joint((cx1, cv12, cy2, cx2, cx3), pmf)


# ---------------------------------------------------------------------------
# specialization of the general inner bound onto the reduced region

def reduction_factorization(
    d: V12V2Joint, channel: ChannelSpec
) -> InnerFactorization:
    """Build the auxiliary factorization that specializes to d.

    Collapses v1, u2p, u2 and the quantizer to constants, wires u1p to x3
    and u1 to x1 through deterministic copy factors, and distributes
    (v12, v2, x2) per d, so the generic inner pipeline reproduces the
    five-bound reduced region.
    """
    cx1, cv12, cv2, cx2, cx3 = d.cards
    ch_cards = tuple(channel.card(n) for n in ("x1", "x2", "x3"))
    if (cx1, cx2, cx3) != ch_cards:
        raise CardinalityMismatch(
            f"distribution cards {d.cards} do not match channel {ch_cards}"
        )
    cy2 = channel.card("y2")
    labels = ("x1", "v12", "v2", "x2", "x3")
    joint = JointPMF(tuple(zip(labels, d.cards)), d.pmf)

    p_x3 = marginalize(joint, ["x3"]).probs
    p_x1 = conditional_table(joint, ["x1"], ["x3"]).table
    p_block = conditional_table(joint, ["v12", "v2"], ["x3", "x1"]).table
    p_x2 = conditional_table(joint, ["x2"], ["x3", "x1", "v12", "v2"]).table

    factors = (
        ConditionalFactor((("u1p", cx3),), (), p_x3),
        ConditionalFactor((("u1", cx1),), (("u1p", cx3),), p_x1),
        ConditionalFactor.constant(
            (("v1", 1),), (("u1p", cx3), ("u1", cx1))
        ),
        ConditionalFactor.constant((("u2p", 1),), (("u1p", cx3),)),
        ConditionalFactor(
            (("u2", 1), ("v12", cv12), ("v2", cv2)),
            (("u1p", cx3), ("u1", cx1), ("v1", 1), ("u2p", 1)),
            p_block.reshape(cx3, cx1, 1, 1, 1, cv12, cv2),
        ),
        ConditionalFactor.copy(
            "x1", "u1", (("u1p", cx3), ("u1", cx1), ("v1", 1))
        ),
        ConditionalFactor(
            (("x2", cx2),),
            (
                ("u1p", cx3), ("u1", cx1), ("v1", 1), ("u2p", 1),
                ("u2", 1), ("v12", cv12), ("v2", cv2),
            ),
            p_x2.reshape(cx3, cx1, 1, 1, 1, cv12, cv2, cx2),
        ),
        ConditionalFactor.copy("x3", "u1p", (("u1p", cx3), ("u2p", 1))),
        ConditionalFactor.constant(
            (("yh2", 1),),
            (
                ("u1p", cx3), ("u1", cx1), ("u2p", 1), ("u2", 1),
                ("x3", cx3), ("y2", cy2),
            ),
        ),
    )
    return InnerFactorization(factors)


# ---------------------------------------------------------------------------
# high-interference falsification search

@dataclass(frozen=True)
class HiRegimeReport:
    """Outcome of the premise falsification search."""

    status: str  # "falsified" or "no-violation-found"
    samples: int
    probes: int
    seed: int
    card_v12: int
    margin: float
    condition: str | None = None
    witness_cards: tuple[int, int, int, int] | None = None
    witness_pmf: tuple[float, ...] | None = None

    @property
    def falsified(self) -> bool:
        return self.status == "falsified"

    def witness(self) -> V12Joint | None:
        if self.witness_pmf is None:
            return None
        return V12Joint(
            self.witness_cards,
            np.array(self.witness_pmf).reshape(self.witness_cards),
        )

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "samples": self.samples,
            "probes": self.probes,
            "seed": self.seed,
            "card_v12": self.card_v12,
            "margin": self.margin,
            "condition": self.condition,
            "witness_cards": (
                None if self.witness_cards is None else list(self.witness_cards)
            ),
            "witness_pmf": (
                None if self.witness_pmf is None else list(self.witness_pmf)
            ),
        }


def report_from_dict(data: dict) -> HiRegimeReport:
    return HiRegimeReport(
        status=str(data["status"]),
        samples=int(data["samples"]),
        probes=int(data["probes"]),
        seed=int(data["seed"]),
        card_v12=int(data["card_v12"]),
        margin=float(data["margin"]),
        condition=data.get("condition"),
        witness_cards=(
            None if data.get("witness_cards") is None
            else tuple(int(c) for c in data["witness_cards"])
        ),
        witness_pmf=(
            None if data.get("witness_pmf") is None
            else tuple(float(v) for v in data["witness_pmf"])
        ),
    )


def _falsifier_probes(cards: tuple[int, int, int, int]) -> list[np.ndarray]:
    """Degenerate joints that make premise violations hand-checkable."""
    cx1, cv12, cx2, cx3 = cards
    margins = []
    for card in (cx1, cx2, cx3):
        point = np.zeros(card)
        point[0] = 1.0
        margins.append((np.full(card, 1.0 / card), point))
    rules = (
        lambda x1, x2: 0,
        lambda x1, x2: x1,
        lambda x1, x2: x2,
        lambda x1, x2: x1 * cx2 + x2,
    )
    probes, seen = [], set()
    for m1 in margins[0]:
        for m2 in margins[1]:
            for m3 in margins[2]:
                base = np.einsum(m1, [0], m2, [1], m3, [2], [0, 1, 2])
                for rule in rules:
                    d = np.zeros(cards)
                    for x1 in range(cx1):
                        for x2 in range(cx2):
                            d[x1, rule(x1, x2) % cv12, x2, :] = base[x1, x2, :]
                    key = d.tobytes()
                    if key not in seen:
                        seen.add(key)
                        probes.append(d)
    uniform = np.full(cards, 1.0 / int(np.prod(cards)))
    if uniform.tobytes() not in seen:
        probes.append(uniform)
    return probes


def hi_regime_falsify(channel: ChannelSpec, cfg: SearchConfig) -> HiRegimeReport:
    """Search for a distribution violating the high-interference premise.

    A falsified report carries the witness and which inequality failed; a
    no-violation report is evidence from the declared search effort, not
    proof of class membership.
    """
    cv12 = cfg.card_v12 or default_v12_card(channel)
    cards = (channel.card("x1"), cv12, channel.card("x2"), channel.card("x3"))
    probes = _falsifier_probes(cards) if cfg.include_corners else []
    pool = list(probes)
    for i in range(cfg.num_samples):
        rng = np.random.default_rng([cfg.seed, i])
        pool.append(V12Joint.random(cards, rng).pmf)
    if not pool:
        raise EmptyList("no distributions to evaluate")

    t = channel.transition

    def lift_flat(flat: np.ndarray) -> np.ndarray:
        dd = flat.reshape((-1,) + cards)
        return np.einsum(
            dd, [6, 0, 1, 2, 3], t, [0, 2, 3, 4, 5], [6, 0, 1, 2, 3, 4, 5]
        )

    flats = np.stack([p.reshape(-1) for p in pool], axis=0)
    gap_a, gap_b = violation_gaps(lift_flat(flats))
    worst = np.maximum(gap_a, gap_b)

    def falsified(flat: np.ndarray, ga: float, gb: float) -> HiRegimeReport:
        condition = CONDITION_A if ga >= gb else CONDITION_B
        return HiRegimeReport(
            status="falsified",
            samples=cfg.num_samples,
            probes=len(probes),
            seed=cfg.seed,
            card_v12=cv12,
            margin=float(max(ga, gb)),
            condition=condition,
            witness_cards=cards,
            witness_pmf=tuple(float(v) for v in flat),
        )

    for i in range(flats.shape[0]):
        if worst[i] > VIOLATION_TOL:
            return falsified(flats[i], float(gap_a[i]), float(gap_b[i]))

    # no direct hit: push the most promising candidates uphill
    def evaluate(rows: np.ndarray) -> np.ndarray:
        ga, gb = violation_gaps(lift_flat(rows))
        return np.maximum(ga, gb)

    best_margin = float(np.max(worst))
    order = np.argsort(-worst, kind="stable")[: cfg.refine_starts]
    for idx in order:
        value, refined = ascent_refine(
            flats[int(idx)], evaluate, cfg.refine_step, cfg.refine_sweeps
        )
        best_margin = max(best_margin, value)
        if value > VIOLATION_TOL:
            ga, gb = violation_gaps(lift_flat(refined[None, :]))
            return falsified(refined, float(ga[0]), float(gb[0]))

    return HiRegimeReport(
        status="no-violation-found",
        samples=cfg.num_samples,
        probes=len(probes),
        seed=cfg.seed,
        card_v12=cv12,
        margin=best_margin,
    )


# ---------------------------------------------------------------------------
# sampled capacity regions

def _input_corners(cards: tuple[int, int, int]) -> list[np.ndarray]:
    margins = []
    for card in cards:
        point = np.zeros(card)
        point[0] = 1.0
        margins.append((np.full(card, 1.0 / card), point))
    corners, seen = [], set()
    for m1 in margins[0]:
        for m2 in margins[1]:
            for m3 in margins[2]:
                d = np.einsum(m1, [0], m2, [1], m3, [2], [0, 1, 2])
                key = d.tobytes()
                if key not in seen:
                    seen.add(key)
                    corners.append(d)
    return corners


def _refined_flats(flats, caps_of, cfg: SearchConfig, threads: int):
    """Coordinate-ascent improvements of the support in each fan direction."""
    r1, r2, s = caps_of(flats)
    directions = fan_directions(cfg.fan)

    def refine_direction(k: int) -> list[np.ndarray]:
        lam = directions[k]
        supports = support_of_caps(r1, r2, s, lam)
        order = np.argsort(-supports, kind="stable")[: cfg.refine_starts]

        def evaluate(rows: np.ndarray) -> np.ndarray:
            return support_of_caps(*caps_of(rows), lam)

        found = []
        for idx in order:
            base = float(supports[int(idx)])
            value, refined = ascent_refine(
                flats[int(idx)], evaluate, cfg.refine_step, cfg.refine_sweeps
            )
            if value > base + 1e-12:
                found.append(refined)
        return found

    if cfg.refine_starts == 0 or cfg.refine_sweeps == 0:
        return []
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as tp:
            per_direction = list(tp.map(refine_direction, range(cfg.fan)))
    else:
        per_direction = [refine_direction(k) for k in range(cfg.fan)]
    return [flat for found in per_direction for flat in found]


def capacity_degraded_z(
    channel: ChannelSpec, cfg: SearchConfig, threads: int = 1
) -> tuple[Region2D, tuple[InputJoint, ...]]:
    """Sampled capacity region of a degraded Z-geometry channel.

    Returns the polygon union and every input distribution whose polygon
    entered it, so callers can replay the same sample set elsewhere.
    """
    _require_degraded_z(channel)
    cards = tuple(channel.card(n) for n in ("x1", "x2", "x3"))
    pool = _input_corners(cards) if cfg.include_corners else []
    for i in range(cfg.num_samples):
        rng = np.random.default_rng([cfg.seed, i])
        pool.append(InputJoint.random(cards, rng).pmf)
    if not pool:
        raise EmptyList("no input distributions to evaluate")

    t = channel.transition

    def caps_of(rows: np.ndarray):
        dd = rows.reshape((-1,) + cards)
        j = dd[..., None, None] * t
        b = degraded_z_bounds(j)
        return b[..., 0], b[..., 1], b[..., 2]

    flats = np.stack([p.reshape(-1) for p in pool], axis=0)
    all_flats = [flats[i] for i in range(flats.shape[0])]
    all_flats.extend(_refined_flats(flats, caps_of, cfg, threads))

    stacked = np.stack(all_flats, axis=0)
    r1, r2, s = caps_of(stacked)
    polygons = [
        polygon_from_bounds([r1[i]], [r2[i]], [s[i]])
        for i in range(stacked.shape[0])
    ]
    region = hull_union(polygons)
    evaluated = tuple(
        InputJoint(cards, flat.reshape(cards)) for flat in all_flats
    )
    return region, evaluated


def capacity_semidet_hi(
    channel: ChannelSpec,
    cfg: SearchConfig,
    force: bool = False,
    threads: int = 1,
) -> tuple[Region2D, HiRegimeReport, tuple[V12Joint, ...]]:
    """Sampled capacity region of a semi-deterministic hi-regime channel.

    Runs the premise falsifier first and refuses falsified channels unless
    forced.  Every evaluated distribution is re-screened against the
    premise, and the region formula is checked against the full five-bound
    reduced polygon at each of them (the two extra bounds must be
    redundant wherever the premise holds).
    """
    _require_semidet(channel)
    report = hi_regime_falsify(channel, cfg)
    if report.falsified and not force:
        raise HiRegimeFalsified(
            f"high-interference premise falsified: {report.condition} "
            f"fails by {report.margin:.6g}",
            report,
        )

    cv12 = cfg.card_v12 or default_v12_card(channel)
    cards = (channel.card("x1"), cv12, channel.card("x2"), channel.card("x3"))
    pool = _corner_joints(cards) if cfg.include_corners else []
    for i in range(cfg.num_samples):
        rng = np.random.default_rng([cfg.seed, i])
        pool.append(V12Joint.random(cards, rng).pmf)
    if not pool:
        raise EmptyList("no distributions to evaluate")

    t = channel.transition

    def lift_rows(rows: np.ndarray) -> np.ndarray:
        dd = rows.reshape((-1,) + cards)
        return np.einsum(
            dd, [6, 0, 1, 2, 3], t, [0, 2, 3, 4, 5], [6, 0, 1, 2, 3, 4, 5]
        )

    def caps_of(rows: np.ndarray):
        b = semidet_hi_bounds(lift_rows(rows))
        return b[..., 0], b[..., 1], b[..., 2]

    flats = np.stack([p.reshape(-1) for p in pool], axis=0)
    all_flats = [flats[i] for i in range(flats.shape[0])]
    all_flats.extend(_refined_flats(flats, caps_of, cfg, threads))

    stacked = np.stack(all_flats, axis=0)
    lifted = lift_rows(stacked)
    gap_a, gap_b = violation_gaps(lifted)
    worst = np.maximum(gap_a, gap_b)
    if not force and float(np.max(worst)) > VIOLATION_TOL:
        i = int(np.argmax(worst > VIOLATION_TOL))
        late = HiRegimeReport(
            status="falsified",
            samples=cfg.num_samples,
            probes=report.probes,
            seed=cfg.seed,
            card_v12=cv12,
            margin=float(worst[i]),
            condition=CONDITION_A if gap_a[i] >= gap_b[i] else CONDITION_B,
            witness_cards=cards,
            witness_pmf=tuple(float(v) for v in stacked[i]),
        )
        raise HiRegimeFalsified(
            "high-interference premise falsified during region sampling: "
            f"{late.condition} fails by {late.margin:.6g}",
            late,
        )

    caps = semidet_hi_bounds(lifted)
    a_r, h2_r, delta_r, m_r, h3_r = _reduced_terms_y2(lifted)
    polygons = []
    for i in range(stacked.shape[0]):
        poly = polygon_from_bounds([caps[i, 0]], [caps[i, 1]], [caps[i, 2]])
        if worst[i] <= VIOLATION_TOL:
            full = _closed(polygon_from_bounds(
                [a_r[i]],
                [h2_r[i], h2_r[i] + delta_r[i] - m_r[i]],
                [delta_r[i] + h3_r[i] - m_r[i], a_r[i] + h2_r[i] - m_r[i]],
            ))
            if not regions_close(poly, full, tol=DROP_CONSISTENCY_TOL):
                raise NumericsError(
                    "dropping the premise-redundant bounds changed the "
                    f"polygon at sample {i}"
                )
        polygons.append(poly)
    region = hull_union(polygons)
    evaluated = tuple(V12Joint(cards, flat.reshape(cards)) for flat in all_flats)
    return region, report, evaluated
