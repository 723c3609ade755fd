"""Converse-side outer bound.

For a fixed joint p(x1,v12,x2,x3) the converse gives five linear rate
bounds; the channel-level outer estimate maximizes the support function of
those polygons over sampled joints along a fan of directions and intersects
the resulting halfplanes.  Under-sampling can only make the estimate
smaller, never larger, so the caveat record travels with every result.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import ChannelSpec
from .errors import (
    CardinalityMismatch,
    EmptyList,
    NegativeEntry,
    ShapeMismatch,
    SumNotOne,
)
from .polytope import LinearSystem, Region2D, polygon_extract

SUM_TOL = 1e-9
NEG_TOL = 1e-12

# semantic axes of the lifted joint tensor
_X1, _V12, _X2, _X3, _Y1, _Y2 = range(6)


@dataclass(frozen=True)
class V12Joint:
    """Input-side joint p(x1, v12, x2, x3) with the converse auxiliary."""

    cards: tuple[int, int, int, int]
    pmf: np.ndarray

    def __post_init__(self):
        cards = tuple(int(c) for c in self.cards)
        if len(cards) != 4 or any(c < 1 for c in cards):
            raise ShapeMismatch("need four positive cardinalities")
        pmf = np.asarray(self.pmf, dtype=float)
        if pmf.shape != cards:
            raise ShapeMismatch(f"pmf shape {pmf.shape} does not match {cards}")
        if pmf.size and float(pmf.min()) < -NEG_TOL:
            raise NegativeEntry(f"pmf entry {float(pmf.min())!r} is negative")
        pmf = np.clip(pmf, 0.0, None)
        total = float(pmf.sum())
        if abs(total - 1.0) > SUM_TOL:
            raise SumNotOne(f"pmf sums to {total!r}")
        object.__setattr__(self, "cards", cards)
        object.__setattr__(self, "pmf", pmf / total)

    @classmethod
    def uniform(cls, cards) -> "V12Joint":
        cards = tuple(int(c) for c in cards)
        size = int(np.prod(cards))
        return cls(cards, np.full(cards, 1.0 / size))

    @classmethod
    def random(cls, cards, rng: np.random.Generator, alpha: float = 1.0) -> "V12Joint":
        cards = tuple(int(c) for c in cards)
        size = int(np.prod(cards))
        return cls(cards, rng.dirichlet(np.full(size, float(alpha))).reshape(cards))

    def lifted(self, channel: ChannelSpec) -> np.ndarray:
        """Joint tensor over (x1, v12, x2, x3, y1, y2)."""
        ch_cards = tuple(channel.card(n) for n in ("x1", "x2", "x3"))
        if (self.cards[0], self.cards[2], self.cards[3]) != ch_cards:
            raise CardinalityMismatch(
                f"input cards {self.cards} do not match channel {ch_cards}"
            )
        return np.einsum(
            self.pmf, [0, 1, 2, 3],
            channel.transition, [0, 2, 3, 4, 5],
            [0, 1, 2, 3, 4, 5],
        )


def default_v12_card(channel: ChannelSpec) -> int:
    return channel.card("x1") * channel.card("x2")


# ---------------------------------------------------------------------------
# bound evaluation on lifted tensors; supports a leading batch axis

def marginal_entropies(j: np.ndarray, groups, ndim: int = 6) -> np.ndarray:
    """Entropy in bits of several marginals of a joint tensor.

    ``groups`` lists the axis sets to keep; a tensor with one extra leading
    axis is treated as a batch. Returns shape (batch?, len(groups)).
    """
    batched = j.ndim == ndim + 1
    out = []
    for keep in groups:
        axes = tuple(
            a + (1 if batched else 0) for a in range(ndim) if a not in keep
        )
        m = j.sum(axis=axes) if axes else j
        flat = m.reshape(m.shape[0], -1) if batched else m.reshape(-1)
        safe = np.where(flat > 0, flat, 1.0)
        out.append(-np.sum(flat * np.log2(safe), axis=-1))
    return np.stack(out, axis=-1)


def five_bounds(j: np.ndarray) -> np.ndarray:
    """The five converse rate bounds of a lifted tensor, in bits.

    Order: two R1 caps, the R2 cap, two sum caps.
    """
    groups = (
        (_X1, _X2, _X3),                 # 0
        (_Y1,),                          # 1
        (_X1, _X2, _X3, _Y1),            # 2
        (_X1, _V12, _X3),                # 3
        (_X1, _V12, _X3, _Y1),           # 4
        (_X1, _X3),                      # 5
        (_X1, _X2, _X3, _Y2),            # 6
        (_X1, _X3, _Y2),                 # 7
        (_X3,),                          # 8
        (_X3, _Y1, _Y2),                 # 9
        (_X1, _X2, _X3, _Y1, _Y2),       # 10
        (_X1, _V12, _X2, _X3),           # 11
        (_X1, _V12, _X3, _Y2),           # 12
        (_X1, _V12, _X2, _X3, _Y2),      # 13
    )
    h = marginal_entropies(j, groups)
    b1 = h[..., 0] + h[..., 1] - h[..., 2]
    b2 = h[..., 3] + h[..., 1] - h[..., 4]
    b3 = h[..., 0] + h[..., 7] - h[..., 5] - h[..., 6]
    b4 = h[..., 0] + h[..., 9] - h[..., 8] - h[..., 10]
    b5 = (
        h[..., 11] + h[..., 12] - h[..., 3] - h[..., 13]
        + h[..., 3] + h[..., 1] - h[..., 4]
    )
    return np.clip(np.stack([b1, b2, b3, b4, b5], axis=-1), 0.0, None)


def polygon_from_bounds(r1_bounds, r2_bounds, sum_bounds) -> Region2D:
    """Polygon of R1 caps, R2 caps and R1+R2 caps in the first quadrant."""
    inequalities = [({"R1": 1.0}, float(b)) for b in r1_bounds]
    inequalities += [({"R2": 1.0}, float(b)) for b in r2_bounds]
    inequalities += [({"R1": 1.0, "R2": 1.0}, float(b)) for b in sum_bounds]
    system = LinearSystem.from_rows(
        ("R1", "R2"), inequalities=inequalities, nonnegative=("R1", "R2")
    )
    return polygon_extract(system, "R1", "R2")


def outer_polygon(d: V12Joint, channel: ChannelSpec) -> Region2D:
    """Per-distribution converse polygon."""
    b = five_bounds(d.lifted(channel))
    return polygon_from_bounds([b[0], b[1]], [b[2]], [b[3], b[4]])


# ---------------------------------------------------------------------------
# support search machinery (shared with the capacity-class searches)

def _caps(bounds: np.ndarray):
    """Collapse the five bounds to (R1 cap, R2 cap, sum cap)."""
    r1 = np.minimum(bounds[..., 0], bounds[..., 1])
    r2 = bounds[..., 2]
    s = np.minimum(bounds[..., 3], bounds[..., 4])
    return r1, r2, s


def support_of_caps(r1, r2, s, direction) -> np.ndarray:
    """max lam . (R1,R2) over {0<=R1<=r1, 0<=R2<=r2, R1+R2<=s}."""
    r1 = np.minimum(np.asarray(r1, dtype=float), s)
    r2 = np.minimum(np.asarray(r2, dtype=float), s)
    la, lb = float(direction[0]), float(direction[1])
    x_at_top = np.minimum(r1, s - r2)
    y_at_right = np.minimum(r2, s - r1)
    candidates = (
        la * r1 + lb * np.maximum(y_at_right, 0.0),
        la * np.maximum(x_at_top, 0.0) + lb * r2,
        la * r1,
        lb * r2,
    )
    return np.maximum.reduce([np.asarray(c) for c in candidates])


def project_to_simplex(rows: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row onto the probability simplex."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    n = rows.shape[1]
    u = -np.sort(-rows, axis=1)
    css = np.cumsum(u, axis=1) - 1.0
    ks = np.arange(1, n + 1)
    cond = u - css / ks > 0
    rho = n - 1 - np.argmax(cond[:, ::-1], axis=1)
    tau = css[np.arange(rows.shape[0]), rho] / (rho + 1)
    return np.maximum(rows - tau[:, None], 0.0)


def fan_directions(count: int) -> np.ndarray:
    angles = np.linspace(0.0, np.pi / 2.0, count)
    return np.stack([np.cos(angles), np.sin(angles)], axis=1)


def ascent_refine(
    start: np.ndarray,
    evaluate,
    step: float = 0.05,
    sweeps: int = 50,
) -> tuple[float, np.ndarray]:
    """Greedy coordinate ascent on a pmf vector.

    Each sweep bumps every entry by the current step, projects the
    candidates back onto the simplex, and keeps the best improvement; a
    stalled sweep halves the step, and the walk ends once the step is
    below 1e-3.
    """
    x = np.asarray(start, dtype=float).reshape(-1).copy()
    n = x.size
    current = float(evaluate(x[None, :])[0])
    for _ in range(sweeps):
        candidates = project_to_simplex(x[None, :] + step * np.eye(n))
        values = evaluate(candidates)
        best = int(np.argmax(values))
        if values[best] > current + 1e-12:
            x = candidates[best]
            current = float(values[best])
        else:
            step *= 0.5
            if step < 1e-3:
                break
    return current, x


@dataclass(frozen=True)
class SearchConfig:
    """Deterministic sampling and refinement plan for support searches."""

    seed: int = 0
    num_samples: int = 0
    card_v12: int = 0  # 0 means |X1| * |X2|
    fan: int = 64
    refine_starts: int = 5
    refine_sweeps: int = 50
    refine_step: float = 0.05
    include_corners: bool = True

    def __post_init__(self):
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.num_samples < 0:
            raise ValueError("num_samples must be nonnegative")
        if self.card_v12 < 0:
            raise ValueError("card_v12 must be nonnegative")
        if self.fan < 2:
            raise ValueError("fan needs at least the two axis directions")
        if self.refine_starts < 0 or self.refine_sweeps < 0:
            raise ValueError("refinement knobs must be nonnegative")
        if not 0 < self.refine_step < 1:
            raise ValueError("refine_step must sit in (0, 1)")


def _corner_joints(cards: tuple[int, int, int, int]) -> list[np.ndarray]:
    """Structured starting joints: independent inputs, v12 wired four ways."""
    cx1, cv12, cx2, cx3 = cards
    u1 = np.full(cx1, 1.0 / cx1)
    u2 = np.full(cx2, 1.0 / cx2)
    u3 = np.full(cx3, 1.0 / cx3)
    base = np.einsum(u1, [0], u2, [2], u3, [3], [0, 2, 3])
    out = [np.full(cards, 1.0 / int(np.prod(cards)))]

    def with_v12(rule):
        d = np.zeros(cards)
        for x1 in range(cx1):
            for x2 in range(cx2):
                d[x1, rule(x1, x2) % cv12, x2, :] = base[x1, x2, :]
        return d

    out.append(with_v12(lambda x1, x2: 0))
    out.append(with_v12(lambda x1, x2: x1))
    out.append(with_v12(lambda x1, x2: x2))
    out.append(with_v12(lambda x1, x2: x1 * cx2 + x2))
    return out


def outer_region_estimate(
    channel: ChannelSpec,
    cfg: SearchConfig,
    extra_distributions: tuple[V12Joint, ...] = (),
    threads: int = 1,
) -> tuple[Region2D, dict]:
    """Convex support-function envelope of the per-distribution polygons.

    Contains the converse polygon of every joint it evaluated; the caveat
    record documents the sampling effort because the true bound may demand
    joints the search never saw.
    """
    cv12 = cfg.card_v12 or default_v12_card(channel)
    cards = (
        channel.card("x1"), cv12, channel.card("x2"), channel.card("x3")
    )
    for d in extra_distributions:
        if d.cards != cards:
            raise CardinalityMismatch(
                f"extra distribution cards {d.cards} do not match {cards}"
            )
    pool: list[np.ndarray] = []
    if cfg.include_corners:
        pool.extend(_corner_joints(cards))
    for i in range(cfg.num_samples):
        rng = np.random.default_rng([cfg.seed, i])
        pool.append(V12Joint.random(cards, rng).pmf)
    pool.extend(d.pmf for d in extra_distributions)
    if not pool:
        raise EmptyList("no input distributions to evaluate")

    t = channel.transition

    def lift_flat(flat: np.ndarray) -> np.ndarray:
        d = flat.reshape((-1,) + cards)
        return np.einsum(
            d, [6, 0, 1, 2, 3], t, [0, 2, 3, 4, 5], [6, 0, 1, 2, 3, 4, 5]
        )

    flats = np.stack([p.reshape(-1) for p in pool], axis=0)
    bounds = five_bounds(lift_flat(flats))
    r1, r2, s = _caps(bounds)

    directions = fan_directions(cfg.fan)

    def refine_direction(k: int) -> float:
        lam = directions[k]
        supports = support_of_caps(r1, r2, s, lam)
        best = float(np.max(supports))
        if cfg.refine_starts == 0 or cfg.refine_sweeps == 0:
            return best
        order = np.argsort(-supports, kind="stable")[: cfg.refine_starts]

        def evaluate(rows: np.ndarray) -> np.ndarray:
            bb = five_bounds(lift_flat(rows))
            return support_of_caps(*_caps(bb), lam)

        for idx in order:
            value, _ = ascent_refine(
                flats[int(idx)], evaluate, cfg.refine_step, cfg.refine_sweeps
            )
            best = max(best, value)
        return best

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as tp:
            heights = list(tp.map(refine_direction, range(cfg.fan)))
    else:
        heights = [refine_direction(k) for k in range(cfg.fan)]

    inequalities = [
        ({"R1": float(d[0]), "R2": float(d[1])}, float(h))
        for d, h in zip(directions, heights)
    ]
    system = LinearSystem.from_rows(
        ("R1", "R2"), inequalities=inequalities, nonnegative=("R1", "R2")
    )
    region = polygon_extract(system, "R1", "R2")
    caveat = {
        "kind": "support-envelope estimate",
        "note": (
            "numerical estimate: under-sampling can only shrink it, "
            "never enlarge it"
        ),
        "samples": int(cfg.num_samples),
        "extra_distributions": len(extra_distributions),
        "seed": int(cfg.seed),
        "card_v12": int(cv12),
        "fan": int(cfg.fan),
    }
    return region, caveat
