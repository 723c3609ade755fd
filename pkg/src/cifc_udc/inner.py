"""Achievable-rate inner bound via auxiliary-variable factorizations.

The coding scheme splits each message into public/private/binned parts and
routes them through eight auxiliary variables.  For a fixed factorization the
achievable (R1, R2) pairs form a polytope in rate-split space; projecting it
to the plane and unioning over factorizations gives the inner bound estimate.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from .channel import ChannelSpec
from .errors import (
    CardinalityMismatch,
    InadmissibleConstants,
    InvalidFactor,
    MissingVariable,
)
from .pmf import (
    ConditionalFactor,
    JointPMF,
    conditional_mutual_information,
    joint_from_factors,
)
from .polytope import (
    LinearSystem,
    Region2D,
    hull_union,
    polygon_extract,
    project_to_plane,
    region_from_vertices,
)

ADMISSIBLE_TOL = 1e-9

AUX_LABELS = ("u1p", "u1", "v1", "u2p", "u2", "v12", "v2", "yh2")

JOINT_LABELS = (
    "u1p", "u1", "v1", "u2p", "u2", "v12", "v2",
    "x1", "x2", "x3", "y1", "y2", "yh2",
)

# canonical factor chain: each entry is (targets, given)
FACTOR_SIGNATURES = (
    (("u1p",), ()),
    (("u1",), ("u1p",)),
    (("v1",), ("u1p", "u1")),
    (("u2p",), ("u1p",)),
    (("u2", "v12", "v2"), ("u1p", "u1", "v1", "u2p")),
    (("x1",), ("u1p", "u1", "v1")),
    (("x2",), ("u1p", "u1", "v1", "u2p", "u2", "v12", "v2")),
    (("x3",), ("u1p", "u2p")),
    (("yh2",), ("u1p", "u1", "u2p", "u2", "x3", "y2")),
)


@dataclass(frozen=True)
class InnerFactorization:
    """Nine conditional factors in the canonical chain order.

    Auxiliary cardinalities are implied by the factor tables; the factors
    must use exactly the canonical target/conditioning signatures.
    """

    factors: tuple[ConditionalFactor, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        if len(factors) != len(FACTOR_SIGNATURES):
            raise InvalidFactor(
                f"expected {len(FACTOR_SIGNATURES)} factors, got {len(factors)}"
            )
        for factor, (targets, given) in zip(factors, FACTOR_SIGNATURES):
            if factor.target_labels != targets or factor.given_labels != given:
                raise InvalidFactor(
                    f"factor for {factor.target_labels} must be "
                    f"p({','.join(targets)}|{','.join(given)})"
                )
        cards: dict[str, int] = {}
        for factor in factors:
            for label, card in factor.targets:
                cards[label] = card
        cards["y2"] = dict(factors[8].given)["y2"]
        for factor in factors:
            for label, card in factor.given:
                if cards[label] != card:
                    raise CardinalityMismatch(
                        f"{label!r} has cardinality {cards[label]} but a factor "
                        f"conditions on it with cardinality {card}"
                    )
        object.__setattr__(self, "factors", factors)

    @property
    def cards(self) -> dict[str, int]:
        """Cardinalities of every variable the factor chain mentions."""
        out: dict[str, int] = {}
        for factor in self.factors:
            for label, card in factor.targets:
                out[label] = card
        out["y2"] = dict(self.factors[8].given)["y2"]
        return out


def assemble_joint(factorization: InnerFactorization, channel: ChannelSpec) -> JointPMF:
    """Multiply the factor chain and the channel into the 13-variable joint.

    The channel factor p(y1,y2|x1,x2,x3) enters right before the output
    estimate factor, which conditions on y2.
    """
    cards = factorization.cards
    for label in ("x1", "x2", "x3", "y2"):
        if cards[label] != channel.card(label):
            raise CardinalityMismatch(
                f"{label!r}: factorization uses cardinality {cards[label]}, "
                f"channel uses {channel.card(label)}"
            )
    chain = list(factorization.factors[:8])
    chain.append(channel.as_factor())
    chain.append(factorization.factors[8])
    return joint_from_factors(chain)


@dataclass(frozen=True)
class InnerConstants:
    """Mutual-information constants of the rate-split system, in bits.

    A  = I(V1;U2|U1p,U1,U2p)            precoding cost against the cognitive layer
    B  = I(Y1,V1,V12;YH2|U1p,U1,U2p,U2,X3)   relayed-estimate payoff
    C  = I(Y2;YH2|U1p,U1,U2p,U2,X3)          relayed-estimate quantization cost
    D  = I(Y1;U1p,U1,V1,U2p,U2,V12,X3)
    E  = I(Y1;V1,U2p,U2,V12,X3|U1p,U1)
    F  = I(Y1;V1,V12,X3|U1p,U1,U2p,U2)
    G  = I(Y1,YH2;V1,V12|U1p,U1,U2p,U2,X3)
    H  = I(Y1;U2p,U2,V12,X3|U1p,U1,V1)
    I  = I(Y1;V12,X3|U1p,U1,V1,U2p,U2)
    J  = I(Y1,YH2;V12|U1p,U1,V1,U2p,U2,X3)
    K  = I(Y2;U1,U2,V2|U1p,U2p,X3)
    L  = I(Y2;U2,V2|U1p,U1,U2p,X3)
    M  = I(Y2;V2|U1p,U1,U2p,U2,X3)
    N1 = I(V1;V2|U1p,U1,U2p,U2)
    N2 = I(V1,V12;V2|U1p,U1,U2p,U2)
    P  = I(Y1;X3|U1p,U1,V1,U2p,U2,V12)
    """

    A: float
    B: float
    C: float
    D: float
    E: float
    F: float
    G: float
    H: float
    I: float
    J: float
    K: float
    L: float
    M: float
    N1: float
    N2: float
    P: float


CONSTANT_NAMES = tuple(f.name for f in fields(InnerConstants))


def inner_constants(joint: JointPMF) -> InnerConstants:
    """Evaluate the sixteen constants on an assembled joint."""
    missing = [l for l in JOINT_LABELS if l not in joint.labels]
    if missing:
        raise MissingVariable(f"joint lacks variables {missing}")
    cmi = lambda a, b, g: conditional_mutual_information(joint, a, b, g)
    return InnerConstants(
        A=cmi(["v1"], ["u2"], ["u1p", "u1", "u2p"]),
        B=cmi(["y1", "v1", "v12"], ["yh2"], ["u1p", "u1", "u2p", "u2", "x3"]),
        C=cmi(["y2"], ["yh2"], ["u1p", "u1", "u2p", "u2", "x3"]),
        D=cmi(["y1"], ["u1p", "u1", "v1", "u2p", "u2", "v12", "x3"], []),
        E=cmi(["y1"], ["v1", "u2p", "u2", "v12", "x3"], ["u1p", "u1"]),
        F=cmi(["y1"], ["v1", "v12", "x3"], ["u1p", "u1", "u2p", "u2"]),
        G=cmi(["y1", "yh2"], ["v1", "v12"], ["u1p", "u1", "u2p", "u2", "x3"]),
        H=cmi(["y1"], ["u2p", "u2", "v12", "x3"], ["u1p", "u1", "v1"]),
        I=cmi(["y1"], ["v12", "x3"], ["u1p", "u1", "v1", "u2p", "u2"]),
        J=cmi(["y1", "yh2"], ["v12"], ["u1p", "u1", "v1", "u2p", "u2", "x3"]),
        K=cmi(["y2"], ["u1", "u2", "v2"], ["u1p", "u2p", "x3"]),
        L=cmi(["y2"], ["u2", "v2"], ["u1p", "u1", "u2p", "x3"]),
        M=cmi(["y2"], ["v2"], ["u1p", "u1", "u2p", "u2", "x3"]),
        N1=cmi(["v1"], ["v2"], ["u1p", "u1", "u2p", "u2"]),
        N2=cmi(["v1", "v12"], ["v2"], ["u1p", "u1", "u2p", "u2"]),
        P=cmi(["y1"], ["x3"], ["u1p", "u1", "v1", "u2p", "u2", "v12"]),
    )


def admissible(c: InnerConstants) -> bool:
    """Whether the relayed-estimate cost C is covered by P + B."""
    return c.C <= c.P + c.B + ADMISSIBLE_TOL


# ---------------------------------------------------------------------------
# rate-split constraint system

RATE_VARIABLES = (
    "R1", "R2",
    "R11", "R1p", "R1B", "R22", "R2p",
    "R1B_bin", "R2p_bin", "R22_bin",
)

# decoder-1 rows (e*) and decoder-2 rows (f*); head rows may be dropped when
# the sub-rates they protect are pinned to zero
_E1 = ("R1p", "R11", "R2p", "R2p_bin", "R1B", "R1B_bin")
_E2 = ("R11", "R2p", "R2p_bin", "R1B", "R1B_bin")
_E3 = ("R2p", "R2p_bin", "R1B", "R1B_bin")
_E4 = ("R11", "R1B", "R1B_bin")
_E5 = ("R1B", "R1B_bin")
_F1 = ("R1p", "R2p", "R2p_bin", "R22", "R22_bin")
_F2 = ("R2p", "R2p_bin", "R22", "R22_bin")
_F3 = ("R22", "R22_bin")

# (pinned-to-zero variables, dropped row names); decoder-1 cases nest, the
# decoder-2 case is independent, giving 4 x 2 sub-systems
_DEC1_CASES = (
    ((), ()),
    (("R1B", "R1B_bin"), ("e3",)),
    (("R11", "R1B", "R1B_bin"), ("e2", "e3")),
    (("R1p", "R11", "R1B", "R1B_bin"), ("e1", "e2", "e3")),
)
_DEC2_CASES = (
    ((), ()),
    (("R2p", "R2p_bin", "R22", "R22_bin"), ("f1",)),
)
DROP_CASES = tuple(
    (p1 + p2, d1 + d2)
    for p1, d1 in _DEC1_CASES
    for p2, d2 in _DEC2_CASES
)


def _named_rows(c: InnerConstants) -> dict[str, tuple[dict[str, float], float]]:
    row = lambda vars_: {v: 1.0 for v in vars_}
    return {
        "e1": (row(_E1), c.A + c.B + c.D - c.C),
        "e2": (row(_E2), c.A + c.B + c.E - c.C),
        "e3": (row(_E3), c.A + c.B + c.H - c.C),
        "e4a": (row(_E4), c.A + c.B + c.F - c.C),
        "e4b": (row(_E4), c.A + c.G),
        "e5a": (row(_E5), c.J),
        "e5b": (row(_E5), c.B + c.I - c.C),
        "f1": (row(_F1), c.K),
        "f2": (row(_F2), c.L),
        "f3": (row(_F3), c.M),
    }


def case_system(
    c: InnerConstants,
    pinned: tuple[str, ...] = (),
    dropped: tuple[str, ...] = (),
) -> LinearSystem:
    """Constraint system for one drop case of the rate-split region."""
    named = _named_rows(c)
    inequalities = [named[k] for k in named if k not in dropped]
    # binning floors
    inequalities.append(({"R2p_bin": -1.0}, -c.A))
    inequalities.append(({"R22_bin": -1.0}, -c.N1))
    inequalities.append(({"R1B_bin": -1.0, "R22_bin": -1.0}, -c.N2))
    equalities = [
        ({"R1": 1.0, "R11": -1.0, "R1p": -1.0, "R1B": -1.0}, 0.0),
        ({"R2": 1.0, "R22": -1.0, "R2p": -1.0}, 0.0),
    ]
    equalities.extend(({v: 1.0}, 0.0) for v in pinned)
    return LinearSystem.from_rows(
        RATE_VARIABLES,
        inequalities=inequalities,
        equalities=equalities,
        nonnegative=RATE_VARIABLES,
    )


def region_for_distribution(c: InnerConstants) -> Region2D:
    """(R1, R2) region for one factorization's constants.

    Unions the eight drop cases; each case pins the sub-rates named in its
    drop condition to zero and removes the rows the pin makes unnecessary.
    The silent point (0,0) is always reported achievable, even when the
    binning floors make every split infeasible.
    """
    if not admissible(c):
        raise InadmissibleConstants(
            f"C = {c.C!r} exceeds P + B = {c.P + c.B!r}"
        )
    regions = []
    for pinned, dropped in DROP_CASES:
        system = project_to_plane(case_system(c, pinned, dropped), "R1", "R2")
        regions.append(polygon_extract(system, "R1", "R2"))
    union = hull_union(regions)
    if union.empty:
        return region_from_vertices([(0.0, 0.0)])
    return union


# ---------------------------------------------------------------------------
# sampling

@dataclass(frozen=True)
class SamplerConfig:
    """Deterministic sampling plan for the factorization union."""

    seed: int = 0
    num_samples: int = 0
    card_u1p: int = 2
    card_u1: int = 2
    card_v1: int = 2
    card_u2p: int = 2
    card_u2: int = 2
    card_v12: int = 2
    card_v2: int = 2
    card_yh2: int = 2
    dirichlet_concentration: float = 1.0
    include_deterministic_corners: bool = True
    include_yhat_constant_variant: bool = True
    corner_cap: int = 32

    def __post_init__(self):
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.num_samples < 0:
            raise ValueError("num_samples must be nonnegative")
        if self.dirichlet_concentration <= 0:
            raise ValueError("dirichlet_concentration must be positive")
        if self.corner_cap < 0:
            raise ValueError("corner_cap must be nonnegative")
        for name in AUX_LABELS:
            if getattr(self, f"card_{name}") < 1:
                raise ValueError(f"card_{name} must be at least 1")

    def aux_cards(self) -> dict[str, int]:
        return {name: getattr(self, f"card_{name}") for name in AUX_LABELS}


def _signature_pairs(index: int, cards: dict[str, int]):
    targets, given = FACTOR_SIGNATURES[index]
    return (
        tuple((l, cards[l]) for l in targets),
        tuple((l, cards[l]) for l in given),
    )


def _mode_factor(index: int, cards: dict[str, int], modes) -> ConditionalFactor:
    """Build one factor from per-target modes.

    A mode is "const", "uniform", or ("copy", source); copies reduce the
    source symbol modulo the target cardinality.  Multi-target factors take
    one mode per target; a copy source may be an earlier target in the same
    factor.
    """
    targets, given = _signature_pairs(index, cards)
    if isinstance(modes, (str, tuple)) and (
        modes == "uniform" or modes == "const" or (modes and modes[0] == "copy")
    ):
        modes = (modes,) * len(targets)
    if all(m == "uniform" for m in modes):
        return ConditionalFactor.uniform(targets, given)
    if all(m == "const" for m in modes):
        return ConditionalFactor.constant(targets, given)
    g_shape = tuple(c for _, c in given)
    t_shape = tuple(c for _, c in targets)
    labels = [l for l, _ in given] + [l for l, _ in targets]
    table = np.zeros(g_shape + t_shape)
    for g_idx in np.ndindex(*g_shape) if g_shape else [()]:
        block = np.ones(t_shape)
        for axis, ((label, card), mode) in enumerate(zip(targets, modes)):
            shape = [1] * len(t_shape)
            shape[axis] = card
            if mode == "const":
                row = np.zeros(card)
                row[0] = 1.0
                block = block * row.reshape(shape)
            elif mode == "uniform":
                block = block * np.full(card, 1.0 / card).reshape(shape)
            else:
                _, source = mode
                pos = labels.index(source)
                if pos < len(g_idx):
                    row = np.zeros(card)
                    row[g_idx[pos] % card] = 1.0
                    block = block * row.reshape(shape)
                else:
                    # copy of an earlier target inside this factor
                    src_axis = pos - len(g_idx)
                    src_card = t_shape[src_axis]
                    ind = np.zeros((src_card, card))
                    ind[np.arange(src_card), np.arange(src_card) % card] = 1.0
                    sh = [1] * len(t_shape)
                    sh[src_axis] = src_card
                    sh[axis] = card
                    block = block * ind.reshape(sh)
        table[g_idx] = block
    return ConditionalFactor(targets, given, table)


def _build(cards: dict[str, int], **modes) -> InnerFactorization:
    defaults = {
        "u1p": "const", "u1": "const", "v1": "const", "u2p": "const",
        "block": ("const", "const", "const"),
        "x1": "uniform", "x2": "uniform", "x3": "const", "yh2": "const",
    }
    defaults.update(modes)
    keys = ("u1p", "u1", "v1", "u2p", "block", "x1", "x2", "x3", "yh2")
    factors = tuple(
        _mode_factor(i, cards, defaults[key]) for i, key in enumerate(keys)
    )
    return InnerFactorization(factors)


def _corner_catalog(cards: dict[str, int]) -> tuple[InnerFactorization, ...]:
    """Structured corner factorizations covering the main coding routes."""
    return (
        # inputs on, every auxiliary silent
        _build(cards),
        # private messages ride V1 and V2 straight onto the inputs
        _build(cards, v1="uniform", x1=("copy", "v1"),
               block=("const", "const", "uniform"), x2=("copy", "v2")),
        # public primary message on U1, both decoders can track it
        _build(cards, u1="uniform", x1=("copy", "u1")),
        # relay route: destination 2 repeats the primary public layer
        _build(cards, u1p="uniform", x1=("copy", "u1p"), x3=("copy", "u1p")),
        # interference forwarding of the cognitive public layer
        _build(cards, u2p="uniform", x2=("copy", "u2p"), x3=("copy", "u2p")),
        # binned broadcast layer V12 carried by the cognitive input
        _build(cards, block=("const", "uniform", ("copy", "v12")),
               x2=("copy", "v12")),
        # cognitive split: U2 public against the primary private V1
        _build(cards, v1="uniform", x1=("copy", "v1"),
               block=("uniform", "const", "const"), x2=("copy", "u2")),
        # quantize-and-forward of Y2 with active X3
        _build(cards, v1="uniform", x1=("copy", "v1"),
               block=("const", "const", "uniform"), x2=("copy", "v2"),
               x3="uniform", yh2=("copy", "y2")),
        # everything uniform
        _build(cards, u1p="uniform", u1="uniform", v1="uniform",
               u2p="uniform", block=("uniform", "uniform", "uniform"),
               x1="uniform", x2="uniform", x3="uniform", yh2="uniform"),
    )


def _yhat_constant_variant(f: InnerFactorization) -> InnerFactorization | None:
    targets, given = f.factors[8].targets, f.factors[8].given
    const = ConditionalFactor.constant(targets, given)
    if np.array_equal(f.factors[8].table, const.table):
        return None
    return InnerFactorization(f.factors[:8] + (const,))


def _random_factorization(
    cards: dict[str, int], rng: np.random.Generator, alpha: float
) -> InnerFactorization:
    factors = tuple(
        ConditionalFactor.random(*_signature_pairs(i, cards), rng, alpha)
        for i in range(len(FACTOR_SIGNATURES))
    )
    return InnerFactorization(factors)


def sample_factorizations(
    channel: ChannelSpec, cfg: SamplerConfig
) -> tuple[InnerFactorization, ...]:
    """Deterministic factorization stream: corners, then Dirichlet draws.

    Every entry whose output-estimate factor is not already constant is
    followed by a copy with that factor forced constant, so distributions
    rejected by the admissibility gate still contribute their base region.
    """
    cards = dict(cfg.aux_cards())
    for label in ("x1", "x2", "x3", "y2"):
        cards[label] = channel.card(label)
    base: list[InnerFactorization] = []
    if cfg.include_deterministic_corners:
        base.extend(_corner_catalog(cards)[: cfg.corner_cap])
    for i in range(cfg.num_samples):
        rng = np.random.default_rng([cfg.seed, i])
        base.append(_random_factorization(cards, rng, cfg.dirichlet_concentration))
    out: list[InnerFactorization] = []
    for f in base:
        out.append(f)
        if cfg.include_yhat_constant_variant:
            variant = _yhat_constant_variant(f)
            if variant is not None:
                out.append(variant)
    return tuple(out)


def _sample_record(index: int, adm: bool, c: InnerConstants, vertices: int) -> str:
    parts = [f"sample={index}", f"admissible={1 if adm else 0}"]
    parts.extend(
        f"{name}={getattr(c, name):.12g}" for name in CONSTANT_NAMES
    )
    parts.append(f"vertices={vertices}")
    return " ".join(parts)


def inner_region(
    channel: ChannelSpec, cfg: SamplerConfig, threads: int = 1
) -> tuple[Region2D, tuple[str, ...]]:
    """Union of per-factorization regions plus a one-line-per-sample log.

    Inadmissible samples contribute nothing but are logged.  The result
    only grows as samples are added and never loses the silent point.
    """
    samples = sample_factorizations(channel, cfg)

    def one(f: InnerFactorization):
        c = inner_constants(assemble_joint(f, channel))
        if not admissible(c):
            return c, None
        return c, region_for_distribution(c)

    if threads > 1 and len(samples) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, samples))
    else:
        results = [one(f) for f in samples]

    lines = []
    regions = []
    for index, (c, region) in enumerate(results):
        if region is None:
            lines.append(_sample_record(index, False, c, 0))
        else:
            lines.append(_sample_record(index, True, c, len(region.vertices)))
            regions.append(region)
    if regions:
        union = hull_union(regions)
    else:
        union = region_from_vertices([(0.0, 0.0)])
    if union.empty:
        union = region_from_vertices([(0.0, 0.0)])
    return union, tuple(lines)
