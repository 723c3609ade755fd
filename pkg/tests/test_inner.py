"""Inner-bound pipeline: factorizations, constants, drop-case regions, sampling."""

import numpy as np
import pytest

from cifc_udc.channel import ChannelSpec
from cifc_udc.errors import (
    CardinalityMismatch,
    InadmissibleConstants,
    InvalidFactor,
    MissingVariable,
)
from cifc_udc.inner import (
    AUX_LABELS,
    CONSTANT_NAMES,
    DROP_CASES,
    FACTOR_SIGNATURES,
    InnerConstants,
    InnerFactorization,
    SamplerConfig,
    admissible,
    assemble_joint,
    case_system,
    inner_constants,
    inner_region,
    region_for_distribution,
    sample_factorizations,
    _corner_catalog,
    _random_factorization,
    _signature_pairs,
)
from cifc_udc.oracle import (
    oracle_assemble_joint,
    oracle_conditional_mi,
    oracle_projected_vertices,
)
from cifc_udc.pmf import ConditionalFactor, entropy, mutual_information
from cifc_udc.polytope import (
    hull_union,
    materialized_rows,
    polygon_extract,
    project_to_plane,
    region_contains,
    region_from_vertices,
    regions_close,
)


def clean_channel():
    return ChannelSpec.from_outputs((2, 2, 2, 2, 2), lambda x1, x2, x3: (x1, x2))


def default_cards(ch, **overrides):
    cards = {name: 2 for name in AUX_LABELS}
    for label in ("x1", "x2", "x3", "y2"):
        cards[label] = ch.card(label)
    cards.update(overrides)
    return cards


def random_channel(rng, cards=(2, 2, 2, 2, 2)):
    rows = int(np.prod(cards[:3]))
    out = int(np.prod(cards[3:]))
    t = rng.dirichlet(np.ones(out), size=rows).reshape(cards)
    return ChannelSpec(cards, t)


def constants_with(**values):
    base = {name: 0.0 for name in CONSTANT_NAMES}
    base.update(values)
    return InnerConstants(**base)


# -- factorization type ------------------------------------------------------

def test_signature_validation():
    ch = clean_channel()
    cards = default_cards(ch)
    corner = _corner_catalog(cards)[0]
    # swap the output-estimate factor for one conditioning on y1 instead of y2
    targets = (("yh2", 2),)
    bad_given = tuple(
        (l if l != "y2" else "y1", c) for l, c in corner.factors[8].given
    )
    bad = ConditionalFactor.constant(targets, bad_given)
    with pytest.raises(InvalidFactor):
        InnerFactorization(corner.factors[:8] + (bad,))


def test_wrong_factor_count():
    ch = clean_channel()
    corner = _corner_catalog(default_cards(ch))[0]
    with pytest.raises(InvalidFactor):
        InnerFactorization(corner.factors[:8])


def test_cross_factor_cardinality_clash():
    ch = clean_channel()
    cards = default_cards(ch)
    corner = _corner_catalog(cards)[0]
    # v1 factor says card 3 while every other factor says card 2
    targets, given = _signature_pairs(2, dict(cards, v1=3))
    odd = ConditionalFactor.uniform(targets, given)
    with pytest.raises(CardinalityMismatch):
        InnerFactorization(corner.factors[:2] + (odd,) + corner.factors[3:])


def test_channel_cardinality_check():
    ch = clean_channel()
    wide = ChannelSpec.from_outputs((3, 2, 2, 3, 2), lambda a, b, c: (a, b))
    corner = _corner_catalog(default_cards(ch))[0]
    with pytest.raises(CardinalityMismatch):
        assemble_joint(corner, wide)


# -- joint assembly ----------------------------------------------------------

def test_constant_aux_uniform_inputs_joint():
    ch = clean_channel()
    cards = default_cards(ch, **{name: 1 for name in AUX_LABELS})
    f = InnerFactorization(
        tuple(
            ConditionalFactor.uniform(*_signature_pairs(i, cards))
            if FACTOR_SIGNATURES[i][0][0] in ("x1", "x2", "x3")
            else ConditionalFactor.constant(*_signature_pairs(i, cards))
            for i in range(9)
        )
    )
    joint = assemble_joint(f, ch)
    # uniform over inputs, outputs copied, all auxiliary axes singletons
    expect = np.zeros([1] * 7 + [2, 2, 2, 2, 2, 1])
    for x1 in range(2):
        for x2 in range(2):
            for x3 in range(2):
                expect[0, 0, 0, 0, 0, 0, 0, x1, x2, x3, x1, x2, 0] = 1 / 8
    assert joint.labels == (
        "u1p", "u1", "v1", "u2p", "u2", "v12", "v2",
        "x1", "x2", "x3", "y1", "y2", "yh2",
    )
    np.testing.assert_allclose(joint.probs, expect, atol=1e-15)


def test_direct_corner_joint_matches_loop_oracle():
    ch = clean_channel()
    f = _corner_catalog(default_cards(ch))[1]
    joint = assemble_joint(f, ch)
    chain = [(fac.targets, fac.given, fac.table) for fac in f.factors[:8]]
    chf = ch.as_factor()
    chain.append((chf.targets, chf.given, chf.table))
    fac = f.factors[8]
    chain.append((fac.targets, fac.given, fac.table))
    variables, probs = oracle_assemble_joint(chain)
    assert variables == joint.variables
    np.testing.assert_allclose(probs, joint.probs, atol=1e-14)
    # support check: x1 always equals v1, x2 always equals v2
    nz = np.argwhere(joint.probs > 0)
    lab = joint.labels
    v1, v2 = lab.index("v1"), lab.index("v2")
    x1, x2 = lab.index("x1"), lab.index("x2")
    assert np.all(nz[:, v1] == nz[:, x1])
    assert np.all(nz[:, v2] == nz[:, x2])


# -- constants ---------------------------------------------------------------

def test_clean_corner_constants_and_region():
    ch = clean_channel()
    f = _corner_catalog(default_cards(ch))[1]
    c = inner_constants(assemble_joint(f, ch))
    expect = dict(
        A=0, B=0, C=0, D=1, E=1, F=1, G=1, H=0, I=0, J=0,
        K=1, L=1, M=1, N1=0, N2=0, P=0,
    )
    for name, value in expect.items():
        assert getattr(c, name) == pytest.approx(value, abs=1e-12), name
    region = region_for_distribution(c)
    square = region_from_vertices([(0, 0), (1, 0), (1, 1), (0, 1)])
    assert regions_close(region, square, tol=1e-9)


def test_missing_variable():
    ch = clean_channel()
    f = _corner_catalog(default_cards(ch))[0]
    joint = assemble_joint(f, ch)
    from cifc_udc.pmf import marginalize

    with pytest.raises(MissingVariable):
        inner_constants(marginalize(joint, [l for l in joint.labels if l != "v2"]))


def test_constants_match_definition_oracle():
    for trial in range(12):
        rng = np.random.default_rng([31, trial])
        ch = random_channel(rng)
        f = _random_factorization(default_cards(ch), rng, 1.0)
        joint = assemble_joint(f, ch)
        c = inner_constants(joint)
        groups = {
            "A": (["v1"], ["u2"], ["u1p", "u1", "u2p"]),
            "C": (["y2"], ["yh2"], ["u1p", "u1", "u2p", "u2", "x3"]),
            "H": (["y1"], ["u2p", "u2", "v12", "x3"], ["u1p", "u1", "v1"]),
            "K": (["y2"], ["u1", "u2", "v2"], ["u1p", "u2p", "x3"]),
            "N2": (["v1", "v12"], ["v2"], ["u1p", "u1", "u2p", "u2"]),
            "P": (["y1"], ["x3"], ["u1p", "u1", "v1", "u2p", "u2", "v12"]),
        }
        for name, (a, b, g) in groups.items():
            ref = oracle_conditional_mi(joint.variables, joint.probs, a, b, g)
            assert getattr(c, name) == pytest.approx(ref, abs=1e-12), name


def test_constant_orderings_random():
    tol = 1e-9
    for trial in range(40):
        rng = np.random.default_rng([77, trial])
        ch = random_channel(rng)
        f = _random_factorization(default_cards(ch), rng, 1.0)
        c = inner_constants(assemble_joint(f, ch))
        assert c.D >= c.E - tol >= c.H - 2 * tol >= c.P - 3 * tol
        assert c.F >= c.I - tol
        assert c.G >= c.J - tol
        assert c.K >= c.L - tol >= c.M - 2 * tol
        assert c.N2 >= c.N1 - tol
        for name in CONSTANT_NAMES:
            assert getattr(c, name) >= -1e-12


# -- admissibility -----------------------------------------------------------

def test_admissible_examples():
    assert admissible(constants_with())  # all zeros: 0 <= 0
    assert not admissible(constants_with(C=0.5, P=0.1, B=0.2))
    assert admissible(constants_with(C=0.3, P=0.1, B=0.2))  # boundary
    ch = clean_channel()
    f = _corner_catalog(default_cards(ch))[7]  # quantize-and-forward corner
    variant_cfg = SamplerConfig(num_samples=0)
    c = inner_constants(assemble_joint(f, ch))
    # forcing the estimate constant always passes the gate
    from cifc_udc.inner import _yhat_constant_variant

    v = _yhat_constant_variant(f)
    cv = inner_constants(assemble_joint(v, ch))
    assert cv.B == pytest.approx(0, abs=1e-12)
    assert cv.C == pytest.approx(0, abs=1e-12)
    assert admissible(cv)


def test_region_rejects_inadmissible():
    with pytest.raises(InadmissibleConstants):
        region_for_distribution(constants_with(C=1.0))


# -- region structure --------------------------------------------------------

def test_zero_constants_silent_point():
    region = region_for_distribution(constants_with())
    assert region.is_point()
    np.testing.assert_allclose(region.vertices, [[0.0, 0.0]], atol=1e-12)


def test_union_contains_undropped_case():
    for trial in range(15):
        rng = np.random.default_rng([911, trial])
        ch = random_channel(rng)
        f = _random_factorization(default_cards(ch), rng, 1.0)
        c = inner_constants(assemble_joint(f, ch))
        if not admissible(c):
            continue
        union = region_for_distribution(c)
        base = polygon_extract(
            project_to_plane(case_system(c), "R1", "R2"), "R1", "R2"
        )
        assert region_contains(union, base, tol=1e-7)


def test_case_projection_matches_vertex_oracle():
    ch = clean_channel()
    catalog = _corner_catalog(default_cards(ch))
    for f in (catalog[1], catalog[5]):
        c = inner_constants(assemble_joint(f, ch))
        case_regions = []
        for pinned, dropped in DROP_CASES:
            system = case_system(c, pinned, dropped)
            projected = project_to_plane(system, "R1", "R2")
            region = polygon_extract(projected, "R1", "R2")
            coefs, bounds = materialized_rows(system)
            pts = oracle_projected_vertices(
                coefs,
                bounds,
                system.eq_coefs,
                system.eq_values,
                system.index_of("R1"),
                system.index_of("R2"),
            )
            if not pts:
                assert region.empty
            else:
                assert regions_close(region, region_from_vertices(pts), tol=1e-7)
            case_regions.append(region)
        union = region_for_distribution(c)
        assert regions_close(union, hull_union(case_regions), tol=1e-9)


def test_origin_always_achievable():
    checked = 0
    for trial in range(80):
        rng = np.random.default_rng([13, trial])
        ch = random_channel(rng)
        f = _random_factorization(default_cards(ch), rng, 1.0)
        c = inner_constants(assemble_joint(f, ch))
        if not admissible(c):
            from cifc_udc.inner import _yhat_constant_variant

            f = _yhat_constant_variant(f)
            c = inner_constants(assemble_joint(f, ch))
        assert admissible(c)
        region = region_for_distribution(c)
        assert region_contains(region, region_from_vertices([(0.0, 0.0)]), tol=1e-9)
        checked += 1
    assert checked == 80


def test_constant_aux_collapse():
    # x3 is the only information path to y1; every auxiliary silent
    def outputs(x1, x2, x3):
        return x3, x2

    ch = ChannelSpec.from_outputs((2, 2, 2, 2, 2), outputs)
    for trial in range(6):
        rng = np.random.default_rng([5, trial])
        px3 = rng.dirichlet([1.0, 1.0])
        cards = default_cards(ch)
        modes = {}
        f = _corner_catalog(cards)[0]
        # replace the x3 factor with the sampled marginal
        targets, given = _signature_pairs(7, cards)
        shape = tuple(c for _, c in given) + (2,)
        table = np.broadcast_to(px3, shape).copy()
        x3_factor = ConditionalFactor(targets, given, table)
        f = InnerFactorization(f.factors[:7] + (x3_factor, f.factors[8]))
        c = inner_constants(assemble_joint(f, ch))
        cap = -(px3[0] * np.log2(px3[0]) + px3[1] * np.log2(px3[1]))
        assert c.D == pytest.approx(cap, abs=1e-12)
        region = region_for_distribution(c)
        segment = region_from_vertices([(0.0, 0.0), (cap, 0.0)])
        assert regions_close(region, segment, tol=1e-9)


# -- sampler -----------------------------------------------------------------

def test_sampler_deterministic_and_capped():
    ch = clean_channel()
    cfg = SamplerConfig(seed=9, num_samples=5)
    a = sample_factorizations(ch, cfg)
    b = sample_factorizations(ch, cfg)
    assert len(a) == len(b)
    for fa, fb in zip(a, b):
        for ta, tb in zip(fa.factors, fb.factors):
            np.testing.assert_array_equal(ta.table, tb.table)
    corners_only = sample_factorizations(ch, SamplerConfig(num_samples=0))
    assert len(corners_only) == 11  # 9 corners + 2 estimate variants
    capped = sample_factorizations(
        ch, SamplerConfig(num_samples=0, corner_cap=3)
    )
    assert len(capped) == 3  # first three corners have constant estimates


def test_sampler_variant_follows_base():
    ch = clean_channel()
    cfg = SamplerConfig(seed=1, num_samples=1, include_deterministic_corners=False)
    out = sample_factorizations(ch, cfg)
    assert len(out) == 2
    base, variant = out
    assert not np.array_equal(base.factors[8].table, variant.factors[8].table)
    const = ConditionalFactor.constant(
        variant.factors[8].targets, variant.factors[8].given
    )
    np.testing.assert_array_equal(variant.factors[8].table, const.table)
    for i in range(8):
        np.testing.assert_array_equal(base.factors[i].table, variant.factors[i].table)


def test_sampler_concentration_spreads_rows():
    ch = clean_channel()
    ent = {}
    for alpha in (0.1, 10.0):
        cfg = SamplerConfig(
            seed=2,
            num_samples=40,
            dirichlet_concentration=alpha,
            include_deterministic_corners=False,
            include_yhat_constant_variant=False,
        )
        rows = []
        for f in sample_factorizations(ch, cfg):
            table = f.factors[6].table.reshape(-1, 2)  # x2 rows
            safe = np.clip(table, 1e-300, None)
            rows.append(float(np.mean(-np.sum(table * np.log2(safe), axis=1))))
        ent[alpha] = float(np.mean(rows))
    assert ent[0.1] < ent[10.0]


def test_seed_changes_stream():
    ch = clean_channel()
    a = sample_factorizations(
        ch, SamplerConfig(seed=1, num_samples=1, include_deterministic_corners=False)
    )
    b = sample_factorizations(
        ch, SamplerConfig(seed=2, num_samples=1, include_deterministic_corners=False)
    )
    assert not np.array_equal(a[0].factors[0].table, b[0].factors[0].table)


# -- region union ------------------------------------------------------------

def test_inner_region_clean_channel_corner():
    ch = clean_channel()
    region, logs = inner_region(ch, SamplerConfig(num_samples=0))
    assert region_contains(
        region, region_from_vertices([(1 - 1e-6, 1 - 1e-6)]), tol=1e-9
    )
    assert len(logs) == 11
    assert all(line.startswith("sample=") for line in logs)
    # monotone in the sample budget
    bigger, _ = inner_region(ch, SamplerConfig(seed=4, num_samples=6))
    assert region_contains(bigger, region, tol=1e-7)


def test_inner_region_dead_channel():
    dead = ChannelSpec.from_outputs((2, 2, 2, 1, 1), lambda x1, x2, x3: (0, 0))
    region, logs = inner_region(dead, SamplerConfig(num_samples=2, seed=8))
    assert region.is_point()
    np.testing.assert_allclose(region.vertices, [[0.0, 0.0]], atol=1e-12)


def test_inner_region_threads_identical():
    ch = clean_channel()
    cfg = SamplerConfig(seed=21, num_samples=6)
    r1, logs1 = inner_region(ch, cfg, threads=1)
    r4, logs4 = inner_region(ch, cfg, threads=4)
    assert logs1 == logs4
    np.testing.assert_array_equal(r1.vertices, r4.vertices)
    np.testing.assert_array_equal(r1.halfplanes, r4.halfplanes)


def test_compress_forward_ablation():
    ch = clean_channel()
    f = _corner_catalog(default_cards(ch))[7]
    from cifc_udc.inner import _yhat_constant_variant

    v = _yhat_constant_variant(f)
    cv = inner_constants(assemble_joint(v, ch))
    ablated = region_for_distribution(cv)
    c = inner_constants(assemble_joint(f, ch))
    regions = [ablated]
    if admissible(c):
        regions.append(region_for_distribution(c))
    assert region_contains(hull_union(regions), ablated, tol=1e-9)


def test_cooperation_monotonicity():
    def outputs(x1, x2, x3):
        return x1 ^ x3, x2

    ch = ChannelSpec.from_outputs((2, 2, 2, 2, 2), outputs)
    from cifc_udc.channel import pin_x3

    pinned = pin_x3(ch, 0)
    cfg = SamplerConfig(num_samples=0)
    full, _ = inner_region(ch, cfg)
    small, _ = inner_region(pinned, cfg)
    assert region_contains(full, small, tol=1e-7)
