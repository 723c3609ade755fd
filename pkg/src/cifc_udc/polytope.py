"""Linear inequality systems over named rate variables and 2D rate polygons.

A :class:`LinearSystem` holds rows ``a . x <= b`` and ``a . x = v`` over an
ordered tuple of variable labels, plus a set of variables pinned to be
nonnegative.  Variables are removed one at a time with Fourier-Motzkin
elimination until only the two plotted rates remain, at which point
:func:`polygon_extract` turns the survivor into a :class:`Region2D`: an
irredundant list of halfplanes together with the counter-clockwise vertex
list of the polygon they cut out of the nonnegative quadrant.

All arithmetic is floating point.  Rows are normalized to max-abs
coefficient one, coefficients below ``SNAP`` are snapped to zero, and
duplicate or pairwise-dominated rows are dropped after every elimination
step to keep the quadratic growth of elimination in check.
"""

from __future__ import annotations

import dataclasses
from collections.abc import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    EmptyList,
    EmptyRegion,
    LeftoverVariables,
    NumericsError,
    ShapeMismatch,
    UnknownVariable,
    ZeroDirection,
)

SNAP = 1e-12        # coefficients smaller than this are treated as zero
ROW_TOL = 1e-9      # row-comparison and trivial-row tolerance
VERTEX_TOL = 1e-7   # vertices must satisfy halfplanes this tightly
BOX_LIMIT = 1e4     # working box for clipping; far above any desk-scale rate
UNBOUNDED_AT = 1e3  # a vertex out here means the system had no cap rows


def _normalize_rows(coefs: np.ndarray, bounds: np.ndarray):
    """Snap, scale to max-abs 1, split off trivial rows.

    Returns (kept coefs, kept bounds, infeasible flag).
    """
    if coefs.size == 0:
        return coefs.reshape(0, coefs.shape[1] if coefs.ndim == 2 else 0), bounds[:0], False
    coefs = np.where(np.abs(coefs) < SNAP, 0.0, coefs)
    scale = np.max(np.abs(coefs), axis=1)
    nontrivial = scale > 0.0
    infeasible = bool(np.any(bounds[~nontrivial] < -ROW_TOL))
    coefs = coefs[nontrivial]
    bounds = bounds[nontrivial]
    scale = scale[nontrivial]
    coefs = coefs / scale[:, None]
    bounds = bounds / scale
    return coefs, bounds, infeasible


def _prune_rows(coefs: np.ndarray, bounds: np.ndarray):
    """Drop duplicate rows and rows dominated by an equal-coefficient row.

    Rows are grouped by their coefficient vectors rounded to the row
    tolerance; within a group only the smallest bound survives.
    """
    idx = _prune_indices(coefs, bounds)
    return coefs[idx], bounds[idx]


def _prune_indices(coefs: np.ndarray, bounds: np.ndarray) -> np.ndarray:
    """Indices of the surviving rows after duplicate/dominance pruning."""
    m = coefs.shape[0]
    if m <= 1:
        return np.arange(m)
    keys = np.round(coefs / ROW_TOL).astype(np.int64)
    # sort by coefficient key, ties by bound: first of each group is tightest
    order = np.lexsort((bounds,) + tuple(keys[:, c] for c in range(keys.shape[1] - 1, -1, -1)))
    ks = keys[order]
    first = np.ones(m, dtype=bool)
    first[1:] = np.any(ks[1:] != ks[:-1], axis=1)
    return np.sort(order[first])


@dataclasses.dataclass(frozen=True, eq=False)
class LinearSystem:
    """Rows a.x <= b and a.x = v over named variables.

    ``nonnegative`` lists variables additionally constrained >= 0; the
    constraint is materialized as a row only when the variable is
    eliminated or plotted.  ``feasible`` is cleared when a contradictory
    constant row (0 <= b, b < 0) is detected; an infeasible system keeps
    its variables but carries no rows.
    """

    variables: tuple[str, ...]
    ineq_coefs: np.ndarray
    ineq_bounds: np.ndarray
    eq_coefs: np.ndarray
    eq_values: np.ndarray
    nonnegative: frozenset
    feasible: bool = True

    def __post_init__(self):
        variables = tuple(str(v) for v in self.variables)
        if len(set(variables)) != len(variables):
            raise ShapeMismatch(f"duplicate variables in {variables}")
        n = len(variables)
        ic = np.asarray(self.ineq_coefs, dtype=np.float64).reshape(-1, n)
        ib = np.asarray(self.ineq_bounds, dtype=np.float64).reshape(-1)
        ec = np.asarray(self.eq_coefs, dtype=np.float64).reshape(-1, n)
        ev = np.asarray(self.eq_values, dtype=np.float64).reshape(-1)
        if ic.shape[0] != ib.shape[0] or ec.shape[0] != ev.shape[0]:
            raise ShapeMismatch("coefficient rows and bounds disagree in count")
        bad = frozenset(self.nonnegative) - set(variables)
        if bad:
            raise UnknownVariable(f"nonnegative set mentions unknown {sorted(bad)}")

        ic, ib, bad_row = _normalize_rows(ic, ib)
        feasible = bool(self.feasible) and not bad_row
        # an equality row 0 = v with v != 0 is also a contradiction
        ec = np.where(np.abs(ec) < SNAP, 0.0, ec)
        escale = np.max(np.abs(ec), axis=1) if ec.size else np.zeros(0)
        zero_eq = escale == 0.0
        if np.any(np.abs(ev[zero_eq]) > ROW_TOL):
            feasible = False
        ec, ev = ec[~zero_eq], ev[~zero_eq]
        if ec.shape[0]:
            s = np.max(np.abs(ec), axis=1)
            ec, ev = ec / s[:, None], ev / s
        ic, ib = _prune_rows(ic, ib)
        if not feasible:
            ic, ib = ic[:0], ib[:0]
            ec, ev = ec[:0], ev[:0]
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "ineq_coefs", ic)
        object.__setattr__(self, "ineq_bounds", ib)
        object.__setattr__(self, "eq_coefs", ec)
        object.__setattr__(self, "eq_values", ev)
        object.__setattr__(self, "nonnegative", frozenset(self.nonnegative))
        object.__setattr__(self, "feasible", feasible)

    @classmethod
    def from_rows(
        cls,
        variables: Sequence[str],
        inequalities: Iterable[tuple[Mapping[str, float], float]] = (),
        equalities: Iterable[tuple[Mapping[str, float], float]] = (),
        nonnegative: Iterable[str] = (),
    ) -> "LinearSystem":
        """Build from (coefficient dict, bound) pairs keyed by label."""
        variables = tuple(variables)
        index = {v: i for i, v in enumerate(variables)}

        def rows(pairs):
            coefs, vals = [], []
            for mapping, bound in pairs:
                row = np.zeros(len(variables))
                for label, coef in mapping.items():
                    if label not in index:
                        raise UnknownVariable(f"row mentions unknown {label!r}")
                    row[index[label]] = coef
                coefs.append(row)
                vals.append(float(bound))
            if not coefs:
                return np.zeros((0, len(variables))), np.zeros(0)
            return np.array(coefs), np.array(vals)

        ic, ib = rows(inequalities)
        ec, ev = rows(equalities)
        return cls(variables, ic, ib, ec, ev, frozenset(nonnegative))

    def index_of(self, var: str) -> int:
        try:
            return self.variables.index(var)
        except ValueError:
            raise UnknownVariable(f"no variable {var!r} in {self.variables}") from None


def _drop_column(system: LinearSystem, var: str, ic, ib, ec, ev) -> LinearSystem:
    k = system.index_of(var)
    variables = system.variables[:k] + system.variables[k + 1 :]
    return LinearSystem(
        variables,
        np.delete(ic, k, axis=1),
        ib,
        np.delete(ec, k, axis=1),
        ev,
        system.nonnegative - {var},
        system.feasible,
    )


def fm_eliminate(system: LinearSystem, var: str) -> LinearSystem:
    """Project the feasible set onto the remaining variables.

    Equalities involving ``var`` are substituted out first; otherwise the
    standard Fourier-Motzkin combination of upper and lower bounds runs.
    A variable in the ``nonnegative`` set contributes its >= 0 row before
    elimination.
    """
    k = system.index_of(var)
    if not system.feasible:
        return _drop_column(
            system, var, system.ineq_coefs, system.ineq_bounds,
            system.eq_coefs, system.eq_values,
        )

    n = len(system.variables)
    ic, ib = system.ineq_coefs.copy(), system.ineq_bounds.copy()
    ec, ev = system.eq_coefs, system.eq_values
    if var in system.nonnegative:
        extra = np.zeros((1, n))
        extra[0, k] = -1.0
        ic = np.vstack([ic, extra])
        ib = np.concatenate([ib, [0.0]])

    eq_hits = np.abs(ec[:, k]) > SNAP if ec.size else np.zeros(0, dtype=bool)
    if eq_hits.any():
        # var = val - rest.x, taken from the best-conditioned equality
        pick = int(np.argmax(np.where(eq_hits, np.abs(ec[:, k]), 0.0)))
        c = ec[pick, k]
        rest = ec[pick] / c
        val = ev[pick] / c
        rest[k] = 0.0
        if ic.size:
            col = ic[:, k].copy()
            ic = ic - np.outer(col, rest)
            ib = ib - col * val
        others = np.delete(np.arange(ec.shape[0]), pick)
        oc, ov = ec[others].copy(), ev[others].copy()
        if oc.size:
            ocol = oc[:, k].copy()
            oc = oc - np.outer(ocol, rest)
            ov = ov - ocol * val
        return _drop_column(system, var, ic, ib, oc, ov)

    col = ic[:, k] if ic.size else np.zeros(0)
    pos = col > SNAP
    neg = col < -SNAP
    zero = ~pos & ~neg
    new_coefs = [ic[zero]]
    new_bounds = [ib[zero]]
    if pos.any() and neg.any():
        pc, pb = ic[pos], ib[pos]
        nc, nb = ic[neg], ib[neg]
        # pair every upper bound with every lower bound; the var cancels
        a_p = pc[:, k]
        a_n = -nc[:, k]
        combo = a_n[None, :, None] * pc[:, None, :] + a_p[:, None, None] * nc[None, :, :]
        combo_b = a_n[None, :] * pb[:, None] + a_p[:, None] * nb[None, :]
        new_coefs.append(combo.reshape(-1, n))
        new_bounds.append(combo_b.reshape(-1))
    parts = [c for c in new_coefs if c.size]
    ic2 = np.vstack(parts) if parts else np.zeros((0, n))
    bparts = [b for b in new_bounds if b.size]
    ib2 = np.concatenate(bparts) if bparts else np.zeros(0)
    return _drop_column(system, var, ic2, ib2, ec, ev)


def project_to_plane(
    system: LinearSystem, r1: str, r2: str, order: Sequence[str] | None = None
) -> LinearSystem:
    """Eliminate every variable except ``r1`` and ``r2``.

    Equalities are substituted out first, then Fourier-Motzkin runs with
    ancestor tracking: a combined row built from more original rows than
    eliminated variables plus one is provably redundant and is dropped
    before it can feed the quadratic blowup.  ``order`` pins the
    elimination sequence (mostly for order-independence tests); variables
    already removed by equality substitution are skipped.
    """
    system.index_of(r1)
    system.index_of(r2)
    current = system
    pinned = None
    if order is not None:
        expect = set(current.variables) - {r1, r2}
        if set(order) != expect:
            raise UnknownVariable(
                f"order {order} does not cover exactly {sorted(expect)}"
            )
        pinned = list(order)

    # substitution phase: every equality touching a doomed variable
    changed = True
    while changed:
        changed = False
        for var in current.variables:
            if var in (r1, r2) or not current.eq_coefs.size:
                continue
            j = current.index_of(var)
            if np.any(np.abs(current.eq_coefs[:, j]) > SNAP):
                current = fm_eliminate(current, var)
                changed = True
                break
    doomed = [v for v in current.variables if v not in (r1, r2)]
    if not doomed or not current.feasible:
        for var in doomed:
            current = fm_eliminate(current, var)
        return current

    n = len(current.variables)
    ic = current.ineq_coefs.copy()
    ib = current.ineq_bounds.copy()
    extra = []
    for var in doomed:
        if var in current.nonnegative:
            row = np.zeros(n)
            row[current.index_of(var)] = -1.0
            extra.append(row)
    if extra:
        ic = np.vstack([ic, np.array(extra)]) if ic.size else np.array(extra)
        ib = np.concatenate([ib, np.zeros(len(extra))])
    ancestors = [frozenset({i}) for i in range(ic.shape[0])]
    cols = {v: current.index_of(v) for v in current.variables}
    remaining = list(doomed)
    feasible = True
    steps = 0
    while remaining and feasible:
        if pinned is not None:
            while pinned and pinned[0] not in remaining:
                pinned.pop(0)
            var = pinned.pop(0)
        else:
            # cheapest variable first, as in plain elimination
            best, best_cost = None, None
            for candidate in remaining:
                col = ic[:, cols[candidate]] if ic.size else np.zeros(0)
                n_pos = int(np.sum(col > SNAP))
                n_neg = int(np.sum(col < -SNAP))
                cost = n_pos * n_neg - (n_pos + n_neg)
                if best_cost is None or cost < best_cost:
                    best, best_cost = candidate, cost
            var = best
        remaining.remove(var)
        steps += 1
        k = cols[var]
        col = ic[:, k] if ic.size else np.zeros(0)
        pos = np.flatnonzero(col > SNAP)
        neg = np.flatnonzero(col < -SNAP)
        zero = np.flatnonzero(~(col > SNAP) & ~(col < -SNAP))
        rows = [ic[zero]]
        bnds = [ib[zero]]
        anc = [ancestors[i] for i in zero]
        limit = steps + 1
        if pos.size and neg.size:
            new_rows, new_bnds = [], []
            for i in pos:
                a_p = ic[i, k]
                anc_i = ancestors[i]
                for j in neg:
                    union = anc_i | ancestors[j]
                    if len(union) > limit:
                        continue  # redundant by the acceleration bound
                    a_n = -ic[j, k]
                    new_rows.append(a_n * ic[i] + a_p * ic[j])
                    new_bnds.append(a_n * ib[i] + a_p * ib[j])
                    anc.append(union)
            if new_rows:
                rows.append(np.array(new_rows))
                bnds.append(np.array(new_bnds))
        parts = [r for r in rows if r.size]
        ic = np.vstack(parts) if parts else np.zeros((0, n))
        ib = np.concatenate([b for b in bnds if b.size]) if parts else np.zeros(0)
        ic[:, k] = 0.0
        # normalize, drop trivial rows, sniff contradictions, dedupe
        if ic.shape[0]:
            ic = np.where(np.abs(ic) < SNAP, 0.0, ic)
            scale = np.max(np.abs(ic), axis=1)
            nontrivial = scale > 0.0
            if np.any(ib[~nontrivial] < -ROW_TOL):
                feasible = False
                break
            ic, ib = ic[nontrivial] / scale[nontrivial, None], ib[nontrivial] / scale[nontrivial]
            anc = [a for a, keep_it in zip(anc, nontrivial) if keep_it]
            idx = _prune_indices(ic, ib)
            ic, ib = ic[idx], ib[idx]
            anc = [anc[i] for i in idx]
        ancestors = anc

    keep_idx = [cols[r1], cols[r2]]
    eqs = current.eq_coefs[:, keep_idx] if current.eq_coefs.size else np.zeros((0, 2))
    return LinearSystem(
        (r1, r2),
        ic[:, keep_idx] if ic.size else np.zeros((0, 2)),
        ib,
        eqs,
        current.eq_values,
        current.nonnegative & {r1, r2},
        feasible,
    )


# ---------------------------------------------------------------- 2D geometry


def _clip(points: list, hp: tuple) -> list:
    """Sutherland-Hodgman: keep the part of a convex polygon with a.x <= c."""
    a, b, c = hp
    out = []
    n = len(points)
    for i in range(n):
        cur = points[i]
        prev = points[i - 1]
        d_cur = a * cur[0] + b * cur[1] - c
        d_prev = a * prev[0] + b * prev[1] - c
        if d_cur <= SNAP:
            if d_prev > SNAP:
                t = d_prev / (d_prev - d_cur)
                out.append(
                    (prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1]))
                )
            out.append(cur)
        elif d_prev <= SNAP:
            t = d_prev / (d_prev - d_cur)
            out.append(
                (prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1]))
            )
    return out


def _clip_all(halfplanes: Sequence[tuple]) -> list:
    poly = [(0.0, 0.0), (BOX_LIMIT, 0.0), (BOX_LIMIT, BOX_LIMIT), (0.0, BOX_LIMIT)]
    for hp in halfplanes:
        poly = _clip(poly, hp)
        if not poly:
            return []
    return poly


def _dedupe_points(points: Sequence, tol: float = 1e-9) -> list:
    out = []
    for p in points:
        if all(abs(p[0] - q[0]) > tol or abs(p[1] - q[1]) > tol for q in out):
            out.append((float(p[0]), float(p[1])))
    return out


HULL_QUANT = 1e-10  # hull coordinates are snapped to this grid


def convex_hull(points: Sequence) -> list:
    """Monotone-chain hull, counter-clockwise; handles 1- and 2-point hulls.

    Coordinates are snapped to a fine grid and the orientation tests run
    in exact integer arithmetic, so clusters of points that differ only
    by floating-point jitter cannot confuse the chain.
    """
    snapped = sorted(
        {(round(float(x) / HULL_QUANT), round(float(y) / HULL_QUANT)) for x, y in points}
    )
    if len(snapped) <= 2:
        return [(x * HULL_QUANT, y * HULL_QUANT) for x, y in snapped]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in snapped:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(snapped):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    return [(x * HULL_QUANT, y * HULL_QUANT) for x, y in hull]


NONNEG_HALFPLANES = ((-1.0, 0.0, 0.0), (0.0, -1.0, 0.0))


def _normalize_halfplane(hp: tuple) -> tuple | None:
    a, b, c = (float(v) for v in hp)
    a = 0.0 if abs(a) < SNAP else a
    b = 0.0 if abs(b) < SNAP else b
    s = max(abs(a), abs(b))
    if s == 0.0:
        return None  # trivial or contradictory, caller decides
    return (a / s, b / s, c / s)


@dataclasses.dataclass(frozen=True, eq=False)
class Region2D:
    """A bounded convex rate region in the nonnegative quadrant.

    ``halfplanes`` are (alpha, beta, gamma) rows meaning
    alpha*R1 + beta*R2 <= gamma, in bits, normalized to max-abs
    coefficient one, and always including R1 >= 0 and R2 >= 0.
    ``vertices`` walk the polygon counter-clockwise.  ``empty`` regions
    carry no vertices.
    """

    halfplanes: tuple
    vertices: np.ndarray
    empty: bool = False

    def __post_init__(self):
        planes = []
        for hp in self.halfplanes:
            norm = _normalize_halfplane(hp)
            if norm is not None:
                planes.append(norm)
        for hp in NONNEG_HALFPLANES:
            if not any(
                abs(hp[0] - p[0]) <= ROW_TOL
                and abs(hp[1] - p[1]) <= ROW_TOL
                and abs(hp[2] - p[2]) <= ROW_TOL
                for p in planes
            ):
                planes.append(hp)
        verts = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 2)
        if self.empty and verts.shape[0]:
            raise ShapeMismatch("empty region cannot carry vertices")
        if not self.empty:
            if verts.shape[0] == 0:
                raise ShapeMismatch("nonempty region needs at least one vertex")
            worst = max(
                float(a * v[0] + b * v[1] - c)
                for (a, b, c) in planes
                for v in verts
            )
            if worst > VERTEX_TOL:
                raise NumericsError(
                    f"vertex violates a halfplane by {worst!r}"
                )
        object.__setattr__(self, "halfplanes", tuple(planes))
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "empty", bool(self.empty))

    def is_point(self) -> bool:
        return not self.empty and self.vertices.shape[0] == 1


def _edges_to_halfplanes(hull: list) -> list:
    """Outward halfplanes of a CCW hull; degenerate hulls get box planes."""
    if len(hull) == 1:
        (x, y) = hull[0]
        return [(1.0, 0.0, x), (-1.0, 0.0, -x), (0.0, 1.0, y), (0.0, -1.0, -y)]
    if len(hull) == 2:
        (x1, y1), (x2, y2) = hull
        dx, dy = x2 - x1, y2 - y1
        planes = []
        for a, b in ((dy, -dx), (-dy, dx)):
            norm = _normalize_halfplane((a, b, a * x1 + b * y1))
            if norm is not None:
                planes.append(norm)
        for a, b in ((dx, dy), (-dx, -dy)):
            ref = max(a * x1 + b * y1, a * x2 + b * y2)
            norm = _normalize_halfplane((a, b, ref))
            if norm is not None:
                planes.append(norm)
        return planes
    planes = []
    m = len(hull)
    for i in range(m):
        x1, y1 = hull[i]
        x2, y2 = hull[(i + 1) % m]
        a, b = y2 - y1, -(x2 - x1)  # outward for CCW order
        norm = _normalize_halfplane((a, b, a * x1 + b * y1))
        if norm is not None:
            planes.append(norm)
    return planes


def region_from_vertices(points: Sequence) -> Region2D:
    """Convex hull of the given points as a Region2D."""
    pts = _dedupe_points(points)
    if not pts:
        return Region2D((), np.zeros((0, 2)), empty=True)
    hull = convex_hull(pts)
    return Region2D(tuple(_edges_to_halfplanes(hull)), np.array(hull))


def _intersect_lines(p: tuple, q: tuple):
    a1, b1, c1 = p
    a2, b2, c2 = q
    det = a1 * b2 - a2 * b1
    if abs(det) < SNAP:
        return None
    return ((c1 * b2 - c2 * b1) / det, (a1 * c2 - a2 * c1) / det)


def polygon_extract(system: LinearSystem, r1: str, r2: str) -> Region2D:
    """Turn a two-variable system into an irredundant Region2D.

    The system must contain exactly the plotted variables; project first.
    The region is intersected with the nonnegative quadrant, matching the
    rate-region convention.
    """
    if set(system.variables) != {r1, r2}:
        raise LeftoverVariables(
            f"system still has variables {system.variables}, expected ({r1}, {r2})"
        )
    if not system.feasible:
        return Region2D((), np.zeros((0, 2)), empty=True)
    i1, i2 = system.index_of(r1), system.index_of(r2)

    planes = list(NONNEG_HALFPLANES)
    for row, bound in zip(system.ineq_coefs, system.ineq_bounds):
        norm = _normalize_halfplane((row[i1], row[i2], bound))
        if norm is not None:
            planes.append(norm)
    # two-variable equalities become opposing halfplane pairs
    for row, value in zip(system.eq_coefs, system.eq_values):
        for sign in (1.0, -1.0):
            norm = _normalize_halfplane(
                (sign * row[i1], sign * row[i2], sign * value)
            )
            if norm is not None:
                planes.append(norm)

    rough = _clip_all(planes)
    if not rough:
        return Region2D((), np.zeros((0, 2)), empty=True)
    if max(max(abs(x), abs(y)) for x, y in rough) > UNBOUNDED_AT:
        raise NumericsError(
            "projected system is unbounded; add cap rows before extracting"
        )

    # planes with strict slack over the whole polygon can never bind
    arr = np.array(planes)
    pts = np.array(rough)
    slack = arr[:, 0][:, None] * pts[None, :, 0] + arr[:, 1][:, None] * pts[None, :, 1] - arr[:, 2][:, None]
    near_active = np.max(slack, axis=1) > -1e-6
    planes = [planes[i] for i in np.flatnonzero(near_active)]

    # greedy drop-one pruning among the near-active survivors
    kept = list(planes)
    i = 0
    while i < len(kept):
        trial = kept[:i] + kept[i + 1 :]
        poly = _clip_all(trial)
        hp = kept[i]
        if poly and max(hp[0] * x + hp[1] * y - hp[2] for x, y in poly) <= ROW_TOL:
            kept = trial
        else:
            i += 1
    # nonnegativity rows are part of the region contract even when redundant
    for hp in NONNEG_HALFPLANES:
        if hp not in kept:
            kept.append(hp)

    # exact vertices: pairwise intersections of surviving boundary lines
    candidates = []
    for i in range(len(kept)):
        for j in range(i + 1, len(kept)):
            pt = _intersect_lines(kept[i], kept[j])
            if pt is None:
                continue
            if all(a * pt[0] + b * pt[1] - c <= VERTEX_TOL for a, b, c in kept):
                candidates.append(pt)
    verts = _dedupe_points(candidates, tol=1e-7)
    if not verts:
        return Region2D((), np.zeros((0, 2)), empty=True)
    hull = convex_hull(verts)
    return Region2D(tuple(kept), np.array(hull))


def region_contains(outer: Region2D, inner: Region2D, tol: float = 1e-9) -> bool:
    """True iff every inner vertex satisfies every outer halfplane within tol."""
    if inner.empty:
        return True
    if outer.empty:
        return False
    for a, b, c in outer.halfplanes:
        slack = a * inner.vertices[:, 0] + b * inner.vertices[:, 1] - c
        if float(np.max(slack)) > tol:
            return False
    return True


def regions_close(first: Region2D, second: Region2D, tol: float = 1e-7) -> bool:
    """Mutual containment within tol."""
    return region_contains(first, second, tol) and region_contains(second, first, tol)


def hull_union(regions: Sequence[Region2D]) -> Region2D:
    """Convex hull of the union; justified by time sharing between points."""
    if not regions:
        raise EmptyList("hull_union needs at least one region")
    points = []
    for region in regions:
        if not region.empty:
            points.extend((float(x), float(y)) for x, y in region.vertices)
    if not points:
        return Region2D((), np.zeros((0, 2)), empty=True)
    return region_from_vertices(points)


def support(region: Region2D, direction: Sequence[float]) -> float:
    """Largest value of direction . (R1,R2) over the region."""
    if region.empty:
        raise EmptyRegion("support of an empty region")
    d1, d2 = float(direction[0]), float(direction[1])
    if abs(d1) < SNAP and abs(d2) < SNAP:
        raise ZeroDirection("support direction is zero")
    return float(np.max(d1 * region.vertices[:, 0] + d2 * region.vertices[:, 1]))


# ------------------------------------------------------------- serialization


def materialized_rows(system: LinearSystem) -> tuple[np.ndarray, np.ndarray]:
    """All inequality rows with the nonnegativity set written out explicitly.

    Used when handing a system to code that has no notion of the
    ``nonnegative`` shorthand (the brute-force oracle, mainly).
    """
    n = len(system.variables)
    rows = [system.ineq_coefs] if system.ineq_coefs.size else []
    bounds = [system.ineq_bounds] if system.ineq_bounds.size else []
    for var in sorted(system.nonnegative):
        row = np.zeros((1, n))
        row[0, system.index_of(var)] = -1.0
        rows.append(row)
        bounds.append(np.zeros(1))
    if not rows:
        return np.zeros((0, n)), np.zeros(0)
    return np.vstack(rows), np.concatenate(bounds)


def region_to_dict(region: Region2D) -> dict:
    return {
        "halfplanes": [[float(a), float(b), float(c)] for a, b, c in region.halfplanes],
        "vertices": [[float(x), float(y)] for x, y in region.vertices],
        "empty": bool(region.empty),
    }


def region_from_dict(doc: Mapping) -> Region2D:
    try:
        planes = tuple(tuple(float(v) for v in row) for row in doc["halfplanes"])
        verts = np.asarray(doc["vertices"], dtype=np.float64).reshape(-1, 2)
        empty = bool(doc["empty"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ShapeMismatch(f"malformed region document: {exc}") from exc
    if any(len(row) != 3 for row in planes):
        raise ShapeMismatch("halfplane rows must have three entries")
    return Region2D(planes, verts, empty=empty)
