"""Exact polyhedral computation of degrees-of-freedom regions.

Everything in this module runs over exact rationals: Fourier-Motzkin
projection, certified redundancy removal, vertex enumeration, and the
closed-form inner/outer region constructions for the two-user broadcast
setting. Regions live in (d0, d1, d2) coordinates, where d0 is the
common-message slope and d1, d2 the private-message slopes; they are
parameterized by the subchannel split ``sizes = (n1, nc, n2)`` - the
numbers of subchannels seen only by user 1, by both users, and only by
user 2.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from . import _lp
from .errors import ValidationError

#: Dimension cap for vertex enumeration; regions here are 3-D.
VERTEX_DIM_LIMIT = 4


def _rat(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    if hasattr(value, "numerator") and hasattr(value, "denominator"):
        return Fraction(int(value.numerator), int(value.denominator))
    raise ValidationError(f"cannot interpret {value!r} as an exact rational")


@dataclass(frozen=True)
class DofTriple:
    """A (d0, d1, d2) slope triple with exact rational coordinates."""

    d0: Fraction
    d1: Fraction
    d2: Fraction

    @classmethod
    def from_values(cls, d0, d1, d2) -> "DofTriple":
        return cls(_rat(d0), _rat(d1), _rat(d2))

    def as_floats(self) -> tuple[float, float, float]:
        return (float(self.d0), float(self.d1), float(self.d2))

    def as_tuple(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.d0, self.d1, self.d2)


def _canonical_row(coeffs, rhs):
    """Scale a row by a positive rational so the coefficients are coprime
    integers (sign preserved; scaling never flips an inequality)."""
    coeffs = tuple(_rat(c) for c in coeffs)
    rhs = _rat(rhs)
    denom_lcm = 1
    for value in coeffs + (rhs,):
        d = value.denominator
        g = _gcd(denom_lcm, d)
        denom_lcm = denom_lcm // g * d
    coeffs = tuple(c * denom_lcm for c in coeffs)
    rhs = rhs * denom_lcm
    g = 0
    for c in coeffs:
        g = _gcd(g, abs(c.numerator))
    if g > 1:
        coeffs = tuple(c / g for c in coeffs)
        rhs = rhs / g
    return coeffs, rhs


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


@dataclass(frozen=True)
class Polytope:
    """H-representation ``coeffs . x <= rhs`` with exact rational rows."""

    dim: int
    inequalities: tuple[tuple[tuple[Fraction, ...], Fraction], ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if self.dim < 0:
            raise ValidationError("polytope dimension must be >= 0")
        if len(self.labels) != self.dim:
            raise ValidationError("label count must equal the dimension")
        for coeffs, _ in self.inequalities:
            if len(coeffs) != self.dim:
                raise ValidationError("coefficient vector length must equal the dimension")

    def axis(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValidationError(f"no coordinate labelled {label!r}") from None

    def to_dict(self, include_vertices: bool = False) -> dict:
        out = {
            "dim": self.dim,
            "labels": list(self.labels),
            "inequalities": [
                {"coeffs": [str(c) for c in coeffs], "rhs": str(rhs)}
                for coeffs, rhs in self.inequalities
            ],
        }
        if include_vertices:
            out["vertices"] = sorted(
                [str(c) for c in v] for v in vertices(self)
            )
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Polytope":
        try:
            dim = int(data["dim"])
            labels = tuple(str(x) for x in data["labels"])
            rows = [
                (tuple(_rat(c) for c in item["coeffs"]), _rat(item["rhs"]))
                for item in data["inequalities"]
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed polytope object: {exc}") from exc
        return make_polytope(rows, labels, dim=dim)


def make_polytope(rows, labels, dim=None) -> Polytope:
    """Build a polytope from ``(coeffs, rhs)`` pairs, canonicalizing and
    deduplicating rows (identical directions keep the tightest bound)."""
    labels = tuple(labels)
    if dim is None:
        dim = len(labels)
    zero = Fraction(0)
    seen: dict[tuple, Fraction] = {}
    infeasible = False
    for coeffs, rhs in rows:
        coeffs, rhs = _canonical_row(coeffs, rhs)
        if all(c == 0 for c in coeffs):
            if rhs < zero:
                infeasible = True
            continue
        if coeffs in seen:
            if rhs < seen[coeffs]:
                seen[coeffs] = rhs
        else:
            seen[coeffs] = rhs
    if infeasible:
        return _empty_polytope(dim, labels)
    return Polytope(dim, tuple(seen.items()), labels)


def _empty_polytope(dim, labels) -> Polytope:
    row = ((tuple([Fraction(0)] * dim), Fraction(-1)),)
    return Polytope(dim, row, labels)


def is_empty(p: Polytope) -> bool:
    """Exact feasibility test for the polytope's inequality system."""
    for coeffs, rhs in p.inequalities:
        if all(c == 0 for c in coeffs) and rhs < 0:
            return True
    rows = [coeffs for coeffs, _ in p.inequalities]
    rhs = [b for _, b in p.inequalities]
    return not _lp.halfspaces_feasible(rows, rhs)


def fm_eliminate(p: Polytope, var) -> Polytope:
    """Project out one coordinate by Fourier-Motzkin elimination.

    Every (positive, negative) coefficient pair on ``var`` is combined with
    positive multipliers to cancel the coordinate, zero-coefficient rows are
    kept, and the result is pruned down to an irredundant description.
    ``var`` may be a coordinate index or a label.
    """
    idx = p.axis(var) if isinstance(var, str) else int(var)
    if not 0 <= idx < p.dim:
        raise ValidationError(f"coordinate index {idx} out of range for dim {p.dim}")
    positive, negative, zero = [], [], []
    for coeffs, rhs in p.inequalities:
        c = coeffs[idx]
        if c > 0:
            positive.append((coeffs, rhs))
        elif c < 0:
            negative.append((coeffs, rhs))
        else:
            zero.append((coeffs, rhs))

    def drop(coeffs):
        return coeffs[:idx] + coeffs[idx + 1 :]

    rows = [(drop(coeffs), rhs) for coeffs, rhs in zero]
    for (cp, bp), (cn, bn) in itertools.product(positive, negative):
        wp = -cn[idx]
        wn = cp[idx]
        combined = tuple(wp * a + wn * b for a, b in zip(cp, cn))
        rows.append((drop(combined), wp * bp + wn * bn))
    labels = p.labels[:idx] + p.labels[idx + 1 :]
    return remove_redundant(make_polytope(rows, labels, dim=p.dim - 1))


def remove_redundant(p: Polytope) -> Polytope:
    """Minimal description of the same feasible set.

    Each removed inequality is certified implied: its exact supremum over
    the remaining system (an exact rational LP) does not exceed its bound.
    An infeasible system collapses to the canonical empty description.
    """
    p = make_polytope(p.inequalities, p.labels, dim=p.dim)  # dedupe/domination
    if is_empty(p):
        return _empty_polytope(p.dim, p.labels)
    kept = list(p.inequalities)
    i = 0
    while i < len(kept):
        coeffs, rhs = kept[i]
        others = kept[:i] + kept[i + 1 :]
        status, value = _lp.max_over_halfspaces(
            coeffs,
            [c for c, _ in others],
            [b for _, b in others],
            assume_feasible=True,
        )
        if status == _lp.OPTIMAL and value <= rhs:
            kept.pop(i)
        else:
            i += 1
    return Polytope(p.dim, tuple(kept), p.labels)


def _solve_square(rows, rhs):
    """Solve an exact square linear system; None when singular."""
    n = len(rows)
    aug = [list(rows[i]) + [rhs[i]] for i in range(n)]
    for col in range(n):
        pivot_row = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot_row is None:
            return None
        aug[col], aug[pivot_row] = aug[pivot_row], aug[col]
        piv = aug[col][col]
        aug[col] = [v / piv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return tuple(aug[i][n] for i in range(n))


def vertices(p: Polytope) -> frozenset:
    """All basic feasible solutions, exactly.

    Every ``dim``-subset of inequalities is solved as an equality system;
    solutions satisfying all constraints are vertices. Guarded to low
    dimension - the regions computed here are 3-D.
    """
    if p.dim > VERTEX_DIM_LIMIT:
        raise ValidationError(
            f"vertex enumeration is limited to dimension {VERTEX_DIM_LIMIT}, got {p.dim}"
        )
    if is_empty(p):
        return frozenset()
    if p.dim == 0:
        return frozenset({()})
    found = set()
    rows = p.inequalities
    for subset in itertools.combinations(rows, p.dim):
        point = _solve_square([c for c, _ in subset], [b for _, b in subset])
        if point is None:
            continue
        if all(
            sum(c * x for c, x in zip(coeffs, point)) <= rhs
            for coeffs, rhs in rows
        ):
            found.add(point)
    return frozenset(found)


def _coords(point, dim):
    if isinstance(point, DofTriple):
        coords = point.as_tuple()
    else:
        coords = tuple(_rat(x) for x in point)
    if len(coords) != dim:
        raise ValidationError(f"point has {len(coords)} coordinates, expected {dim}")
    return coords


def contains(p: Polytope, point, slack=0) -> bool:
    """Membership test: every inequality holds up to an additive slack."""
    coords = _coords(point, p.dim)
    slack = _rat(slack)
    return all(
        sum(c * x for c, x in zip(coeffs, coords)) <= rhs + slack
        for coeffs, rhs in p.inequalities
    )


def regions_equal(a: Polytope, b: Polytope) -> bool:
    """Exact equality of two bounded regions via their vertex sets.

    True iff the vertex sets match exactly and each polytope contains the
    other's vertices. Both polytopes must share dimension and labels.
    """
    if a.dim != b.dim or a.labels != b.labels:
        raise ValidationError("regions_equal requires matching dimensions and labels")
    ea, eb = is_empty(a), is_empty(b)
    if ea or eb:
        return ea and eb
    va, vb = vertices(a), vertices(b)
    if va != vb:
        return False
    return all(contains(b, v) for v in va) and all(contains(a, v) for v in vb)


def same_feasible_set(a: Polytope, b: Polytope) -> bool:
    """Exact set equality in any dimension, by mutual implication.

    ``a`` is contained in ``b`` iff every inequality of ``b`` is implied by
    ``a``'s system (exact supremum at most the bound); equality is mutual
    containment. Unlike :func:`regions_equal` this needs no vertex
    enumeration, so it works for the lifted higher-dimensional systems.
    """
    if a.dim != b.dim:
        raise ValidationError("same_feasible_set requires matching dimensions")
    ea, eb = is_empty(a), is_empty(b)
    if ea or eb:
        return ea and eb

    def implies(system: Polytope, row) -> bool:
        coeffs, rhs = row
        status, value = _lp.max_over_halfspaces(
            coeffs,
            [c for c, _ in system.inequalities],
            [b_ for _, b_ in system.inequalities],
            assume_feasible=True,
        )
        return status == _lp.OPTIMAL and value <= rhs

    return all(implies(a, row) for row in b.inequalities) and all(
        implies(b, row) for row in a.inequalities
    )


def _check_sizes(sizes):
    try:
        n1, nc, n2 = (int(x) for x in sizes)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"sizes must be three integers: {exc}") from exc
    if n1 < 0 or nc < 0 or n2 < 0:
        raise ValidationError("subchannel counts must be non-negative")
    return n1, nc, n2


_D_LABELS = ("d0", "d1", "d2")


def _nonneg_rows(dim, indices):
    rows = []
    for i in indices:
        coeffs = [0] * dim
        coeffs[i] = -1
        rows.append((tuple(coeffs), 0))
    return rows


def inner_region_lifted(sizes) -> Polytope:
    """Achievable-slope system lifted with its allocation counters.

    Coordinates (d0, d1, d2, a1, a2, b): ``a_j`` counts shared subchannels
    reassigned to user j's private message, ``b`` counts private subchannel
    pairs lent to the common message. Slope nonnegativity is adjoined.
    """
    n1, nc, n2 = _check_sizes(sizes)
    rows = [
        ((1, 0, 0, 1, 1, -1), nc),
        ((0, 1, 0, -1, 0, 1), n1),
        ((0, 0, 1, 0, -1, 1), n2),
        ((0, 0, 0, -1, 0, 0), 0),
        ((0, 0, 0, 0, -1, 0), 0),
        ((0, 0, 0, 1, 1, 0), nc),
        ((0, 0, 0, 0, 0, -1), 0),
        ((0, 0, 0, 0, 0, 1), min(n1, n2)),
    ]
    rows += _nonneg_rows(6, (0, 1, 2))
    return make_polytope(rows, _D_LABELS + ("a1", "a2", "b"))


def inner_region(sizes) -> Polytope:
    """Achievable DoF region: the lifted system with all three allocation
    counters projected out by Fourier-Motzkin elimination."""
    p = inner_region_lifted(sizes)
    for label in ("a1", "a2", "b"):
        p = fm_eliminate(p, label)
    return p


def outer_region_lifted(sizes) -> Polytope:
    """Converse-side system lifted with its two slack parameters.

    Coordinates (d0, d1, d2, eta, delta): ``eta`` is the private-subchannel
    share of the common slope, ``delta`` the shared-subchannel share. The
    parameterized family of bounds becomes a single polytope because
    membership for fixed (d0, d1, d2) is linear feasibility in (eta, delta).
    """
    n1, nc, n2 = _check_sizes(sizes)
    rows = [
        ((1, 0, 0, -1, -1), 0),
        ((1, 1, 0, 0, 0), nc + n1),
        ((1, 0, 1, 0, 0), nc + n2),
        ((1, 1, 1, 1, 0), n1 + n2 + nc),
        ((0, 0, 0, -1, 0), 0),
        ((0, 0, 0, 1, 0), min(n1, n2)),
        ((0, 0, 0, 0, -1), 0),
        ((0, 0, 0, 0, 1), nc),
    ]
    rows += _nonneg_rows(5, (0, 1, 2))
    return make_polytope(rows, _D_LABELS + ("eta", "delta"))


def outer_region(sizes) -> Polytope:
    """Outer-bound DoF region with the slack parameters projected out."""
    p = outer_region_lifted(sizes)
    for label in ("eta", "delta"):
        p = fm_eliminate(p, label)
    return p


def inner_region_merged(sizes) -> Polytope:
    """Inner lifted system with the two shared-subchannel counters merged
    into their total ``a = a1 + a2`` (coordinates d0, d1, d2, a, a2, b).

    First stage of the hand elimination reproduced by the test suite; the
    slopes are left unconstrained in sign here, matching the raw system.
    """
    n1, nc, n2 = _check_sizes(sizes)
    rows = [
        ((1, 0, 0, 1, 0, -1), nc),
        ((0, 1, 0, -1, 1, 1), n1),
        ((0, 0, 1, 0, -1, 1), n2),
        ((0, 0, 0, -1, 1, 0), 0),
        ((0, 0, 0, 0, -1, 0), 0),
        ((0, 0, 0, 1, 0, 0), nc),
        ((0, 0, 0, 0, 0, -1), 0),
        ((0, 0, 0, 0, 0, 1), min(n1, n2)),
    ]
    return make_polytope(rows, _D_LABELS + ("a", "a2", "b"))


def inner_region_transfer(sizes) -> Polytope:
    """Merged system rewritten for slope transfer (d0,d1,d2,t1,t2,a,b).

    ``t_j >= 0`` moves common slope onto user j's private slope, using that
    any achievable (d0, d1, d2) stays achievable as
    (d0 - t1 - t2, d1 + t1, d2 + t2). Second stage of the hand elimination.
    """
    n1, nc, n2 = _check_sizes(sizes)
    rows = [
        ((1, 0, 0, 1, 1, 1, -1), nc),
        ((0, 1, 1, -1, -1, -1, 2), n1 + n2),
        ((0, 1, 0, -1, 0, -1, 1), n1),
        ((0, 0, 1, 0, -1, -1, 1), n2),
        ((0, 0, 0, -1, 0, 0, 0), 0),
        ((0, 0, 0, 0, -1, 0, 0), 0),
        ((0, 0, 0, 0, 0, -1, 0), 0),
        ((0, 0, 0, 0, 0, 1, 0), nc),
        ((0, 0, 0, 0, 0, 0, -1), 0),
        ((0, 0, 0, 0, 0, 0, 1), min(n1, n2)),
    ]
    return make_polytope(rows, _D_LABELS + ("t1", "t2", "a", "b"))


def inner_region_reduced(sizes) -> Polytope:
    """Closed-form target of the elimination chain (d0, d1, d2, a, b).

    This is the minimal system left after projecting both transfer
    variables out of :func:`inner_region_transfer`: the one implied
    total-slope bound is already dropped.
    """
    n1, nc, n2 = _check_sizes(sizes)
    rows = [
        ((1, 1, 1, 0, 1), n1 + nc + n2),
        ((1, 1, 0, 0, 0), n1 + nc),
        ((1, 0, 1, 0, 0), n2 + nc),
        ((1, 0, 0, 1, -1), nc),
        ((0, 0, 0, -1, 0), 0),
        ((0, 0, 0, 1, 0), nc),
        ((0, 0, 0, 0, -1), 0),
        ((0, 0, 0, 0, 1), min(n1, n2)),
    ]
    return make_polytope(rows, _D_LABELS + ("a", "b"))
