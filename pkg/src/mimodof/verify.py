"""End-to-end verification harness.

Runs the whole pipeline on seeded random channels: factorization residuals
against their tolerances, slope attainment of both coding schemes at every
feasible allocation corner, membership of the estimated slopes in the exact
outer region, the inner/outer region equality sweep, and the projection
chain cross-check. The command-line ``verify`` subcommand is a thin wrapper
around :func:`run_verification`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .channel import MimoBcChannel, ParallelChannel, transform_channel
from .dofregion import (
    contains,
    fm_eliminate,
    inner_region,
    inner_region_reduced,
    inner_region_transfer,
    outer_region,
    regions_equal,
    same_feasible_set,
)
from .errors import ValidationError
from .matdecomp import GsvdFactors, gsvd, numerical_rank
from .rates import (
    DofParams,
    RateTriple,
    build_dpc_covariances,
    dpc_rates,
    estimate_dof,
    feasible_params,
    zf_rates,
)

#: Powers used for slope estimation; the estimator reads the top decade.
SLOPE_POWERS = (1e6, 1e9, 1e12)

RNG_NAME = "numpy.random.default_rng(PCG64), standard normal entries"


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    checks: list[CheckResult] = field(default_factory=list)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(CheckResult(name=name, passed=bool(passed), detail=detail))

    @property
    def n_passed(self) -> int:
        return sum(c.passed for c in self.checks)

    @property
    def n_failed(self) -> int:
        return sum(not c.passed for c in self.checks)

    @property
    def ok(self) -> bool:
        return self.n_failed == 0

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "passed": self.n_passed,
            "failed": self.n_failed,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail}
                for c in self.checks
            ],
        }


def dpc_rate_curve(
    ch: MimoBcChannel,
    factors: GsvdFactors,
    pch: ParallelChannel,
    params: DofParams,
    powers=SLOPE_POWERS,
) -> list[tuple[float, RateTriple]]:
    """Rates of the covariance construction across a power grid."""
    curve = []
    for power in powers:
        prof = build_dpc_covariances(params, factors, pch.partition, power)
        curve.append((power, dpc_rates(prof.k0, prof.k1, prof.k2, ch.h1, ch.h2)))
    return curve


def zf_rate_curve(
    pch: ParallelChannel, params: DofParams, powers=SLOPE_POWERS
) -> list[tuple[float, RateTriple]]:
    """Zero-forcing rates with the relaxed budget split equally."""
    k = pch.partition.k
    curve = []
    for power in powers:
        subpower = {l: pch.zeta * power / k for l in range(1, k + 1)} if k else {}
        curve.append((power, zf_rates(params, pch, subpower)))
    return curve


def _max_abs_err(estimated, expected) -> float:
    return max(abs(a - b) for a, b in zip(estimated, expected))


def run_verification(
    trials: int = 10,
    max_dim: int = 5,
    seed: int = 0,
    tol: float = 1e-8,
    slope_tol: float = 0.05,
    rank_tol: float = 1e-9,
    region_grid: int = 2,
) -> VerificationReport:
    """Run every pipeline check on ``trials`` seeded random channels.

    ``tol`` bounds the relative reconstruction residual of the
    factorization, ``slope_tol`` the per-component slope error and the
    outer-region membership slack. Checks that fail carry the trial seed
    and channel dimensions in their detail string.
    """
    if trials < 1:
        raise ValidationError("trials must be at least 1")
    if max_dim < 1:
        raise ValidationError("the dimension bound must be at least 1")
    report = VerificationReport()
    root = np.random.SeedSequence(seed)
    child_seeds = root.spawn(trials)

    seen_sizes: list[tuple[int, int, int]] = []
    for index, child in enumerate(child_seeds):
        rng = np.random.default_rng(child)
        t = int(rng.integers(1, max_dim + 1))
        r1 = int(rng.integers(1, max_dim + 1))
        r2 = int(rng.integers(1, max_dim + 1))
        h1 = rng.standard_normal((r1, t))
        h2 = rng.standard_normal((r2, t))
        tag = f"trial {index} (seed {seed}, dims t={t}, r1={r1}, r2={r2})"

        ch = MimoBcChannel(h1=h1, h2=h2, power=1.0)
        factors = gsvd(h1, h2, tol=rank_tol)
        rec1, rec2 = factors.reconstruction_residuals(h1, h2)
        lim1 = tol * (1.0 + float(np.linalg.norm(h1)))
        lim2 = tol * (1.0 + float(np.linalg.norm(h2)))
        report.add(
            f"{tag}: reconstruction residuals",
            rec1 <= lim1 and rec2 <= lim2,
            f"residuals ({rec1:.3e}, {rec2:.3e}) vs limits ({lim1:.3e}, {lim2:.3e})",
        )
        orth = max(factors.orthonormality_residuals())
        report.add(
            f"{tag}: orthonormality",
            orth <= max(tol, 1e-10),
            f"residual {orth:.3e}",
        )
        report.add(
            f"{tag}: rank agreement",
            factors.k == numerical_rank(np.vstack([h1, h2]), tol=rank_tol),
            f"k={factors.k}",
        )

        pch = transform_channel(ch, factors)
        sizes = pch.partition.sizes
        if sizes not in seen_sizes:
            seen_sizes.append(sizes)
        outer = outer_region(sizes)
        slack = Fraction(slope_tol).limit_denominator(10**6)

        worst_dpc = worst_zf = 0.0
        member_ok = True
        for params in feasible_params(sizes):
            expected = params.dof_point(sizes)
            dpc_est = estimate_dof(dpc_rate_curve(ch, factors, pch, params))
            zf_est = estimate_dof(zf_rate_curve(pch, params))
            worst_dpc = max(worst_dpc, _max_abs_err(dpc_est.as_floats(), expected))
            worst_zf = max(worst_zf, _max_abs_err(zf_est.as_floats(), expected))
            member_ok = member_ok and contains(outer, dpc_est, slack=slack)
            member_ok = member_ok and contains(outer, zf_est, slack=slack)
        report.add(
            f"{tag}: covariance-scheme slopes",
            worst_dpc <= slope_tol,
            f"worst slope error {worst_dpc:.3e} (sizes {sizes})",
        )
        report.add(
            f"{tag}: zero-forcing slopes",
            worst_zf <= slope_tol,
            f"worst slope error {worst_zf:.3e} (sizes {sizes})",
        )
        report.add(
            f"{tag}: outer-region membership",
            member_ok,
            f"slack {slope_tol}",
        )

    grid = [
        s
        for s in itertools.product(range(region_grid + 1), repeat=3)
        if s not in seen_sizes
    ]
    equal_ok = True
    bad = []
    for sizes in seen_sizes + grid:
        if not regions_equal(inner_region(sizes), outer_region(sizes)):
            equal_ok = False
            bad.append(sizes)
    report.add(
        "inner/outer region equality sweep",
        equal_ok,
        f"{len(seen_sizes) + len(grid)} size triples" + (f", failing: {bad}" if bad else ""),
    )

    chain_ok = True
    for sizes in [(1, 1, 1)] + seen_sizes[:3]:
        reduced = fm_eliminate(fm_eliminate(inner_region_transfer(sizes), "t1"), "t2")
        if not same_feasible_set(reduced, inner_region_reduced(sizes)):
            chain_ok = False
    report.add(
        "projection chain reproduces the closed form",
        chain_ok,
        "transfer system projected onto (d0, d1, d2, a, b)",
    )
    return report
