"""Closed-form rate expressions and slope (degrees-of-freedom) estimation.

Covers the dirty-paper-coding rate triple for given input covariances, the
explicit covariance construction that attains each integer slope corner,
the zero-forcing variant on the parallel channel, the six capacity bounds
of the unmatched parallel broadcast channel, and the two-point slope
estimator used to read degrees of freedom off a rate-versus-power sweep.
Rates are in bits per channel use (base-2 logs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .channel import ParallelChannel, SubchannelPartition
from .dofregion import DofTriple
from .errors import NumericalError, ValidationError
from .matdecomp import GsvdFactors

_LN2 = math.log(2.0)


def clog2(x: float) -> float:
    """Scalar Gaussian capacity ``0.5 * log2(1 + x)``."""
    if x < 0:
        raise ValidationError("capacity argument must be non-negative")
    return 0.5 * math.log1p(x) / _LN2


@dataclass(frozen=True)
class RateTriple:
    """(common, user-1 private, user-2 private) rates in bits per use."""

    r0: float
    r1: float
    r2: float

    def __post_init__(self):
        for name, v in (("r0", self.r0), ("r1", self.r1), ("r2", self.r2)):
            if not (math.isfinite(v) and v >= 0):
                raise ValidationError(f"{name} must be finite and non-negative, got {v}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.r0, self.r1, self.r2)


@dataclass(frozen=True)
class DofParams:
    """Integer slope-allocation counters (alpha1, alpha2, beta).

    ``alpha_j`` shared subchannels carry user j's private message instead of
    the common one; ``beta`` exclusive subchannels of each user carry the
    common message instead of a private one.
    """

    alpha1: int
    alpha2: int
    beta: int

    def __post_init__(self):
        for name, v in (("alpha1", self.alpha1), ("alpha2", self.alpha2), ("beta", self.beta)):
            if not isinstance(v, int) or v < 0:
                raise ValidationError(f"{name} must be a non-negative integer, got {v!r}")

    def validate_for(self, sizes: tuple[int, int, int]) -> None:
        n1, nc, n2 = sizes
        if self.alpha1 + self.alpha2 > nc:
            raise ValidationError(
                f"alpha1 + alpha2 = {self.alpha1 + self.alpha2} exceeds the "
                f"shared-subchannel count {nc}"
            )
        if self.beta > min(n1, n2):
            raise ValidationError(
                f"beta = {self.beta} exceeds min of the exclusive-subchannel "
                f"counts ({n1}, {n2})"
            )

    def dof_point(self, sizes: tuple[int, int, int]) -> tuple[int, int, int]:
        """The slope triple these counters attain."""
        n1, nc, n2 = sizes
        return (
            nc - self.alpha1 - self.alpha2 + self.beta,
            self.alpha1 + n1 - self.beta,
            self.alpha2 + n2 - self.beta,
        )


def feasible_params(sizes: tuple[int, int, int]):
    """All integer allocation counters feasible for the given split."""
    n1, nc, n2 = sizes
    for a1 in range(nc + 1):
        for a2 in range(nc - a1 + 1):
            for b in range(min(n1, n2) + 1):
                yield DofParams(alpha1=a1, alpha2=a2, beta=b)


@dataclass(frozen=True)
class CovarianceProfile:
    """Input covariances (k0, k1, k2) and their diagonal generators.

    ``k_u = (xi * P) * B diag(lambda_u) B^T`` where B packs the channel's
    right factor; ``xi`` normalizes the total trace to the power budget.
    """

    lambda0: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray
    xi: float
    k0: np.ndarray
    k1: np.ndarray
    k2: np.ndarray


def _check_psd(m: np.ndarray, name: str) -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} contains non-finite entries")
    scale = float(np.abs(a).max()) if a.size else 0.0
    if not np.allclose(a, a.T, atol=1e-8 * (1.0 + scale)):
        raise ValidationError(f"{name} is not symmetric")
    sym = 0.5 * (a + a.T)
    if sym.size:
        min_eig = float(np.linalg.eigvalsh(sym).min())
        if min_eig < -1e-8 * (1.0 + scale):
            raise ValidationError(f"{name} is not positive semidefinite (min eig {min_eig:.3e})")
    return sym


def _psd_sqrt_columns(k: np.ndarray) -> np.ndarray:
    """Factor a PSD matrix as ``C @ C.T``.

    Eigenvalues at the machine-noise floor (relative to the largest) are
    dropped so that exact rank deficiency survives a round trip through a
    materialized matrix; without this, covariances scaled by huge powers
    pollute their null directions and the log-dets drift by far more than
    the agreement tolerance.
    """
    if k.size == 0 or not np.any(k):
        return np.zeros((k.shape[0], 0))
    try:
        w, v = np.linalg.eigh(k)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    floor = k.shape[0] * np.finfo(float).eps * max(float(w.max()), 0.0)
    keep = w > floor
    return v[:, keep] * np.sqrt(w[keep])


def _received_half_logdet(h: np.ndarray, cov: np.ndarray) -> float:
    """``0.5 * log2 det(I + h cov h^T)`` evaluated in factored form.

    With ``cov = C C^T`` the determinant equals ``prod(1 + s_i^2)`` over the
    singular values of ``h C``, which stays accurate at power scales where
    the assembled matrix would not.
    """
    c = _psd_sqrt_columns(cov)
    if c.shape[1] == 0:
        return 0.0
    try:
        s = np.linalg.svd(h @ c, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed to converge: {exc}") from exc
    return float(0.5 * np.sum(np.log1p(s**2)) / _LN2)


def dpc_rates(k0, k1, k2, h1, h2) -> RateTriple:
    """Dirty-paper-coding rate triple for given input covariances.

    The common message is decoded by both users against the private signals
    as noise (the minimum of the two log-det ratios); user 1's private
    message is pre-cancelled against user 2's, which leaves user 2
    interference-free.
    """
    k0 = _check_psd(k0, "k0")
    k1 = _check_psd(k1, "k1")
    k2 = _check_psd(k2, "k2")
    h1 = np.asarray(h1, dtype=float)
    h2 = np.asarray(h2, dtype=float)

    r0 = min(
        _received_half_logdet(h, k0 + k1 + k2) - _received_half_logdet(h, k1 + k2)
        for h in (h1, h2)
    )
    r1 = _received_half_logdet(h1, k1 + k2) - _received_half_logdet(h1, k2)
    r2 = _received_half_logdet(h2, k2)
    return RateTriple(r0=max(0.0, r0), r1=max(0.0, r1), r2=max(0.0, r2))


def _lambda_patterns(sizes, params: DofParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """0/1 diagonal generators for the corner given by ``params``.

    Subchannel order is s1, sc, s2. The common generator covers the first
    ``beta`` of s1, the middle ``nc - alpha1 - alpha2`` of sc and the last
    ``beta`` of s2; the private generators cover the complementary runs.
    """
    n1, nc, n2 = sizes
    k = n1 + nc + n2
    a1, a2, b = params.alpha1, params.alpha2, params.beta
    lam0 = np.zeros(k)
    lam1 = np.zeros(k)
    lam2 = np.zeros(k)
    lam0[:b] = 1.0
    lam0[n1 + a1 : n1 + nc - a2] = 1.0
    lam0[k - b : k] = 1.0
    lam1[b : n1 + a1] = 1.0
    lam2[n1 + nc - a2 : k - b] = 1.0
    return lam0, lam1, lam2


def build_dpc_covariances(
    params: DofParams,
    factors: GsvdFactors,
    partition: SubchannelPartition,
    power: float,
) -> CovarianceProfile:
    """Materialize the covariance triple attaining the corner of ``params``.

    Each covariance is ``(xi * P) B diag(lambda_u) B^T`` with
    ``B = psi0 [omega; 0]``; ``xi`` is chosen so the traces sum exactly to
    the power budget (0 when every generator is empty).
    """
    if not (math.isfinite(power) and power > 0):
        raise ValidationError("power must be positive and finite")
    sizes = partition.sizes
    if partition.k != factors.k:
        raise ValidationError("partition and factors disagree on the subchannel count")
    params.validate_for(sizes)
    lam0, lam1, lam2 = _lambda_patterns(sizes, params)

    t = factors.psi0.shape[0]
    k = factors.k
    packed = np.zeros((t, k))
    packed[:k, :] = factors.omega
    b_factor = factors.psi0 @ packed

    col_norms = np.einsum("ij,ij->j", b_factor, b_factor)
    denom = float(((lam0 + lam1 + lam2) * col_norms).sum())
    xi = 1.0 / denom if denom > 0 else 0.0

    def materialize(lam):
        cols = b_factor[:, lam > 0]
        if cols.size == 0 or xi == 0.0:
            return np.zeros((t, t))
        scaled = math.sqrt(xi * power) * cols
        return scaled @ scaled.T

    return CovarianceProfile(
        lambda0=lam0,
        lambda1=lam1,
        lambda2=lam2,
        xi=xi,
        k0=materialize(lam0),
        k1=materialize(lam1),
        k2=materialize(lam2),
    )


def dpc_rates_diagonal(
    profile: CovarianceProfile, factors: GsvdFactors, power: float
) -> RateTriple:
    """Same rate triple evaluated in the diagonal subchannel domain.

    Every log-det collapses to a product over subchannels because the
    generators and the squared sigma columns are all diagonal; agreement
    with :func:`dpc_rates` on the materialized covariances is a determinant
    identity and is enforced by the test suite.
    """
    scale = profile.xi * power
    diag1 = np.einsum("ij,ij->j", factors.sigma1, factors.sigma1)
    diag2 = np.einsum("ij,ij->j", factors.sigma2, factors.sigma2)
    lam0, lam1, lam2 = profile.lambda0, profile.lambda1, profile.lambda2

    def ratio(lam_num, lam_den, diag):
        num = np.log1p(scale * lam_num * diag).sum()
        den = np.log1p(scale * lam_den * diag).sum()
        return 0.5 * (num - den) / _LN2

    total = lam0 + lam1 + lam2
    private = lam1 + lam2
    r0 = min(ratio(total, private, diag1), ratio(total, private, diag2))
    r1 = ratio(private, lam2, diag1)
    r2 = ratio(lam2, np.zeros_like(lam2), diag2)
    return RateTriple(r0=max(0.0, r0), r1=max(0.0, r1), r2=max(0.0, r2))


def sylvester_check(a, b) -> float:
    """``|det(AB + I) - det(BA + I)|`` for conformable rectangular factors."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or b.ndim != 2 or a.shape != b.T.shape:
        raise ValidationError("factors must be m x n and n x m")
    m, n = a.shape
    left = np.linalg.det(a @ b + np.eye(m))
    right = np.linalg.det(b @ a + np.eye(n))
    return float(abs(left - right))


def zf_subchannel_assignment(
    params: DofParams, partition: SubchannelPartition
) -> dict[str, tuple[int, ...]]:
    """Which subchannel carries which message under the zero-forcing plan.

    Mirrors the covariance generators: the common message rides the first
    ``beta`` user-1 exclusives, the middle shared run and the last ``beta``
    user-2 exclusives; each user's private message gets its reassigned
    shared subchannels plus its remaining exclusives.
    """
    params.validate_for(partition.sizes)
    nc = partition.sizes[1]
    a1, a2, b = params.alpha1, params.alpha2, params.beta
    s1, sc, s2 = partition.s1, partition.sc, partition.s2
    shared_common = sc[a1 : nc - a2]
    return {
        "common1": s1[:b] + shared_common,
        "common2": shared_common + s2[len(s2) - b :],
        "private1": s1[b:] + sc[:a1],
        "private2": sc[nc - a2 :] + s2[: len(s2) - b],
    }


def equal_power_allocation(pch: ParallelChannel) -> dict[int, float]:
    """Uniform split of the relaxed budget over all materialized subchannels."""
    k = pch.partition.k
    if k == 0:
        return {}
    share = pch.relaxed_power / k
    return {l: share for l in range(1, k + 1)}


def zf_rates(params: DofParams, pch: ParallelChannel, subpower: Mapping[int, float]) -> RateTriple:
    """Zero-forcing rate triple on the parallel channel.

    Each assigned subchannel contributes a scalar capacity term at its
    user's gain; the common rate is the worse of the two users' sums over
    their common-message subchannels.
    """
    assign = zf_subchannel_assignment(params, pch.partition)

    def power_of(label):
        try:
            p = float(subpower[label])
        except KeyError:
            raise ValidationError(f"no power assigned to subchannel {label}") from None
        if not (math.isfinite(p) and p >= 0):
            raise ValidationError(f"power on subchannel {label} must be >= 0")
        return p

    def total(labels, gains):
        return sum(clog2(gains[l] ** 2 * power_of(l)) for l in labels)

    r0 = min(total(assign["common1"], pch.gains1), total(assign["common2"], pch.gains2))
    r1 = total(assign["private1"], pch.gains1)
    r2 = total(assign["private2"], pch.gains2)
    return RateTriple(r0=r0, r1=r1, r2=r2)


@dataclass(frozen=True)
class AllocationProfile:
    """Per-subchannel power split and common-message power share.

    ``gamma[l]`` is the fraction of subchannel ``l``'s power spent on the
    common message; ``subpower`` must exhaust the relaxed budget.
    """

    gamma: Mapping[int, float]
    subpower: Mapping[int, float]

    def __post_init__(self):
        for l, g in self.gamma.items():
            if not (0.0 <= g <= 1.0):
                raise ValidationError(f"gamma[{l}] must lie in [0, 1], got {g}")
        for l, p in self.subpower.items():
            if not (math.isfinite(p) and p >= 0):
                raise ValidationError(f"subpower[{l}] must be >= 0, got {p}")


def parallel_region_bounds(pch: ParallelChannel, alloc: AllocationProfile):
    """The six rate bounds of the parallel channel at a given allocation.

    Returns ``(b1, ..., b6)``; a triple (R0, R1, R2) is inside the region
    for this allocation iff R0 <= b1, R0 <= b2, R0+R1 <= b3, R0+R2 <= b4,
    and R0+R1+R2 <= min(b5, b6).
    """
    part = pch.partition
    labels = part.s1 + part.sc + part.s2
    total_power = sum(float(alloc.subpower.get(l, 0.0)) for l in labels)
    budget = pch.relaxed_power
    if abs(total_power - budget) > 1e-9 * (1.0 + abs(budget)):
        raise ValidationError(
            f"subchannel powers sum to {total_power}, expected the relaxed budget {budget}"
        )
    for l in labels:
        if l not in alloc.subpower or l not in alloc.gamma:
            raise ValidationError(f"allocation missing subchannel {l}")

    g1, g2 = pch.gains1, pch.gains2
    gam = alloc.gamma
    pw = alloc.subpower

    def frac(gain, l):
        # capacity of the common share, private share treated as noise
        g2p = gain[l] ** 2 * pw[l]
        return clog2(g2p * gam[l] / (1.0 + g2p * (1.0 - gam[l])))

    def full(gain, l):
        return clog2(gain[l] ** 2 * pw[l])

    def residual(gain, l):
        return clog2(gain[l] ** 2 * (1.0 - gam[l]) * pw[l])

    b1 = sum(frac(g1, l) for l in part.s1 + part.sc)
    b2 = sum(frac(g2, l) for l in part.sc + part.s2)
    b3 = sum(frac(g1, l) for l in part.sc2) + sum(full(g1, l) for l in part.s1 + part.sc1)
    b4 = sum(frac(g2, l) for l in part.sc1) + sum(full(g2, l) for l in part.s2 + part.sc2)
    b5 = (
        sum(frac(g1, l) for l in part.sc2)
        + sum(residual(g2, l) for l in part.s2 + part.sc2)
        + sum(full(g1, l) for l in part.s1 + part.sc1)
    )
    b6 = (
        sum(frac(g2, l) for l in part.sc1)
        + sum(residual(g1, l) for l in part.s1 + part.sc1)
        + sum(full(g2, l) for l in part.s2 + part.sc2)
    )
    return (b1, b2, b3, b4, b5, b6)


def estimate_dof(rate_curve: Sequence[tuple[float, RateTriple]]) -> DofTriple:
    """Slopes from the two largest powers of a rate-versus-power sweep.

    Each component is ``(R(P_b) - R(P_a)) / (0.5 * log2(P_b / P_a))``; the
    bias of the secant vanishes as 1/log(P) at the sampled powers.
    """
    if len(rate_curve) < 2:
        raise ValidationError("slope estimation needs at least two powers")
    ordered = sorted(rate_curve, key=lambda item: item[0])
    (pa, ra), (pb, rb) = ordered[-2], ordered[-1]
    if not (pb > pa > 0):
        raise ValidationError("powers must be positive and strictly increasing")
    denom = 0.5 * math.log2(pb / pa)
    slopes = [(x - y) / denom for x, y in zip(rb.as_tuple(), ra.as_tuple())]
    return DofTriple.from_values(*slopes)
