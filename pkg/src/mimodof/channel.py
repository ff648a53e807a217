"""Two-user Gaussian MIMO broadcast channel and its parallel-channel form.

A channel pair plus a joint decomposition yields an equivalent set of
scalar subchannels: some seen only by user 1, some by both, some only by
user 2. The transformation relaxes the transmit power budget by the factor
``zeta``; with the minimal admissible choice, ``zeta`` is the squared
largest singular value of the inverse triangular core.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import ValidationError
from .matdecomp import GsvdFactors, as_matrix


@dataclass(frozen=True)
class MimoBcChannel:
    """Channel matrices of the two receivers and the total transmit power."""

    h1: np.ndarray
    h2: np.ndarray
    power: float

    def __post_init__(self):
        object.__setattr__(self, "h1", as_matrix(self.h1, "h1"))
        object.__setattr__(self, "h2", as_matrix(self.h2, "h2"))
        if self.h1.shape[1] != self.h2.shape[1]:
            raise ValidationError("h1 and h2 must have the same number of columns")
        if not (np.isfinite(self.power) and self.power > 0):
            raise ValidationError("power must be positive and finite")

    @property
    def t(self) -> int:
        return self.h1.shape[1]


@dataclass(frozen=True)
class SubchannelPartition:
    """1-based subchannel labels split by visibility.

    ``s1``/``sc``/``s2`` are contiguous runs covering 1..k; ``sc1``/``sc2``
    split the shared run by which user enjoys the (weakly) larger gain.
    """

    s1: tuple[int, ...]
    sc: tuple[int, ...]
    s2: tuple[int, ...]
    sc1: tuple[int, ...]
    sc2: tuple[int, ...]

    def __post_init__(self):
        combined = self.s1 + self.sc + self.s2
        if list(combined) != list(range(1, len(combined) + 1)):
            raise ValidationError("partition blocks must be contiguous and cover 1..k")
        if sorted(self.sc1 + self.sc2) != sorted(self.sc):
            raise ValidationError("sc1 and sc2 must partition sc")
        if set(self.sc1) & set(self.sc2):
            raise ValidationError("sc1 and sc2 must be disjoint")

    @property
    def k(self) -> int:
        return len(self.s1) + len(self.sc) + len(self.s2)

    @property
    def sizes(self) -> tuple[int, int, int]:
        return (len(self.s1), len(self.sc), len(self.s2))


@dataclass(frozen=True)
class ParallelChannel:
    """Unmatched parallel broadcast channel derived from a MIMO pair.

    ``gains1`` maps labels in s1+sc to user 1's subchannel gains, ``gains2``
    maps sc+s2 to user 2's; the power budget is ``relaxed_power = zeta * P``.
    """

    gains1: Mapping[int, float]
    gains2: Mapping[int, float]
    partition: SubchannelPartition
    zeta: float
    relaxed_power: float

    def __post_init__(self):
        object.__setattr__(self, "gains1", MappingProxyType(dict(self.gains1)))
        object.__setattr__(self, "gains2", MappingProxyType(dict(self.gains2)))
        if set(self.gains1) != set(self.partition.s1 + self.partition.sc):
            raise ValidationError("gains1 must cover exactly s1 and sc")
        if set(self.gains2) != set(self.partition.sc + self.partition.s2):
            raise ValidationError("gains2 must cover exactly sc and s2")
        for g in list(self.gains1.values()) + list(self.gains2.values()):
            if not (np.isfinite(g) and g > 0):
                raise ValidationError("subchannel gains must be strictly positive")
        if not (np.isfinite(self.zeta) and self.zeta > 0):
            raise ValidationError("zeta must be positive")


def partition_common(gains1, gains2, sc) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Split the shared labels by the stronger receiver; ties go to user 1."""
    sc = tuple(sc)
    for label in sc:
        if label not in gains1 or label not in gains2:
            raise ValidationError(f"gains missing for shared subchannel {label}")
    sc1 = tuple(l for l in sc if gains1[l] ** 2 >= gains2[l] ** 2)
    sc2 = tuple(l for l in sc if gains1[l] ** 2 < gains2[l] ** 2)
    return sc1, sc2


def transform_channel(ch: MimoBcChannel, factors: GsvdFactors) -> ParallelChannel:
    """Derive the parallel-channel form of ``ch`` from its decomposition.

    Gains are read off the structured sigma blocks (identity entries for
    exclusive subchannels, the paired diagonal entries for shared ones).
    The minimal power relaxation factor is ``1 / sigma_min(omega)^2``.
    """
    r1, t = ch.h1.shape
    r2 = ch.h2.shape[0]
    k, p, s = factors.k, factors.p, factors.s
    if factors.psi1.shape != (r1, r1) or factors.psi2.shape != (r2, r2):
        raise ValidationError("factor shapes do not match the channel dimensions")
    if factors.psi0.shape != (t, t) or factors.omega.shape != (k, k):
        raise ValidationError("factor shapes do not match the channel dimensions")
    if factors.sigma1.shape != (r1, k) or factors.sigma2.shape != (r2, k):
        raise ValidationError("sigma shapes do not match the channel dimensions")

    n1, nc, n2 = factors.set_sizes
    s1 = tuple(range(1, n1 + 1))
    sc = tuple(range(n1 + 1, n1 + nc + 1))
    s2 = tuple(range(n1 + nc + 1, k + 1))

    gains1 = {l: float(factors.sigma1[l - 1, l - 1]) for l in s1 + sc}
    gains2 = {l: float(factors.sigma2[r2 - k + l - 1, l - 1]) for l in sc + s2}
    sc1, sc2 = partition_common(gains1, gains2, sc)
    partition = SubchannelPartition(s1=s1, sc=sc, s2=s2, sc1=sc1, sc2=sc2)

    if k:
        zeta = float(1.0 / np.linalg.svd(factors.omega, compute_uv=False)[-1] ** 2)
    else:
        zeta = 1.0  # any positive factor works for an empty core
    return ParallelChannel(
        gains1=gains1,
        gains2=gains2,
        partition=partition,
        zeta=zeta,
        relaxed_power=zeta * ch.power,
    )
