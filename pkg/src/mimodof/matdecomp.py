"""Dense small-matrix decompositions.

QR, SVD, numerical rank and nullspaces are thin contract-checked fronts
over LAPACK (via numpy). The generalized singular value decomposition of a
channel pair is built here from those primitives: an orthonormal factor of
the stacked pair, a cosine-sine style joint diagonalization of its two row
blocks, and a trailing QR that shapes the shared right factor into a
lower-triangular core. Matrices are real throughout and small (tens of
rows/columns at most); nothing here is tuned for scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DecompositionError, NumericalError, ValidationError

#: Default relative threshold for rank decisions (scaled by the largest
#: singular value and the larger matrix dimension).
DEFAULT_RANK_TOL = 1e-9

#: Self-check tolerances for the joint decomposition.
RECONSTRUCTION_TOL = 1e-8
ORTHONORMALITY_TOL = 1e-10


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Validate and coerce a 2-D real matrix with finite entries."""
    a = np.asarray(m, dtype=float)
    if a.ndim != 2:
        raise ValidationError(f"{name} must be 2-D, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValidationError(f"{name} must have at least one row and column")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} contains non-finite entries")
    return a


def qr(m) -> tuple[np.ndarray, np.ndarray]:
    """Reduced QR factorization: ``q @ r == m`` with orthonormal columns."""
    a = as_matrix(m)
    return np.linalg.qr(a, mode="reduced")


def svd(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reduced SVD ``u @ diag(s) @ vt == m``, singular values nonincreasing."""
    a = as_matrix(m)
    try:
        return np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed to converge: {exc}") from exc


def _rank_threshold(singular_values: np.ndarray, shape, tol: float) -> float:
    if singular_values.size == 0:
        return 0.0
    return tol * float(singular_values[0]) * max(shape)


def numerical_rank(m, tol: float = DEFAULT_RANK_TOL) -> int:
    """Number of singular values above ``tol * sigma_max * max(shape)``."""
    if tol <= 0:
        raise ValidationError("rank tolerance must be positive")
    a = as_matrix(m)
    s = np.linalg.svd(a, compute_uv=False)
    return int(np.count_nonzero(s > _rank_threshold(s, a.shape, tol)))


def nullspace_basis(m, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal columns spanning the (right) nullspace of ``m``."""
    if tol <= 0:
        raise ValidationError("rank tolerance must be positive")
    a = as_matrix(m)
    _, s, vt = np.linalg.svd(a, full_matrices=True)
    rank = int(np.count_nonzero(s > _rank_threshold(s, a.shape, tol)))
    return vt[rank:].T.copy()


@dataclass(frozen=True)
class GsvdFactors:
    """Joint factorization of a channel pair (h1, h2) sharing ``t`` columns.

    ``psi1.T @ h1 @ psi0 == sigma1 @ [inv(omega) 0]`` and likewise for h2,
    with all psi factors orthonormal and ``omega`` lower triangular and
    non-singular. ``sigma1``/``sigma2`` carry complementary identity /
    diagonal / zero blocks whose sizes are fixed by the structure constants:

    * ``k``: rank of the stacked pair (number of usable subchannels),
    * ``p``: subchannels invisible to user 1 (``k - rank(h1)``),
    * ``s``: subchannels visible to both users.
    """

    psi1: np.ndarray
    psi2: np.ndarray
    psi0: np.ndarray
    omega: np.ndarray
    sigma1: np.ndarray
    sigma2: np.ndarray
    k: int
    p: int
    s: int

    @property
    def set_sizes(self) -> tuple[int, int, int]:
        """(|S1|, |Sc|, |S2|): user-1-only, shared, user-2-only counts."""
        return (self.k - self.p - self.s, self.s, self.p)

    def right_factor(self) -> np.ndarray:
        """The shared k x t factor ``[inv(omega) 0]``."""
        t = self.psi0.shape[0]
        out = np.zeros((self.k, t))
        if self.k:
            out[:, : self.k] = np.linalg.inv(self.omega)
        return out

    def reconstruction_residuals(self, h1, h2) -> tuple[float, float]:
        """Frobenius residuals of the two defining identities."""
        h1 = as_matrix(h1)
        h2 = as_matrix(h2)
        core = self.right_factor() @ self.psi0.T
        r1 = np.linalg.norm(self.psi1 @ self.sigma1 @ core - h1)
        r2 = np.linalg.norm(self.psi2 @ self.sigma2 @ core - h2)
        return float(r1), float(r2)

    def orthonormality_residuals(self) -> tuple[float, float, float]:
        return tuple(
            float(np.linalg.norm(f.T @ f - np.eye(f.shape[1])))
            for f in (self.psi1, self.psi2, self.psi0)
        )


def _cs_pair(q1: np.ndarray, q2: np.ndarray, k: int, p: int, s: int):
    """Joint diagonalization of the two row blocks of a column-orthonormal
    stacked matrix. Returns (psi1, psi2, z, sigma1, sigma2) with
    ``q1 = psi1 @ sigma1 @ z.T`` and ``q2 = psi2 @ sigma2 @ z.T``.

    The SVD of the top block orders its singular values nonincreasing, so
    columns arrive as: identity block of sigma1 (shared-gain ratio
    infinite), mixed block, then identity block of sigma2. The bottom-block
    frame is completed by a QR of the columns that actually carry energy.
    """
    r1, r2 = q1.shape[0], q2.shape[0]
    psi1, _, wt = np.linalg.svd(q1, full_matrices=True)
    z = wt.T
    sigma1 = psi1.T @ q1 @ z

    mixed = q2 @ z
    carrying = s + p
    if carrying:
        qfull, rfac = np.linalg.qr(mixed[:, k - carrying :], mode="complete")
        signs = np.sign(np.diag(rfac[:carrying, :carrying]))
        signs[signs == 0] = 1.0
        qfull[:, :carrying] *= signs
        psi2 = np.hstack([qfull[:, carrying:], qfull[:, :carrying]])
    else:
        psi2 = np.eye(r2)
    sigma2 = psi2.T @ mixed
    return psi1, psi2, z, sigma1, sigma2


def gsvd(h1, h2, tol: float = DEFAULT_RANK_TOL) -> GsvdFactors:
    """Generalized singular value decomposition of a channel pair.

    The structure constants are pinned by independent rank computations
    (``k`` from the stacked pair, ``p = k - rank(h1)``,
    ``s = rank(h1) + rank(h2) - k``), then realized constructively. Raises
    :class:`DecompositionError` if the factors fail their residual
    self-checks, and :class:`ValidationError` for incompatible shapes.
    """
    h1 = as_matrix(h1, "h1")
    h2 = as_matrix(h2, "h2")
    if h1.shape[1] != h2.shape[1]:
        raise ValidationError(
            f"h1 and h2 must share a column count, got {h1.shape[1]} and {h2.shape[1]}"
        )
    r1, t = h1.shape
    r2 = h2.shape[0]
    stacked = np.vstack([h1, h2])
    k = numerical_rank(stacked, tol)
    rank1 = numerical_rank(h1, tol)
    rank2 = numerical_rank(h2, tol)
    p = k - rank1
    s = rank1 + rank2 - k

    if k == 0:
        return GsvdFactors(
            psi1=np.eye(r1),
            psi2=np.eye(r2),
            psi0=np.eye(t),
            omega=np.zeros((0, 0)),
            sigma1=np.zeros((r1, 0)),
            sigma2=np.zeros((r2, 0)),
            k=0,
            p=0,
            s=0,
        )

    u, sv, vt = np.linalg.svd(stacked, full_matrices=False)
    q1 = u[:r1, :k]
    q2 = u[r1:, :k]
    psi1, psi2, z, sigma1, sigma2 = _cs_pair(q1, q2, k, p, s)

    # Shape the shared right factor: z.T @ diag(sv) @ vt == [inv(omega) 0] psi0.T
    right = z.T @ (sv[:k, None] * vt[:k])
    psi0, rfac = np.linalg.qr(right.T, mode="complete")
    signs = np.sign(np.diag(rfac[:k, :k]))
    signs[signs == 0] = 1.0
    psi0[:, :k] *= signs
    omega_inv = (rfac[:k, :k] * signs[:, None]).T
    omega = np.linalg.inv(omega_inv)
    # zero out numerical fuzz above the diagonal: the core is triangular by
    # construction, inversion must not reintroduce it
    omega = np.tril(omega)

    factors = GsvdFactors(
        psi1=psi1,
        psi2=psi2,
        psi0=psi0,
        omega=omega,
        sigma1=sigma1,
        sigma2=sigma2,
        k=k,
        p=p,
        s=s,
    )
    _self_check(factors, h1, h2)
    return factors


def _self_check(factors: GsvdFactors, h1: np.ndarray, h2: np.ndarray) -> None:
    o1, o2, o0 = factors.orthonormality_residuals()
    if max(o1, o2, o0) > ORTHONORMALITY_TOL:
        raise DecompositionError(
            f"orthonormality residual {max(o1, o2, o0):.3e} exceeds {ORTHONORMALITY_TOL:.0e}"
        )
    r1, r2 = factors.reconstruction_residuals(h1, h2)
    lim1 = RECONSTRUCTION_TOL * (1.0 + np.linalg.norm(h1))
    lim2 = RECONSTRUCTION_TOL * (1.0 + np.linalg.norm(h2))
    if r1 > lim1 or r2 > lim2:
        raise DecompositionError(
            f"reconstruction residuals ({r1:.3e}, {r2:.3e}) exceed tolerance"
        )
