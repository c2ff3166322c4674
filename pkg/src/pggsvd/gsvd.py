"""Generalized SVD of the (Bob, Eve) channel pair.

The pair is factored as::

    H_ba = U_ba @ Sigma_ba @ [inv(Omega), 0] @ U_a^H
    H_ea = U_ea @ Sigma_ea @ [inv(Omega), 0] @ U_a^H

with the ``k`` columns of ``Sigma_ba`` / ``Sigma_ea`` ordered as
Eve-only (``k-r-s``), shared (``s``) and Bob-only (``r``) directions.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as sla

__all__ = [
    "WiretapChannel",
    "GsvdDecomposition",
    "RankAmbiguityError",
    "gsvd",
    "subspace_dims",
    "reconstruct",
    "numerical_rank",
]

# Singular values within this factor of the cutoff (either side) are ambiguous.
AMBIGUITY_BAND = 100.0


class RankAmbiguityError(ValueError):
    """A singular value sits too close to the numerical-rank cutoff."""

    def __init__(self, value: float, cutoff: float, what: str):
        self.value = value
        self.cutoff = cutoff
        super().__init__(
            f"rank of {what} is ambiguous: singular value {value:.3e} is within "
            f"a factor {AMBIGUITY_BAND:g} of the cutoff {cutoff:.3e}; adjust tol"
        )


@dataclass(frozen=True, eq=False)
class WiretapChannel:
    """Bob and Eve channel matrices with their noise variances.

    ``H_ba`` is ``N_r x N_t`` and ``H_ea`` is ``N_e x N_t``. Either may have
    zero rows.
    """

    H_ba: np.ndarray
    H_ea: np.ndarray
    sigma_b2: float = 1.0
    sigma_e2: float = 1.0

    def __post_init__(self):
        Hb = np.atleast_2d(np.asarray(self.H_ba, dtype=complex))
        He = np.atleast_2d(np.asarray(self.H_ea, dtype=complex))
        if Hb.ndim != 2 or He.ndim != 2:
            raise ValueError("channel matrices must be 2-D")
        if Hb.shape[1] != He.shape[1]:
            raise ValueError(
                f"H_ba has {Hb.shape[1]} columns but H_ea has {He.shape[1]}"
            )
        if not (self.sigma_b2 > 0 and self.sigma_e2 > 0):
            raise ValueError("noise variances must be strictly positive")
        if not (np.all(np.isfinite(Hb)) and np.all(np.isfinite(He))):
            raise ValueError("channel matrices must be finite")
        object.__setattr__(self, "H_ba", Hb)
        object.__setattr__(self, "H_ea", He)

    @property
    def N_t(self) -> int:
        return self.H_ba.shape[1]

    @property
    def N_r(self) -> int:
        return self.H_ba.shape[0]

    @property
    def N_e(self) -> int:
        return self.H_ea.shape[0]


@dataclass(frozen=True, eq=False)
class GsvdDecomposition:
    """Factors of the channel-pair GSVD plus dimension bookkeeping.

    ``N1`` and ``N2`` are the ranks of ``H_ba`` and ``H_ea``. The diagonal
    of ``Omega`` is real and positive because ``Omega_inv`` is produced as an
    upper-triangular factor with positive diagonal.
    """

    U_a: np.ndarray
    U_ba: np.ndarray
    U_ea: np.ndarray
    Omega: np.ndarray
    Omega_inv: np.ndarray
    Sigma_ba: np.ndarray
    Sigma_ea: np.ndarray
    k: int
    r: int
    s: int
    b: np.ndarray
    e: np.ndarray
    N1: int
    N2: int

    @property
    def N_t(self) -> int:
        return self.U_a.shape[0]

    @property
    def omega(self) -> np.ndarray:
        return np.diag(self.Omega).copy()

    @property
    def eve_only(self) -> slice:
        return slice(0, self.k - self.r - self.s)

    @property
    def shared(self) -> slice:
        return slice(self.k - self.r - self.s, self.k - self.r)

    @property
    def bob_only(self) -> slice:
        return slice(self.k - self.r, self.k)

    @property
    def dead(self) -> slice:
        return slice(self.k, self.N_t)

    def A(self) -> np.ndarray:
        """``N_t x N_t`` matrix with ``Omega`` in its leading ``k x k`` block."""
        A = np.zeros((self.N_t, self.N_t), dtype=complex)
        A[: self.k, : self.k] = self.Omega
        return A


def _tol_rel(channel: WiretapChannel, tol: float) -> float:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    if tol == 0:
        return 1e-10 * max(channel.N_t, channel.N_r + channel.N_e, 1)
    return tol


def _rank_from_sv(sv: np.ndarray, tol_rel: float, what: str) -> int:
    if sv.size == 0 or sv[0] == 0:
        return 0
    cutoff = tol_rel * sv[0]
    near = (sv > cutoff / AMBIGUITY_BAND) & (sv < cutoff * AMBIGUITY_BAND)
    if np.any(near):
        raise RankAmbiguityError(float(sv[near][0]), cutoff, what)
    return int(np.count_nonzero(sv > cutoff))


def numerical_rank(A: np.ndarray, tol_rel: float, what: str = "matrix") -> int:
    """Number of singular values above ``tol_rel * sigma_max``."""
    A = np.asarray(A)
    if A.size == 0:
        return 0
    return _rank_from_sv(np.linalg.svd(A, compute_uv=False), tol_rel, what)


def _null_basis(A: np.ndarray, tol_rel: float, what: str) -> np.ndarray:
    n = A.shape[1]
    if A.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, sv, Vh = np.linalg.svd(A, full_matrices=True)
    rank = _rank_from_sv(sv, tol_rel, what)
    return Vh[rank:].conj().T


def _row_basis(A: np.ndarray, tol_rel: float, what: str) -> np.ndarray:
    n = A.shape[1]
    if A.shape[0] == 0:
        return np.zeros((n, 0), dtype=complex)
    _, sv, Vh = np.linalg.svd(A, full_matrices=True)
    rank = _rank_from_sv(sv, tol_rel, what)
    return Vh[:rank].conj().T


def subspace_dims(channel: WiretapChannel, tol: float = 0.0) -> tuple[int, int, int]:
    """Dimensions ``(k, r, s)`` from direct subspace computations.

    ``k`` is the rank of the stacked channel, ``s`` the dimension of the
    intersection of the two row spaces, and ``r`` the number of independent
    directions Eve cannot see but Bob can, i.e. the rank of ``H_ba``
    restricted to ``null(H_ea)``.
    """
    t = _tol_rel(channel, tol)
    Hb, He = channel.H_ba, channel.H_ea
    k = numerical_rank(np.vstack([Hb, He]), t, "stacked channel")

    null_e = _null_basis(He, t, "H_ea")
    scale = np.linalg.norm(Hb, 2) if Hb.size else 0.0
    if null_e.shape[1] and scale > 0:
        # scale-free rank test: compare against ||H_ba|| rather than the restriction
        sv = np.linalg.svd(Hb @ null_e, compute_uv=False)
        r = _rank_from_sv(np.concatenate([[scale], sv]), t, "H_ba on null(H_ea)") - 1
    else:
        r = 0

    rb = _row_basis(Hb, t, "H_ba")
    re = _row_basis(He, t, "H_ea")
    if rb.shape[1] and re.shape[1]:
        # sines of the principal angles; zero sines are shared directions
        resid = re - rb @ (rb.conj().T @ re)
        sines = np.linalg.svd(resid, compute_uv=False)
        s = re.shape[1] - (_rank_from_sv(np.concatenate([[1.0], sines]), t, "row-space intersection") - 1)
    else:
        s = 0
    return k, r, s


def gsvd(channel: WiretapChannel, tol: float = 0.0) -> GsvdDecomposition:
    """GSVD of ``(H_ba, H_ea)`` via SVD of the stacked matrix, QR and a CS step.

    Parameters
    ----------
    channel : WiretapChannel
    tol : float
        Relative rank tolerance; ``0`` selects ``1e-10 * max(N_t, N_r + N_e)``.

    Raises
    ------
    RankAmbiguityError
        If any of the ranks involved is numerically ambiguous.
    """
    t = _tol_rel(channel, tol)
    # balance the blocks so the smaller one keeps its relative accuracy
    nb = np.linalg.norm(channel.H_ba, 2) if channel.H_ba.size else 0.0
    ne = np.linalg.norm(channel.H_ea, 2) if channel.H_ea.size else 0.0
    alpha = 1.0 / nb if nb > 0 else 1.0
    beta = 1.0 / ne if ne > 0 else 1.0
    d = _gsvd_core(alpha * channel.H_ba, beta * channel.H_ea, t)
    if alpha == beta == 1.0:
        return d

    n_eo = d.k - d.N1
    scale = np.empty(d.k)
    scale[:n_eo] = 1.0 / beta
    bs, es = d.b / alpha, d.e / beta
    scale[n_eo : n_eo + d.s] = np.hypot(bs, es)
    scale[n_eo + d.s :] = 1.0 / alpha
    b = bs / scale[n_eo : n_eo + d.s]
    e = es / scale[n_eo : n_eo + d.s]
    Sigma_ba = d.Sigma_ba.copy()
    Sigma_ea = d.Sigma_ea.copy()
    idx = np.arange(d.s)
    Sigma_ba[channel.N_r - d.N1 + idx, n_eo + idx] = b
    Sigma_ea[n_eo + idx, n_eo + idx] = e
    return replace(
        d,
        Omega_inv=scale[:, None] * d.Omega_inv,
        Omega=d.Omega / scale[None, :],
        Sigma_ba=Sigma_ba,
        Sigma_ea=Sigma_ea,
        b=b,
        e=e,
    )


def _gsvd_core(Hb: np.ndarray, He: np.ndarray, t: float) -> GsvdDecomposition:
    Nr, Nt = Hb.shape
    Ne = He.shape[0]
    H = np.vstack([Hb, He])

    N1 = numerical_rank(Hb, t, "H_ba")
    N2 = numerical_rank(He, t, "H_ea")
    if H.shape[0]:
        _, sv, Zh = np.linalg.svd(H, full_matrices=True)
        k = _rank_from_sv(sv, t, "stacked channel")
        U_a = Zh.conj().T
    else:
        k, U_a = 0, np.eye(Nt, dtype=complex)
    r = k - N2
    s = N1 + N2 - k
    if r < 0 or s < 0 or k - N1 < 0:
        raise RankAmbiguityError(float("nan"), t, "channel pair (inconsistent ranks)")

    Q, R = np.linalg.qr(H @ U_a[:, :k]) if k else (np.zeros((Nr + Ne, 0)), np.zeros((0, 0)))
    Q1, Q2 = Q[:Nr], Q[Nr:]

    # CS step: SVD of Eve's block orders the sines in descending order
    if Ne and k:
        U_ea, sines, Zh2 = np.linalg.svd(Q2, full_matrices=True)
        Z = Zh2.conj().T
    else:
        U_ea, sines, Z = np.eye(Ne, dtype=complex), np.zeros(0), np.eye(k, dtype=complex)

    n_eo = k - N1
    W1 = Q1 @ Z
    if N1:
        Qb, Rb = np.linalg.qr(W1[:, n_eo:])
        d = np.diag(Rb)
        ph = d / np.where(np.abs(d) > 0, np.abs(d), 1.0)
        Qb = Qb * ph[None, :]
        cosines = np.abs(d)
        full, _ = sla.qr(Qb, mode="full")
        U_ba = np.hstack([full[:, N1:], Qb])
    else:
        cosines = np.zeros(0)
        U_ba = np.eye(Nr, dtype=complex)

    b = cosines[:s].copy()
    e = sines[n_eo : n_eo + s].copy()
    norm = np.hypot(b, e)
    b, e = b / norm, e / norm
    order = np.argsort(b, kind="stable")
    if np.any(order != np.arange(s)):
        # near-ties can swap after normalisation; keep columns consistent
        b, e = b[order], e[order]

    Sigma_ba = np.zeros((Nr, k))
    for i in range(N1):
        Sigma_ba[Nr - N1 + i, n_eo + i] = b[i] if i < s else 1.0
    Sigma_ea = np.zeros((Ne, k))
    for i in range(N2):
        Sigma_ea[i, i] = 1.0 if i < n_eo else e[i - n_eo]

    Omega_inv = Z.conj().T @ R
    if k:
        T, Qr = sla.rq(Omega_inv)
        dT = np.diag(T)
        ph = dT / np.abs(dT)
        T = T * ph.conj()[None, :]
        Qr = Qr * ph[:, None]
        Omega_inv = T
        U_a = U_a.copy()
        U_a[:, :k] = U_a[:, :k] @ Qr.conj().T
        Omega = sla.solve_triangular(T, np.eye(k, dtype=complex))
    else:
        Omega = np.zeros((0, 0), dtype=complex)

    return GsvdDecomposition(
        U_a=U_a,
        U_ba=U_ba,
        U_ea=U_ea,
        Omega=Omega,
        Omega_inv=Omega_inv,
        Sigma_ba=Sigma_ba,
        Sigma_ea=Sigma_ea,
        k=k,
        r=r,
        s=s,
        b=b,
        e=e,
        N1=N1,
        N2=N2,
    )


def reconstruct(d: GsvdDecomposition) -> tuple[np.ndarray, np.ndarray]:
    """Multiply the factors back into ``(H_ba, H_ea)``."""
    right = np.zeros((d.k, d.N_t), dtype=complex)
    right[:, : d.k] = d.Omega_inv
    right = right @ d.U_a.conj().T
    return d.U_ba @ d.Sigma_ba @ right, d.U_ea @ d.Sigma_ea @ right
