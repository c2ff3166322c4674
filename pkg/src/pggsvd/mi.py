"""Mutual information, MMSE matrix and gradients for discrete-input Gaussian channels.

For ``y = T x + n`` with ``x`` uniform over the product constellation and
``n ~ CN(0, noise_var I)``::

    I = N log2 M - M^-N sum_m E_n[ log2 sum_k exp(-(|T(x_m - x_k) + n|^2 - |n|^2) / noise_var) ]

The expectation over ``n`` is replaced by a fixed noise batch
(:class:`NoiseQuadrature`), so every quantity is a deterministic function
of ``T`` for a given seed. Internals work in nats; bits are produced at the
boundary.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .constellation import Constellation, product_points

__all__ = [
    "NoiseQuadrature",
    "MiResult",
    "MiEstimate",
    "analyze",
    "mutual_information",
    "mmse_matrix",
    "mi_gradient",
    "mi_gradient_mmse",
    "scalar_mi",
]

LN2 = math.log(2.0)
_CHUNK_ENTRIES = 2_000_000


@dataclass(frozen=True)
class NoiseQuadrature:
    """Noise expectation rule.

    Parameters
    ----------
    kind : {"mc", "gh"}
        Monte Carlo draws, or a tensor Gauss-Hermite grid.
    samples : int
        MC draws, or GH nodes per real dimension.
    seed : int
        Seed for MC noise and symbol draws.
    enumerate_symbols : bool
        If False (MC only), each noise draw is paired with one uniformly
        drawn transmit vector instead of all ``M**N``. Used for the
        full-matrix oracle on larger systems.
    """

    kind: str = "mc"
    samples: int = 500
    seed: int = 0
    enumerate_symbols: bool = True

    def __post_init__(self):
        if self.kind not in ("mc", "gh"):
            raise ValueError(f"unknown quadrature kind {self.kind!r}")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.kind == "gh" and not self.enumerate_symbols:
            raise ValueError("Gauss-Hermite quadrature requires enumerate_symbols=True")

    def with_seed(self, seed: int) -> "NoiseQuadrature":
        return NoiseQuadrature(self.kind, self.samples, int(seed), self.enumerate_symbols)

    def nodes(self, d: int) -> tuple[np.ndarray, np.ndarray]:
        """Unit-variance complex noise nodes ``(S, d)`` and weights ``(S,)``."""
        return _nodes(self.kind, self.samples, self.seed, d)

    def symbol_draws(self, K: int) -> np.ndarray:
        return _symbol_draws(self.samples, self.seed, K)


@functools.lru_cache(maxsize=64)
def _nodes(kind: str, samples: int, seed: int, d: int):
    if kind == "mc":
        rng = np.random.default_rng([seed, 0])
        g = rng.standard_normal((samples, 2 * max(d, 1)))
        z = (g[:, 0::2] + 1j * g[:, 1::2])[:, :d] / math.sqrt(2.0)
        w = np.full(samples, 1.0 / samples)
    else:
        if d > 2:
            raise ValueError(
                f"Gauss-Hermite quadrature supports at most 2 complex dimensions, got {d}"
            )
        t, wt = np.polynomial.hermite.hermgauss(samples)
        wt = wt / math.sqrt(math.pi)
        grids = np.meshgrid(*([t] * (2 * d)), indexing="ij")
        wgrids = np.meshgrid(*([wt] * (2 * d)), indexing="ij")
        re = np.stack([g.ravel() for g in grids[0::2]], axis=1)
        im = np.stack([g.ravel() for g in grids[1::2]], axis=1)
        z = (re + 1j * im) if d else np.zeros((1, 0), dtype=complex)
        w = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1) if d else np.ones(1)
    z.setflags(write=False)
    w.setflags(write=False)
    return z, w


@functools.lru_cache(maxsize=64)
def _symbol_draws(samples: int, seed: int, K: int) -> np.ndarray:
    rng = np.random.default_rng([seed, 1])
    idx = rng.integers(0, K, size=samples)
    idx.setflags(write=False)
    return idx


@functools.lru_cache(maxsize=32)
def _points(c: Constellation, N: int) -> np.ndarray:
    X = product_points(c, N)
    X.setflags(write=False)
    return X


@dataclass(frozen=True)
class MiResult:
    """Mutual information in bits with its cost and quadrature error.

    ``additions`` counts exponential terms summed per noise realization
    (``M**(2N)`` when all symbols are enumerated).
    """

    bits: float
    additions: int
    stderr: float = 0.0


@dataclass(frozen=True, eq=False)
class MiEstimate:
    """Full output of :func:`analyze`.

    ``per_sample`` holds one MI value (bits) per noise node; the estimate is
    ``weights @ per_sample``. ``grad_T`` is the derivative of the estimate
    with respect to ``conj(T)``, so ``dI = 2 Re tr(grad_T^H dT)``.
    """

    bits_raw: float
    cap: float
    per_sample: np.ndarray
    weights: np.ndarray
    stderr: float
    additions: int
    mmse: np.ndarray | None = None
    grad_T: np.ndarray | None = None

    @property
    def bits(self) -> float:
        """Estimate clamped to ``[0, N log2 M]``."""
        return float(min(max(self.bits_raw, 0.0), self.cap))


def _pairs(q: NoiseQuadrature, K: int, S: int, w: np.ndarray):
    if q.enumerate_symbols:
        mi = np.tile(np.arange(K), S)
        si = np.repeat(np.arange(S), K)
        pw = np.repeat(w, K) / K
    else:
        mi = np.asarray(q.symbol_draws(K))
        si = np.arange(S)
        pw = w
    return mi, si, pw


def analyze(
    T: np.ndarray,
    c: Constellation,
    noise_var: float,
    q: NoiseQuadrature,
    *,
    mmse: bool = False,
    grad: bool = False,
) -> MiEstimate:
    """Estimate ``I(y; x)`` for ``y = T x + n`` and optionally the MMSE
    matrix and the exact gradient of the estimate.

    Parameters
    ----------
    T : array_like, shape (d, N)
    c : Constellation
    noise_var : float
    q : NoiseQuadrature
    mmse, grad : bool
        Also return the MMSE matrix / ``dI/dconj(T)`` (bits).
    """
    T = np.atleast_2d(np.asarray(T, dtype=complex))
    if not np.all(np.isfinite(T)):
        raise ValueError("T has non-finite entries")
    if not noise_var > 0:
        raise ValueError("noise_var must be positive")
    d, N = T.shape
    X = _points(c, N)
    K = X.shape[0]
    cap = N * c.bits_per_symbol
    z, w = q.nodes(d)
    S = w.size
    additions = K * K if q.enumerate_symbols else K

    if not np.any(T):
        return MiEstimate(
            bits_raw=0.0,
            cap=cap,
            per_sample=np.zeros(S),
            weights=w,
            stderr=0.0,
            additions=additions,
            mmse=np.eye(N, dtype=complex) if mmse else None,
            grad_T=np.zeros((d, N), dtype=complex) if grad else None,
        )

    noise = z * math.sqrt(noise_var)
    TX = X @ T.T  # row k is (T x_k)^T
    sq = np.einsum("kd,kd->k", TX.real, TX.real) + np.einsum("kd,kd->k", TX.imag, TX.imag)
    A = TX.conj() @ noise.T  # A[k, s] = (T x_k)^H n_s

    mi, si, pw = _pairs(q, K, S, w)
    per_sample = np.zeros(S)
    inner = 1.0 / K if q.enumerate_symbols else 1.0

    if mmse:
        E = np.zeros((N, N), dtype=complex)
    if grad:
        C = np.zeros((N, N), dtype=complex)
        post_mass = np.zeros(K)
        noise_term = np.zeros((d, N), dtype=complex)

    step = max(1, _CHUNK_ENTRIES // K)
    for lo in range(0, mi.size, step):
        m = mi[lo : lo + step]
        s = si[lo : lo + step]
        p = pw[lo : lo + step]
        gram = TX[m].conj() @ TX.T
        expo = sq[m][:, None] + sq[None, :] - 2.0 * gram.real
        expo += 2.0 * (A[m, s][:, None] - A[:, s].T).real
        expo *= -1.0 / noise_var
        emax = expo.max(axis=1)
        ex = np.exp(expo - emax[:, None])
        ssum = ex.sum(axis=1)
        L = emax + np.log(ssum)
        per_sample += np.bincount(s, weights=inner * L, minlength=S)
        if mmse or grad:
            post = ex / ssum[:, None]
            xhat = post @ X
            err = X[m] - xhat
        if mmse:
            E += (err * p[:, None]).T @ err.conj()
        if grad:
            xm = X[m] * p[:, None]
            C += xm.T @ (X[m] - xhat).conj() - (xhat * p[:, None]).T @ X[m].conj()
            post_mass += p @ post
            noise_term += (noise[s] * p[:, None]).T @ err.conj()

    per_sample_bits = cap - per_sample / LN2
    bits_raw = float(w @ per_sample_bits)
    if q.kind == "mc" and S > 1:
        stderr = float(np.std(per_sample_bits, ddof=1) / math.sqrt(S))
    else:
        stderr = 0.0

    E_out = None
    if mmse:
        E_out = 0.5 * (E + E.conj().T)
    G_out = None
    if grad:
        # sum_k pi_k (x_m - x_k)(x_m - x_k)^H, accumulated over all pairs
        C += X.T @ (post_mass[:, None] * X.conj())
        G_out = (T @ C + noise_term) / (noise_var * LN2)

    return MiEstimate(
        bits_raw=bits_raw,
        cap=cap,
        per_sample=per_sample_bits,
        weights=w,
        stderr=stderr,
        additions=additions,
        mmse=E_out,
        grad_T=G_out,
    )


def mutual_information(
    T: np.ndarray, c: Constellation, noise_var: float, q: NoiseQuadrature
) -> MiResult:
    """``I(y; x)`` in bits for ``y = T x + n``, clamped to ``[0, N log2 M]``."""
    est = analyze(T, c, noise_var, q)
    return MiResult(bits=est.bits, additions=est.additions, stderr=est.stderr)


def mmse_matrix(
    T: np.ndarray, c: Constellation, noise_var: float, q: NoiseQuadrature
) -> np.ndarray:
    """``E[(x - E[x|y])(x - E[x|y])^H]``, Hermitian ``N x N``."""
    return analyze(T, c, noise_var, q, mmse=True).mmse


def mi_gradient(
    H_eff: np.ndarray,
    G: np.ndarray,
    c: Constellation,
    noise_var: float,
    q: NoiseQuadrature,
) -> np.ndarray:
    """Gradient of ``I(x; H_eff G x + n)`` (bits) with respect to ``conj(G)``.

    This is the exact derivative of the quadrature estimate, so it agrees
    with finite differences taken on the same noise nodes. As the quadrature
    is refined it converges to ``H_eff^H H_eff G E / (noise_var ln 2)``
    (see :func:`mi_gradient_mmse`).
    """
    H_eff = np.atleast_2d(np.asarray(H_eff, dtype=complex))
    G = np.atleast_2d(np.asarray(G, dtype=complex))
    est = analyze(H_eff @ G, c, noise_var, q, grad=True)
    return H_eff.conj().T @ est.grad_T


def mi_gradient_mmse(
    H_eff: np.ndarray,
    G: np.ndarray,
    c: Constellation,
    noise_var: float,
    q: NoiseQuadrature,
) -> np.ndarray:
    """Closed-form gradient ``H_eff^H H_eff G E / (noise_var ln 2)``."""
    H_eff = np.atleast_2d(np.asarray(H_eff, dtype=complex))
    G = np.atleast_2d(np.asarray(G, dtype=complex))
    E = mmse_matrix(H_eff @ G, c, noise_var, q)
    return H_eff.conj().T @ H_eff @ G @ E / (noise_var * LN2)


def scalar_mi(snr: np.ndarray, c: Constellation, q: NoiseQuadrature) -> np.ndarray:
    """MI (bits) of ``y = sqrt(snr) x + n``, ``n ~ CN(0, 1)``, for each SNR."""
    snr = np.atleast_1d(np.asarray(snr, dtype=float))
    out = np.empty(snr.shape)
    for i, g in enumerate(snr.flat):
        out.flat[i] = analyze(np.array([[math.sqrt(max(g, 0.0))]]), c, 1.0, q).bits
    return out
