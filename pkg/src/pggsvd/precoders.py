"""GSVD and per-group GSVD (PG-GSVD) precoders.

Transmit positions are the columns of ``U_a A``. Position ``j`` reaches Bob
with scalar gain ``g_b[j]`` and Eve with ``g_e[j]`` per unit of *charged*
power, where charging ``c_j`` units of the power budget means
``p_j = c_j / w[j]`` with ``w[j] = ||Omega[:, j]||^2``. PG-GSVD groups the
positions ``Ns`` at a time and rotates each group with a unitary ``V_s``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constellation import Constellation, Scheme
from .gsvd import GsvdDecomposition, WiretapChannel, gsvd
from .mi import LN2, NoiseQuadrature, analyze, scalar_mi

__all__ = [
    "HattedGains",
    "GsvdDesign",
    "PgGsvdPrecoder",
    "OptimOptions",
    "OptimResult",
    "InfeasiblePairingError",
    "hatted_gains",
    "gsvd_precoder",
    "pair_subchannels",
    "assemble_G",
    "decoupling_residual",
    "group_channels",
    "optimize_pg_gsvd",
    "high_snr_construction",
    "precoder_from_gsvd_design",
    "polar_unitary",
    "dft_unitary",
    "best_of",
]


class InfeasiblePairingError(ValueError):
    """The Theorem-2 pairing needs ``(k - N2) * Ns >= N_t``."""


@dataclass(frozen=True, eq=False)
class HattedGains:
    """Per-position Bob/Eve gains and power weights.

    Positions are laid out in four contiguous blocks: Eve-only, shared,
    Bob-only, dead (sizes ``n_eve_only, s, r, n_dead``).
    """

    g_b: np.ndarray
    g_e: np.ndarray
    w: np.ndarray
    n_eve_only: int
    s: int
    r: int
    n_dead: int

    @property
    def N(self) -> int:
        return self.g_b.size

    @property
    def bob_only(self) -> np.ndarray:
        lo = self.n_eve_only + self.s
        return np.arange(lo, lo + self.r)

    def padded(self, N: int) -> "HattedGains":
        """Append dead positions up to ``N``."""
        extra = N - self.N
        if extra < 0:
            raise ValueError("cannot pad to fewer positions")
        if extra == 0:
            return self
        z = np.zeros(extra)
        return HattedGains(
            np.concatenate([self.g_b, z]),
            np.concatenate([self.g_e, z]),
            np.concatenate([self.w, z]),
            self.n_eve_only,
            self.s,
            self.r,
            self.n_dead + extra,
        )


def hatted_gains(d: GsvdDecomposition, N_t: int | None = None) -> HattedGains:
    """Scalar gains of the decoupled model.

    ``g_b[j] * sqrt(w[j] * p_j)`` is the amplitude Bob sees on position ``j``
    when the GSVD power matrix holds ``p_j`` there.
    """
    N_t = d.N_t if N_t is None else N_t
    if N_t < d.N_t:
        raise ValueError("N_t smaller than the decomposition")
    k, r, s = d.k, d.r, d.s
    n_eo = k - r - s
    sig_b = np.zeros(N_t)
    sig_e = np.zeros(N_t)
    sig_e[:n_eo] = 1.0
    sig_b[n_eo : n_eo + s] = d.b
    sig_e[n_eo : n_eo + s] = d.e
    sig_b[n_eo + s : k] = 1.0
    w = np.zeros(N_t)
    w[:k] = np.sum(np.abs(d.Omega) ** 2, axis=0)
    root = np.sqrt(np.where(w > 0, w, 1.0))
    return HattedGains(
        g_b=np.where(w > 0, sig_b / root, 0.0),
        g_e=np.where(w > 0, sig_e / root, 0.0),
        w=w,
        n_eve_only=n_eo,
        s=s,
        r=r,
        n_dead=N_t - k,
    )


# ---------------------------------------------------------------------------
# GSVD baseline


@dataclass(frozen=True, eq=False)
class GsvdDesign:
    """GSVD precoder ``G = U_a A P^(1/2)``.

    ``charges`` are the per-position budget shares (``w * p``); ``p`` is the
    diagonal of ``P``.
    """

    charges: np.ndarray
    p: np.ndarray
    G: np.ndarray
    gains: HattedGains


class _ScalarCurve:
    """Monotone interpolant of the scalar finite-alphabet MI curve."""

    def __init__(self, c: Constellation, q: NoiseQuadrature):
        self.cap = c.bits_per_symbol
        self.log_snr = np.linspace(math.log(1e-4), math.log(1e7), 221)
        vals = scalar_mi(np.exp(self.log_snr), c, q)
        self.vals = np.minimum(np.maximum.accumulate(vals), self.cap)

    def __call__(self, snr: np.ndarray) -> np.ndarray:
        snr = np.asarray(snr, dtype=float)
        out = np.empty(snr.shape)
        lo = snr <= math.exp(self.log_snr[0])
        out[lo] = self.vals[0] * snr[lo] / math.exp(self.log_snr[0])
        hi = ~lo
        out[hi] = np.interp(np.log(snr[hi]), self.log_snr, self.vals, right=self.cap)
        return out


@functools.lru_cache(maxsize=16)
def _scalar_curve(c: Constellation, q: NoiseQuadrature) -> _ScalarCurve:
    return _ScalarCurve(c, q)


def _allocate_scalar(a: np.ndarray, e: np.ndarray, P: float, curve: _ScalarCurve) -> np.ndarray:
    """Maximise ``sum I(a x) - I(e x)`` over ``x >= 0, sum x <= P``.

    The per-channel objectives are not concave, so the dual is searched
    over a grid of power levels and compared against simple feasible
    candidates.
    """
    n = a.size
    x = np.zeros(n)
    usable = np.flatnonzero(a > e)
    if P <= 0 or usable.size == 0:
        return x
    levels = np.concatenate([[0.0], P * np.logspace(-6, 0, 241)])
    au, eu = a[usable], e[usable]
    F = curve(au[:, None] * levels[None, :]) - curve(eu[:, None] * levels[None, :])

    def total(xu):
        return float(np.sum(curve(au * xu) - curve(eu * xu)))

    def primal(lam):
        return levels[np.argmax(F - lam * levels[None, :], axis=1)]

    candidates = []
    lo, hi = 1e-12, 1.0
    while primal(hi).sum() > P:
        hi *= 10.0
    if primal(lo).sum() <= P:
        candidates.append(primal(lo))
    else:
        for _ in range(100):
            mid = math.sqrt(lo * hi)
            if primal(mid).sum() > P:
                lo = mid
            else:
                hi = mid
        candidates.append(primal(hi))
    candidates.append(np.full(usable.size, P / usable.size))
    for i in range(usable.size):
        one = np.zeros(usable.size)
        one[i] = P
        candidates.append(one)
    best = max(candidates, key=total)
    x[usable] = best
    return x


def gsvd_precoder(
    d: GsvdDecomposition,
    c: Constellation,
    channel: WiretapChannel,
    P: float,
    q: NoiseQuadrature,
) -> GsvdDesign:
    """GSVD precoder with finite-alphabet secrecy power allocation.

    Positions whose Bob SNR per unit power does not exceed Eve's get no
    power; the remaining budget is split to maximise the decoupled secrecy
    rate estimated on the quadrature ``q``.
    """
    if not (math.isfinite(P) and P >= 0):
        raise ValueError(f"power budget must be finite and nonnegative, got {P!r}")
    h = hatted_gains(d)
    a = h.g_b**2 / channel.sigma_b2
    e = h.g_e**2 / channel.sigma_e2
    charges = _allocate_scalar(a, e, P, _scalar_curve(c, q))
    p = np.where(h.w > 0, charges / np.where(h.w > 0, h.w, 1.0), 0.0)
    G = d.U_a @ d.A() @ np.diag(np.sqrt(p))
    return GsvdDesign(charges=charges, p=p, G=G, gains=h)


# ---------------------------------------------------------------------------
# PG-GSVD structure


def dft_unitary(n: int) -> np.ndarray:
    j = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(j, j) / n) / math.sqrt(n)


def polar_unitary(X: np.ndarray) -> np.ndarray:
    """Nearest unitary matrix (polar factor), batched over leading axes."""
    U, _, Vh = np.linalg.svd(X)
    return U @ Vh


@dataclass(frozen=True, eq=False)
class PgGsvdPrecoder:
    """Per-group powers and rotations plus the pairing permutation.

    Attributes
    ----------
    perm : np.ndarray
        ``perm[g * Ns + i]`` is the position fed by slot ``i`` of group ``g``.
        Length ``S * Ns`` (positions ``>= N_t`` are padding).
    Ns : int
    charges : np.ndarray
        ``(S, Ns)`` diagonals of the group power matrices.
    V : np.ndarray
        ``(S, Ns, Ns)`` group unitaries.
    """

    perm: np.ndarray
    Ns: int
    charges: np.ndarray
    V: np.ndarray
    decomposition: GsvdDecomposition | None = field(default=None, repr=False)

    def __post_init__(self):
        perm = np.asarray(self.perm, dtype=np.intp)
        charges = np.asarray(self.charges, dtype=float)
        V = np.asarray(self.V, dtype=complex)
        if perm.size % self.Ns:
            raise ValueError("permutation length must be a multiple of Ns")
        if np.any(np.sort(perm) != np.arange(perm.size)):
            raise ValueError("perm is not a permutation")
        S = perm.size // self.Ns
        if charges.shape != (S, self.Ns) or V.shape != (S, self.Ns, self.Ns):
            raise ValueError("charges/V shapes do not match (S, Ns)")
        if np.any(charges < 0):
            raise ValueError("group powers must be nonnegative")
        eye = np.eye(self.Ns)
        for Vs in V:
            if np.linalg.norm(Vs.conj().T @ Vs - eye) > 1e-9:
                raise ValueError("group rotation is not unitary")
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "charges", charges)
        object.__setattr__(self, "V", V)

    @property
    def S(self) -> int:
        return self.perm.size // self.Ns

    @property
    def total_power(self) -> float:
        return float(self.charges.sum())

    def groups(self) -> np.ndarray:
        return self.perm.reshape(self.S, self.Ns)


def _n_padded(N_t: int, Ns: int) -> int:
    if Ns < 1:
        raise ValueError("Ns must be positive")
    return -(-N_t // Ns) * Ns


def pair_subchannels(h: HattedGains, Ns: int, strategy: str = "auto") -> np.ndarray:
    """Assign positions to groups.

    Parameters
    ----------
    h : HattedGains
    Ns : int
        Group size; positions are padded with dead entries to a multiple.
    strategy : {"theorem2", "interleave", "auto"}
        ``theorem2`` puts one Bob-only position in the last slot of every
        group (needs ``r >= S``). ``interleave`` deals positions sorted by
        ``g_b - g_e`` round-robin over the groups. ``auto`` uses
        ``theorem2`` when feasible.

    Raises
    ------
    InfeasiblePairingError
    """
    N = _n_padded(h.N, Ns)
    hp = h.padded(N)
    S = N // Ns
    feasible = h.r * Ns >= N
    if strategy == "auto":
        strategy = "theorem2" if feasible else "interleave"
    adv = hp.g_b - hp.g_e
    if strategy == "interleave":
        order = np.lexsort((np.arange(N), -adv))
        return order.reshape(Ns, S).T.ravel().copy()
    if strategy != "theorem2":
        raise ValueError(f"unknown pairing strategy {strategy!r}")
    if not feasible:
        raise InfeasiblePairingError(
            f"(k - N2) * Ns = {h.r} * {Ns} = {h.r * Ns} < N_t = {N}; "
            "the per-group Bob-only pairing needs (k - N2) Ns >= N_t"
        )
    bob = h.bob_only
    bob = bob[np.lexsort((bob, -hp.g_b[bob]))]
    anchors = bob[:S]
    rest = np.setdiff1d(np.arange(N), anchors)
    rest = rest[np.lexsort((rest, -adv[rest]))]
    groups = np.empty((S, Ns), dtype=np.intp)
    groups[:, -1] = anchors
    if Ns > 1:
        groups[:, :-1] = rest.reshape(Ns - 1, S).T
    return groups.ravel()


def _weights(d: GsvdDecomposition, N: int) -> np.ndarray:
    w = np.zeros(N)
    w[: d.k] = np.sum(np.abs(d.Omega) ** 2, axis=0)
    return w


def assemble_G(d: GsvdDecomposition, pre: PgGsvdPrecoder) -> np.ndarray:
    """``G = U_a A P^(1/2) V`` with ``P`` and ``V`` scattered by ``perm``.

    Returns an ``N_t x (S Ns)`` matrix; it is square unless padding was
    needed. Charges on zero-weight (dead) positions radiate nothing.
    """
    N = pre.perm.size
    if N < d.N_t:
        raise ValueError("precoder has fewer positions than transmit antennas")
    w = _weights(d, N)
    charge = np.zeros(N)
    charge[pre.perm] = pre.charges.ravel()
    p = np.where(w > 0, charge / np.where(w > 0, w, 1.0), 0.0)
    V = np.zeros((N, N), dtype=complex)
    for g, pos in enumerate(pre.groups()):
        V[np.ix_(pos, pos)] = pre.V[g]
    A = np.zeros((d.N_t, N), dtype=complex)
    A[: d.k, : d.k] = d.Omega
    return d.U_a @ A @ (np.sqrt(p)[:, None] * V)


def decoupling_residual(d: GsvdDecomposition, pre: PgGsvdPrecoder, G: np.ndarray) -> float:
    """Largest cross-group entry of ``U_ba^H H_ba G`` and ``U_ea^H H_ea G``,
    relative to the largest entry overall.

    Row ``i`` of the rotated Bob output is tied to one position (or none);
    its entries may only be nonzero in columns of that position's group.
    """
    H_ba, H_ea = _channels_from(d)
    N = G.shape[1]
    group_of = np.empty(N, dtype=np.intp)
    group_of[pre.perm] = np.repeat(np.arange(pre.S), pre.Ns)
    worst, scale = 0.0, 0.0
    for U, Sig, H in ((d.U_ba, d.Sigma_ba, H_ba), (d.U_ea, d.Sigma_ea, H_ea)):
        if H.shape[0] == 0:
            continue
        B = U.conj().T @ H @ G
        scale = max(scale, float(np.abs(B).max(initial=0.0)))
        allowed = np.zeros(B.shape, dtype=bool)
        rows, cols = np.nonzero(Sig)
        for row, pos in zip(rows, cols):
            allowed[row] = group_of == group_of[pos]
        worst = max(worst, float(np.abs(B[~allowed]).max(initial=0.0)))
    return worst / max(scale, 1.0)


def _channels_from(d: GsvdDecomposition):
    from .gsvd import reconstruct

    return reconstruct(d)


def group_channels(
    pre: PgGsvdPrecoder, h: HattedGains
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Per-group effective channels ``diag(g) P_s^(1/2) V_s`` for Bob and Eve."""
    hp = h.padded(pre.perm.size)
    Tb, Te = [], []
    for g, pos in enumerate(pre.groups()):
        amp = np.sqrt(pre.charges[g])
        Tb.append((hp.g_b[pos] * amp)[:, None] * pre.V[g])
        Te.append((hp.g_e[pos] * amp)[:, None] * pre.V[g])
    return Tb, Te


# ---------------------------------------------------------------------------
# Theorem-2 construction


def _distinguishing_row(c: Constellation, Ns: int) -> np.ndarray:
    """Unit-norm ``v`` such that ``x -> v @ x`` is injective on the product alphabet."""
    if c.scheme is Scheme.BPSK:
        v = np.array([(2.0 ** (j // 2)) * (1.0 if j % 2 == 0 else 1j) for j in range(Ns)])
    else:
        L = math.isqrt(c.M)
        v = np.array([float(L) ** (Ns - 1 - j) for j in range(Ns)], dtype=complex)
    return v / np.linalg.norm(v)


def _unitary_with_last_row(v: np.ndarray) -> np.ndarray:
    n = v.size
    seed = np.eye(n, dtype=complex)
    seed[:, 0] = v
    Q, R = np.linalg.qr(seed)
    Q[:, 0] *= R[0, 0] / abs(R[0, 0])  # first column becomes exactly v
    U = Q.T  # rows orthonormal; row 0 = v
    return np.roll(U, -1, axis=0)


def high_snr_construction(
    d: GsvdDecomposition,
    h: HattedGains,
    Ns: int,
    P: float,
    c: Constellation,
) -> PgGsvdPrecoder:
    """Precoder that saturates at ``N_t log2 M`` when ``(k - N2) Ns >= N_t``.

    Every group spends its share ``P / S`` on a single Bob-only position in
    its last slot, and ``V_s`` superposes the group's ``Ns`` symbols onto
    that slot with weights that keep all symbol vectors distinguishable.
    Eve sees nothing: every powered position has ``g_e = 0``.
    """
    perm = pair_subchannels(h, Ns, "theorem2")
    S = perm.size // Ns
    charges = np.zeros((S, Ns))
    if P > 0:
        charges[:, -1] = P / S
    Vs = _unitary_with_last_row(_distinguishing_row(c, Ns))
    V = np.broadcast_to(Vs, (S, Ns, Ns)).copy()
    return PgGsvdPrecoder(perm=perm, Ns=Ns, charges=charges, V=V, decomposition=d)


def precoder_from_gsvd_design(design: GsvdDesign, perm: np.ndarray, Ns: int) -> PgGsvdPrecoder:
    """Express a GSVD design in PG-GSVD form (identity rotations)."""
    perm = np.asarray(perm)
    ch = np.zeros(perm.size)
    ch[: design.charges.size] = design.charges
    S = perm.size // Ns
    V = np.broadcast_to(np.eye(Ns, dtype=complex), (S, Ns, Ns)).copy()
    return PgGsvdPrecoder(perm=perm, Ns=Ns, charges=ch[perm].reshape(S, Ns), V=V)


# ---------------------------------------------------------------------------
# Algorithm 1


@dataclass(frozen=True)
class OptimOptions:
    """Gradient-ascent settings.

    Steps are relative. The power step moves the coordinate with the
    largest gradient by ``mu`` times the total power in use (``P`` under
    ``"equal"``); ``mu`` starts at ``initial_step``, doubles after each
    accepted step up to ``max_power_step`` and is halved while
    backtracking. The rotation step has Frobenius norm at most
    ``initial_step``.

    ``power_projection`` selects how a power step is mapped back to the
    budget after clamping negative entries: ``"budget"`` rescales only when
    the total exceeds ``P`` (so designs that hold power back, such as the
    GSVD allocation, stay reachable), ``"equal"`` always rescales the total
    to exactly ``P``.
    """

    max_iters: int = 100
    epsilon: float = 1e-4
    initial_step: float = 0.5
    backtrack: float = 0.5
    max_halvings: int = 20
    quadrature: NoiseQuadrature = NoiseQuadrature()
    power_projection: str = "budget"
    max_power_step: float = 16.0

    def __post_init__(self):
        if self.max_iters < 1 or not self.epsilon > 0 or not self.initial_step > 0:
            raise ValueError("max_iters, epsilon and initial_step must be positive")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtrack factor must lie in (0, 1)")
        if self.max_power_step < self.initial_step:
            raise ValueError("max_power_step must be at least initial_step")
        if self.power_projection not in ("budget", "equal"):
            raise ValueError(f"unknown power projection {self.power_projection!r}")


@dataclass(frozen=True, eq=False)
class OptimResult:
    precoder: PgGsvdPrecoder
    trace: list[float]
    gains: HattedGains
    decomposition: GsvdDecomposition

    @property
    def rate(self) -> float:
        return max(0.0, self.trace[-1])

    @property
    def iterations(self) -> int:
        return len(self.trace) - 1


class _GroupObjective:
    """Grouped secrecy rate on a fixed noise batch, with gradients."""

    def __init__(self, gb, ge, c, sb2, se2, q):
        self.gb, self.ge = gb, ge  # (S, Ns)
        self.c, self.sb2, self.se2, self.q = c, sb2, se2, q

    def value(self, charges, V) -> float:
        total = 0.0
        for g in range(charges.shape[0]):
            amp = np.sqrt(charges[g])
            total += analyze((self.gb[g] * amp)[:, None] * V[g], self.c, self.sb2, self.q).bits_raw
            total -= analyze((self.ge[g] * amp)[:, None] * V[g], self.c, self.se2, self.q).bits_raw
        return total

    def gradients(self, charges, V):
        """Ascent directions for the charges (MMSE form) and ``conj(V)``."""
        d_ch = np.zeros_like(charges)
        d_V = np.zeros_like(V)
        for g in range(charges.shape[0]):
            amp = np.sqrt(charges[g])
            for gains, nv, sign in ((self.gb[g], self.sb2, 1.0), (self.ge[g], self.se2, -1.0)):
                D = gains * amp
                est = analyze(D[:, None] * V[g], self.c, nv, self.q, mmse=True, grad=True)
                VEV = np.einsum("ij,jk,ik->i", V[g], est.mmse, V[g].conj()).real
                d_ch[g] += sign * gains**2 * VEV / (nv * LN2)
                d_V[g] += sign * D[:, None] * est.grad_T
        if not (np.all(np.isfinite(d_ch)) and np.all(np.isfinite(d_V))):
            raise FloatingPointError("non-finite gradient in the grouped objective")
        return d_ch, d_V


def _normalize(charges: np.ndarray, P: float, mode: str = "equal") -> np.ndarray | None:
    tot = charges.sum()
    if mode == "budget":
        return charges * (P / tot) if tot > P else charges
    if tot <= 0:
        return None
    return charges * (P / tot)


def optimize_pg_gsvd(
    channel: WiretapChannel,
    c: Constellation,
    P: float,
    Ns: int,
    strategy: str = "auto",
    opts: OptimOptions = OptimOptions(),
    *,
    decomposition: GsvdDecomposition | None = None,
    init: str | PgGsvdPrecoder = "default",
    tol: float = 0.0,
) -> OptimResult:
    """Gradient ascent of the grouped secrecy rate over group powers and rotations.

    Each iteration takes a projected power step (clamp at zero, then map
    back to the budget per ``opts.power_projection``) and then a rotation
    step retracted to the unitary group by polar decomposition. Both steps
    backtrack until the objective, on the fixed noise batch
    ``opts.quadrature``, strictly increases; so the recorded trace never
    decreases. Stops once an iteration gains at most
    ``opts.epsilon`` bits or after ``opts.max_iters`` iterations.

    Parameters
    ----------
    init : {"default", "gsvd"} or PgGsvdPrecoder
        ``default``: equal power on positions Bob can see, DFT rotations;
        under the ``"budget"`` projection a second, low-power copy of this
        start is also run when ``P`` is large and the better run is kept.
        ``gsvd``: the GSVD baseline allocation with identity rotations.
        A precoder instance is used as given (its permutation wins).
    """
    if not (math.isfinite(P) and P >= 0):
        raise ValueError(f"power budget must be finite and nonnegative, got {P!r}")
    d = gsvd(channel, tol) if decomposition is None else decomposition
    h = hatted_gains(d)
    q = opts.quadrature

    if isinstance(init, PgGsvdPrecoder):
        if init.Ns != Ns:
            raise ValueError("initial precoder has a different group size")
        perm = init.perm
    else:
        perm = pair_subchannels(h, Ns, strategy)
    S = perm.size // Ns
    hp = h.padded(perm.size)
    gb = hp.g_b[perm].reshape(S, Ns)
    ge = hp.g_e[perm].reshape(S, Ns)

    if P <= 0:
        pre = PgGsvdPrecoder(perm, Ns, np.zeros((S, Ns)), np.broadcast_to(np.eye(Ns), (S, Ns, Ns)).copy(), d)
        return OptimResult(pre, [0.0], h, d)

    obj = _GroupObjective(gb, ge, c, channel.sigma_b2, channel.sigma_e2, q)
    if isinstance(init, PgGsvdPrecoder):
        starts = [(init.charges.copy(), init.V.copy())]
    elif init == "gsvd":
        design = gsvd_precoder(d, c, channel, P, q)
        start = precoder_from_gsvd_design(design, perm, Ns)
        starts = [(start.charges.copy(), start.V.copy())]
    elif init == "default":
        visible = (gb > 0).astype(float)
        if not visible.any():
            visible = (gb + ge > 0).astype(float)
        V0 = np.broadcast_to(dft_unitary(Ns), (S, Ns, Ns)).copy()
        full = _normalize(visible, P, "equal")
        starts = [(full if full is not None else visible, V0)]
        if opts.power_projection == "budget" and np.any(gb > 0):
            # A full-power start at high SNR saturates Bob and Eve alike and the
            # gradient vanishes there; a second start at the power that puts
            # the median Bob position at 0 dB lets the ascent grow into the budget.
            t = channel.sigma_b2 / float(np.median(gb[gb > 0] ** 2))
            low = visible * t
            if low.sum() < 0.5 * P:
                starts.append((low, V0.copy()))
    else:
        raise ValueError(f"unknown init {init!r}")

    best = None
    for charges, V in starts:
        # starting points are brought inside the budget
        fitted = _normalize(charges, P, opts.power_projection)
        charges = fitted if fitted is not None else charges
        run = _ascend(obj, charges, V, P, opts)
        if best is None or run[2][-1] > best[2][-1]:
            best = run
    charges, V, trace = best
    pre = PgGsvdPrecoder(perm=perm, Ns=Ns, charges=charges, V=V, decomposition=d)
    return OptimResult(pre, trace, h, d)


def _ascend(obj: _GroupObjective, charges, V, P: float, opts: OptimOptions):
    """Alternating power / rotation ascent from one start; returns ``(charges, V, trace)``."""
    f = obj.value(charges, V)
    trace = [f]
    mu_p = mu_v = opts.initial_step
    for _ in range(opts.max_iters):
        f_start = f
        d_ch, _ = obj.gradients(charges, V)
        scale = np.abs(d_ch).max()
        if scale > 0:
            step = mu_p
            # in budget mode steps are relative to the power in use, not the cap
            ref = charges.sum() if opts.power_projection == "budget" else P
            ref = ref if ref > 0 else P
            for _h in range(opts.max_halvings + 1):
                trial = _normalize(
                    np.maximum(charges + step * ref * d_ch / scale, 0.0), P, opts.power_projection
                )
                if trial is not None:
                    ft = obj.value(trial, V)
                    if ft > f:
                        charges, f = trial, ft
                        mu_p = min(2.0 * step, opts.max_power_step)
                        break
                step *= opts.backtrack

        _, d_V = obj.gradients(charges, V)
        gnorm = np.linalg.norm(d_V)
        if gnorm > 0:
            step = mu_v
            for _h in range(opts.max_halvings + 1):
                trial = polar_unitary(V + step * d_V / gnorm)
                ft = obj.value(charges, trial)
                if ft > f:
                    V, f = trial, ft
                    mu_v = min(2.0 * step, opts.initial_step)
                    break
                step *= opts.backtrack

        trace.append(f)
        if f - f_start <= opts.epsilon:
            break
    return charges, V, trace


def best_of(results: Sequence[OptimResult]) -> OptimResult:
    return max(results, key=lambda r: r.trace[-1])
