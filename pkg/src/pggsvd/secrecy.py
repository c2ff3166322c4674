"""Secrecy-rate evaluators, high-SNR theorem checks and the complexity model."""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal

import numpy as np

from .constellation import MAX_ENUMERATION, Constellation, EnumerationOverflowError
from .gsvd import WiretapChannel, gsvd, numerical_rank, _tol_rel
from .mi import NoiseQuadrature, analyze
from .precoders import GsvdDesign, HattedGains, PgGsvdPrecoder, group_channels

__all__ = [
    "SecrecyEstimate",
    "ComplexityReport",
    "Theorem2Check",
    "secrecy_rate_exact",
    "secrecy_rate_exact_estimate",
    "secrecy_rate_grouped",
    "secrecy_rate_grouped_estimate",
    "gsvd_design_rate",
    "gsvd_high_snr_bound",
    "theorem2_condition",
    "addition_counts",
]


@dataclass(frozen=True)
class SecrecyEstimate:
    """``rate`` is ``max(0, raw)``; ``stderr`` is the quadrature standard error
    of ``raw`` (0 for deterministic quadrature)."""

    rate: float
    raw: float
    stderr: float
    bob_bits: float
    eve_bits: float


def _combine(terms, signs) -> SecrecyEstimate:
    """Sum signed MI estimates that share noise-node indices."""
    raw = sum(s * t.bits_raw for t, s in zip(terms, signs))
    bob = sum(t.bits_raw for t, s in zip(terms, signs) if s > 0)
    eve = sum(t.bits_raw for t, s in zip(terms, signs) if s < 0)
    per = sum(s * t.per_sample for t, s in zip(terms, signs))
    # only equally weighted (Monte Carlo) nodes carry a sampling error
    mc = all(t.weights.size > 1 and np.all(t.weights == t.weights[0]) for t in terms)
    se = float(np.std(per, ddof=1) / math.sqrt(per.size)) if mc else 0.0
    return SecrecyEstimate(rate=max(0.0, raw), raw=raw, stderr=se, bob_bits=bob, eve_bits=eve)


def secrecy_rate_exact_estimate(
    G: np.ndarray, channel: WiretapChannel, c: Constellation, q: NoiseQuadrature
) -> SecrecyEstimate:
    """Full-matrix ``I(y_b; x) - I(y_e; x)`` on a shared noise batch.

    Raises
    ------
    EnumerationOverflowError
        When ``M**N`` symbol vectors cannot be enumerated; use the grouped
        evaluator for large systems.
    """
    G = np.atleast_2d(np.asarray(G, dtype=complex))
    N = G.shape[1]
    if N and c.M**N > MAX_ENUMERATION:
        raise EnumerationOverflowError(
            f"exact evaluation needs {c.M}**{N} symbol vectors; "
            "use secrecy_rate_grouped for systems of this size"
        )
    bob = analyze(channel.H_ba @ G, c, channel.sigma_b2, q)
    eve = analyze(channel.H_ea @ G, c, channel.sigma_e2, q)
    return _combine([bob, eve], [1.0, -1.0])


def secrecy_rate_exact(
    G: np.ndarray, channel: WiretapChannel, c: Constellation, q: NoiseQuadrature
) -> float:
    """Secrecy rate ``max(0, I_b - I_e)`` of precoder ``G`` in bits."""
    return secrecy_rate_exact_estimate(G, channel, c, q).rate


def secrecy_rate_grouped_estimate(
    pre: PgGsvdPrecoder,
    h: HattedGains,
    channel: WiretapChannel,
    c: Constellation,
    q: NoiseQuadrature,
) -> SecrecyEstimate:
    Tb, Te = group_channels(pre, h)
    terms, signs = [], []
    for tb, te in zip(Tb, Te):
        terms.append(analyze(tb, c, channel.sigma_b2, q))
        signs.append(1.0)
        terms.append(analyze(te, c, channel.sigma_e2, q))
        signs.append(-1.0)
    return _combine(terms, signs)


def secrecy_rate_grouped(
    pre: PgGsvdPrecoder,
    h: HattedGains,
    channel: WiretapChannel,
    c: Constellation,
    q: NoiseQuadrature,
) -> float:
    """Sum over groups of Bob-minus-Eve MI on ``Ns``-dimensional channels."""
    return secrecy_rate_grouped_estimate(pre, h, channel, c, q).rate


def gsvd_design_rate(
    design: GsvdDesign, channel: WiretapChannel, c: Constellation, q: NoiseQuadrature
) -> SecrecyEstimate:
    """Decoupled (scalar per position) secrecy rate of a GSVD design."""
    h = design.gains
    terms, signs = [], []
    for j in np.flatnonzero(design.charges > 0):
        amp = math.sqrt(design.charges[j])
        terms.append(analyze(np.array([[h.g_b[j] * amp]]), c, channel.sigma_b2, q))
        signs.append(1.0)
        terms.append(analyze(np.array([[h.g_e[j] * amp]]), c, channel.sigma_e2, q))
        signs.append(-1.0)
    if not terms:
        return SecrecyEstimate(0.0, 0.0, 0.0, 0.0, 0.0)
    return _combine(terms, signs)


def gsvd_high_snr_bound(channel: WiretapChannel, c: Constellation, tol: float = 0.0) -> float:
    """High-SNR ceiling ``rank(H_ba) log2 M`` of the GSVD design."""
    N1 = numerical_rank(channel.H_ba, _tol_rel(channel, tol), "H_ba")
    return N1 * c.bits_per_symbol


@dataclass(frozen=True)
class Theorem2Check:
    holds: bool
    k: int
    N2: int
    r: int
    Ns: int
    N_t: int

    def __bool__(self):
        return self.holds


def theorem2_condition(channel: WiretapChannel, Ns: int, tol: float = 0.0) -> Theorem2Check:
    """Evaluate ``(k - N2) Ns >= N_t`` and cross-check ``r = k - N2``."""
    t = _tol_rel(channel, tol)
    k = numerical_rank(np.vstack([channel.H_ba, channel.H_ea]), t, "stacked channel")
    N2 = numerical_rank(channel.H_ea, t, "H_ea")
    d = gsvd(channel, tol)
    if d.r != k - N2:
        raise AssertionError(f"GSVD gives r={d.r} but k - N2 = {k - N2}")
    return Theorem2Check((k - N2) * Ns >= channel.N_t, k, N2, d.r, Ns, channel.N_t)


@dataclass(frozen=True)
class ComplexityReport:
    """Additions needed per MI/MMSE evaluation for each design."""

    gsvd_additions: int
    alg1_additions: int
    full_additions: int

    @staticmethod
    def sci(n: int, digits: int = 3) -> str:
        """Scientific text with ``digits`` significant figures (exact for big ints)."""
        return f"{Decimal(n):.{digits - 1}e}".lower()

    def rows(self) -> list[tuple[str, str]]:
        def fmt(n):
            return str(n) if n < 10**9 else self.sci(n)

        return [
            ("GSVD", fmt(self.gsvd_additions)),
            ("Algorithm 1", fmt(self.alg1_additions)),
            ("Full-matrix design", fmt(self.full_additions)),
        ]


def addition_counts(N_t: int, Ns: int, S: int, M: int) -> ComplexityReport:
    """``N_t M`` (GSVD), ``S M^(2Ns)`` (grouped), ``M^(2 N_t)`` (full)."""
    if S * Ns != N_t:
        raise ValueError(f"S * Ns = {S * Ns} must equal N_t = {N_t}")
    return ComplexityReport(N_t * M, S * M ** (2 * Ns), M ** (2 * N_t))
