"""Finite input alphabets and product-constellation enumeration."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Scheme",
    "Constellation",
    "EnumerationOverflowError",
    "MAX_ENUMERATION",
    "make_constellation",
    "parse_modulation",
    "product_points",
]

# Largest product alphabet we are willing to materialise.
MAX_ENUMERATION = 2**24


class Scheme(str, enum.Enum):
    BPSK = "bpsk"
    QPSK = "qpsk"
    QAM = "qam"


class EnumerationOverflowError(OverflowError):
    """Raised when M**N symbol vectors cannot be enumerated."""


@dataclass(frozen=True, eq=False)
class Constellation:
    """Equiprobable, zero-mean, unit-energy symbol alphabet.

    Attributes
    ----------
    scheme : Scheme
    M : int
        Alphabet size.
    points : np.ndarray
        Complex symbol values, shape ``(M,)``. Read-only.
    """

    scheme: Scheme
    M: int
    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def bits_per_symbol(self) -> float:
        return math.log2(self.M)

    @property
    def token(self) -> str:
        if self.scheme is Scheme.QAM:
            return f"qam{self.M}"
        return self.scheme.value

    def __eq__(self, other):
        if not isinstance(other, Constellation):
            return NotImplemented
        return (self.scheme, self.M) == (other.scheme, other.M)

    def __hash__(self):
        return hash((self.scheme, self.M))


def _square_qam(M: int) -> np.ndarray:
    L = math.isqrt(M)
    levels = np.arange(-(L - 1), L, 2, dtype=float)
    # real part varies slowest so the order is lexicographic in (re, im)
    grid = (levels[:, None] + 1j * levels[None, :]).ravel()
    # mean power of the unscaled grid is 2 (L^2 - 1) / 3
    return grid / math.sqrt(2.0 * (M - 1) / 3.0)


def make_constellation(scheme: Scheme | str, M: int | None = None) -> Constellation:
    """Build a normalised constellation.

    Parameters
    ----------
    scheme : Scheme or str
        ``"bpsk"``, ``"qpsk"`` or ``"qam"``.
    M : int, optional
        Alphabet size. Defaults to 2 for BPSK and 4 for QPSK; required for QAM.

    Raises
    ------
    ValueError
        If the pair is unsupported. Only square QAM with ``M = 4**j`` is
        accepted.
    """
    scheme = Scheme(scheme)
    if scheme is Scheme.BPSK:
        M = 2 if M is None else M
        if M != 2:
            raise ValueError(f"BPSK requires M=2, got M={M}")
        return Constellation(scheme, 2, np.array([1.0, -1.0], dtype=complex))
    if scheme is Scheme.QPSK:
        M = 4 if M is None else M
        if M != 4:
            raise ValueError(f"QPSK requires M=4, got M={M}")
        return Constellation(scheme, 4, _square_qam(4))
    if M is None or M < 4 or M & (M - 1) or math.isqrt(M) ** 2 != M:
        raise ValueError(
            f"QAM requires a square power-of-two alphabet (4, 16, 64, ...), got M={M}"
        )
    return Constellation(scheme, M, _square_qam(M))


def parse_modulation(token: str) -> Constellation:
    """Map CLI tokens such as ``"bpsk"``, ``"qpsk"``, ``"qam16"`` to a constellation."""
    t = token.strip().lower()
    if t in ("bpsk", "qpsk"):
        return make_constellation(t)
    if t.startswith("qam") and t[3:].isdigit():
        return make_constellation(Scheme.QAM, int(t[3:]))
    raise ValueError(f"unknown modulation token {token!r}")


def product_points(c: Constellation, N: int) -> np.ndarray:
    """All ``M**N`` symbol vectors in lexicographic order.

    Returns
    -------
    np.ndarray
        Complex array of shape ``(M**N, N)``; row ``i`` is the base-``M``
        expansion of ``i`` (most significant symbol first) mapped through
        ``c.points``.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    if N and c.M ** N > MAX_ENUMERATION:
        raise EnumerationOverflowError(
            f"{c.M}**{N} = {c.M ** N} symbol vectors exceed the enumeration "
            f"limit {MAX_ENUMERATION}"
        )
    K = c.M**N
    idx = np.arange(K)
    digits = np.empty((K, N), dtype=np.intp)
    for j in range(N - 1, -1, -1):
        digits[:, j] = idx % c.M
        idx = idx // c.M
    return c.points[digits]
