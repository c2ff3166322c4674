"""Shared checks for the test modules."""

import numpy as np

from pggsvd.gsvd import GsvdDecomposition, WiretapChannel, reconstruct


def rel_err(A, B):
    A, B = np.asarray(A), np.asarray(B)
    scale = max(np.linalg.norm(B), 1e-300)
    return np.linalg.norm(A - B) / scale if B.size else 0.0


def unitarity_err(U):
    return np.linalg.norm(U.conj().T @ U - np.eye(U.shape[1]))


def independent_ranks(ch: WiretapChannel):
    """(N1, N2, k) by plain SVD rank counts (numpy's default tolerance)."""
    rk = lambda A: int(np.linalg.matrix_rank(A)) if A.size else 0  # noqa: E731
    return rk(ch.H_ba), rk(ch.H_ea), rk(np.vstack([ch.H_ba, ch.H_ea]))


def assert_valid_decomposition(ch: WiretapChannel, d: GsvdDecomposition, tol=1e-10):
    Hb, He = reconstruct(d)
    if ch.H_ba.size and np.linalg.norm(ch.H_ba):
        assert rel_err(Hb, ch.H_ba) < tol
    else:
        assert np.linalg.norm(Hb) < tol
    if ch.H_ea.size and np.linalg.norm(ch.H_ea):
        assert rel_err(He, ch.H_ea) < tol
    else:
        assert np.linalg.norm(He) < tol

    for U in (d.U_a, d.U_ba, d.U_ea):
        assert unitarity_err(U) < tol

    # ordered generalized singular pairs
    assert d.b.size == d.e.size == d.s
    np.testing.assert_allclose(d.b**2 + d.e**2, 1.0, atol=tol)
    assert np.all(d.b > 0) and np.all(d.b < 1)
    assert np.all(d.e > 0) and np.all(d.e < 1)
    assert np.all(np.diff(d.b) >= -1e-12)
    assert np.all(np.diff(d.e) <= 1e-12)

    # Omega non-singular, triangular with real positive diagonal
    if d.k:
        assert np.all(d.omega.real > 0) and np.allclose(d.omega.imag, 0)
        np.testing.assert_allclose(d.Omega @ d.Omega_inv, np.eye(d.k), atol=1e-9)

    # block-zero patterns of Sigma_ba / Sigma_ea
    n_eo = d.k - d.r - d.s
    Nr, Ne = ch.N_r, ch.N_e
    Sb = np.zeros((Nr, d.k))
    Sb[Nr - d.N1 :, n_eo:] = np.eye(d.N1)
    if d.s:
        Sb[Nr - d.N1 : Nr - d.N1 + d.s, n_eo : n_eo + d.s] = np.diag(d.b)
    Se = np.zeros((Ne, d.k))
    Se[: d.N2, : d.N2] = np.eye(d.N2)
    if d.s:
        Se[n_eo : n_eo + d.s, n_eo : n_eo + d.s] = np.diag(d.e)
    np.testing.assert_array_equal(d.Sigma_ba, Sb)
    np.testing.assert_array_equal(d.Sigma_ea, Se)

    assert d.k <= min(ch.N_t, Nr + Ne)
    assert d.r + d.s <= d.k
