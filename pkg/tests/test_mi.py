import math

import numpy as np
import pytest
from scipy.special import logsumexp

from pggsvd.constellation import make_constellation, product_points
from pggsvd.mi import (
    NoiseQuadrature,
    analyze,
    mi_gradient,
    mi_gradient_mmse,
    mmse_matrix,
    mutual_information,
    scalar_mi,
)

BPSK = make_constellation("bpsk")
QPSK = make_constellation("qpsk")
QAM16 = make_constellation("qam", 16)
GH = NoiseQuadrature("gh", 120)

# Reference values for y = a x + n, n ~ CN(0, 1), in bits.
# Computed independently per real dimension with scipy.integrate.quad:
#   I_pam(levels, s2) = log2 L - (1/L) sum_l int log2 sum_j exp(-((l - l_j + n)^2 - n^2) / s2)
#                                          * exp(-n^2 / s2) / sqrt(pi s2) dn
# BPSK = I_pam([a, -a]), QPSK = 2 I_pam([+-a/sqrt2]), 16-QAM = 2 I_pam({+-1, +-3} a / sqrt10).
ORACLE = {
    "bpsk": {
        0.1: 0.014284558300406758,
        0.5: 0.290480113360848,
        1.0: 0.721451590790388,
        math.sqrt(0.5): 0.48594415413293535,
        2.0: 0.9904618221304519,
        10.0: 1.0,
    },
    "qpsk": {
        0.1: 0.014355290665486908,
        0.5: 0.32149443959283364,
        1.0: 0.9718883082658705,
        math.sqrt(0.5): 0.580960226721696,
        2.0: 1.8256445715489642,
        10.0: 2.0,
    },
    "qam16": {
        0.1: 0.014355291908348722,
        0.5: 0.3217358001205799,
        1.0: 0.9897413721302524,
        math.sqrt(0.5): 0.5832988929470586,
        2.0: 2.208463697904004,
        10.0: 3.9999499847212077,
    },
}
CONST = {"bpsk": BPSK, "qpsk": QPSK, "qam16": QAM16}
CASES = [(m, a, v) for m, tab in ORACLE.items() for a, v in tab.items()]


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def naive_mi(T, c, nv, noise):
    """Direct transcription of the MI expression with scipy's logsumexp."""
    X = product_points(c, T.shape[1])
    N = T.shape[1]
    tot = 0.0
    for n in noise:
        for xm in X:
            d = (xm[None, :] - X) @ T.T + n[None, :]
            tot += logsumexp(-(np.sum(np.abs(d) ** 2, axis=1) - np.sum(np.abs(n) ** 2)) / nv)
    return N * c.bits_per_symbol - tot / (len(noise) * len(X)) / math.log(2)


@pytest.mark.parametrize("mod,a,ref", CASES)
def test_scalar_oracle_gauss_hermite(mod, a, ref):
    got = mutual_information(np.array([[a]]), CONST[mod], 1.0, GH).bits
    assert abs(got - ref) < 1e-7


@pytest.mark.parametrize("mod,a,ref", CASES)
def test_scalar_oracle_monte_carlo(mod, a, ref):
    r = mutual_information(np.array([[a]]), CONST[mod], 1.0, NoiseQuadrature("mc", 4000, 7))
    # near saturation the error is driven by rare draws the sample SE misses
    assert abs(r.bits - ref) <= max(4 * r.stderr, 1e-4)


def test_noise_variance_scaling():
    # BPSK with amplitude 1 and noise variance 2 equals amplitude sqrt(1/2) at unit noise
    got = mutual_information(np.array([[1.0]]), BPSK, 2.0, GH).bits
    assert abs(got - 0.48594415413293524) < 1e-5


def test_scalar_mi_vectorised():
    snr = np.array([0.01, 1.0, 4.0])
    got = scalar_mi(snr, QPSK, GH)
    ref = [ORACLE["qpsk"][0.1], ORACLE["qpsk"][1.0], ORACLE["qpsk"][2.0]]
    np.testing.assert_allclose(got, ref, atol=1e-5)


@pytest.mark.parametrize("c", [BPSK, QPSK, QAM16])
def test_zero_precoder(c):
    T = np.zeros((2, 2))
    est = analyze(T, c, 1.0, NoiseQuadrature(), mmse=True, grad=True)
    assert est.bits == 0.0
    np.testing.assert_array_equal(est.mmse, np.eye(2))
    np.testing.assert_array_equal(est.grad_T, 0)


def test_high_snr_saturates():
    assert 0.999 <= mutual_information(np.array([[10.0]]), BPSK, 1.0, GH).bits <= 1.0
    T = 100 * np.eye(2)
    assert mmse_matrix(T, QPSK, 1.0, NoiseQuadrature("mc", 200)) == pytest.approx(np.zeros((2, 2)), abs=1e-12)
    assert mutual_information(T, QPSK, 1.0, NoiseQuadrature("mc", 200)).bits == pytest.approx(4.0)


@pytest.mark.parametrize("seed", range(5))
def test_mmse_hermitian_psd_bounded(seed):
    rng = np.random.default_rng(seed)
    T = crandn(rng, 3, 2) * rng.uniform(0.2, 3.0)
    E = mmse_matrix(T, QPSK, 1.0, NoiseQuadrature("mc", 300, seed))
    np.testing.assert_allclose(E, E.conj().T, atol=1e-14)
    ev = np.linalg.eigvalsh(E)
    assert ev.min() >= -1e-6 and ev.max() <= 1 + 1e-6


@pytest.mark.parametrize("c", [BPSK, QPSK])
@pytest.mark.parametrize("seed", range(3))
def test_gradient_matches_finite_differences(c, seed):
    rng = np.random.default_rng(seed)
    H = crandn(rng, 3, 2)
    G = crandn(rng, 2, 2)
    q = NoiseQuadrature("mc", 200, seed)
    grad = mi_gradient(H, G, c, 0.7, q)
    f = lambda G_: analyze(H @ G_, c, 0.7, q).bits_raw  # noqa: E731
    h = 1e-6
    fd = np.zeros_like(G)
    for idx in np.ndindex(G.shape):
        E = np.zeros_like(G)
        E[idx] = h
        dre = (f(G + E) - f(G - E)) / (2 * h)
        dim = (f(G + 1j * E) - f(G - 1j * E)) / (2 * h)
        fd[idx] = 0.5 * (dre + 1j * dim)  # d/d conj(G)
    np.testing.assert_allclose(grad, fd, atol=1e-6, rtol=1e-5)


def test_gradient_mmse_form_agrees_under_quadrature():
    rng = np.random.default_rng(11)
    H = crandn(rng, 2, 2)
    G = crandn(rng, 2, 2)
    q = NoiseQuadrature("gh", 16)
    a = mi_gradient(H, G, QPSK, 1.0, q)
    b = mi_gradient_mmse(H, G, QPSK, 1.0, q)
    np.testing.assert_allclose(a, b, atol=2e-4 * np.abs(b).max())


@pytest.mark.parametrize("c", [BPSK, QPSK, QAM16])
def test_bounds_and_monotone_in_scale(c):
    rng = np.random.default_rng(0)
    T = crandn(rng, 2, 2)
    q = NoiseQuadrature("gh", 4 if c.M > 4 else 12)
    vals = [mutual_information(a * T, c, 1.0, q).bits for a in (0.1, 0.3, 1, 3, 10, 30)]
    assert all(0 <= v <= 2 * c.bits_per_symbol for v in vals)
    assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))


def test_left_unitary_invariance():
    rng = np.random.default_rng(4)
    T = crandn(rng, 2, 2)
    U = np.linalg.qr(crandn(rng, 2, 2))[0]
    q = NoiseQuadrature("gh", 16)
    a = mutual_information(T, QPSK, 1.0, q).bits
    b = mutual_information(U @ T, QPSK, 1.0, q).bits
    assert abs(a - b) < 1e-4  # the GH grid itself is not rotation invariant


def test_diagonal_channel_is_additive():
    q = NoiseQuadrature("gh", 30)
    T = np.diag([0.7, 1.6])
    ref = sum(mutual_information(np.array([[t]]), QPSK, 1.0, q).bits for t in (0.7, 1.6))
    assert abs(mutual_information(T, QPSK, 1.0, q).bits - ref) < 1e-5


@pytest.mark.parametrize("c", [BPSK, QPSK])
def test_matches_naive_transcription(c):
    rng = np.random.default_rng(2)
    T = crandn(rng, 2, 2) * 1.3
    q = NoiseQuadrature("mc", 60, 5)
    noise = q.nodes(2)[0] * math.sqrt(0.8)
    ref = naive_mi(T, c, 0.8, noise)
    assert abs(analyze(T, c, 0.8, q).bits_raw - ref) < 1e-10


def test_sampled_symbols_mode_is_unbiased():
    rng = np.random.default_rng(8)
    T = crandn(rng, 2, 2)
    ref = mutual_information(T, QPSK, 1.0, NoiseQuadrature("gh", 16)).bits
    r = mutual_information(T, QPSK, 1.0, NoiseQuadrature("mc", 20000, 1, enumerate_symbols=False))
    assert r.additions == 16
    assert abs(r.bits - ref) <= 4 * r.stderr


def test_deterministic_for_fixed_seed():
    rng = np.random.default_rng(1)
    T = crandn(rng, 2, 2)
    q = NoiseQuadrature("mc", 100, 42)
    assert analyze(T, QPSK, 1.0, q).bits_raw == analyze(T, QPSK, 1.0, q).bits_raw
    assert analyze(T, QPSK, 1.0, q).bits_raw != analyze(T, QPSK, 1.0, q.with_seed(43)).bits_raw


def test_additions_count():
    est = analyze(np.eye(2), QPSK, 1.0, NoiseQuadrature("mc", 10))
    assert est.additions == 4**4


def test_input_validation():
    with pytest.raises(ValueError):
        analyze(np.array([[np.inf]]), BPSK, 1.0, GH)
    with pytest.raises(ValueError):
        analyze(np.eye(1), BPSK, 0.0, GH)
    with pytest.raises(ValueError):
        NoiseQuadrature("sobol")
    with pytest.raises(ValueError):
        NoiseQuadrature("mc", 0)
    with pytest.raises(ValueError):
        NoiseQuadrature("gh", 10, enumerate_symbols=False)
    with pytest.raises(ValueError):
        analyze(np.eye(3), BPSK, 1.0, GH)


def test_gradient_at_zero_precoder():
    H = np.array([[1.0 + 0.5j, -0.3]])
    np.testing.assert_array_equal(mi_gradient(H, np.zeros((2, 2)), QPSK, 1.0, GH), 0)


def test_scalar_gradient_positive():
    g = mi_gradient(np.eye(1), np.array([[1.0]]), BPSK, 1.0, NoiseQuadrature("gh", 40))
    assert g.real.item() > 0 and abs(g.imag.item()) < 1e-12
