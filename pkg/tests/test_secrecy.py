import math

import numpy as np
import pytest

from pggsvd.constellation import EnumerationOverflowError, make_constellation
from pggsvd.gsvd import WiretapChannel, gsvd
from pggsvd.harness import generate_channel
from pggsvd.mi import NoiseQuadrature
from pggsvd.precoders import (
    PgGsvdPrecoder,
    assemble_G,
    gsvd_precoder,
    hatted_gains,
    pair_subchannels,
    polar_unitary,
)
from pggsvd.secrecy import (
    ComplexityReport,
    addition_counts,
    gsvd_design_rate,
    gsvd_high_snr_bound,
    secrecy_rate_exact,
    secrecy_rate_exact_estimate,
    secrecy_rate_grouped,
    secrecy_rate_grouped_estimate,
    theorem2_condition,
)

BPSK = make_constellation("bpsk")
QPSK = make_constellation("qpsk")
MC = NoiseQuadrature("mc", 300, 0)


def test_zero_precoder_has_zero_rate():
    ch = generate_channel(4, 3, 2, 0)
    assert secrecy_rate_exact(np.zeros((4, 4)), ch, BPSK, MC) == 0.0


def test_no_eavesdropper_signal_gives_full_rate():
    ch = WiretapChannel(np.eye(2), np.zeros((2, 2)))
    assert secrecy_rate_exact(10 * np.eye(2), ch, BPSK, NoiseQuadrature("gh", 10)) == pytest.approx(2.0)


def test_identical_channels_give_zero():
    H = generate_channel(3, 3, 3, 1).H_ba
    ch = WiretapChannel(H, H.copy())
    G = np.eye(3)
    est = secrecy_rate_exact_estimate(G, ch, QPSK, MC)
    assert est.raw == pytest.approx(0.0, abs=1e-12)
    assert est.rate == 0.0 and est.stderr == pytest.approx(0.0, abs=1e-12)


def test_rate_is_clamped_at_zero():
    # Eve has the stronger channel: the difference is negative and clamps
    ch = WiretapChannel(0.1 * np.eye(2), np.eye(2))
    est = secrecy_rate_exact_estimate(np.eye(2), ch, BPSK, MC)
    assert est.raw < 0 and est.rate == 0.0
    assert est.bob_bits < est.eve_bits


def test_exact_refuses_huge_enumeration():
    ch = generate_channel(16, 12, 12, 0)
    with pytest.raises(EnumerationOverflowError) as exc:
        secrecy_rate_exact(np.eye(16), ch, QPSK, MC)
    assert "secrecy_rate_grouped" in str(exc.value)


@pytest.mark.parametrize("shape,strategy", [((4, 3, 2), "theorem2"), ((6, 4, 4), "interleave")])
def test_grouped_matches_exact_for_decoupled_precoder(shape, strategy):
    ch = generate_channel(*shape, seed=5)
    d = gsvd(ch)
    h = hatted_gains(d)
    perm = pair_subchannels(h, 2, strategy)
    S = perm.size // 2
    rng = np.random.default_rng(0)
    V = polar_unitary(rng.standard_normal((S, 2, 2)) + 1j * rng.standard_normal((S, 2, 2)))
    pre = PgGsvdPrecoder(perm, 2, rng.uniform(0.5, 3.0, (S, 2)), V, d)
    grouped = secrecy_rate_grouped_estimate(pre, h, ch, BPSK, NoiseQuadrature("gh", 24))
    exact = secrecy_rate_exact_estimate(assemble_G(d, pre), ch, BPSK, NoiseQuadrature("mc", 3000, 1))
    assert abs(grouped.raw - exact.raw) <= 4 * exact.stderr + 1e-4


def test_gsvd_design_rate_matches_exact():
    ch = generate_channel(4, 3, 2, 0)
    d = gsvd(ch)
    des = gsvd_precoder(d, QPSK, ch, 3.0, NoiseQuadrature("gh", 40))
    dec = gsvd_design_rate(des, ch, QPSK, NoiseQuadrature("gh", 60))
    exact = secrecy_rate_exact_estimate(des.G, ch, QPSK, NoiseQuadrature("mc", 3000, 2))
    assert abs(dec.raw - exact.raw) <= 4 * exact.stderr + 1e-4
    assert dec.stderr == 0.0


def test_gsvd_design_rate_zero_power():
    ch = generate_channel(4, 3, 2, 0)
    des = gsvd_precoder(gsvd(ch), QPSK, ch, 0.0, MC)
    assert gsvd_design_rate(des, ch, QPSK, MC).rate == 0.0


def test_grouped_rate_wrapper():
    ch = generate_channel(4, 3, 2, 0)
    d = gsvd(ch)
    h = hatted_gains(d)
    perm = pair_subchannels(h, 2)
    pre = PgGsvdPrecoder(perm, 2, np.ones((2, 2)), np.broadcast_to(np.eye(2), (2, 2, 2)).copy(), d)
    est = secrecy_rate_grouped_estimate(pre, h, ch, BPSK, MC)
    assert secrecy_rate_grouped(pre, h, ch, BPSK, MC) == est.rate
    assert est.stderr > 0


@pytest.mark.parametrize("mod,bits", [("bpsk", 3.0), ("qpsk", 6.0), ("qam16", 12.0)])
def test_gsvd_high_snr_bound(mod, bits):
    from pggsvd.constellation import parse_modulation

    ch = generate_channel(4, 3, 2, 0)
    assert gsvd_high_snr_bound(ch, parse_modulation(mod)) == bits


def test_gsvd_bound_counts_rank_not_rows():
    rng = np.random.default_rng(0)
    Hb = rng.standard_normal((3, 1)) @ rng.standard_normal((1, 4))
    ch = WiretapChannel(Hb, np.zeros((2, 4)))
    assert gsvd_high_snr_bound(ch, QPSK) == 2.0


@pytest.mark.parametrize(
    "shape,Ns,holds,r",
    [((4, 3, 2), 2, True, 2), ((6, 4, 4), 2, False, 2), ((6, 4, 4), 3, True, 2),
     ((4, 2, 3), 2, False, 1), ((5, 3, 2), 2, True, 3), ((64, 48, 48), 2, False, 16)],
)
def test_theorem2_condition(shape, Ns, holds, r):
    ch = generate_channel(*shape, seed=0)
    chk = theorem2_condition(ch, Ns)
    assert bool(chk) is holds and chk.holds is holds
    assert chk.r == r == chk.k - chk.N2
    assert chk.N_t == shape[0] and chk.Ns == Ns


def test_addition_counts_small_system():
    b = addition_counts(4, 2, 2, 2)
    assert (b.gsvd_additions, b.alg1_additions, b.full_additions) == (8, 32, 256)
    q = addition_counts(4, 2, 2, 4)
    assert (q.gsvd_additions, q.alg1_additions, q.full_additions) == (16, 512, 65536)
    assert q.rows() == [("GSVD", "16"), ("Algorithm 1", "512"), ("Full-matrix design", "65536")]


def test_addition_counts_large_system():
    b = addition_counts(64, 2, 32, 2)
    q = addition_counts(64, 2, 32, 4)
    assert (b.gsvd_additions, b.alg1_additions) == (128, 512)
    assert (q.gsvd_additions, q.alg1_additions) == (256, 8192)
    assert b.full_additions == 2**128 and q.full_additions == 2**256
    assert b.rows()[2][1] == "3.40e+38"
    assert q.rows()[2][1] == "1.16e+77"


def test_sci_formatting():
    assert ComplexityReport.sci(2**128) == "3.40e+38"
    assert ComplexityReport.sci(999) == "9.99e+2"
    assert ComplexityReport.sci(4**128, digits=5) == "1.1579e+77"
    # exact integer arithmetic; float conversion would overflow here
    assert ComplexityReport.sci(2**2000).endswith("e+602")
    assert math.isinf(float(2**1023) * 2)


def test_addition_counts_validation():
    with pytest.raises(ValueError):
        addition_counts(4, 2, 3, 2)


def test_bound_edge_cases():
    ch = generate_channel(3, 3, 2, 0)
    assert gsvd_high_snr_bound(ch, QPSK) == 6.0  # square full rank: no loss
    zero = WiretapChannel(np.zeros((2, 3)), ch.H_ea)
    assert gsvd_high_snr_bound(zero, QPSK) == 0.0


def test_theorem2_without_eavesdropper():
    ch = generate_channel(4, 2, 1, 0)
    ch = WiretapChannel(ch.H_ba, np.zeros((0, 4)))
    chk = theorem2_condition(ch, 2)
    assert (chk.k, chk.N2, chk.r) == (2, 0, 2)
    assert chk.holds  # N1 * Ns = 4 >= 4
    assert not theorem2_condition(ch, 1)


def test_grouped_zero_power_is_zero():
    ch = generate_channel(4, 3, 2, 0)
    d = gsvd(ch)
    h = hatted_gains(d)
    perm = pair_subchannels(h, 2)
    pre = PgGsvdPrecoder(perm, 2, np.zeros((2, 2)), np.broadcast_to(np.eye(2), (2, 2, 2)).copy(), d)
    assert secrecy_rate_grouped(pre, h, ch, QPSK, MC) == 0.0
