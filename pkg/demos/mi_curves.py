"""Constellation-constrained MI of y = sqrt(snr) x + n for BPSK, QPSK, 16-QAM.

    python3 demos/mi_curves.py [--plot mi.png]
"""

import argparse

import numpy as np

from pggsvd import NoiseQuadrature, make_constellation, scalar_mi


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--plot", help="save a figure here (needs matplotlib)")
    a = ap.parse_args()

    snr_db = np.arange(-10, 31, 5.0)
    q = NoiseQuadrature("gh", 80)
    mods = {"BPSK": ("bpsk", None), "QPSK": ("qpsk", None), "16-QAM": ("qam", 16)}
    curves = {name: scalar_mi(10 ** (snr_db / 10), make_constellation(*spec), q) for name, spec in mods.items()}
    gauss = np.log2(1 + 10 ** (snr_db / 10))

    print(f"{'SNR dB':>7}" + "".join(f"{n:>9}" for n in curves) + f"{'Gauss':>9}")
    for i, s in enumerate(snr_db):
        print(f"{s:7.0f}" + "".join(f"{c[i]:9.4f}" for c in curves.values()) + f"{gauss[i]:9.4f}")

    if a.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(5, 3.5))
        for name, c in curves.items():
            ax.plot(snr_db, c, marker="o", ms=3, label=name)
        ax.plot(snr_db, gauss, "k--", lw=0.8, label="Gaussian input")
        ax.set(xlabel="SNR (dB)", ylabel="MI (bits)", ylim=(0, 4.5))
        ax.grid(alpha=0.3)
        ax.legend()
        fig.tight_layout()
        fig.savefig(a.plot, dpi=150)
        print(f"saved {a.plot}")


if __name__ == "__main__":
    main()
