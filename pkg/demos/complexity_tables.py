"""Additions per MI evaluation: GSVD, Algorithm 1 (Ns = 2) and the full
precoder, for a 4x3x2 and a 64x48x48 system.

    python3 demos/complexity_tables.py
"""

from pggsvd import addition_counts, make_constellation


def table(N_t, Ns, label):
    mods = [make_constellation("bpsk"), make_constellation("qpsk")]
    reps = [addition_counts(N_t, Ns, N_t // Ns, c.M) for c in mods]
    print(f"{label} (Ns = {Ns})")
    print(f"  {'':<20}{'BPSK':>12}{'QPSK':>12}")
    for j, (name, _) in enumerate(reps[0].rows()):
        print(f"  {name:<20}" + "".join(f"{r.rows()[j][1]:>12}" for r in reps))
    print()


if __name__ == "__main__":
    table(4, 2, "4x3x2 system")
    table(64, 2, "64x48x48 system")
