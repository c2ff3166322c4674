"""Command-line entry point: ``pggsvd {sweep,gsvd-info,optimize,counts,bound}``.

Failures print one JSON object (``{"error": ..., "message": ...}``) on
stderr and exit nonzero: 2 for usage errors, 1 for everything else.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from ._version import __version__
from .constellation import parse_modulation
from .gsvd import gsvd, reconstruct
from .harness import (
    ExperimentConfig,
    format_csv,
    generate_channel,
    load_config,
    run_sweep,
    write_csv,
)
from .mi import NoiseQuadrature
from .precoders import (
    OptimOptions,
    hatted_gains,
    high_snr_construction,
    optimize_pg_gsvd,
)
from .secrecy import addition_counts, gsvd_high_snr_bound, theorem2_condition


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would print free text and exit(2)
        raise UsageError(f"{self.prog}: {message}")


def _add_channel_args(p, seed_help="channel (and noise) seed"):
    p.add_argument("--nt", type=int, default=4, help="transmit antennas (default 4)")
    p.add_argument("--nr", type=int, default=3, help="Bob antennas (default 3)")
    p.add_argument("--ne", type=int, default=2, help="Eve antennas (default 2)")
    p.add_argument("--seed", type=int, default=0, help=seed_help)


def _build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="pggsvd", description="Secure MIMO precoding with finite-alphabet inputs.")
    ap.add_argument("--version", action="version", version=f"pggsvd {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sw = sub.add_parser("sweep", help="SNR sweep to CSV")
    sw.add_argument("config", nargs="?", type=Path, help="key = value config file")
    sw.add_argument("-o", "--output", type=Path, help="CSV path (default stdout)")
    sw.add_argument("--nt", type=int)
    sw.add_argument("--nr", type=int)
    sw.add_argument("--ne", type=int)
    sw.add_argument("--mod", help="bpsk, qpsk, qam16, ...")
    sw.add_argument("--ns", type=int, help="group size")
    sw.add_argument("--snr-db", type=float, nargs="+", help="SNR grid in dB")
    sw.add_argument("--designs", help="comma-separated subset of gsvd,pg_gsvd,high_snr or none")
    sw.add_argument("--strategy", choices=("auto", "theorem2", "interleave"))
    sw.add_argument("--max-iters", type=int)
    sw.add_argument("--eps", type=float)
    sw.add_argument("--seed", type=int, help="sets channel_seed and noise_seed")
    sw.add_argument("--channel-seed", type=int)
    sw.add_argument("--noise-seed", type=int)
    sw.add_argument("--mc-samples", type=int)
    sw.add_argument("--exact-eval", action="store_true", default=None)
    sw.add_argument("--timestamp", action="store_true", default=None)
    sw.add_argument("--jobs", type=int, default=1, help="worker processes (output unchanged)")

    gi = sub.add_parser("gsvd-info", help="GSVD structure of a seeded channel")
    _add_channel_args(gi, "channel seed")
    gi.add_argument("--tol", type=float, default=0.0, help="relative rank tolerance")

    op = sub.add_parser("optimize", help="run Algorithm 1; print the trace as CSV")
    _add_channel_args(op)
    op.add_argument("--snr-db", type=float, default=20.0)
    op.add_argument("--mod", default="qpsk")
    op.add_argument("--ns", type=int, default=2)
    op.add_argument("--strategy", choices=("auto", "theorem2", "interleave"), default="auto")
    op.add_argument("--max-iters", type=int, default=100)
    op.add_argument("--eps", type=float, default=1e-4)
    op.add_argument("--mc-samples", type=int, default=500)
    op.add_argument("--init", choices=("default", "gsvd", "high_snr"), default="default")
    op.add_argument("-o", "--output", type=Path)

    co = sub.add_parser("counts", help="addition counts per MI evaluation")
    co.add_argument("--nt", type=int, help="omit to print the 4x3x2 and 64x48x48 tables")
    co.add_argument("--ns", type=int, default=2)
    co.add_argument("--mod", default=None, help="omit for BPSK and QPSK")

    bd = sub.add_parser("bound", help="high-SNR ceilings and the pairing condition")
    _add_channel_args(bd, "channel seed")
    bd.add_argument("--ns", type=int, default=2)
    bd.add_argument("--mod", default="qpsk")
    return ap


def _cmd_sweep(a) -> int:
    cfg = load_config(a.config) if a.config else ExperimentConfig()
    over = {
        "N_t": a.nt,
        "N_r": a.nr,
        "N_e": a.ne,
        "modulation": a.mod,
        "Ns": a.ns,
        "snr_grid_db": a.snr_db,
        "designs": a.designs,
        "strategy": a.strategy,
        "max_iters": a.max_iters,
        "epsilon": a.eps,
        "mc_samples": a.mc_samples,
        "exact_eval": a.exact_eval,
        "timestamp": a.timestamp,
    }
    if a.seed is not None:
        over["channel_seed"] = over["noise_seed"] = a.seed
    if a.channel_seed is not None:
        over["channel_seed"] = a.channel_seed
    if a.noise_seed is not None:
        over["noise_seed"] = a.noise_seed
    cfg = cfg.replace(**{k: v for k, v in over.items() if v is not None})

    def progress(i, snr):
        print(f"[{i + 1}/{len(cfg.snr_grid_db)}] {snr:g} dB done", file=sys.stderr)

    curve = run_sweep(cfg, jobs=a.jobs, progress=progress)
    if a.output:
        write_csv(curve, a.output)
    else:
        sys.stdout.write(format_csv(curve))
    return 0


def _cmd_gsvd_info(a) -> int:
    ch = generate_channel(a.nt, a.nr, a.ne, a.seed)
    d = gsvd(ch, a.tol)
    Hb, He = reconstruct(d)
    err = max(
        np.linalg.norm(A - H) / max(np.linalg.norm(H), 1e-300)
        for A, H in ((Hb, ch.H_ba), (He, ch.H_ea))
    )
    fmt = lambda v: "[" + ", ".join(f"{x:.6f}" for x in v) + "]"  # noqa: E731
    print(f"channel: {a.nt}x{a.nr}x{a.ne} seed={a.seed}")
    print(f"(k, r, s) = ({d.k}, {d.r}, {d.s})")
    print(f"rank(H_ba) = {d.N1}, rank(H_ea) = {d.N2}")
    print(f"b = {fmt(d.b)}")
    print(f"e = {fmt(d.e)}")
    print(f"omega = {fmt(d.omega.real)}")
    print(f"reconstruction error (relative Frobenius) = {err:.3e}")
    return 0


def _cmd_optimize(a) -> int:
    c = parse_modulation(a.mod)
    ch = generate_channel(a.nt, a.nr, a.ne, a.seed)
    d = gsvd(ch)
    P = 10.0 ** (a.snr_db / 10.0) * a.nr
    q = NoiseQuadrature("mc", a.mc_samples, a.seed)
    opts = OptimOptions(max_iters=a.max_iters, epsilon=a.eps, quadrature=q)
    init = a.init
    if init == "high_snr":
        init = high_snr_construction(d, hatted_gains(d), a.ns, P, c)
    res = optimize_pg_gsvd(ch, c, P, a.ns, a.strategy, opts, decomposition=d, init=init)
    out = open(a.output, "w", newline="") if a.output else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["iter", "rate_bits"])
        for i, v in enumerate(res.trace):
            w.writerow([i, f"{v:.16e}"])
    finally:
        if a.output:
            out.close()
    return 0


def _cmd_counts(a) -> int:
    if a.nt is None:
        cases = [(4, 2, "4x3x2"), (64, 2, "64x48x48")]
    else:
        cases = [(a.nt, a.ns, f"N_t={a.nt}")]
    mods = [a.mod] if a.mod else ["bpsk", "qpsk"]
    for nt, ns, label in cases:
        if nt % ns:
            raise ValueError(f"Ns = {ns} must divide N_t = {nt}")
        print(f"{label}, Ns={ns}: additions per MI evaluation")
        print(f"  {'design':<20}" + "".join(f"{m.upper():>12}" for m in mods))
        reps = [addition_counts(nt, ns, nt // ns, parse_modulation(m).M) for m in mods]
        for j, (name, _) in enumerate(reps[0].rows()):
            print(f"  {name:<20}" + "".join(f"{r.rows()[j][1]:>12}" for r in reps))
    return 0


def _cmd_bound(a) -> int:
    c = parse_modulation(a.mod)
    ch = generate_channel(a.nt, a.nr, a.ne, a.seed)
    chk = theorem2_condition(ch, a.ns)
    print(f"channel: {a.nt}x{a.nr}x{a.ne} seed={a.seed}, {c.token}, Ns={a.ns}")
    print(f"GSVD ceiling rank(H_ba) log2 M = {gsvd_high_snr_bound(ch, c):g} bits")
    print(f"PG-GSVD ceiling N_t log2 M = {a.nt * c.bits_per_symbol:g} bits")
    print(
        f"pairing condition (k - N2) Ns >= N_t: ({chk.k} - {chk.N2}) * {chk.Ns} = "
        f"{chk.r * chk.Ns} {'>=' if chk.holds else '<'} {chk.N_t} -> "
        f"{'holds' if chk.holds else 'fails'}"
    )
    return 0


_COMMANDS = {
    "sweep": _cmd_sweep,
    "gsvd-info": _cmd_gsvd_info,
    "optimize": _cmd_optimize,
    "counts": _cmd_counts,
    "bound": _cmd_bound,
}


def _fail(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    try:
        a = _build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail("UsageError", str(exc), 2)
    try:
        return _COMMANDS[a.command](a)
    except KeyboardInterrupt:
        return _fail("KeyboardInterrupt", "interrupted", 130)
    except Exception as exc:  # surfaced as one machine-readable line
        return _fail(type(exc).__name__, str(exc), 1)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
