"""Channel generation, sweep configuration, SNR sweeps and CSV persistence.

A sweep fixes one seeded channel realization and, for every SNR point and
requested design, builds the precoder at ``P = 10**(snr/10) * N_r * sigma_b2``
and evaluates its secrecy rate. Each SNR point draws its optimisation and
evaluation noise from ``SeedSequence([noise_seed, index, purpose])``, so
points are independent and can be run in any order or in parallel.
"""

from __future__ import annotations

import ast
import csv
import dataclasses
import datetime
import hashlib
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from ._version import __version__
from .constellation import Constellation, parse_modulation
from .gsvd import GsvdDecomposition, WiretapChannel, gsvd
from .mi import NoiseQuadrature
from .precoders import (
    InfeasiblePairingError,
    OptimOptions,
    _n_padded,
    assemble_G,
    best_of,
    gsvd_precoder,
    hatted_gains,
    high_snr_construction,
    optimize_pg_gsvd,
)
from .secrecy import (
    addition_counts,
    gsvd_design_rate,
    secrecy_rate_exact_estimate,
    secrecy_rate_grouped_estimate,
)

__all__ = [
    "ConfigError",
    "CurveFormatError",
    "ExperimentConfig",
    "SecrecyRow",
    "SecrecyCurve",
    "DESIGNS",
    "EXACT_LIMIT",
    "generate_channel",
    "load_config",
    "parse_config",
    "run_sweep",
    "write_csv",
    "read_csv",
    "format_csv",
    "average_curves",
]

DESIGNS = ("gsvd", "pg_gsvd", "high_snr")
CSV_HEADER = ("snr_db", "design", "rate_bits", "iterations", "additions")
# full-matrix evaluation in sweeps is limited to M**N_t <= 2**20 symbol vectors
EXACT_LIMIT = 2**20

_OPT_PURPOSE, _EVAL_PURPOSE = 0, 1


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class CurveFormatError(ValueError):
    """A CSV file does not hold a secrecy curve in the expected layout."""


def generate_channel(N_t: int, N_r: int, N_e: int, seed: int) -> WiretapChannel:
    """I.i.d. ``CN(0, 1)`` Bob and Eve channels with unit noise variances.

    ``H_ba`` is drawn first, then ``H_ea``, from ``default_rng(seed)``.
    """
    for name, n in (("N_t", N_t), ("N_r", N_r), ("N_e", N_e)):
        if int(n) != n or n < 1:
            raise ValueError(f"{name} must be a positive integer, got {n!r}")
    rng = np.random.default_rng(seed)

    def draw(rows):
        g = rng.standard_normal((rows, N_t, 2))
        return (g[..., 0] + 1j * g[..., 1]) / math.sqrt(2.0)

    H_ba = draw(N_r)
    H_ea = draw(N_e)
    return WiretapChannel(H_ba, H_ea, 1.0, 1.0)


# ---------------------------------------------------------------------------
# configuration


def _as_int(name, v):
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
        if isinstance(v, float) and v.is_integer():
            return int(v)
        raise ConfigError(f"{name} must be an integer, got {v!r}")
    return int(v)


def _as_float(name, v):
    if isinstance(v, str):
        try:
            return float(v)
        except ValueError:
            raise ConfigError(f"{name} must be a number, got {v!r}") from None
    if isinstance(v, bool) or not isinstance(v, (int, float, np.integer, np.floating)):
        raise ConfigError(f"{name} must be a number, got {v!r}")
    return float(v)


def _as_bool(name, v):
    if isinstance(v, bool):
        return v
    if isinstance(v, str) and v.lower() in ("true", "yes", "on", "1", "false", "no", "off", "0"):
        return v.lower() in ("true", "yes", "on", "1")
    if isinstance(v, int) and v in (0, 1):
        return bool(v)
    raise ConfigError(f"{name} must be a boolean, got {v!r}")


def _as_seq(v):
    if isinstance(v, str):
        return [t.strip() for t in v.split(",") if t.strip()]
    if isinstance(v, (list, tuple)):
        return list(v)
    return [v]


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines a sweep's output.

    Attributes
    ----------
    N_t, N_r, N_e : int
        Antenna counts (transmitter, Bob, Eve).
    modulation : str
        Constellation token: ``bpsk``, ``qpsk``, ``qam16``, ...
    Ns : int
        PG-GSVD group size.
    snr_grid_db : tuple of float
        Strictly increasing; ``SNR = P / (N_r sigma_b2)``.
    designs : tuple of str
        Subset of ``gsvd``, ``pg_gsvd``, ``high_snr``; ``("none",)`` or an
        empty tuple produces a curve with metadata only.
    channel_seed, noise_seed : int
        Unsigned 64-bit seeds.
    mc_samples : int
        Noise draws per expectation (GH nodes per real dimension for ``gh``).
    quadrature : {"mc", "gh"}
    strategy : {"auto", "theorem2", "interleave"}
        Pairing used by the PG-GSVD optimiser.
    max_iters, epsilon, initial_step
        Algorithm 1 settings.
    exact_eval : bool
        Also evaluate the full-matrix secrecy rate (kept in the metadata)
        when ``M**N_t <= EXACT_LIMIT``.
    timestamp : bool
        Record the wall-clock time in the metadata. Off by default because
        it makes repeated runs differ byte-wise.
    """

    N_t: int = 4
    N_r: int = 3
    N_e: int = 2
    modulation: str = "qpsk"
    Ns: int = 2
    snr_grid_db: tuple = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0)
    designs: tuple = DESIGNS
    channel_seed: int = 0
    noise_seed: int = 0
    mc_samples: int = 500
    quadrature: str = "mc"
    strategy: str = "auto"
    max_iters: int = 100
    epsilon: float = 1e-4
    initial_step: float = 0.5
    exact_eval: bool = False
    timestamp: bool = False

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        for k in ("N_t", "N_r", "N_e", "Ns", "mc_samples", "max_iters"):
            v = _as_int(k, getattr(self, k))
            if v < 1:
                raise ConfigError(f"{k} must be positive, got {v}")
            set_(k, v)
        for k in ("channel_seed", "noise_seed"):
            v = _as_int(k, getattr(self, k))
            if not 0 <= v < 2**64:
                raise ConfigError(f"{k} must be an unsigned 64-bit integer, got {v}")
            set_(k, v)
        for k in ("epsilon", "initial_step"):
            v = _as_float(k, getattr(self, k))
            if not v > 0:
                raise ConfigError(f"{k} must be positive, got {v}")
            set_(k, v)
        for k in ("exact_eval", "timestamp"):
            set_(k, _as_bool(k, getattr(self, k)))

        mod = str(self.modulation).strip().lower()
        try:
            parse_modulation(mod)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        set_("modulation", mod)

        grid = tuple(_as_float("snr_grid_db", v) for v in _as_seq(self.snr_grid_db))
        if not grid:
            raise ConfigError("snr_grid_db must be nonempty")
        if any(not math.isfinite(v) for v in grid):
            raise ConfigError("snr_grid_db entries must be finite")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError(f"snr_grid_db must be strictly increasing, got {list(grid)}")
        set_("snr_grid_db", grid)

        designs = tuple(str(v).strip().lower() for v in _as_seq(self.designs))
        if "none" in designs:
            if len(designs) > 1:
                raise ConfigError("design 'none' cannot be combined with other designs")
            designs = ()
        bad = [x for x in designs if x not in DESIGNS]
        if bad:
            raise ConfigError(f"unknown designs {bad}; choose from {list(DESIGNS)} or 'none'")
        if len(set(designs)) != len(designs):
            raise ConfigError("designs must not repeat")
        set_("designs", designs)

        if self.quadrature not in ("mc", "gh"):
            raise ConfigError(f"quadrature must be 'mc' or 'gh', got {self.quadrature!r}")
        if self.quadrature == "gh" and (self.Ns > 2 or self.exact_eval):
            raise ConfigError("Gauss-Hermite quadrature needs Ns <= 2 and exact_eval = False")
        if self.strategy not in ("auto", "theorem2", "interleave"):
            raise ConfigError(f"unknown pairing strategy {self.strategy!r}")

    @property
    def constellation(self) -> Constellation:
        return parse_modulation(self.modulation)

    def as_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["snr_grid_db"] = list(self.snr_grid_db)
        d["designs"] = list(self.designs) or ["none"]
        return d

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form (first 16 hex digits)."""
        blob = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(values) - names)
        if unknown:
            raise ConfigError(f"unknown config keys {unknown}; valid keys are {sorted(names)}")
        return cls(**values)

    def optim_options(self, q: NoiseQuadrature) -> OptimOptions:
        return OptimOptions(
            max_iters=self.max_iters,
            epsilon=self.epsilon,
            initial_step=self.initial_step,
            quadrature=q,
        )


def _parse_value(text: str) -> Any:
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text  # bare words such as qpsk or gsvd, pg_gsvd


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    Values are Python literals (``[0, 10, 20]``, ``"qpsk"``, ``1e-4``);
    bare words and comma-separated words are accepted as strings.
    """
    names = {f.name for f in dataclasses.fields(ExperimentConfig)}
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, val = (p.strip() for p in line.partition("="))
        if key not in names:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = _parse_value(val)
    try:
        return ExperimentConfig.from_mapping(values)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    return parse_config(text, str(path))


# ---------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class SecrecyRow:
    """One (SNR, design) point. Skipped points carry ``None`` values."""

    snr_db: float
    design: str
    rate_bits: float | None
    iterations: int | None
    additions: int | None

    @property
    def skipped(self) -> bool:
        return self.rate_bits is None


@dataclass(frozen=True)
class SecrecyCurve:
    """Sweep output.

    ``metadata`` is JSON-compatible and holds the config echo, its digest,
    the seeds, per-row standard errors and skip reasons (lists aligned with
    ``rows``) and optionally a timestamp.
    """

    rows: tuple[SecrecyRow, ...]
    metadata: dict = field(default_factory=dict)

    def design(self, tag: str) -> tuple[np.ndarray, np.ndarray]:
        """``(snr_db, rate_bits)`` arrays for one design; skipped points are NaN."""
        sel = [r for r in self.rows if r.design == tag]
        snr = np.array([r.snr_db for r in sel])
        rate = np.array([np.nan if r.rate_bits is None else r.rate_bits for r in sel])
        return snr, rate

    def stderr(self, tag: str) -> np.ndarray:
        se = self.metadata.get("stderr", [None] * len(self.rows))
        return np.array([np.nan if s is None else s for r, s in zip(self.rows, se) if r.design == tag])


def _derive_seed(noise_seed: int, index: int, purpose: int) -> int:
    ss = np.random.SeedSequence([noise_seed, index, purpose])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class _PointResult:
    row: SecrecyRow
    stderr: float | None
    reason: str | None
    exact: float | None = None


def _skip(snr, tag, reason):
    return _PointResult(SecrecyRow(snr, tag, None, None, None), None, reason)


def _maybe_exact(cfg, G, ch, c, q_eval):
    if not cfg.exact_eval or c.M**cfg.N_t > EXACT_LIMIT:
        return None
    return secrecy_rate_exact_estimate(G, ch, c, q_eval).rate


def _run_point(
    cfg: ExperimentConfig, ch: WiretapChannel, d: GsvdDecomposition, idx: int
) -> list[_PointResult]:
    c = cfg.constellation
    snr = cfg.snr_grid_db[idx]
    P = 10.0 ** (snr / 10.0) * cfg.N_r * ch.sigma_b2
    q_opt = NoiseQuadrature(cfg.quadrature, cfg.mc_samples, _derive_seed(cfg.noise_seed, idx, _OPT_PURPOSE))
    q_eval = q_opt.with_seed(_derive_seed(cfg.noise_seed, idx, _EVAL_PURPOSE))
    h = hatted_gains(d)
    N_pad = _n_padded(cfg.N_t, cfg.Ns)
    S = N_pad // cfg.Ns
    grouped_adds = addition_counts(N_pad, cfg.Ns, S, c.M).alg1_additions
    thm2 = d.r * cfg.Ns >= N_pad
    thm2_reason = (
        f"pairing condition fails: (k - N2) * Ns = {d.r} * {cfg.Ns} < {N_pad}"
    )

    out = []
    for tag in cfg.designs:
        if tag == "gsvd":
            design = gsvd_precoder(d, c, ch, P, q_opt)
            est = gsvd_design_rate(design, ch, c, q_eval)
            row = SecrecyRow(snr, tag, est.rate, 0, cfg.N_t * c.M)
            out.append(_PointResult(row, est.stderr, None, _maybe_exact(cfg, design.G, ch, c, q_eval)))
        elif tag == "high_snr":
            if not thm2:
                out.append(_skip(snr, tag, thm2_reason))
                continue
            pre = high_snr_construction(d, h, cfg.Ns, P, c)
            est = secrecy_rate_grouped_estimate(pre, h, ch, c, q_eval)
            row = SecrecyRow(snr, tag, est.rate, 0, grouped_adds)
            exact = _maybe_exact(cfg, assemble_G(d, pre), ch, c, q_eval)
            out.append(_PointResult(row, est.stderr, None, exact))
        elif tag == "pg_gsvd":
            if cfg.strategy == "theorem2" and not thm2:
                out.append(_skip(snr, tag, thm2_reason))
                continue
            opts = cfg.optim_options(q_opt)
            starts: list = ["default", "gsvd"]
            if thm2 and cfg.strategy != "interleave":
                starts.append(high_snr_construction(d, h, cfg.Ns, P, c))
            runs = []
            for init in starts:
                try:
                    runs.append(
                        optimize_pg_gsvd(ch, c, P, cfg.Ns, cfg.strategy, opts, decomposition=d, init=init)
                    )
                except InfeasiblePairingError as exc:  # pragma: no cover - guarded above
                    out.append(_skip(snr, tag, str(exc)))
                    break
            else:
                best = best_of(runs)
                est = secrecy_rate_grouped_estimate(best.precoder, h, ch, c, q_eval)
                row = SecrecyRow(snr, tag, est.rate, best.iterations, grouped_adds)
                exact = _maybe_exact(cfg, assemble_G(d, best.precoder), ch, c, q_eval)
                out.append(_PointResult(row, est.stderr, None, exact))
    return out


def _run_point_star(args):
    return _run_point(*args)


def run_sweep(
    cfg: ExperimentConfig,
    *,
    jobs: int = 1,
    progress: Callable[[int, float], None] | None = None,
) -> SecrecyCurve:
    """Sweep ``cfg.snr_grid_db`` for every requested design.

    Parameters
    ----------
    jobs : int
        Worker processes. The output does not depend on it.
    progress : callable, optional
        Called as ``progress(index, snr_db)`` after each point completes
        (in grid order).
    """
    ch = generate_channel(cfg.N_t, cfg.N_r, cfg.N_e, cfg.channel_seed)
    d = gsvd(ch)
    idxs = range(len(cfg.snr_grid_db)) if cfg.designs else range(0)

    if jobs > 1 and len(idxs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = pool.map(_run_point_star, [(cfg, ch, d, i) for i in idxs])
            points = []
            for i, res in zip(idxs, results):
                points.append(res)
                if progress:
                    progress(i, cfg.snr_grid_db[i])
    else:
        points = []
        for i in idxs:
            points.append(_run_point(cfg, ch, d, i))
            if progress:
                progress(i, cfg.snr_grid_db[i])

    flat = [p for pts in points for p in pts]
    meta: dict[str, Any] = {
        "version": __version__,
        "config": cfg.as_dict(),
        "config_hash": cfg.digest(),
        "channel_seed": cfg.channel_seed,
        "noise_seed": cfg.noise_seed,
        "gsvd_dims": {"k": d.k, "r": d.r, "s": d.s},
        "evaluator": {
            "gsvd": "decoupled scalar",
            "pg_gsvd": "grouped",
            "high_snr": "grouped",
        },
        "stderr": [p.stderr for p in flat],
        "skip_reason": [p.reason for p in flat],
    }
    if cfg.exact_eval:
        M = cfg.constellation.M
        meta["exact_rate_bits"] = [p.exact for p in flat]
        if M**cfg.N_t > EXACT_LIMIT:
            meta["exact_disabled"] = f"M**N_t = {M}**{cfg.N_t} exceeds {EXACT_LIMIT}"
    if cfg.timestamp:
        meta["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    return SecrecyCurve(tuple(p.row for p in flat), meta)


def average_curves(curves: Sequence[SecrecyCurve]) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Per-design mean rate over replicate curves sharing one SNR grid."""
    if not curves:
        return {}
    tags = []
    for r in curves[0].rows:
        if r.design not in tags:
            tags.append(r.design)
    out = {}
    for tag in tags:
        snr, _ = curves[0].design(tag)
        stack = []
        for cv in curves:
            s2, rate = cv.design(tag)
            if s2.shape != snr.shape or np.any(s2 != snr):
                raise ValueError("curves do not share an SNR grid")
            stack.append(rate)
        out[tag] = (snr, np.mean(stack, axis=0))
    return out


# ---------------------------------------------------------------------------
# CSV


def _fmt_float(x: float) -> str:
    # 17 significant digits round-trip every double exactly
    return f"{x:.16e}"


def _fmt_opt(v) -> str:
    return "" if v is None else str(v)


def format_csv(curve: SecrecyCurve) -> str:
    """CSV text: commented metadata lines, then the fixed header and rows.

    The metadata goes on one ``# metadata: {json}`` line with sorted keys so
    identical curves produce identical bytes.
    """
    buf = io.StringIO()
    buf.write("# pggsvd secrecy curve\n")
    buf.write("# metadata: " + json.dumps(curve.metadata, sort_keys=True, separators=(",", ":")) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in curve.rows:
        w.writerow(
            [
                repr(float(r.snr_db)),
                r.design,
                "" if r.rate_bits is None else _fmt_float(r.rate_bits),
                _fmt_opt(r.iterations),
                _fmt_opt(r.additions),
            ]
        )
    return buf.getvalue()


def write_csv(curve: SecrecyCurve, path: str | Path) -> None:
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            fh.write(format_csv(curve))
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_csv(path: str | Path) -> SecrecyCurve:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc

    meta: dict = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            if line.startswith("# metadata: "):
                try:
                    meta = json.loads(line[len("# metadata: ") :])
                except json.JSONDecodeError as exc:
                    raise CurveFormatError(f"{path}: bad metadata line: {exc}") from None
            continue
        body.append(line)
    reader = csv.reader(body)
    header = next(reader, None)
    if header is None or tuple(header) != CSV_HEADER:
        raise CurveFormatError(f"{path}: expected header {','.join(CSV_HEADER)}, got {header}")

    def opt(v, conv):
        return None if v == "" else conv(v)

    rows = []
    for n, rec in enumerate(reader, 2):
        if len(rec) != len(CSV_HEADER):
            raise CurveFormatError(f"{path}: row {n} has {len(rec)} fields")
        try:
            rows.append(
                SecrecyRow(
                    float(rec[0]), rec[1], opt(rec[2], float), opt(rec[3], int), opt(rec[4], int)
                )
            )
        except ValueError as exc:
            raise CurveFormatError(f"{path}: row {n}: {exc}") from None
    return SecrecyCurve(tuple(rows), meta)
