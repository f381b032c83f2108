"""Run orchestration: single runs, seeded ensembles, and file outputs.

A run executes its model's trade loop with burn-in and a snapshot
schedule, derives the model-appropriate statistics, and emits plot-ready
CSV (or JSON) tables plus one manifest JSON per run.  Ensembles execute
the same configuration across substreams (seed, run_index) and pool the
per-run densities on shared bin edges.

The imitation model runs in two phases: strategy evolution until
consensus (capped at n_trades), recording the average-propensity time
series, then a burn-in and the snapshot schedule on the now-homogeneous
market.
"""
from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .config import RunConfig
from .errors import DomainError, KinexError
from .market import MarketState, advance, average_lambda, new_market
from .rng import substream
from .stats import (
    DensityEstimate,
    average_densities,
    beta_cdf,
    count_modes,
    estimate_tail_exponent,
    gamma_moment_fit,
    histogram,
    ks_statistic,
    linear_edges,
    log_edges,
)

__all__ = [
    "SimResult",
    "RunManifest",
    "EnsembleResult",
    "simulate_run",
    "run_model",
    "run_ensemble",
    "write_outputs",
    "manifest_from_json",
]

logger = logging.getLogger("kinex")

SCHEMA_VERSION = 1
MONEY_BINS = 60
LAMBDA_BINS = 50


@dataclass
class SimResult:
    """In-memory outcome of one simulated run."""

    run_index: int
    trades_end: int
    total_money_initial: float
    total_money_final: float
    max_trade_rel_err: float
    snapshot_trades: list[int]
    money_samples: np.ndarray  # (n_snapshots, n_agents)
    lam_samples: np.ndarray | None  # frozen per-agent propensities, where meaningful
    series: tuple[np.ndarray, np.ndarray] | None  # (trade, avg_lambda)
    consensus_trade: int | None
    consensus_lambda: float | None


@dataclass
class RunManifest:
    """Everything needed to audit one run, serialized as a single JSON document."""

    schema_version: int
    artifact_version: str
    config: dict
    run_index: int
    trades_start: int
    trades_end: int
    total_money_initial: float
    total_money_final: float
    conservation_rel_drift: float
    conservation_ok: bool
    max_trade_rel_err: float
    snapshot_trades: list[int]
    stats: dict
    files: dict

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def manifest_from_json(text: str) -> RunManifest:
    return RunManifest(**json.loads(text))


@dataclass
class EnsembleResult:
    manifests: list[RunManifest]
    pooled: dict  # name -> DensityEstimate
    pooled_stats: dict


def _record_series(points: list, trade: int, value: float) -> None:
    points.append((trade, value))


def simulate_run(cfg: RunConfig, run_index: int = 0) -> SimResult:
    """Execute one run on the substream (cfg.seed, run_index)."""
    rng = substream(cfg.seed, run_index)
    state = new_market(cfg.rule(), cfg.n_agents, rng)
    lam_samples = state.lam.copy() if cfg.model in ("ccm", "polya") else None

    if cfg.model == "imitation":
        series_points: list = []
        _record_series(series_points, 0, average_lambda(state))
        while state.trades_done < cfg.n_trades and state.consensus_trade is None:
            chunk = min(cfg.snapshot_every, cfg.n_trades - state.trades_done)
            advance(state, chunk)
            _record_series(series_points, state.trades_done, average_lambda(state))
        snapshots = []
        snapshot_trades = []
        if state.consensus_trade is not None:
            advance(state, cfg.burn_in)
            for _ in range(cfg.n_snapshots):
                advance(state, cfg.snapshot_every)
                snapshots.append(state.money.copy())
                snapshot_trades.append(state.trades_done)
        trades, values = zip(*series_points)
        series = (np.asarray(trades, dtype=np.int64), np.asarray(values, dtype=np.float64))
        consensus_lambda = (
            float(state.lam[0]) if state.consensus_trade is not None else None
        )
        consensus_trade = (
            int(state.consensus_trade) if state.consensus_trade is not None else None
        )
    else:
        advance(state, cfg.burn_in)
        snapshots = []
        snapshot_trades = []
        for _ in range(cfg.n_snapshots):
            advance(state, cfg.snapshot_every)
            snapshots.append(state.money.copy())
            snapshot_trades.append(state.trades_done)
        advance(state, cfg.n_trades - state.trades_done)
        series = None
        consensus_lambda = None
        consensus_trade = None

    money_samples = (
        np.stack(snapshots) if snapshots else np.empty((0, cfg.n_agents), dtype=np.float64)
    )
    return SimResult(
        run_index=run_index,
        trades_end=state.trades_done,
        total_money_initial=state.total_money,
        total_money_final=float(state.money.sum()),
        max_trade_rel_err=float(state.max_trade_err),
        snapshot_trades=[int(t) for t in snapshot_trades],
        money_samples=money_samples,
        lam_samples=lam_samples,
        series=series,
        consensus_trade=consensus_trade,
        consensus_lambda=consensus_lambda,
    )


def money_edges(samples: np.ndarray, scale: str) -> np.ndarray:
    """Default money-density binning: linear to the 99.9th percentile, or
    constant-ratio bins over the positive range for heavy-tailed models."""
    flat = np.asarray(samples).ravel()
    if flat.size == 0:
        raise DomainError("no samples to bin")
    if scale == "log":
        positive = flat[flat > 0]
        if positive.size == 0:
            raise DomainError("log bins need positive samples")
        lo = max(float(np.quantile(positive, 0.001)), 1e-12)
        hi = float(positive.max())
        if hi <= lo:
            hi = lo * 2.0
        return log_edges(lo, hi)
    hi = float(np.quantile(flat, 0.999))
    if hi <= 0.0:
        hi = float(flat.max()) or 1.0
    return linear_edges(0.0, hi, MONEY_BINS)


def _money_scale(model: str) -> str:
    return "log" if model in ("ccm", "polya") else "linear"


def _derive_stats(cfg: RunConfig, pooled_money: np.ndarray, lam_samples, res: SimResult | None) -> dict:
    """Model-appropriate statistics; failures are recorded as absent."""
    stats: dict = {}

    def attempt(name, fn):
        try:
            stats[name] = fn()
        except (KinexError, ValueError) as exc:
            logger.warning("statistic %s unavailable: %s", name, exc)
            stats[name] = None

    flat = pooled_money.ravel()
    if cfg.model in ("ccm", "polya"):
        def tail():
            fit = estimate_tail_exponent(flat)
            return {
                "density_exponent": float(fit.density_exponent),
                "xmin": float(fit.xmin),
                "n_tail": int(fit.n_tail),
                "stderr": float(fit.stderr),
            }

        if flat.size:
            attempt("tail_fit", tail)
        else:
            stats["tail_fit"] = None
    if cfg.model == "polya" and lam_samples is not None:
        attempt(
            "lambda_ks_vs_beta",
            lambda: float(
                ks_statistic(lam_samples, lambda x: beta_cdf(x, cfg.a, cfg.b))
            ),
        )
    if cfg.model == "cc" and flat.size:
        attempt("gamma_fit", lambda: dict(zip(("shape", "scale"), map(float, gamma_moment_fit(flat)))))
    if cfg.model in ("cc", "selforg_decreasing", "selforg_increasing") and flat.size:
        attempt(
            "mode_count",
            lambda: int(count_modes(histogram(flat, money_edges(flat, "linear"), "linear"))),
        )
    if cfg.model == "imitation" and res is not None:
        stats["consensus_trade"] = res.consensus_trade
        stats["consensus_lambda"] = res.consensus_lambda
        if flat.size:
            attempt("gamma_fit", lambda: dict(zip(("shape", "scale"), map(float, gamma_moment_fit(flat)))))
    return stats


def _build_densities(cfg: RunConfig, res: SimResult, edges: dict) -> dict:
    densities = {}
    if res.money_samples.size:
        scale = _money_scale(cfg.model)
        densities["density"] = histogram(res.money_samples.ravel(), edges["money"], scale)
    if cfg.model == "polya" and res.lam_samples is not None:
        densities["lambda_density"] = histogram(res.lam_samples, edges["lambda"], "linear")
    return densities


def _shared_edges(cfg: RunConfig, results: list[SimResult]) -> dict:
    edges = {}
    pooled = np.concatenate([r.money_samples.ravel() for r in results])
    if pooled.size:
        edges["money"] = money_edges(pooled, _money_scale(cfg.model))
    if cfg.model == "polya":
        edges["lambda"] = linear_edges(0.0, 1.0, LAMBDA_BINS)
    return edges


def _finalize(cfg: RunConfig, res: SimResult, edges: dict, out_dir, fmt: str, write: bool):
    drift = abs(res.total_money_final - res.total_money_initial) / res.total_money_initial
    stats = _derive_stats(cfg, res.money_samples, res.lam_samples, res)
    manifest = RunManifest(
        schema_version=SCHEMA_VERSION,
        artifact_version=__version__,
        config=cfg.to_dict(),
        run_index=res.run_index,
        trades_start=0,
        trades_end=res.trades_end,
        total_money_initial=res.total_money_initial,
        total_money_final=res.total_money_final,
        conservation_rel_drift=float(drift),
        conservation_ok=bool(drift <= 1e-9),
        max_trade_rel_err=res.max_trade_rel_err,
        snapshot_trades=res.snapshot_trades,
        stats=stats,
        files={},
    )
    densities = _build_densities(cfg, res, edges)
    if write:
        write_outputs(manifest, densities, res.series, out_dir, fmt)
    return manifest, densities


def run_model(
    cfg: RunConfig,
    run_index: int = 0,
    out_dir=None,
    fmt: str = "csv",
    write: bool = True,
) -> RunManifest:
    """Simulate one run and (by default) write its outputs."""
    res = simulate_run(cfg, run_index)
    edges = _shared_edges(cfg, [res])
    out = out_dir if out_dir is not None else os.path.join(cfg.output_dir, f"run_{run_index:03d}")
    manifest, _ = _finalize(cfg, res, edges, out, fmt, write)
    return manifest


def _n_workers() -> int:
    raw = os.environ.get("KINEX_WORKERS", "1")
    try:
        workers = int(raw)
    except ValueError:
        raise KinexError(f"KINEX_WORKERS must be an integer, got {raw!r}") from None
    return max(1, workers)


def run_ensemble(
    cfg: RunConfig,
    n_runs: int,
    out_dir=None,
    fmt: str = "csv",
    write: bool = True,
    workers: int | None = None,
) -> EnsembleResult:
    """Run ``n_runs`` substreams of one configuration and pool their densities.

    Run k uses the substream (cfg.seed, k).  The pooled density is the
    mean of the per-run densities, which all share one set of bin edges.
    """
    if n_runs < 1:
        raise DomainError(f"need at least one run, got {n_runs}")
    workers = workers if workers is not None else _n_workers()
    base = out_dir if out_dir is not None else cfg.output_dir

    if workers > 1 and n_runs > 1:
        with ProcessPoolExecutor(max_workers=min(workers, n_runs)) as pool:
            results = list(pool.map(simulate_run, [cfg] * n_runs, range(n_runs)))
    else:
        results = [simulate_run(cfg, k) for k in range(n_runs)]

    edges = _shared_edges(cfg, results)
    manifests = []
    all_densities: list[dict] = []
    for res in results:
        run_dir = os.path.join(base, f"run_{res.run_index:03d}")
        manifest, densities = _finalize(cfg, res, edges, run_dir, fmt, write)
        manifests.append(manifest)
        all_densities.append(densities)

    pooled = {}
    for name in ("density", "lambda_density"):
        parts = [d[name] for d in all_densities if name in d]
        if parts:
            pooled[name] = average_densities(parts)

    pooled_money = np.concatenate([r.money_samples.ravel() for r in results])
    pooled_lam = (
        np.concatenate([r.lam_samples for r in results if r.lam_samples is not None])
        if cfg.model in ("ccm", "polya")
        else None
    )
    pooled_stats = _derive_stats(cfg, pooled_money, pooled_lam, None)

    if write:
        _write_ensemble(cfg, manifests, pooled, pooled_stats, base, fmt)
    return EnsembleResult(manifests=manifests, pooled=pooled, pooled_stats=pooled_stats)


# ---------------------------------------------------------------------------
# file emission

def _format_row(values) -> str:
    return ",".join(f"{v:.17g}" if isinstance(v, float) else str(v) for v in values)


def _write_table(path: str, header: list[str], columns: list, fmt: str) -> None:
    if fmt == "csv":
        lines = [",".join(header)]
        for row in zip(*columns):
            lines.append(_format_row(row))
        payload = "\n".join(lines) + "\n"
    elif fmt == "json":
        doc = {
            name: [v if isinstance(v, int) else float(v) for v in col]
            for name, col in zip(header, columns)
        }
        payload = json.dumps(doc, indent=2) + "\n"
    else:
        raise DomainError(f"unknown output format {fmt!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(payload)


def _density_columns(d: DensityEstimate):
    return (
        [float(x) for x in d.centers()],
        [float(x) for x in d.widths()],
        [float(x) for x in d.density],
    )


def write_outputs(manifest: RunManifest, densities: dict, series, out_dir, fmt: str = "csv") -> dict:
    """Write density tables, the optional time series, and the manifest.

    Returns the manifest's file map (name -> path relative to out_dir).
    Missing densities (empty snapshot set) produce a warning, not an
    error; the manifest is always written.
    """
    os.makedirs(out_dir, exist_ok=True)
    ext = "csv" if fmt == "csv" else "json"
    files = {}
    if "density" in densities:
        name = f"density.{ext}"
        _write_table(
            os.path.join(out_dir, name),
            ["bin_center", "bin_width", "density"],
            _density_columns(densities["density"]),
            fmt,
        )
        files["density"] = name
    else:
        logger.warning("no snapshots recorded; skipping money density file")
    if "lambda_density" in densities:
        name = f"lambda_density.{ext}"
        _write_table(
            os.path.join(out_dir, name),
            ["bin_center", "bin_width", "density"],
            _density_columns(densities["lambda_density"]),
            fmt,
        )
        files["lambda_density"] = name
    if series is not None:
        name = f"series.{ext}"
        trades, values = series
        _write_table(
            os.path.join(out_dir, name),
            ["trade", "avg_lambda"],
            ([int(t) for t in trades], [float(v) for v in values]),
            fmt,
        )
        files["series"] = name
    manifest.files = files
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        fh.write(manifest.to_json() + "\n")
    return files


def _write_ensemble(cfg, manifests, pooled, pooled_stats, base, fmt) -> None:
    os.makedirs(base, exist_ok=True)
    ext = "csv" if fmt == "csv" else "json"
    pooled_files = {}
    for name, density in pooled.items():
        fname = f"pooled_{name}.{ext}"
        _write_table(
            os.path.join(base, fname),
            ["bin_center", "bin_width", "density"],
            _density_columns(density),
            fmt,
        )
        pooled_files[name] = fname
    doc = {
        "schema_version": SCHEMA_VERSION,
        "artifact_version": __version__,
        "config": cfg.to_dict(),
        "n_runs": len(manifests),
        "runs": [f"run_{m.run_index:03d}/manifest.json" for m in manifests],
        "pooled_files": pooled_files,
        "pooled_stats": pooled_stats,
        "conservation_ok": all(m.conservation_ok for m in manifests),
    }
    with open(os.path.join(base, "ensemble.json"), "w", encoding="utf-8") as fh:
        fh.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
