"""Command-line driver: synth | analyze | citylevel | partition.

Each subcommand reads a JSON config, runs one stage (or the whole
pipeline) and writes plot-ready CSV/JSON artifacts plus a manifest with
a config hash, so reruns are verifiably byte-identical.

Exit codes: 0 ok, 1 analysis error, 2 config error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .ingest import (
    OUTSIDE_REGION,
    EventSet,
    FormatConfig,
    IngestError,
    assign_regions,
    bin_weekly,
    parse_events,
    week_epoch,
)
from .partition import PopulationWeights, grid_partition, region_sweep, split
from .pipeline import analyze_city, analyze_region
from .preprocess import pipeline as preprocess_pipeline
from .significance import build_context, global_threshold, scale_avg_threshold
from .synth import SynthConfig, events_to_csv, gen_event_stream, gen_region_series, ground_truth
from .wavelet import CIRCANNUAL_BAND, build_grid, global_spectrum, scale_avg_power, transform


class ConfigError(ValueError):
    """Invalid or incomplete run configuration (exit code 2)."""


class AnalysisError(RuntimeError):
    """A pipeline stage failed on valid configuration (exit code 1)."""


@dataclass
class RunConfig:
    """Configuration for the analyze/citylevel subcommands."""

    events_path: str
    out_dir: str
    weights_path: str | None = None
    timestamp_column: str = "date"
    lat_column: str = "lat"
    lon_column: str = "lon"
    timestamp_format: str | None = None
    category_column: str | None = None
    category_filter: str | None = None
    delimiter: str = ","
    week_epoch_day: int | None = None
    s0: float = 2.0
    dj: float = 0.05
    p_level: float = 0.95
    bands: list = field(default_factory=lambda: [list(CIRCANNUAL_BAND)])
    phi: float = 1.0
    r: int | None = None
    r_values: list = field(default_factory=lambda: [1, 2, 4, 8, 16, 32, 64])
    seed: int = 0
    significance_method: str = "analytic"  # analytic | montecarlo | both

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
        if "events_path" not in raw:
            raise ConfigError("missing required config field: events_path")
        if "out_dir" not in raw:
            raise ConfigError("missing required config field: out_dir")
        cfg = cls(**raw)
        for lo, hi in cfg.bands:
            if not lo < hi:
                raise ConfigError(f"band bounds not ordered: [{lo}, {hi}]")
        if cfg.significance_method not in ("analytic", "montecarlo", "both"):
            raise ConfigError(f"bad significance_method: {cfg.significance_method}")
        if not Path(cfg.events_path).exists():
            raise ConfigError(f"events_path does not exist: {cfg.events_path}")
        if cfg.weights_path is not None and not Path(cfg.weights_path).exists():
            raise ConfigError(f"weights_path does not exist: {cfg.weights_path}")
        return cfg

    def format_config(self) -> FormatConfig:
        return FormatConfig(
            timestamp_column=self.timestamp_column,
            lat_column=self.lat_column,
            lon_column=self.lon_column,
            timestamp_format=self.timestamp_format,
            category_column=self.category_column,
            category_filter=self.category_filter,
            delimiter=self.delimiter,
        )


def _config_fingerprint(cfg: RunConfig) -> str:
    """Canonical config text for the manifest hash.

    The output directory is excluded so reruns into different
    directories stay byte-identical.
    """
    doc = {k: v for k, v in cfg.__dict__.items() if k != "out_dir"}
    return json.dumps(doc, sort_keys=True)


def _fmt(x: float) -> str:
    """Stable float rendering for artifact files."""
    return f"{x:.10g}"


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(
            ",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row)
        )
    path.write_text("\n".join(lines) + "\n")


def _write_manifest(out: Path, config_text: str, files: list[str]) -> None:
    entries = {}
    for name in sorted(files):
        digest = hashlib.sha256((out / name).read_bytes()).hexdigest()
        entries[name] = digest
    manifest = {
        "config_sha256": hashlib.sha256(config_text.encode()).hexdigest(),
        "crimewaves_version": __version__,
        "files": entries,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _load_events(cfg: RunConfig) -> EventSet:
    try:
        return parse_events(cfg.events_path, cfg.format_config())
    except IngestError as exc:
        raise AnalysisError(f"ingest failed: {exc}") from exc


def _event_window(events: EventSet, cfg: RunConfig) -> tuple[int, int]:
    start = cfg.week_epoch_day
    if start is None:
        start = week_epoch(int(events.days.min()))
    n_weeks = int(np.ceil((int(events.days.max()) + 1 - start) / 7))
    if n_weeks < 1:
        raise AnalysisError("events fall before the configured week epoch")
    return start, start + 7 * n_weeks


def cmd_analyze(cfg: RunConfig) -> int:
    """Full pipeline: partition, per-region series, spectra, waves."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    events = _load_events(cfg)
    if cfg.weights_path is None:
        raise ConfigError("analyze requires weights_path for partitioning")
    weights = PopulationWeights.from_file(cfg.weights_path)

    if cfg.r is not None:
        r = cfg.r
    else:
        sweep = region_sweep(events, weights, phi=cfg.phi, r_values=tuple(cfg.r_values))
        r = sweep.r_u
    part = split(weights, r)
    by_region = assign_regions(events, part)
    by_region.pop(OUTSIDE_REGION, None)

    window = _event_window(events, cfg)
    n_weeks = (window[1] - window[0]) // 7
    if n_weeks < 53:
        raise AnalysisError(f"series of {n_weeks} weeks is too short to analyze")

    region_counts = {}
    for rid, sub in sorted(by_region.items()):
        series = bin_weekly(sub, window=window, region_id=rid)
        if series.counts.mean() > cfg.phi:
            region_counts[rid] = series.counts
    if not region_counts:
        raise AnalysisError(f"no region clears the crime-rate threshold phi={cfg.phi}")

    bands = tuple((float(lo), float(hi)) for lo, hi in cfg.bands)
    try:
        city = analyze_city(
            region_counts, bands=bands, p_level=cfg.p_level, s0=cfg.s0, dj=cfg.dj
        )
    except ValueError as exc:
        raise AnalysisError(str(exc)) from exc

    files = []
    (out / "partition.json").write_text(part.to_json() + "\n")
    files.append("partition.json")

    series_dir = out / "series"
    series_dir.mkdir(exist_ok=True)
    for rid, counts in sorted(region_counts.items()):
        reg = next(r_ for r_ in city.regions if r_.region_id == rid)
        p = reg.processed
        _write_csv(
            series_dir / f"region_{rid:04d}.csv",
            ["week", "r", "x", "d", "y"],
            (
                (t, int(counts[t]), float(p.x[t]), float(p.d[t]), float(p.y[t]))
                for t in range(len(counts))
            ),
        )
        files.append(f"series/region_{rid:04d}.csv")

    _write_csv(
        out / "global_spectra.csv",
        ["region_id", "period_weeks", "power", "threshold", "significant"],
        (
            (
                reg.region_id,
                float(period),
                float(power),
                float(thr),
                int(sig),
            )
            for reg in city.regions
            for period, power, thr, sig in zip(
                reg.spectrum.fourier_periods,
                reg.spectrum.power,
                np.atleast_1d(reg.spectrum_mask.threshold),
                reg.spectrum_mask.mask,
            )
        ),
    )
    files.append("global_spectra.csv")

    _write_csv(
        out / "composed_spectrum.csv",
        ["period_weeks", "count", "fraction"],
        (
            (float(period), int(count), float(frac))
            for period, count, frac in zip(
                city.composed.grid.fourier_periods,
                city.composed.counts,
                city.composed.fraction,
            )
        ),
    )
    files.append("composed_spectrum.csv")

    for band in bands:
        cbs = city.composed_bands[band]
        name = f"composed_band_{band[0]:g}-{band[1]:g}.csv"
        _write_csv(
            out / name,
            ["week", "count", "valid_regions", "fraction"],
            (
                (t, int(cbs.counts[t]), int(cbs.valid_regions[t]), float(cbs.fraction[t]))
                for t in range(cbs.fraction.size)
            ),
        )
        files.append(name)

    runs_rows = []
    for band in bands:
        for run in city.surveys[band].runs:
            runs_rows.append(
                (
                    run.region_id,
                    run.start_week,
                    run.end_week,
                    run.duration,
                    int(run.truncated),
                )
            )
    _write_csv(
        out / "runs.csv",
        ["region_id", "start_week", "end_week", "duration", "truncated"],
        runs_rows,
    )
    files.append("runs.csv")

    fits_doc = {}
    for band in bands:
        survey = city.surveys[band]
        key = f"{band[0]:g}-{band[1]:g}"
        fits_doc[key] = {
            "n_samples": int(survey.samples.size),
            "moving_fraction": survey.moving_fraction,
            "fit_error": survey.fit_error,
            "fits": [
                {
                    "model": f.model,
                    "params": f.params,
                    "loglik": f.loglik,
                    "aic": f.aic,
                    "ks_stat": f.ks_stat,
                }
                for f in survey.fits
            ],
        }
    (out / "fits.json").write_text(json.dumps(fits_doc, indent=2, sort_keys=True) + "\n")
    files.append("fits.json")

    config_text = _config_fingerprint(cfg)
    _write_manifest(out, config_text, files)
    return 0


def cmd_citylevel(cfg: RunConfig) -> int:
    """City-aggregate analysis: one series, global spectrum + band power."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    events = _load_events(cfg)
    window = _event_window(events, cfg)
    series = bin_weekly(events, window=window)
    if series.n_weeks < 53:
        raise AnalysisError(f"series of {series.n_weeks} weeks is too short to analyze")
    if series.counts.sum() == 0:
        raise AnalysisError("no events in the analysis window")
    processed = preprocess_pipeline(series)
    grid = build_grid(series.n_weeks, s0=cfg.s0, dj=cfg.dj)
    ctx = build_context(processed, grid, p_level=cfg.p_level)
    w = transform(processed.y, grid)
    spectrum = global_spectrum(w, coi_mask=True)
    spec_thr = global_threshold(ctx, spectrum.n_avg)

    files = []
    _write_csv(
        out / "global_spectrum.csv",
        ["period_weeks", "power", "threshold", "significant"],
        (
            (float(p_), float(pw), float(th), int(pw > th))
            for p_, pw, th in zip(spectrum.fourier_periods, spectrum.power, spec_thr)
        ),
    )
    files.append("global_spectrum.csv")

    for band in ((float(lo), float(hi)) for lo, hi in cfg.bands):
        sap = scale_avg_power(w, band)
        thr = scale_avg_threshold(ctx, sap.scale_indices)
        valid = sap.band_coi_valid(w.coi)
        name = f"band_power_{band[0]:g}-{band[1]:g}.csv"
        _write_csv(
            out / name,
            ["week", "power", "threshold", "cone_valid", "significant"],
            (
                (t, float(sap.power[t]), thr, int(valid[t]), int(valid[t] and sap.power[t] > thr))
                for t in range(sap.power.size)
            ),
        )
        files.append(name)

    report = {
        "alpha": ctx.alpha,
        "variance": ctx.variance,
        "p_level": ctx.p_level,
        "n_weeks": series.n_weeks,
        "method": "analytic",
    }
    (out / "significance.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    files.append("significance.json")
    config_text = _config_fingerprint(cfg)
    _write_manifest(out, config_text, files)
    return 0


def cmd_partition(cfg: RunConfig) -> int:
    """Partition only: sweep r (or use the configured r) and emit JSON."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.weights_path is None:
        raise ConfigError("partition requires weights_path")
    weights = PopulationWeights.from_file(cfg.weights_path)
    files = []
    if cfg.r is not None:
        r = cfg.r
    else:
        events = _load_events(cfg)
        sweep = region_sweep(events, weights, phi=cfg.phi, r_values=tuple(cfg.r_values))
        r = sweep.r_u
        _write_csv(
            out / "sweep.csv",
            ["r", "qualifying_regions"],
            sorted(sweep.table.items()),
        )
        files.append("sweep.csv")
    part = split(weights, r)
    (out / "partition.json").write_text(part.to_json() + "\n")
    files.append("partition.json")
    config_text = _config_fingerprint(cfg)
    _write_manifest(out, config_text, files)
    return 0


def cmd_synth(config_path: str, out_dir: str, seed: int | None = None) -> int:
    """Generate a synthetic city: events.csv plus ground truth."""
    try:
        text = Path(config_path).read_text()
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {config_path}") from exc
    try:
        scfg = SynthConfig.from_json(text)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad synth config: {exc}") from exc
    if seed is not None:
        from dataclasses import replace

        scfg = replace(scfg, seed=seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    part = grid_partition(scfg.n_regions)
    events, truth = gen_event_stream(scfg, part)
    (out / "events.csv").write_text(events_to_csv(events))
    (out / "partition.json").write_text(part.to_json() + "\n")
    series_dir = out / "series"
    series_dir.mkdir(exist_ok=True)
    for rid in range(scfg.n_regions):
        y = gen_region_series(scfg, rid)
        _write_csv(
            series_dir / f"region_{rid:04d}.csv",
            ["week", "y"],
            ((t, float(y[t])) for t in range(scfg.n_weeks)),
        )
    truth_doc = {
        "n_regions": scfg.n_regions,
        "n_weeks": scfg.n_weeks,
        "hold_durations": {
            str(rid): truth.hold_durations(rid).tolist() for rid in range(scfg.n_regions)
        },
    }
    (out / "ground_truth.json").write_text(json.dumps(truth_doc, indent=2, sort_keys=True) + "\n")
    files = ["events.csv", "partition.json", "ground_truth.json"] + [
        f"series/region_{rid:04d}.csv" for rid in range(scfg.n_regions)
    ]
    _write_manifest(out, text, files)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="crimewaves", description=__doc__)
    parser.add_argument("--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("analyze", "citylevel", "partition", "synth"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None, help="override output directory")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
    args = parser.parse_args(argv)

    try:
        if args.command == "synth":
            if args.out is None:
                raise ConfigError("synth requires --out")
            return cmd_synth(args.config, args.out, seed=args.seed)
        cfg = RunConfig.from_file(args.config)
        if args.out is not None:
            cfg.out_dir = args.out
        if args.seed is not None:
            cfg.seed = args.seed
        if args.command == "analyze":
            return cmd_analyze(cfg)
        if args.command == "citylevel":
            return cmd_citylevel(cfg)
        return cmd_partition(cfg)
    except ConfigError as exc:
        if not args.quiet:
            print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (AnalysisError, ValueError) as exc:
        if not args.quiet:
            print(f"analysis error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
