"""Threat-level sweep harness: batches of seeded runs per (model, adversary
mode, malicious fraction) point, aggregated into a CSV that carries enough
metadata to recompute every score from the file alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .engine import RunConfig, run_simulation
from .metrics import MetricsRecord, ScoreWeights, tradeoff_score
from .topology import generate_topology

CSV_HEADER = ("model,mode,fraction,accuracy_mean,accuracy_std,pathlen_mean,"
              "pathlen_std,energy_mean,energy_std,score")


class SweepError(RuntimeError):
    """A run inside a sweep failed; the message identifies the point."""


@dataclass(frozen=True)
class SweepSpec:
    fractions: tuple[float, ...] = tuple(i / 10 for i in range(10))
    runs_per_point: int = 30
    adversary_modes: tuple[str, ...] = ("static", "oscillating")
    models: tuple[str, ...] = ("trustsense", "eigentrust")
    base_seed: int = 0

    def __post_init__(self):
        if self.runs_per_point < 1:
            raise ValueError("runs_per_point must be at least 1")
        if any(not 0 <= f <= 1 for f in self.fractions):
            raise ValueError("fractions must lie in [0, 1]")


@dataclass(frozen=True)
class SweepPoint:
    model: str
    mode: str
    fraction: float
    accuracy_mean: float
    accuracy_std: float
    pathlen_mean: float
    pathlen_std: float
    energy_mean: float
    energy_std: float
    score: float


@dataclass
class SweepReport:
    points: list[SweepPoint]
    e_max: float
    weights: ScoreWeights
    spec: SweepSpec | None = None
    runs: dict = field(default_factory=dict)

    def average_score(self, model: str, mode: str | None = None) -> float:
        scores = [p.score for p in self.points
                  if p.model == model and (mode is None or p.mode == mode)]
        if not scores:
            raise ValueError(f"no sweep points for model {model!r}")
        return sum(scores) / len(scores)


def round_up_energy_cap(max_energy: float, granularity: float) -> float:
    """Energy normalization cap: the maximum recorded energy rounded up to
    the nearest granularity step (at least one step, since nothing in the
    simulation caps consumption)."""
    steps = max(1, math.ceil(max_energy / granularity))
    return steps * granularity


def run_sweep(spec: SweepSpec, base_config: RunConfig,
              weights: ScoreWeights | None = None,
              progress=None) -> SweepReport:
    """Execute the full grid. Run i of every point uses seed base_seed + i,
    so points are compared on identical topologies and adversary draws."""
    if weights is None:
        weights = ScoreWeights(p_max=float(base_config.sensor_count))
    topologies = {}
    raw: dict[tuple[str, str, float], list[MetricsRecord]] = {}
    for model in spec.models:
        for mode in spec.adversary_modes:
            for fraction in spec.fractions:
                records = []
                for i in range(spec.runs_per_point):
                    seed = spec.base_seed + i
                    try:
                        if seed not in topologies:
                            topologies[seed] = generate_topology(
                                base_config.topology_config(), seed)
                        cfg = replace(base_config, trust_model=model,
                                      adversary_mode=mode,
                                      malicious_fraction=fraction,
                                      rng_seed=seed)
                        records.append(run_simulation(cfg, topologies[seed]))
                    except Exception as exc:
                        raise SweepError(
                            f"run failed at model={model} mode={mode} "
                            f"fraction={fraction} seed={seed}: {exc}") from exc
                raw[(model, mode, fraction)] = records
                if progress is not None:
                    progress(model, mode, fraction, records)

    all_energies = [r.energy for records in raw.values() for r in records]
    e_max = round_up_energy_cap(max(all_energies), weights.e_max_rounding)

    points = []
    for model in spec.models:
        for mode in spec.adversary_modes:
            for fraction in spec.fractions:
                records = raw[(model, mode, fraction)]
                acc = np.array([r.accuracy for r in records])
                plen = np.array([r.avg_path_length for r in records])
                energy = np.array([r.energy for r in records])
                mean_record = MetricsRecord(float(acc.mean()), float(plen.mean()),
                                            float(energy.mean()), 0, 0)
                points.append(SweepPoint(
                    model, mode, fraction,
                    float(acc.mean()), float(acc.std()),
                    float(plen.mean()), float(plen.std()),
                    float(energy.mean()), float(energy.std()),
                    tradeoff_score(mean_record, weights, e_max)))
    return SweepReport(points, e_max, weights, spec, raw)


def emit_csv(report: SweepReport, path: str) -> None:
    """Write one row per sweep point with fixed 6-decimal formatting, plus a
    trailing comment carrying the normalization constants so scores can be
    recomputed from the file alone."""
    lines = [CSV_HEADER]
    for p in report.points:
        lines.append(
            f"{p.model},{p.mode},{p.fraction:.6f},{p.accuracy_mean:.6f},"
            f"{p.accuracy_std:.6f},{p.pathlen_mean:.6f},{p.pathlen_std:.6f},"
            f"{p.energy_mean:.6f},{p.energy_std:.6f},{p.score:.6f}")
    if report.points:
        w = report.weights
        lines.append(f"# eMax={report.e_max:.6f} pMax={w.p_max:.6f} "
                     f"wA={w.w_accuracy:.6f} wP={w.w_path:.6f} wE={w.w_energy:.6f}")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write sweep CSV to {path}: {exc}") from exc


def parse_csv(path: str) -> tuple[list[SweepPoint], dict[str, float]]:
    """Read back an emitted CSV; returns the points and the metadata mapping
    from the trailing comment (empty when the file is header-only)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path} is not a sweep CSV (bad header)")
    points = []
    metadata: dict[str, float] = {}
    for ln in lines[1:]:
        if ln.startswith("#"):
            for item in ln[1:].split():
                key, _, value = item.partition("=")
                metadata[key] = float(value)
            continue
        model, mode, *nums = ln.split(",")
        points.append(SweepPoint(model, mode, *map(float, nums)))
    return points, metadata
