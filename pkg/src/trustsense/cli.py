"""Command-line interface: single runs, threat-level sweeps, score
recomputation from an emitted CSV, and topology generation/inspection.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import (build_run_config, build_score_weights, build_sweep_spec,
                     default_settings, load_settings)
from .engine import SimulationEngine
from .metrics import MetricsRecord, ScoreWeights, tradeoff_score
from .sweep import emit_csv, parse_csv, run_sweep
from .topology import NetworkTopology, generate_topology


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE",
                        help="key-value configuration file")
    parser.add_argument("--seed", type=int, metavar="N",
                        help="override the run seed / sweep base seed")
    parser.add_argument("--out", metavar="PATH", help="output file")
    parser.add_argument("--verbose", action="store_true",
                        help="progress output and info logging")


def _settings(args) -> dict:
    return load_settings(args.config) if args.config else default_settings()


def _print_record(record: MetricsRecord) -> None:
    print(f"accuracy            {record.accuracy:.6f}")
    print(f"avg_path_length     {record.avg_path_length:.6f}")
    print(f"energy              {record.energy:.6f}")
    print(f"blacklist_tp        {record.blacklist_true_positives}")
    print(f"blacklist_fp        {record.blacklist_false_positives}")


def _cmd_run(args) -> int:
    settings = _settings(args)
    overrides = {"collect_events": bool(args.out) or settings["collectEvents"]}
    if args.seed is not None:
        overrides["rng_seed"] = args.seed
    cfg = build_run_config(settings, **overrides)
    topo = generate_topology(cfg.topology_config(), cfg.rng_seed)
    engine = SimulationEngine(cfg, topo)
    record = engine.run()
    _print_record(record)
    if args.out:
        engine.write_event_log(args.out)
        print(f"event log written to {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    settings = _settings(args)
    spec_overrides = {}
    if args.seed is not None:
        spec_overrides["base_seed"] = args.seed
    spec = build_sweep_spec(settings, **spec_overrides)
    base_config = build_run_config(settings)
    weights = build_score_weights(settings)

    def progress(model, mode, fraction, records):
        if args.verbose:
            mean_acc = sum(r.accuracy for r in records) / len(records)
            print(f"done {model}/{mode}/{fraction:.1f}  "
                  f"accuracy {mean_acc:.3f}", flush=True)

    report = run_sweep(spec, base_config, weights, progress=progress)
    out = args.out or "sweep.csv"
    emit_csv(report, out)
    print(f"sweep written to {out} (eMax {report.e_max:.0f})")
    for model in spec.models:
        for mode in spec.adversary_modes:
            print(f"average score {model}/{mode}: "
                  f"{report.average_score(model, mode):.4f}")
    return 0


def _cmd_score(args) -> int:
    points, metadata = parse_csv(args.csv)
    if not points:
        print("empty report: header-only CSV")
        return 0
    if "eMax" not in metadata:
        print("CSV carries no normalization metadata; cannot recompute",
              file=sys.stderr)
        return 1
    weights = ScoreWeights(w_accuracy=metadata["wA"], w_path=metadata["wP"],
                           w_energy=metadata["wE"], p_max=metadata["pMax"])
    by_model: dict[tuple[str, str], list[float]] = {}
    print("model,mode,fraction,score")
    for p in points:
        record = MetricsRecord(p.accuracy_mean, p.pathlen_mean, p.energy_mean,
                               0, 0)
        score = tradeoff_score(record, weights, metadata["eMax"])
        drift = abs(score - p.score)
        flag = "" if drift < 1e-6 else f"  (stored {p.score:.6f})"
        print(f"{p.model},{p.mode},{p.fraction:.2f},{score:.6f}{flag}")
        by_model.setdefault((p.model, p.mode), []).append(score)
    for (model, mode), scores in sorted(by_model.items()):
        print(f"average {model}/{mode}: {sum(scores) / len(scores):.6f}")
    return 0


def _describe_topology(topo: NetworkTopology) -> None:
    print(f"sensors {len(topo.sensors)}  heads {len(topo.heads)}  "
          f"field {topo.field_size}  radio range {topo.radio_range}")
    for hid in sorted(topo.heads):
        members = topo.cluster_members[hid]
        print(f"cluster {hid}: {len(members)} members")
    degrees = [len(topo.neighbors[s]) for s in topo.sensors]
    print(f"neighbor degree min/avg/max: {min(degrees)}/"
          f"{sum(degrees) / len(degrees):.1f}/{max(degrees)}")
    dead = topo.routing_dead_ends()
    print(f"routing dead ends: {len(dead)}" + (f" {dead}" if dead else ""))


def _cmd_topo(args) -> int:
    if args.file:
        with open(args.file, "r", encoding="utf-8") as fh:
            topo = NetworkTopology.parse(fh.read())
    else:
        settings = _settings(args)
        seed = args.seed if args.seed is not None else settings["rngSeed"]
        cfg = build_run_config(settings)
        topo = generate_topology(cfg.topology_config(), seed)
    _describe_topology(topo)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(topo.serialize())
        print(f"topology written to {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="trustsense",
        description="Deterministic trust-managed sensor network simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a single run and print metrics")
    _add_common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run the threat-level sweep, write CSV")
    _add_common(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_score = sub.add_parser("score", help="recompute trade-off scores from a CSV")
    _add_common(p_score)
    p_score.add_argument("csv", help="sweep CSV produced by the sweep command")
    p_score.set_defaults(func=_cmd_score)

    p_topo = sub.add_parser("topo", help="generate or inspect a topology")
    _add_common(p_topo)
    p_topo.add_argument("file", nargs="?", help="existing topology file to inspect")
    p_topo.set_defaults(func=_cmd_topo)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
