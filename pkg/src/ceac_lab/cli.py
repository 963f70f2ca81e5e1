"""Command-line entry points.

Subcommands: simulate (one trial from a config), sweep (the speed x
size drawing grid), metrics (reports from saved logs, ours or external
CSV), replay (re-render a log as protocol frames), serve (live session
service), export-plots (per-figure CSV bundles).
"""

from __future__ import annotations

import argparse
import asyncio
import csv
import json
import sys
import time
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from .config import ArmCondition, TrialConfig, config_hash, load_config
from .control import ControlMode
from .logs import LOG_COLUMNS, TrialLog, read_external_csv
from .metrics import report_csv_header, report_csv_row
from .protocol import encode_message
from .service import output_dir, serve_session
from .tasks import TaskKind
from .trial import build_task, compute_report, run_sweep, run_trial


def _apply_mode(config: TrialConfig, mode: str | None) -> TrialConfig:
    if mode is None:
        return config
    if mode == "natural":
        return replace(config, arm_condition=ArmCondition.NATURAL)
    arm = ArmCondition.PROSTHESIS_CCC if mode == "ccc" else ArmCondition.PROSTHESIS_CEAC
    return replace(
        config,
        arm_condition=arm,
        controller=replace(config.controller, mode=ControlMode(mode)),
    )


def _load_or_default_config(args) -> TrialConfig:
    if args.config:
        config = load_config(args.config)
    else:
        config = load_config(resources.files("ceac_lab.data") / "configs" / "line_ceac.json")
    config = _apply_mode(config, getattr(args, "mode", None))
    if getattr(args, "seed", None) is not None:
        config = replace(config, seed=args.seed)
    if getattr(args, "rate", None) is not None:
        config = replace(config, sample_rate=args.rate)
    return config


def cmd_simulate(args) -> int:
    config = _load_or_default_config(args)
    out = output_dir(args.out)
    out.mkdir(parents=True, exist_ok=True)
    log = run_trial(config)
    stem = f"trial_{config.task.kind.value}_{config.arm_condition.value}_{config_hash(config)}"
    log_path = out / f"{stem}.csv"
    log.write(log_path)
    task = build_task(config.task, config.table_z, config.line_start_y)
    report = compute_report(log, task)
    report_path = out / f"{stem}.report.json"
    report_path.write_text(report.to_json() + "\n")
    csv_path = out / f"{stem}.report.csv"
    csv_path.write_text(report_csv_header() + "\n" + report_csv_row(report) + "\n")
    print(f"log:    {log_path}")
    print(f"report: {report_path}")
    print(report.to_json())
    return 0


def cmd_sweep(args) -> int:
    config = _load_or_default_config(args)
    result = run_sweep(config, repetitions=args.repetitions)
    out = output_dir(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = [report_csv_header() + ",condition"]
    failures = 0
    for cell in result.cells:
        safe = cell.label.replace("/", "_")
        if cell.log is not None:
            cell.log.write(out / f"sweep_{safe}.csv")
            rows.append(report_csv_row(cell.report) + f",{cell.label}")
        else:
            failures += 1
            print(f"cell {cell.label} failed: {cell.error}", file=sys.stderr)
    (out / "sweep_trials.csv").write_text("\n".join(rows) + "\n")
    (out / "sweep_aggregate.csv").write_text(result.aggregate_csv())
    print(f"{len(result.cells) - failures}/{len(result.cells)} trials ok")
    print(f"aggregate: {out / 'sweep_aggregate.csv'}")
    return 0 if failures == 0 else 1


def _read_log(args) -> TrialLog:
    if args.column_map:
        with open(args.column_map) as fh:
            column_map = json.load(fh)
        return read_external_csv(args.log, column_map, rate=args.rate)
    return TrialLog.read(args.log)


def cmd_metrics(args) -> int:
    try:
        log = _read_log(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    task = None
    task_kind = args.task or log.summary.get("task_kind")
    if task_kind:
        cfg = log.header.get("config") or {}
        task_cfg = cfg.get("task", {})
        table_z = cfg.get("table_z", 0.10)
        start_y = cfg.get("line_start_y", 0.15)
        from .config import TaskRef
        from .tasks import SpeedInstruction, TrackScale

        ref = TaskRef(
            kind=TaskKind(task_kind),
            length=task_cfg.get("length", 0.20),
            scale=TrackScale(task_cfg["scale"]) if task_cfg.get("scale") else None,
            speed_instruction=(
                SpeedInstruction(task_cfg["speed_instruction"])
                if task_cfg.get("speed_instruction")
                else None
            ),
        )
        task = build_task(ref, table_z, start_y)
    report = compute_report(log, task)
    if args.csv:
        print(report_csv_header())
        print(report_csv_row(report))
    else:
        print(report.to_json())
    if not report.completed:
        print("trial incomplete", file=sys.stderr)
        return 1
    return 0


def cmd_replay(args) -> int:
    try:
        log = TrialLog.read(args.log)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    period = 1.0 / log.rate
    out = sys.stdout.buffer
    t_prev = None
    for i in range(len(log)):
        row = {name: log.columns[name][i] for name in LOG_COLUMNS}
        payload = {
            "type": "frame",
            "t": float(row["t"]),
            "phi": float(row["phi"]),
            "phi_ref": float(row["phi_ref"]),
            "eps": float(row["eps"]),
            "theta": float(row["theta"]),
            "beta": float(row["beta"]),
            "pen_y": float(row["pen_y"]),
            "pen_z": float(row["pen_z"]),
            "in_contact": bool(row["in_contact"]),
            "motor_active": bool(row["motor_active"]),
            "frozen": bool(row["frozen"]),
            "target_index": int(row["target_index"]),
            "task_started": True,
            "task_done": False,
            "in_tolerance": False,
        }
        try:
            out.write(encode_message(payload))
        except BrokenPipeError:
            return 0
        if args.speed > 0:
            if t_prev is not None:
                time.sleep(period / args.speed)
            t_prev = row["t"]
    try:
        out.flush()
    except BrokenPipeError:
        pass
    return 0


def cmd_serve(args) -> int:
    host, _, port = args.bind.partition(":")
    port = int(port or 7466)

    async def main() -> None:
        server = await serve_session(host or "127.0.0.1", port, out=args.out)
        addrs = ", ".join(str(s.getsockname()) for s in server.sockets)
        print(f"session service listening on {addrs}")
        async with server:
            await server.serve_forever()

    try:
        asyncio.run(main())
    except KeyboardInterrupt:
        pass
    return 0


def cmd_export_plots(args) -> int:
    out = output_dir(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for log_path in args.logs:
        try:
            log = TrialLog.read(log_path)
        except ValueError as exc:
            print(f"error reading {log_path}: {exc}", file=sys.stderr)
            return 2
        stem = Path(log_path).stem
        t = log.columns["t"]
        vy = np.gradient(log.columns["pen_y"], 1.0 / log.rate)
        vz = np.gradient(log.columns["pen_z"], 1.0 / log.rate)
        speed = np.hypot(vy, vz)
        # trajectory + velocity + joint-angle channel sets, one tidy CSV each
        with open(out / f"{stem}_pen.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "pen_y", "pen_z", "speed", "in_contact", "in_tolerance_ribbon"])
            for i in range(len(log)):
                w.writerow(
                    [t[i], log.columns["pen_y"][i], log.columns["pen_z"][i], speed[i], int(log.columns["in_contact"][i]), int(log.columns["motor_active"][i])]
                )
        with open(out / f"{stem}_joints.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "phi", "phi_ref", "eps", "theta", "beta", "omega_cmd", "motor_active", "frozen"])
            for i in range(len(log)):
                w.writerow(
                    [t[i], log.columns["phi"][i], log.columns["phi_ref"][i], log.columns["eps"][i], log.columns["theta"][i], log.columns["beta"][i], log.columns["omega_cmd"][i], int(log.columns["motor_active"][i]), int(log.columns["frozen"][i])]
                )
        print(f"exported {stem}_pen.csv, {stem}_joints.csv")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ceac-lab",
        description="Trunk-driven prosthetic elbow control: simulator, tasks, metrics, live sessions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one trial from a config file")
    p.add_argument("--config", help="trial config JSON (default: bundled line CEAC)")
    p.add_argument("--out", help="output directory (default: $CEAC_LAB_DATA_DIR or ./ceac_lab_out)")
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=["ceac", "ccc", "natural"])
    p.add_argument("--rate", type=float, help="log sample rate in Hz")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="3 speeds x 2 sizes x N reps drawing grid")
    p.add_argument("--config", help="base trial config JSON")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=["ceac", "ccc", "natural"])
    p.add_argument("--repetitions", type=int, default=4)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("metrics", help="compute the metric report for a saved log")
    p.add_argument("log")
    p.add_argument("--task", choices=[k.value for k in TaskKind], help="override task kind")
    p.add_argument("--column-map", help="JSON mapping canonical->external column names")
    p.add_argument("--rate", type=float, help="sample rate for external CSV ingestion")
    p.add_argument("--csv", action="store_true", help="emit the flat CSV row instead of JSON")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("replay", help="re-render a log as protocol frames on stdout")
    p.add_argument("--log", required=True)
    p.add_argument("--speed", type=float, default=1.0, help="pacing factor; 0 = no pacing")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="run the live session service")
    p.add_argument("--bind", default="127.0.0.1:7466", help="HOST:PORT")
    p.add_argument("--out")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("export-plots", help="emit per-figure CSV bundles from logs")
    p.add_argument("logs", nargs="+")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_plots)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
