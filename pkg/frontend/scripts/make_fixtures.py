"""Record a completed sandbox line session as test fixtures.

Produces, in frontend/fixtures/:
  session_welcome.json  — the welcome message of the recorded session
  session_frames.ndjson — every streamed frame (one JSON line each)
  session_metrics.json  — the metrics message payload the service sends
  session_log.csv       — the trial log the service saved
  cli_metrics.json      — `ceac-lab metrics` output on that same log

Run from the repo root after changing the simulator:
  python3 frontend/scripts/make_fixtures.py
"""

import json
import subprocess
import sys
from pathlib import Path

from ceac_lab.logs import TrialLog
from ceac_lab.protocol import encode_message, frame_to_message
from ceac_lab.service import SessionEngine, default_session_config
from ceac_lab.trial import build_task, compute_report, run_trial

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def main() -> None:
    FIXTURES.mkdir(exist_ok=True)
    config = default_session_config("ceac")

    # generate a realistic trunk trace by letting the offline pilot do the
    # task once, then replay its logged trunk samples through a session
    offline = run_trial(config)
    t = offline.columns["t"]
    phi = offline.columns["phi"]

    session = SessionEngine(config)
    frames = []
    for ti, pi in zip(t, phi):
        frames.extend(session.push_input(float(ti), float(pi)))
    log = session.finish()
    assert log.summary["completed"], "fixture session must complete the line task"

    effective = session.engine.lengths
    welcome = {
        "type": "welcome",
        "mode": config.controller.mode.value,
        "task": config.task.kind.value,
        "sample_rate": config.sample_rate,
        "stance_lean": config.stance_lean,
        "calibration_angle": config.calibration_angle,
        "deadzone_zeta": config.controller.deadzone_zeta,
        "cutoff_fc": config.controller.cutoff_fc,
        "gain_lambda": config.controller.gain_lambda,
        "table_z": config.table_z,
        "line_start_y": config.line_start_y,
        "line_length": config.task.length,
        "segment_lengths": [
            effective.trunk_len,
            effective.upper_arm_len,
            effective.forearm_pen_len,
        ],
        "elbow_mount_offset": effective.elbow_mount_offset,
        "hip": [0.0, 0.0],
    }
    (FIXTURES / "session_welcome.json").write_text(json.dumps(welcome, indent=1))

    with open(FIXTURES / "session_frames.ndjson", "wb") as fh:
        for frame in frames:
            fh.write(encode_message(frame_to_message(frame)))

    log_path = FIXTURES / "session_log.csv"
    log.write(log_path)

    task = build_task(config.task, config.table_z, config.line_start_y)
    report = compute_report(log, task)
    service_metrics = {"type": "metrics", "report": json.loads(report.to_json())}
    (FIXTURES / "session_metrics.json").write_text(json.dumps(service_metrics, indent=1))

    cli = subprocess.run(
        [sys.executable, "-m", "ceac_lab.cli", "metrics", str(log_path)],
        capture_output=True,
        text=True,
        check=True,
    )
    (FIXTURES / "cli_metrics.json").write_text(cli.stdout)

    print(f"recorded {len(frames)} frames; completed in "
          f"{log.summary['ended_at'] - log.summary['started_at']:.2f} s")
    print(f"fixtures in {FIXTURES}")


if __name__ == "__main__":
    main()
