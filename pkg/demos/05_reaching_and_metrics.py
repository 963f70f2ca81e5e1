"""Nine-target reaching and the full metric pipeline.

Runs the reaching round with the prosthesis and with the natural limb,
then walks the analysis chain: zero-phase filtering, tangential speed,
and each metric.  The contrasts land the expected way: the prosthesis
round is slower, less direct (higher path-length ratio), less smooth
(more negative SPARC), and less co-activated (lower SJVI), while the
trunk works more and the elbow moves in fewer, larger sweeps.
"""

from importlib import resources

from ceac_lab import compute_report, load_config, run_trial
from ceac_lab.trial import build_task

reports = {}
for name in ("reaching_ceac", "reaching_natural"):
    cfg = load_config(resources.files("ceac_lab.data") / "configs" / f"{name}.json")
    log = run_trial(cfg)
    task = build_task(cfg.task, cfg.table_z, cfg.line_start_y)
    reports[name] = compute_report(log, task)
    acq = log.summary["acquisitions"]
    print(f"\n=== {name} ===")
    print(f"targets acquired: {[k for k, _, _ in acq]}")
    print(f"dwells held: {[round(a - e, 2) for _, e, a in acq]} s")

print(f"\n{'metric':>22} {'prosthesis':>12} {'natural':>12}")
p, n = reports["reaching_ceac"], reports["reaching_natural"]
rows = [
    ("completion time (s)", p.completion_time, n.completion_time),
    ("path-length ratio", p.plr, n.plr),
    ("SPARC", p.sparc, n.sparc),
    ("SJVI", p.sjvi, n.sjvi),
    ("trunk ROM (deg)", p.rom_trunk, n.rom_trunk),
    ("trunk total (deg)", p.total_trunk, n.total_trunk),
    ("elbow ROM (deg)", p.rom_elbow, n.rom_elbow),
    ("elbow total (deg)", p.total_elbow, n.total_elbow),
]
for label, a, b in rows:
    print(f"{label:>22} {a:>12.2f} {b:>12.2f}")

print("""
Reading the table: the controlled elbow covers far less cumulative
travel (fewer, larger sweeps instead of constant small corrections),
the trunk takes over much of the motion, paths wander more between
targets, and shoulder-elbow co-activation drops but stays well above
sequential joint-by-joint operation.
""")
