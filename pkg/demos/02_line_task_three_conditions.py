"""The 20 cm forward-and-back line under three control conditions.

Runs the identical release-catch pilot with the CEAC prosthesis, the CCC
baseline prosthesis, and the natural limb, then prints the story the
trunk traces tell: CCC must cross backward of its reference to return
(and drops the pen off the table while over-flexed); CEAC keeps the
trunk forward of upright and the pen on the surface the whole trip.

Saves the three logs next to this script; point matplotlib at the
exported pen/joint CSVs (ceac-lab export-plots) to draw the figures.
"""

from importlib import resources
from pathlib import Path

from ceac_lab import compute_report, load_config, run_trial
from ceac_lab.trial import build_task

out = Path(__file__).resolve().parent / "out"
out.mkdir(exist_ok=True)

for name in ("line_ceac", "line_ccc", "line_natural"):
    cfg = load_config(resources.files("ceac_lab.data") / "configs" / f"{name}.json")
    log = run_trial(cfg)
    log.write(out / f"{name}.csv")
    task = build_task(cfg.task, cfg.table_z, cfg.line_start_y)
    report = compute_report(log, task)

    phi = log.columns["phi"]
    contact = log.columns["in_contact"]
    backward = phi < log.summary["ref_initial"] - 1e-9
    print(f"\n=== {name} ===")
    print(f"completed: {log.summary['completed']}"
          + (f"  completion time: {report.completion_time:.2f} s" if report.completion_time else ""))
    print(f"trunk range: [{phi.min():+.2f}, {phi.max():+.2f}] deg "
          f"(reference anchor at {log.summary['ref_initial']:+.1f})")
    print(f"crossed backward of the anchor: {bool(backward.any())}")
    print(f"pen contact fraction: {contact.mean():.3f}"
          + ("  (lift-off while leaning backward!)" if (~contact & backward).any() else ""))
    if report.precision_mm is not None:
        print(f"precision: {report.precision_mm:.2f} mm   smoothness (SPARC): {report.sparc:.1f}")
    print(f"elbow ROM: {report.rom_elbow:.1f} deg  total elbow travel: {report.total_elbow:.1f} deg")

print(f"\nlogs written to {out}/; render channel bundles with:")
print(f"  ceac-lab export-plots {out}/line_ceac.csv --out {out}/plots")
