"""Speed modulation with fixed gains: the five bundled trunk scripts.

Same controller gains in every trial; only the vigor of the scripted
trunk motion changes.  The slowest script stays below the no-effect
speed the whole time, so the elbow never moves and the pen crawls on
trunk-and-shoulder compensation alone; the faster scripts recruit the
elbow through the release-catch dynamic and the peak pen speed climbs
more than an order of magnitude.
"""

from importlib import resources

import numpy as np

from ceac_lab import load_config, no_effect_speed, run_trial
from ceac_lab.signals import differentiate
from ceac_lab.trial import filtered_channel

print(f"{'script':>8} {'peak trunk rate':>16} {'peak pen speed':>15} {'elbow engaged':>14}")
for i in range(1, 6):
    cfg = load_config(resources.files("ceac_lab.data") / "configs" / f"line_speed_regime_{i}.json")
    log = run_trial(cfg)

    vy = differentiate(filtered_channel(log, "pen_y"))
    vz = differentiate(filtered_channel(log, "pen_z"))
    pen_peak = float(np.hypot(vy.values, vz.values).max())
    trunk_rate = differentiate(filtered_channel(log, "phi"))
    trunk_peak = float(np.abs(trunk_rate.values).max())
    engaged = bool(np.abs(log.columns["omega_cmd"]).max() > 0)
    print(f"{i:>8} {trunk_peak:>12.2f} deg/s {pen_peak*100:>12.2f} cm/s {str(engaged):>14}")

v0 = no_effect_speed(load_config(
    resources.files("ceac_lab.data") / "configs" / "line_speed_regime_1.json").controller)
print(f"\nno-effect speed at these gains: {v0:.3f} deg/s")
print("script 1 stays below it throughout, so its whole trial is compensatory:")
print("the elbow command is identically zero and the task runs on trunk lean alone.")
