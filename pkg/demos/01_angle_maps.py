"""Where in coupling-operator space does the junction conduct best?

Both contacts couple through cos(angle)*sigma_z + sin(angle)*sigma_x.
At weak coupling the current is maximal when both contacts use the pure
transition operator (both angles at pi/2). At strong coupling that point
turns insulating and the optimum migrates onto the ridge where the two
angles differ by a quarter period.

Runs two coarse angle maps (11 x 11, reduced truncation) and prints them
as text heatmaps. Takes a few seconds.
"""

import math

import numpy as np

from qjunction.sweep import config_from_mapping, run_angle_grid

SHADES = " .:-=+*#%@"


def angle_map(lam):
    cfg = config_from_mapping({
        "mode": "angle-grid",
        "truncation": 4,
        "left": {"temperature": 2.0, "lambda": lam},
        "right": {"temperature": 1.0, "lambda": lam},
        "angle_grid": {"n_theta": 11, "n_phi": 11},
    })
    result = run_angle_grid(cfg)
    k_j = result.columns.index("j_left")
    k_status = result.columns.index("status")
    grid = np.full((11, 11), np.nan)
    for row in result.rows:
        i = round(row[0] / (math.pi / 10))
        j = round(row[1] / (math.pi / 10))
        if not row[k_status]:
            grid[i, j] = row[k_j]
    return grid, result.report


def show(grid, title):
    print(title)
    top = np.nanmax(grid)
    print("      phi ->  0 " + " " * 16 + "pi")
    for i, line in enumerate(grid):
        cells = "".join(
            "? " if np.isnan(v) else SHADES[int(9 * max(v, 0.0) / top)] + " "
            for v in line)
        label = "theta=0 " if i == 0 else ("theta=pi" if i == 10 else " " * 8)
        print(f"  {label}  {cells}")
    print(f"  (darkest = largest current, max = {top:.3e})\n")


for lam, regime in ((0.1, "weak coupling"), (5.0, "strong coupling")):
    grid, report = angle_map(lam)
    show(grid, f"current map at coupling {lam} ({regime})")
    print("  " + report.replace("\n", "\n  ") + "\n")
