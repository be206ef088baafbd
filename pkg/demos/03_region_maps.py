"""Index maps of circular orbits over the (xi, alpha) parameter plane.

For each surface a grid of model points is classified into regions, each
carrying a Morse index, and written as CSV and SVG. The CLI command
``maslov-orbits regions`` does the same for a single surface.

Run with ``python demos/03_region_maps.py [output_dir]``.
"""

import sys
from collections import Counter
from pathlib import Path

from maslov_orbits.cli import region_grid, render_region_svg, write_region_csv
from maslov_orbits.surface import boundary_curves

out = Path(sys.argv[1] if len(sys.argv) > 1 else "region_maps")
out.mkdir(parents=True, exist_ok=True)

SWEEPS = [
    ("euclidean", (0.1, 4.0), (-3.0, -0.01)),
    ("sphere", (1.0, 6.0), (0.0, 8.0)),
    ("sphere", (0.05, 0.95), (-8.0, 0.0)),
    ("hyperbolic", (0.05, 0.995), (-3.0, -0.01)),
]

for n, (surface, xr, ar) in enumerate(SWEEPS):
    nx = na = 120
    cells = region_grid(surface, xr, ar, nx, na, jobs=1)
    curves = boundary_curves(surface, xr, ar, resolution=240)
    stem = out / f"{n}_{surface}"
    with open(f"{stem}.csv", "w", encoding="utf-8", newline="") as fh:
        write_region_csv(cells, fh)
    Path(f"{stem}.svg").write_text(render_region_svg(surface, cells, xr, ar, nx, na, curves), encoding="utf-8")
    counts = Counter(c["iota1"] for c in cells if c["iota1"] is not None)
    shown = ", ".join(f"{k}: {v}" for k, v in sorted(counts.items())[:8])
    print(f"{surface:10s} xi in {xr}, alpha in {ar}: cells per index {{{shown}}}"
          f"{' ...' if len(counts) > 8 else ''}")
    print(f"{'':10s} separatrices: {sorted({c.name for c in curves})}")

print(f"\nwrote CSV and SVG files to {out}/")
