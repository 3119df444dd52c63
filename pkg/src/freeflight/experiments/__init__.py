from .render import map_svg, render_map, write_map_csv
from .sweep import (
    CellResult,
    ConvergenceMap,
    SweepSpec,
    amplitude_from_signed_norm,
    empirical_radius,
    error_transform,
    run_sweep,
    solve_cell,
)
