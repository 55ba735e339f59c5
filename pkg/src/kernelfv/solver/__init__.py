"""Grid, boundary conditions, spatial operator and time integration."""
from .boundary import (BoundarySet, Dirichlet, Outflow, Periodic, Profile, Reflecting,
                       slit_inflow)
from .grid import Field, Grid2D, init_cell_averages, mirror_average_x
from .rhs import GravitySource, PointSource, Scheme, SchemeOptions, Viscosity
from .timestep import (RunStats, SolverAbort, TimeControls, advance_to, select_dt,
                       ssp43_step)

__all__ = [
    "BoundarySet", "Dirichlet", "Outflow", "Periodic", "Profile", "Reflecting", "slit_inflow",
    "Field", "Grid2D", "init_cell_averages", "mirror_average_x",
    "GravitySource", "PointSource", "Scheme", "SchemeOptions", "Viscosity",
    "RunStats", "SolverAbort", "TimeControls", "advance_to", "select_dt", "ssp43_step",
]
