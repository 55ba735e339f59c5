"""Catalog of benchmark initial/boundary value problems."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .solver import (BoundarySet, Dirichlet, Field, GravitySource, Grid2D, Outflow, Periodic,
                     Reflecting, Scheme, SchemeOptions, TimeControls, Viscosity,
                     init_cell_averages, mirror_average_x, slit_inflow)

SQRT5 = math.sqrt(5.0)
# Gauss points per direction for initial cell averages
IC_QUAD_POINTS = 5


@dataclass
class ProblemSpec:
    name: str
    xlim: tuple[float, float]
    ylim: tuple[float, float]
    gamma: float
    prim_ic: Callable[[np.ndarray, np.ndarray], np.ndarray]
    boundaries: Callable[[], BoundarySet]
    t_final: float
    nx: int
    ny: int
    cfl: float = 1.0
    atol: float = 1e-4
    rtol: float = 1e-4
    riemann: str = "hllc"
    viscosity: Optional[Viscosity] = None
    sources: tuple = ()
    symmetric_x: bool = False
    # positivity limiting also at cell-interior nodes (needed near vacuum)
    interior_limiting: bool = False
    params: dict = field(default_factory=dict)

    def grid(self, nx: Optional[int] = None, ny: Optional[int] = None, radius: int = 2) -> Grid2D:
        return Grid2D.from_extent(nx or self.nx, ny or self.ny, self.xlim, self.ylim, ghost=radius)

    def initial_field(self, grid: Grid2D, n_quad: Optional[int] = None) -> Field:
        fld = init_cell_averages(self.prim_ic, grid, n_quad or IC_QUAD_POINTS, self.gamma)
        if self.symmetric_x:
            mirror_average_x(fld)
        return fld

    def scheme(self, grid: Grid2D, options: Optional[SchemeOptions] = None, rset=None) -> Scheme:
        options = options or SchemeOptions(radius=grid.ghost, riemann=self.riemann)
        if options.interior_limiting is None:
            options = replace(options, interior_limiting=self.interior_limiting)
        return Scheme(grid, self.boundaries(), self.gamma, options,
                      viscosity=self.viscosity, sources=self.sources, rset=rset)

    def controls(self, **overrides) -> TimeControls:
        kw = dict(cfl_max=self.cfl, atol=self.atol, rtol=self.rtol, t_final=self.t_final)
        kw.update(overrides)
        return TimeControls(**kw)

    def setup(self, nx: Optional[int] = None, ny: Optional[int] = None,
              options: Optional[SchemeOptions] = None, radius: Optional[int] = None):
        """Grid, scheme and initial field in one call."""
        if radius is None:
            radius = options.radius if options is not None else 2
        if options is None:
            options = SchemeOptions(radius=radius, riemann=self.riemann)
        g = self.grid(nx, ny, radius)
        return self.scheme(g, options), self.initial_field(g)

    def with_params(self, **kw) -> "ProblemSpec":
        return replace(self, **kw)


def _stack(*cols):
    cols = np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in cols])
    return np.stack(cols, axis=-1)


# -- isentropic vortex ----------------------------------------------------------

VORTEX_OMEGA0 = 5.0 * math.sqrt(2.0 * math.e) / (4.0 * math.pi)


def vortex_prim(x, y, gamma: float = 1.4):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    om = VORTEX_OMEGA0 * np.exp(-0.5 * (x * x + y * y))
    base = 1.0 + 0.5 * (1.0 - gamma) * om * om
    rho = base ** (1.0 / (gamma - 1.0))
    p = base ** (gamma / (gamma - 1.0)) / gamma
    return _stack(rho, 1.0 - y * om, 1.0 + x * om, p)


def _all_periodic():
    return BoundarySet(Periodic(), Periodic(), Periodic(), Periodic())


def isentropic_vortex(gamma: float = 1.4) -> ProblemSpec:
    return ProblemSpec(
        name="isentropic_vortex",
        xlim=(-10.0, 10.0), ylim=(-10.0, 10.0), gamma=gamma,
        prim_ic=lambda x, y: vortex_prim(x, y, gamma),
        boundaries=_all_periodic,
        t_final=20.0, nx=64, ny=64,
        cfl=1.0, atol=1e-6, rtol=1e-6,
    )


# -- Sod ------------------------------------------------------------------------

SOD_LEFT = (1.0, 0.0, 0.0, 1.0)
SOD_RIGHT = (0.125, 0.0, 0.0, 0.1)


def tilted_coordinate(x, y):
    return (2.0 * np.asarray(x) + np.asarray(y)) / SQRT5


def sod_tilted_is_left(xp):
    """Left-state bands of the periodic strip, x_par in [0, 4]."""
    xp = np.asarray(xp, dtype=float)
    return (xp <= 0.5) | ((xp > 1.5) & (xp <= 2.5)) | (xp > 3.5)


def sod(variant: str = "aligned", gamma: float = 1.4) -> ProblemSpec:
    L = np.array(SOD_LEFT)
    Rs = np.array(SOD_RIGHT)
    if variant == "aligned":
        def ic(x, y):
            left = np.asarray(x) < 0.5
            return np.where(left[..., None], L, Rs) * np.ones(np.shape(y) + (1,))

        return ProblemSpec(
            name="sod",
            xlim=(0.0, 1.0), ylim=(0.0, 0.04), gamma=gamma, prim_ic=ic,
            boundaries=lambda: BoundarySet(Outflow(), Outflow(), Periodic(), Periodic()),
            t_final=0.2, nx=100, ny=4, cfl=1.25, atol=1e-4, rtol=1e-4,
            params={"variant": "aligned"},
        )
    if variant == "tilted":
        def ic(x, y):
            left = sod_tilted_is_left(tilted_coordinate(x, y))
            return np.where(left[..., None], L, Rs)

        return ProblemSpec(
            name="sod_tilted",
            xlim=(0.0, SQRT5), ylim=(0.0, 2.0 * SQRT5), gamma=gamma, prim_ic=ic,
            boundaries=_all_periodic,
            t_final=0.2, nx=250, ny=500, cfl=1.25, atol=1e-4, rtol=1e-4,
            params={"variant": "tilted"},
        )
    raise ValueError(f"unknown Sod variant {variant!r}")


def extract_tilted_trace(fld: Field, n: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-cell density samples along x_par in [0, 1] (points (k + 1/2)/n)."""
    g = fld.grid
    s = (np.arange(n) + 0.5) / n
    x = s * 2.0 / SQRT5
    y = s * 1.0 / SQRT5
    i = np.clip(np.floor((x - g.origin[0]) / g.dx).astype(int), 0, g.nx - 1)
    j = np.clip(np.floor((y - g.origin[1]) / g.dy).astype(int), 0, g.ny - 1)
    return s, fld.interior[j, i, 0]


# -- Richtmyer-Meshkov -----------------------------------------------------------

def rmi_post_shock(gamma: float = 1.4, Ma: float = 3.0) -> tuple[float, float, float, float]:
    rho = 1.0 / (1.0 - (2.0 / (gamma + 1.0)) * (1.0 - 1.0 / Ma ** 2))
    p = 1.0 + (2.0 * gamma / (gamma + 1.0)) * (Ma ** 2 - 1.0)
    u = Ma * math.sqrt(gamma) * (1.0 - 1.0 / rho)
    return rho, u, 0.0, p


def richtmeyer_meshkov(gamma: float = 1.4, Ma: float = 3.0, rho_D: float = 2.0) -> ProblemSpec:
    post = np.array(rmi_post_shock(gamma, Ma))

    def ic(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        shocked = x < 0.2
        rho = np.where(shocked, post[0], np.where(x < y, 1.0, rho_D))
        u = np.where(shocked, post[1], 0.0)
        p = np.where(shocked, post[3], 1.0)
        return _stack(rho, u, 0.0 * x, p)

    return ProblemSpec(
        name="richtmeyer_meshkov",
        xlim=(-0.5, 5.5), ylim=(0.0, 1.0), gamma=gamma, prim_ic=ic,
        boundaries=lambda: BoundarySet(Dirichlet(post), Outflow(), Reflecting(), Reflecting()),
        t_final=3.33, nx=768, ny=128, cfl=1.0, atol=1e-3, rtol=1e-3,
        params={"Ma": Ma, "rho_D": rho_D},
    )


# -- astrophysical jets ----------------------------------------------------------

JET_HALF_WIDTH = 0.05


def astro_jet(variant: str = "high_density", gamma: float = 5.0 / 3.0) -> ProblemSpec:
    if variant == "high_density":
        ambient = np.array([gamma / 10.0, 0.0, 0.0, 1.0])
        v_jet, t_final = 800.0, 0.002
    elif variant == "low_density":
        ambient = np.array([10.0 * gamma, 0.0, 0.0, 1.0])
        v_jet, t_final = 100.0, 0.04
    else:
        raise ValueError(f"unknown jet variant {variant!r}")
    jet = np.array([gamma, 0.0, v_jet, 1.0])

    def ic(x, y):
        return np.broadcast_to(ambient, np.shape(x) + (4,)).copy()

    return ProblemSpec(
        name=f"astro_jet_{'high' if variant == 'high_density' else 'low'}",
        xlim=(0.0, 0.5), ylim=(0.0, 1.5), gamma=gamma, prim_ic=ic,
        boundaries=lambda: BoundarySet(Reflecting(), Outflow(),
                                       slit_inflow(jet, JET_HALF_WIDTH), Outflow()),
        t_final=t_final, nx=64, ny=192, cfl=1.0, atol=1e-2, rtol=1e-2, riemann="hll",
        interior_limiting=True,
        params={"variant": variant, "jet": jet, "ambient": ambient},
    )


# -- viscous Rayleigh-Taylor -------------------------------------------------------

def rt_hydrostatic(y, Fr: float = 1.0, rho_high: float = 2.0, rho_low: float = 1.0):
    """Density and continuous hydrostatic pressure (interface at y = 1/2)."""
    y = np.asarray(y, dtype=float)
    g = 1.0 / (Fr * Fr)
    lower = y < 0.5
    rho = np.where(lower, rho_high, rho_low)
    p = np.where(lower, g * rho_high * y + 1.0,
                 g * (rho_low * y + 0.5 * (rho_high - rho_low)) + 1.0)
    return rho, p


def rayleigh_taylor_viscous(gamma: float = 5.0 / 3.0, Re: float = 20000.0, Pr: float = 0.71,
                            Fr: float = 1.0, symmetric: bool = False) -> ProblemSpec:
    def ic(x, y):
        x = np.asarray(x, dtype=float)
        rho, p = rt_hydrostatic(y, Fr)
        v = -0.025 * np.sqrt(gamma * p / rho) * np.cos(8.0 * math.pi * x)
        return _stack(rho, 0.0 * v, v, p)

    rb, pb = rt_hydrostatic(0.0, Fr)
    rt_, pt = rt_hydrostatic(1.0, Fr)
    bottom = np.array([float(rb), 0.0, 0.0, float(pb)])
    top = np.array([float(rt_), 0.0, 0.0, float(pt)])
    # Ma chosen so that T = gamma Ma^2 p / rho equals the specific enthalpy scale
    Ma = math.sqrt(1.0 / (gamma - 1.0))
    return ProblemSpec(
        name="rayleigh_taylor" + ("_symmetric" if symmetric else ""),
        xlim=(0.0, 0.25), ylim=(0.0, 1.0), gamma=gamma, prim_ic=ic,
        boundaries=lambda: BoundarySet(Reflecting(), Reflecting(), Dirichlet(bottom), Dirichlet(top)),
        t_final=2.5, nx=32, ny=128, cfl=1.25, atol=1e-3, rtol=1e-3,
        viscosity=Viscosity(Re=Re, Pr=Pr, Ma=Ma),
        sources=(GravitySource(Fr),),
        symmetric_x=symmetric,
        params={"Fr": Fr},
    )


CATALOG = {
    "isentropic_vortex": isentropic_vortex,
    "sod": lambda: sod("aligned"),
    "sod_tilted": lambda: sod("tilted"),
    "richtmeyer_meshkov": richtmeyer_meshkov,
    "astro_jet_high": lambda: astro_jet("high_density"),
    "astro_jet_low": lambda: astro_jet("low_density"),
    "rayleigh_taylor": rayleigh_taylor_viscous,
    "rayleigh_taylor_symmetric": lambda: rayleigh_taylor_viscous(symmetric=True),
}


def get_problem(name: str) -> ProblemSpec:
    try:
        return CATALOG[name]()
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; available: {', '.join(sorted(CATALOG))}") from None
