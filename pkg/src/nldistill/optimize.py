"""Maximize the distillation gain over quantum-realizable family boxes.

Two independent routes are provided: a constrained 2-D grid over
(eta, gamma) filtered by the arcsine criterion, and a 1-D golden-section
search along the planar-measurement curve, which traces the boundary of the
realizable region.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import kernels
from .box import DomainError, EtaGammaParams
from .distill import gain
from .quantum import MAX_PHI, eta_gamma_from_phi, tlm_feasible, tlm_slack

ETA_MAX = 1.0 / 6.0
GAMMA_MAX = 0.5
DEFAULT_RESOLUTION = 2000
DEFAULT_PHI_BRACKET = (math.radians(5.0), math.radians(25.0))

_BRANCHES = {"all": 0, "nonlocal": 1, "local": 2}


class EmptyRegionError(RuntimeError):
    """No grid point satisfies the requested constraints."""


def family_correlators(eta, gamma) -> np.ndarray:
    """Correlators (1-2eta, 1-2eta, 1-2eta, 1-2gamma) of a family box."""
    c0 = 1.0 - 2.0 * eta
    return np.array([c0, c0, c0, 1.0 - 2.0 * gamma])


def grid_axes(resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Interior grid points of (0, 1/6) and (0, 1/2)."""
    eta = np.linspace(0.0, ETA_MAX, resolution + 2)[1:-1]
    gamma = np.linspace(0.0, GAMMA_MAX, resolution + 2)[1:-1]
    return eta, gamma


@dataclass(frozen=True)
class GridOptimum:
    params: EtaGammaParams
    gain: float
    n_feasible: int
    resolution: int
    tol: float
    branch: str


@dataclass(frozen=True)
class BoundaryOptimum:
    phi: float
    params: EtaGammaParams
    gain: float

    @property
    def phi_degrees(self) -> float:
        return math.degrees(self.phi)


def grid_search(
    resolution: int = DEFAULT_RESOLUTION, tol: float = 1e-9, branch: str = "nonlocal"
) -> GridOptimum:
    """Best gain over the feasible grid points.

    ``branch`` restricts the scan to nonlocal family boxes (gamma > 3 eta),
    local ones (gamma <= 3 eta), or ``"all"``. Ties go to the smallest eta,
    then the smallest gamma.
    """
    if resolution < 100:
        raise DomainError("grid resolution must be at least 100")
    if branch not in _BRANCHES:
        raise DomainError(f"unknown branch {branch!r}; expected one of {sorted(_BRANCHES)}")
    eta, gamma = grid_axes(resolution)
    i, j, best, n_feasible = kernels.grid_scan(eta, gamma, float(tol), _BRANCHES[branch])
    if i < 0:
        raise EmptyRegionError(f"no feasible point on the {branch} branch at tol={tol}")
    return GridOptimum(
        EtaGammaParams(eta[i], gamma[j]), float(best), int(n_feasible), resolution, tol, branch
    )


def gain_grid(resolution: int, tol: float = 1e-9):
    """Full gain surface and feasibility mask, shaped (eta, gamma)."""
    eta, gamma = grid_axes(resolution)
    e = eta[:, None]
    g = gamma[None, :]
    values = (2.0 * g - 4.0 * g * g) - 6.0 * e + 12.0 * e * e
    a0 = np.arcsin(1.0 - 2.0 * e)
    a1 = np.arcsin(1.0 - 2.0 * g)
    feasible = (np.abs(3.0 * a0 - a1) <= math.pi + tol) & (np.abs(a0 + a1) <= math.pi + tol)
    return eta, gamma, values, feasible


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Maximizer of a unimodal ``f`` on [lo, hi] to within ``tol``."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def boundary_gain(phi: float) -> float:
    return gain(eta_gamma_from_phi(phi))


def boundary_search(
    phi_lo: float = DEFAULT_PHI_BRACKET[0],
    phi_hi: float = DEFAULT_PHI_BRACKET[1],
    tol: float = 1e-6,
) -> BoundaryOptimum:
    """Golden-section search of the gain along the planar curve, angles in radians."""
    if not (0.0 < phi_lo < phi_hi < MAX_PHI):
        raise DomainError("bracket must satisfy 0 < phi_lo < phi_hi < pi/6")
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    phi = golden_section_max(boundary_gain, phi_lo, phi_hi, tol)
    params = eta_gamma_from_phi(phi)
    return BoundaryOptimum(phi, params, gain(params))


@dataclass(frozen=True)
class ConsistencyReport:
    grid: GridOptimum
    boundary: BoundaryOptimum
    d_eta: float
    d_gamma: float
    d_gain: float
    grid_slack: float
    boundary_slack: float

    def to_dict(self) -> dict:
        return {
            "grid": optimum_dict(self.grid),
            "boundary": optimum_dict(self.boundary),
            "agreement": {"d_eta": self.d_eta, "d_gamma": self.d_gamma, "d_gain": self.d_gain},
            "arcsine_slack": {"grid": self.grid_slack, "boundary": self.boundary_slack},
        }


def optimum_dict(opt) -> dict:
    out = {
        "eta": opt.params.eta,
        "gamma": opt.params.gamma,
        "gain": opt.gain,
        "chsh": opt.params.nonlocality,
        "chsh_distilled": opt.params.nonlocality + opt.gain,
        "arcsine_slack": tlm_slack(family_correlators(*opt.params.as_tuple())),
    }
    if isinstance(opt, BoundaryOptimum):
        out["phi_deg"] = opt.phi_degrees
    else:
        d = asdict(opt)
        out.update({k: d[k] for k in ("n_feasible", "resolution", "tol", "branch")})
    return out


def consistency_report(
    resolution: int = DEFAULT_RESOLUTION,
    tol: float = 1e-9,
    phi_lo: float = DEFAULT_PHI_BRACKET[0],
    phi_hi: float = DEFAULT_PHI_BRACKET[1],
    phi_tol: float = 1e-6,
) -> ConsistencyReport:
    """Run both searches and measure how far apart their optima are."""
    g = grid_search(resolution, tol)
    b = boundary_search(phi_lo, phi_hi, phi_tol)
    return ConsistencyReport(
        grid=g,
        boundary=b,
        d_eta=abs(g.params.eta - b.params.eta),
        d_gamma=abs(g.params.gamma - b.params.gamma),
        d_gain=abs(g.gain - b.gain),
        grid_slack=tlm_slack(family_correlators(*g.params.as_tuple())),
        boundary_slack=tlm_slack(family_correlators(*b.params.as_tuple())),
    )


def is_feasible(params: EtaGammaParams, tol: float = 1e-9) -> bool:
    return tlm_feasible(family_correlators(*params.as_tuple()), tol)
