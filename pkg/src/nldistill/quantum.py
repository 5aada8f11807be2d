"""Singlet-state realizations of correlation boxes.

Measuring Pauli spins along ``n_x`` (Alice) and ``m_y`` (Bob) on the singlet
gives correlators ``C_xy = -v * (n_x . m_y)`` and uniform marginals, where
``v`` is a depolarizing visibility. Nothing else about the state is modelled.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .box import (
    DEFAULT_TOL,
    OUTCOME_SIGNS,
    TSIRELSON_BOUND,
    CondProbTable,
    DomainError,
    EtaGammaParams,
    chsh,
)

UNIT_TOL = 1e-12
MAX_PHI = math.pi / 6


def _check_unit(v, name: str) -> np.ndarray:
    arr = np.array(v, dtype=float)
    if arr.shape != (3,):
        raise DomainError(f"{name} must be a 3-vector")
    if abs(np.linalg.norm(arr) - 1.0) > UNIT_TOL:
        raise DomainError(f"{name} is not a unit vector (norm {np.linalg.norm(arr)!r})")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class MeasurementFrame:
    """Alice's directions n0, n1 and Bob's directions m0, m1."""

    n0: np.ndarray
    n1: np.ndarray
    m0: np.ndarray
    m1: np.ndarray

    def __post_init__(self):
        for name in ("n0", "n1", "m0", "m1"):
            object.__setattr__(self, name, _check_unit(getattr(self, name), name))

    def dots(self) -> np.ndarray:
        """(n0.m0, n0.m1, n1.m0, n1.m1) in setting order."""
        return np.array(
            [
                self.n0 @ self.m0,
                self.n0 @ self.m1,
                self.n1 @ self.m0,
                self.n1 @ self.m1,
            ]
        )

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("n0", "n1", "m0", "m1")}

    @classmethod
    def from_dict(cls, data: dict) -> "MeasurementFrame":
        return cls(*(data[k] for k in ("n0", "n1", "m0", "m1")))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "MeasurementFrame":
        return cls.from_dict(json.loads(text))


def _check_visibility(v: float) -> float:
    if not (0.0 <= v <= 1.0):
        raise DomainError(f"visibility must lie in [0, 1], got {v}")
    return float(v)


def _check_phi(phi: float) -> float:
    if not (0.0 < phi <= MAX_PHI):
        raise DomainError(f"planar angle must lie in (0, pi/6], got {phi} rad")
    return float(phi)


def singlet_box(frame: MeasurementFrame, visibility: float = 1.0) -> CondProbTable:
    """P(ab|xy) = [1 + (-1)^(a xor b) * C_xy] / 4 with C_xy = -v n_x.m_y."""
    v = _check_visibility(visibility)
    c = -v * frame.dots()
    p = (1.0 + np.outer(c, OUTCOME_SIGNS)) / 4.0
    return CondProbTable(p)


def in_plane(theta: float) -> np.ndarray:
    """Unit vector in the x-z plane at polar angle ``theta`` from +z."""
    return np.array([math.sin(theta), 0.0, math.cos(theta)])


def planar_frame(phi: float) -> MeasurementFrame:
    """Coplanar directions with n0.m0 = n0.m1 = n1.m0 = -cos(phi), n1.m1 = -cos(3 phi).

    Polar angles: n0 = 0, n1 = 2 phi, m0 = pi + phi, m1 = pi - phi.
    """
    phi = _check_phi(phi)
    frame = MeasurementFrame(
        in_plane(0.0), in_plane(2.0 * phi), in_plane(math.pi + phi), in_plane(math.pi - phi)
    )
    want = np.array([-math.cos(phi)] * 3 + [-math.cos(3.0 * phi)])
    err = np.max(np.abs(frame.dots() - want))
    if err > 1e-12:  # pragma: no cover - guards the construction above
        raise AssertionError(f"planar frame violates its dot-product contract by {err}")
    return frame


def jittered_planar_frame(phi: float, sigma: float, rng: np.random.Generator) -> MeasurementFrame:
    """Planar frame with each polar angle perturbed by N(0, sigma^2)."""
    phi = _check_phi(phi)
    if sigma < 0:
        raise DomainError("jitter sigma must be non-negative")
    base = np.array([0.0, 2.0 * phi, math.pi + phi, math.pi - phi])
    thetas = base + (rng.normal(0.0, sigma, size=4) if sigma > 0 else 0.0)
    return MeasurementFrame(*(in_plane(t) for t in thetas))


def eta_gamma_from_phi(phi: float) -> EtaGammaParams:
    phi = _check_phi(phi)
    return EtaGammaParams((1.0 - math.cos(phi)) / 2.0, (1.0 - math.cos(3.0 * phi)) / 2.0)


def tlm_sums(c) -> np.ndarray:
    """Arcsine CHSH combinations, one per placement of the minus sign."""
    c = np.asarray(c, dtype=float)
    if c.shape[-1] != 4:
        raise DomainError("expected four correlators")
    if np.any(np.abs(c) > 1.0):
        raise DomainError("correlators must lie in [-1, 1]")
    s = np.arcsin(c)
    return s.sum(axis=-1, keepdims=True) - 2.0 * s[..., ::-1]


def tlm_slack(c) -> float:
    """max |arcsine combination| - pi; non-positive means quantum-realizable."""
    return float(np.max(np.abs(tlm_sums(c)))) - math.pi


def tlm_feasible(c, tol: float = DEFAULT_TOL) -> bool:
    """Arcsine criterion for four correlators to be quantum-realizable."""
    return tlm_slack(c) <= tol


def tsirelson_check(P: CondProbTable, tol: float = DEFAULT_TOL) -> bool:
    return chsh(P) <= TSIRELSON_BOUND + tol
