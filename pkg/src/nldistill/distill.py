"""XOR wiring of two boxes and its action on the (eta, gamma) family."""

from __future__ import annotations

import numpy as np

from .box import DEFAULT_TOL, CondProbTable, DomainError, EtaGammaParams


def xor_wire(P1: CondProbTable, P2: CondProbTable, tol: float = DEFAULT_TOL) -> CondProbTable:
    """Feed the same (x, y) to two independent boxes and XOR the outputs per side.

    Pd(ab|xy) = sum over a1, b1 of P1(a1 b1|xy) * P2(a1^a, b1^b|xy).
    """
    P1.validate(tol)
    P2.validate(tol)
    t1 = P1.p.reshape(4, 2, 2)
    t2 = P2.p.reshape(4, 2, 2)
    out = np.zeros((4, 2, 2))
    for a in (0, 1):
        for b in (0, 1):
            # t2[:, [a, 1-a]][:, :, [b, 1-b]] lines up a2 = a1 ^ a, b2 = b1 ^ b
            shifted = t2[:, [a, a ^ 1], :][:, :, [b, b ^ 1]]
            out[:, a, b] = (t1 * shifted).sum(axis=(1, 2))
    return CondProbTable(out.reshape(4, 4))


def distill_map(params: EtaGammaParams) -> EtaGammaParams:
    """Closed-form image of the family under self-wiring: q -> 2(q - q^2)."""
    e, g = params.eta, params.gamma
    return EtaGammaParams(2.0 * (e - e * e), 2.0 * (g - g * g))


def gain(params: EtaGammaParams) -> float:
    """Nonlocality increase of two wired copies over one copy."""
    e, g = params.eta, params.gamma
    return 2.0 * g - 4.0 * g * g - 6.0 * e + 12.0 * e * e


def iterate_distill(params: EtaGammaParams, n: int) -> list[tuple[EtaGammaParams, float]]:
    """Repeatedly self-wire a family box; returns ``n + 1`` (params, nonlocality) pairs.

    Positivity of the gain is not enforced; the trajectory drifts toward the
    white-noise fixed point (1/2, 1/2) after an initial rise.
    """
    if n < 0:
        raise DomainError("number of iterations must be non-negative")
    out = [(params, params.nonlocality)]
    for _ in range(n):
        params = distill_map(params)
        out.append((params, params.nonlocality))
    return out
