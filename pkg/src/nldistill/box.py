"""Binary-input/binary-output correlation boxes and the CHSH functional.

A box is stored as a 4x4 table ``p[s, o]`` where the row ``s = 2*x + y``
enumerates the setting pair (00, 01, 10, 11) and the column ``o = 2*a + b``
enumerates the outcome pair in the same order.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

DEFAULT_TOL = 1e-9
LOCAL_BOUND = 2.0
TSIRELSON_BOUND = 2.0 * math.sqrt(2.0)

# sign of (-1)^(a xor b) for column order 00, 01, 10, 11
OUTCOME_SIGNS = np.array([1.0, -1.0, -1.0, 1.0])

BITS = ((0, 0), (0, 1), (1, 0), (1, 1))


class InvalidTableError(ValueError):
    """Raised when a table is not a normalized probability table."""


class DomainError(ValueError):
    """Raised for parameters outside their admissible range."""


class BoxClass(enum.Enum):
    INVALID = "Invalid"
    SIGNALLING = "Signalling"
    LOCAL = "Local"
    QUANTUM_COMPATIBLE = "QuantumCompatible"
    SUPER_QUANTUM = "SuperQuantumNonSignalling"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, eq=False)
class CondProbTable:
    """Conditional probability table P(ab|xy).

    Construction only checks the shape and finiteness; normalization is
    checked by the operations that need it, so that malformed or signalling
    tables can still be represented and classified.
    """

    p: np.ndarray
    label: Optional[str] = None

    def __post_init__(self):
        arr = np.array(self.p, dtype=float)
        if arr.shape != (4, 4):
            raise InvalidTableError(f"expected a 4x4 table, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidTableError("table contains non-finite entries")
        arr.setflags(write=False)
        object.__setattr__(self, "p", arr)

    def __getitem__(self, key):
        return self.p[key]

    def prob(self, a: int, b: int, x: int, y: int) -> float:
        return float(self.p[2 * x + y, 2 * a + b])

    def is_valid(self, tol: float = DEFAULT_TOL) -> bool:
        return bool(
            np.all(self.p >= -tol)
            and np.all(self.p <= 1.0 + tol)
            and np.all(np.abs(self.p.sum(axis=1) - 1.0) <= tol)
        )

    def validate(self, tol: float = DEFAULT_TOL) -> "CondProbTable":
        if np.any(self.p < -tol) or np.any(self.p > 1.0 + tol):
            raise InvalidTableError("table entries must lie in [0, 1]")
        sums = self.p.sum(axis=1)
        bad = np.abs(sums - 1.0) > tol
        if np.any(bad):
            rows = [f"{BITS[i][0]}{BITS[i][1]}" for i in np.flatnonzero(bad)]
            raise InvalidTableError(
                f"rows {rows} are not normalized (sums {sums[bad].tolist()})"
            )
        return self

    def with_label(self, label: Optional[str]) -> "CondProbTable":
        return CondProbTable(self.p, label)

    def allclose(self, other: "CondProbTable", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.p, other.p, rtol=0.0, atol=atol))

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        out = {"p": self.p.tolist()}
        if self.label is not None:
            out["label"] = self.label
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "CondProbTable":
        if "p" not in data:
            raise InvalidTableError("box JSON needs a 'p' field")
        return cls(np.asarray(data["p"], dtype=float), data.get("label"))

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "CondProbTable":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "y", "a", "b", "p"])
        for s, (x, y) in enumerate(BITS):
            for o, (a, b) in enumerate(BITS):
                writer.writerow([x, y, a, b, repr(float(self.p[s, o]))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, label: Optional[str] = None) -> "CondProbTable":
        p = np.full((4, 4), np.nan)
        for row in csv.DictReader(io.StringIO(text)):
            x, y, a, b = (int(row[k]) for k in ("x", "y", "a", "b"))
            p[2 * x + y, 2 * a + b] = float(row["p"])
        if np.any(np.isnan(p)):
            raise InvalidTableError("CSV box is missing entries")
        return cls(p, label)


# -- canonical boxes ---------------------------------------------------------


def pr_box() -> CondProbTable:
    """The PR box, ``a xor b = x*y`` with uniform marginals."""
    p = np.zeros((4, 4))
    for s, (x, y) in enumerate(BITS):
        for o, (a, b) in enumerate(BITS):
            if a ^ b == x & y:
                p[s, o] = 0.5
    return CondProbTable(p, "PR")


def white_noise_box() -> CondProbTable:
    return CondProbTable(np.full((4, 4), 0.25), "white-noise")


def deterministic_box(a: int = 0, b: int = 0) -> CondProbTable:
    p = np.zeros((4, 4))
    p[:, 2 * a + b] = 1.0
    return CondProbTable(p, f"deterministic-{a}{b}")


# -- correlators and CHSH ----------------------------------------------------


def correlators(P: CondProbTable, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Return the correlation vector (C00, C01, C10, C11)."""
    P.validate(tol)
    return P.p @ OUTCOME_SIGNS


def correlation(P: CondProbTable, x: int, y: int, tol: float = DEFAULT_TOL) -> float:
    """C_xy = P(00|xy) + P(11|xy) - P(01|xy) - P(10|xy)."""
    if x not in (0, 1) or y not in (0, 1):
        raise DomainError(f"settings must be bits, got x={x}, y={y}")
    P.validate(tol)
    row = P.p[2 * x + y]
    return float(row[0] + row[3] - row[1] - row[2])


def chsh_terms(c) -> np.ndarray:
    """The four CHSH combinations, indexed by the setting ``(x, y)``.

    Entry ``2*x + y`` is ``C_xy + C_x,1-y + C_1-x,y - C_1-x,1-y``.
    Together with an absolute value these cover all eight sign variants.
    """
    c = np.asarray(c, dtype=float)
    total = c.sum(axis=-1, keepdims=True)
    # the minus sign sits on the complementary setting, index 3 - s
    return total - 2.0 * c[..., ::-1]


def chsh_from_correlators(c) -> float:
    return float(np.max(np.abs(chsh_terms(c))))


def chsh(P: CondProbTable, tol: float = DEFAULT_TOL) -> float:
    """CHSH nonlocality: max over (x, y) of the absolute CHSH combination."""
    return chsh_from_correlators(correlators(P, tol))


def chsh_active_variant(c) -> tuple[int, float]:
    """Index of the maximizing CHSH combination and the sign of its sum."""
    terms = chsh_terms(c)
    s = int(np.argmax(np.abs(terms)))
    return s, (1.0 if terms[s] >= 0 else -1.0)


# -- marginals and signalling ------------------------------------------------


def marginals(P: CondProbTable, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Alice's and Bob's marginals per setting row.

    ``alice[s, a] = sum_b P(ab|xy)`` and ``bob[s, b] = sum_a P(ab|xy)``.
    """
    P.validate(tol)
    t = P.p.reshape(4, 2, 2)
    return t.sum(axis=2), t.sum(axis=1)


def signalling_residual(P: CondProbTable) -> float:
    """Largest change of one party's marginal under the other party's input."""
    t = P.p.reshape(2, 2, 2, 2)  # x, y, a, b
    alice = t.sum(axis=3)  # x, y, a
    bob = t.sum(axis=2)  # x, y, b
    da = np.abs(alice[:, 0, :] - alice[:, 1, :]).max()
    db = np.abs(bob[0, :, :] - bob[1, :, :]).max()
    return float(max(da, db))


def is_nonsignalling(P: CondProbTable, tol: float = DEFAULT_TOL) -> bool:
    P.validate(tol)
    return signalling_residual(P) <= tol


def classify(
    P: CondProbTable, tol: float = DEFAULT_TOL, quantum_tol: Optional[float] = None
) -> BoxClass:
    """Place a box in the Local / quantum / non-signalling hierarchy.

    Locality is decided by the CHSH inequalities alone; for two inputs and
    two outputs per party these, with positivity and non-signalling, are
    taken as the complete facet description of the local polytope.
    Quantum compatibility is decided on the correlators only, through the
    Tsirelson bound and the arcsine criterion evaluated with
    ``quantum_tol`` (defaults to ``tol``).
    """
    from .quantum import tlm_feasible

    if not P.is_valid(tol):
        return BoxClass.INVALID
    if signalling_residual(P) > tol:
        return BoxClass.SIGNALLING
    c = P.p @ OUTCOME_SIGNS
    n = chsh_from_correlators(c)
    if n <= LOCAL_BOUND + tol:
        return BoxClass.LOCAL
    qtol = tol if quantum_tol is None else quantum_tol
    if n <= TSIRELSON_BOUND + tol and tlm_feasible(np.clip(c, -1.0, 1.0), qtol):
        return BoxClass.QUANTUM_COMPATIBLE
    return BoxClass.SUPER_QUANTUM


# -- the (eta, gamma) family -------------------------------------------------


@dataclass(frozen=True)
class EtaGammaParams:
    """Parameters of the symmetric two-parameter box family.

    Rows 00, 01 and 10 flip the outcome parity with probability ``eta``;
    row 11 with probability ``gamma``.
    """

    eta: float
    gamma: float

    def __post_init__(self):
        for name in ("eta", "gamma"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise DomainError(f"{name} must lie in the open interval (0, 1), got {v}")
        object.__setattr__(self, "eta", float(self.eta))
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def nonlocality(self) -> float:
        """2 + 2*gamma - 6*eta; equals the CHSH value whenever gamma >= eta."""
        return 2.0 + 2.0 * self.gamma - 6.0 * self.eta

    def as_tuple(self) -> tuple[float, float]:
        return (self.eta, self.gamma)


def _family_row(q: float) -> list[float]:
    return [(1.0 - q) / 2.0, q / 2.0, q / 2.0, (1.0 - q) / 2.0]


def from_eta_gamma(params: EtaGammaParams, label: Optional[str] = None) -> CondProbTable:
    e, g = params.eta, params.gamma
    return CondProbTable(
        np.array([_family_row(e), _family_row(e), _family_row(e), _family_row(g)]), label
    )


def eta_gamma_of(P: CondProbTable, tol: float = DEFAULT_TOL) -> Optional[EtaGammaParams]:
    """Recover (eta, gamma) if ``P`` belongs to the family, else ``None``."""
    P.validate(tol)
    p = P.p
    etas = p[:3, 1] + p[:3, 2]
    eta = float(etas.mean())
    gamma = float(p[3, 1] + p[3, 2])
    if np.ptp(etas) > tol:
        return None
    if not (0.0 < eta < 1.0 and 0.0 < gamma < 1.0):
        return None
    expected = np.array([_family_row(eta)] * 3 + [_family_row(gamma)])
    if np.max(np.abs(expected - p)) > tol:
        return None
    return EtaGammaParams(eta, gamma)
