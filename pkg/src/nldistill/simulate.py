"""Finite-statistics emulation of the two-box distillation experiment.

Each setting row is sampled as a multinomial with a fixed number of shots.
Error bars treat the cell counts as independent Poisson variables and
propagate them to first order through the correlators and the active CHSH
combination. The four-fold run is contaminated by double-pair events from a
single source; they are removed by subtracting a separately sampled
calibration run in which the other source is blocked.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import kernels
from .box import (
    BITS,
    OUTCOME_SIGNS,
    CondProbTable,
    DomainError,
    chsh,
    chsh_active_variant,
    chsh_from_correlators,
    signalling_residual,
)
from .distill import xor_wire
from .quantum import MAX_PHI, jittered_planar_frame, planar_frame, singlet_box

SeedLike = Union[int, np.random.Generator, np.random.SeedSequence]

BOX_NAMES = ("P1", "P2", "Pd")


class DegenerateCountsError(ValueError):
    """A setting has no usable counts, so no estimate can be formed."""


def _rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class NoiseModel:
    """Imperfections of the emulated experiment.

    ``angle_jitter_sigma`` is in radians and is drawn once per run for each
    of the four measurement directions of each source.
    """

    visibility: float = 1.0
    angle_jitter_sigma: float = 0.0
    background_fraction: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.visibility <= 1.0):
            raise DomainError(f"visibility must lie in [0, 1], got {self.visibility}")
        if not (self.angle_jitter_sigma >= 0.0 and math.isfinite(self.angle_jitter_sigma)):
            raise DomainError("angle jitter must be a finite non-negative number")
        if not (0.0 <= self.background_fraction < 1.0):
            raise DomainError(
                f"background fraction must lie in [0, 1), got {self.background_fraction}"
            )


@dataclass(frozen=True, eq=False)
class CountTable:
    counts: np.ndarray
    shots_per_setting: int

    def __post_init__(self):
        arr = np.array(self.counts, dtype=np.int64)
        if arr.shape != (4, 4):
            raise DomainError(f"count table must be 4x4, got {arr.shape}")
        if np.any(arr < 0):
            raise DomainError("counts must be non-negative")
        if np.any(arr.sum(axis=1) != self.shots_per_setting):
            raise DomainError("every setting row must sum to shots_per_setting")
        arr.setflags(write=False)
        object.__setattr__(self, "counts", arr)
        object.__setattr__(self, "shots_per_setting", int(self.shots_per_setting))


class Method(enum.Enum):
    DELTA = "Delta"
    BOOTSTRAP = "Bootstrap"


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    method: Method = Method.DELTA

    def __post_init__(self):
        if not self.stderr >= 0.0:
            raise DomainError("standard error must be non-negative")

    def to_dict(self) -> dict:
        return {"value": self.value, "stderr": self.stderr, "method": self.method.value}

    def __str__(self) -> str:
        return f"{self.value:.4f} +/- {self.stderr:.4f}"


# -- sampling and estimation ---------------------------------------------------


def _sample_rows(p: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    rows = np.clip(p, 0.0, None)
    rows = rows / rows.sum(axis=1, keepdims=True)
    return np.stack([rng.multinomial(shots, row) for row in rows])


def sample_counts(P: CondProbTable, shots: int, seed: SeedLike) -> CountTable:
    """Draw ``shots`` outcomes per setting from the rows of ``P``."""
    P.validate()
    if shots <= 0:
        raise DomainError("shots must be positive")
    return CountTable(_sample_rows(P.p, shots, _rng(seed)), shots)


def estimate_box(counts: CountTable) -> CondProbTable:
    if counts.shots_per_setting <= 0:
        raise DegenerateCountsError("count table has zero shots per setting")
    return CondProbTable(counts.counts / counts.shots_per_setting)


def delta_chsh(counts: np.ndarray, variances: np.ndarray) -> tuple[float, float]:
    """CHSH of normalized counts with first-order propagated standard error.

    ``counts`` may be non-integer (after background subtraction); each cell
    is treated as independent with the given variance.
    """
    counts = np.asarray(counts, dtype=float)
    variances = np.asarray(variances, dtype=float)
    totals = counts.sum(axis=1)
    if np.any(totals <= 0):
        raise DegenerateCountsError("a setting has zero total counts")
    p = counts / totals[:, None]
    c = p @ OUTCOME_SIGNS
    value = chsh_from_correlators(c)
    # dC_s/dn_k = (sign_k - C_s) / N_s; the active combination is a +-1 sum of all four
    dev = OUTCOME_SIGNS[None, :] - c[:, None]
    var_c = (dev**2 * variances).sum(axis=1) / totals**2
    return value, float(math.sqrt(var_c.sum()))


def cell_stderr(counts: np.ndarray, variances: np.ndarray) -> np.ndarray:
    """First-order standard error of each normalized cell ``n_k / sum(n)``."""
    counts = np.asarray(counts, dtype=float)
    variances = np.asarray(variances, dtype=float)
    totals = counts.sum(axis=1, keepdims=True)
    p = counts / totals
    # d p_k / d n_j = (delta_jk - p_k) / N
    row_var = variances.sum(axis=1, keepdims=True)
    var = ((1.0 - 2.0 * p) * variances + p**2 * row_var) / totals**2
    return np.sqrt(var)


def chsh_estimate(counts: CountTable) -> Estimate:
    value, err = delta_chsh(counts.counts, counts.counts)
    return Estimate(value, err, Method.DELTA)


def bootstrap_chsh(counts: CountTable, resamples: int = 1000, seed: SeedLike = 0) -> Estimate:
    """Multinomial bootstrap of the CHSH estimate."""
    if resamples < 100:
        raise DomainError("use at least 100 bootstrap resamples")
    n = counts.shots_per_setting
    if n <= 0:
        raise DegenerateCountsError("count table has zero shots per setting")
    rng = _rng(seed)
    p = counts.counts / n
    draws = np.empty((resamples, 4, 4))
    for s in range(4):
        draws[:, s, :] = rng.multinomial(n, p[s], size=resamples)
    draws /= n
    values = kernels.batch_chsh(np.ascontiguousarray(draws))
    point = chsh_from_correlators(p @ OUTCOME_SIGNS)
    return Estimate(point, float(np.std(values, ddof=1)), Method.BOOTSTRAP)


@dataclass(frozen=True, eq=False)
class SubtractedCounts:
    counts: np.ndarray
    variances: np.ndarray
    clamped_cells: int

    def table(self) -> CondProbTable:
        totals = self.counts.sum(axis=1, keepdims=True)
        if np.any(totals <= 0):
            raise DegenerateCountsError("background subtraction left a setting empty")
        return CondProbTable(self.counts / totals)

    def estimate(self) -> Estimate:
        value, err = delta_chsh(self.counts, self.variances)
        return Estimate(value, err, Method.DELTA)


def subtract_background(observed: CountTable, calibration) -> SubtractedCounts:
    """Remove calibration counts cell by cell; negative cells are clamped to zero."""
    cal = np.asarray(calibration, dtype=float)
    if cal.shape != (4, 4) or np.any(cal < 0):
        raise DomainError("calibration counts must be a non-negative 4x4 table")
    obs = observed.counts.astype(float)
    diff = obs - cal
    negative = diff < 0
    return SubtractedCounts(np.where(negative, 0.0, diff), obs + cal, int(negative.sum()))


def background_box(P: CondProbTable) -> CondProbTable:
    """Four-fold statistics when both pairs come from the same source."""
    return xor_wire(P, P)


def visibility_for_chsh(target: float, phi: float) -> float:
    """Visibility giving a planar-frame singlet box the requested CHSH value."""
    ideal = chsh(singlet_box(planar_frame(phi), 1.0))
    v = target / ideal
    if not (0.0 <= v <= 1.0):
        raise DomainError(f"CHSH {target} is not reachable at this angle (ideal {ideal:.4f})")
    return v


# -- the end-to-end experiment -------------------------------------------------


@dataclass
class ExperimentReport:
    config: dict
    true_chsh: dict[str, float]
    tables: dict[str, CondProbTable]
    estimates: dict[str, Estimate]
    counts: dict[str, list]
    gaps: dict[str, float]
    signalling: dict[str, float]
    flags: list[str] = field(default_factory=list)

    @property
    def significance(self) -> float:
        """Distilled estimate minus the larger single-box estimate, in combined stderr."""
        return self.gaps["Pd-max(P1,P2)"]

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "true_chsh": self.true_chsh,
            "tables": {k: t.p.tolist() for k, t in self.tables.items()},
            "estimates": {k: e.to_dict() for k, e in self.estimates.items()},
            "counts": self.counts,
            "gaps_in_stderr": self.gaps,
            "signalling_residual": self.signalling,
            "flags": self.flags,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _gap(a: Estimate, b: Estimate) -> float:
    combined = math.hypot(a.stderr, b.stderr)
    diff = a.value - b.value
    if combined == 0.0:
        return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
    return diff / combined


def run_experiment(
    phi: float,
    noise: NoiseModel,
    shots_pair: int,
    shots_fourfold: int,
    seed: int,
) -> ExperimentReport:
    """Emulate both single-box measurements and the distilled-box measurement.

    ``phi`` is the planar measurement angle in radians.
    """
    if not (0.0 < phi <= MAX_PHI):
        raise DomainError(f"planar angle must lie in (0, pi/6], got {phi} rad")
    if shots_pair <= 0 or shots_fourfold <= 0:
        raise DomainError("shot counts must be positive")
    (jit1, jit2, pair1, pair2, four, calib) = (
        np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(6)
    )
    f = noise.background_fraction
    flags: list[str] = []

    P1 = singlet_box(jittered_planar_frame(phi, noise.angle_jitter_sigma, jit1), noise.visibility)
    P2 = singlet_box(jittered_planar_frame(phi, noise.angle_jitter_sigma, jit2), noise.visibility)
    Pd = xor_wire(P1, P2)
    B = background_box(P1)
    mixed = CondProbTable((1.0 - f) * Pd.p + f * B.p)

    c1 = sample_counts(P1, shots_pair, pair1)
    c2 = sample_counts(P2, shots_pair, pair2)
    observed = sample_counts(mixed, shots_fourfold, four)
    # blocked-source calibration over the same integration: Poisson number of background events
    calibration = np.zeros((4, 4), dtype=np.int64)
    if f > 0.0:
        n_bg = calib.poisson(f * shots_fourfold, size=4)
        rows = B.p / B.p.sum(axis=1, keepdims=True)
        for s in range(4):
            calibration[s] = calib.multinomial(int(n_bg[s]), rows[s])
    sub = subtract_background(observed, calibration)
    if sub.clamped_cells:
        flags.append(f"Pd: {sub.clamped_cells} negative cell(s) clamped to zero after subtraction")

    estimates = {
        "P1": chsh_estimate(c1),
        "P2": chsh_estimate(c2),
        "Pd": sub.estimate(),
    }
    tables = {"P1": estimate_box(c1), "P2": estimate_box(c2), "Pd": sub.table()}
    best_single = max(("P1", "P2"), key=lambda k: estimates[k].value)
    gaps = {
        "Pd-P1": _gap(estimates["Pd"], estimates["P1"]),
        "Pd-P2": _gap(estimates["Pd"], estimates["P2"]),
        "P1-P2": _gap(estimates["P1"], estimates["P2"]),
        "Pd-max(P1,P2)": _gap(estimates["Pd"], estimates[best_single]),
    }
    config = {
        "phi_rad": phi,
        "phi_deg": math.degrees(phi),
        "visibility": noise.visibility,
        "angle_jitter_sigma_rad": noise.angle_jitter_sigma,
        "background_fraction": f,
        "shots_pair": shots_pair,
        "shots_fourfold": shots_fourfold,
        "seed": seed,
        "stderr_method": Method.DELTA.value,
    }
    return ExperimentReport(
        config=config,
        true_chsh={"P1": chsh(P1), "P2": chsh(P2), "Pd": chsh(Pd), "background": chsh(B)},
        tables=tables,
        estimates=estimates,
        counts={
            "P1": c1.counts.tolist(),
            "P2": c2.counts.tolist(),
            "fourfold_observed": observed.counts.tolist(),
            "fourfold_calibration": np.asarray(calibration).tolist(),
        },
        gaps=gaps,
        signalling={k: signalling_residual(t) for k, t in tables.items()},
        flags=flags,
    )


def report_table(report: ExperimentReport, fmt: str = "text") -> str:
    """The three estimated tables with their CHSH values, as CSV or aligned text."""
    for name in BOX_NAMES:
        t = report.tables.get(name)
        if t is None or np.any(t.p.sum(axis=1) <= 0):
            raise DegenerateCountsError(f"no usable estimate for box {name}")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["box", "x", "y", "a", "b", "p", "chsh", "chsh_stderr"])
        for name in BOX_NAMES:
            t, e = report.tables[name], report.estimates[name]
            for s, (x, y) in enumerate(BITS):
                for o, (a, b) in enumerate(BITS):
                    w.writerow([name, x, y, a, b, repr(float(t.p[s, o])), repr(e.value), repr(e.stderr)])
        return buf.getvalue()
    if fmt != "text":
        raise DomainError(f"unknown table format {fmt!r}")
    lines = []
    header = "xy\\ab " + "".join(f"{a}{b}".rjust(10) for a, b in BITS)
    for name in BOX_NAMES:
        t, e = report.tables[name], report.estimates[name]
        lines.append(f"{name}: N = {e}")
        lines.append(header)
        for s, (x, y) in enumerate(BITS):
            lines.append(f"{x}{y}    " + "".join(f"{v:10.5f}" for v in t.p[s]))
        lines.append("")
    return "\n".join(lines)
