"""Exit criteria. Each test logs one PASS/FAIL line, shown in the terminal summary."""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from nldistill import kernels
from nldistill.box import (
    EtaGammaParams,
    CondProbTable,
    chsh,
    from_eta_gamma,
    is_nonsignalling,
    pr_box,
    signalling_residual,
)
from nldistill.distill import distill_map, xor_wire
from nldistill.quantum import MeasurementFrame, planar_frame, singlet_box, tlm_feasible, tlm_sums
from nldistill.simulate import (
    NoiseModel,
    bootstrap_chsh,
    chsh_estimate,
    run_experiment,
    sample_counts,
    visibility_for_chsh,
)

from oracles import brute_xor, random_ns_table, random_unit

PHI = math.radians(15.95)


def check(log, number, title, ok, detail):
    log.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}")
    assert ok, detail


def cli(*args):
    return subprocess.run([sys.executable, "-m", "nldistill", *args], capture_output=True, text=True)


def test_1_optimal_point(acceptance_log):
    t0 = time.perf_counter()
    r = cli("optimize", "--mode", "both", "--resolution", "2000", "--format", "json")
    elapsed = time.perf_counter() - t0
    assert r.returncode == 0, r.stderr
    rep = json.loads(r.stdout)
    g, b = rep["grid"], rep["boundary"]
    ok = (
        all(abs(o["eta"] - 0.019) <= 0.002 for o in (g, b))
        and all(abs(o["gamma"] - 0.164) <= 0.003 for o in (g, b))
        and all(abs(o["gain"] - 0.110) <= 0.002 for o in (g, b))
        and abs(b["phi_deg"] - 15.95) <= 0.1
        and elapsed < 60.0
    )
    detail = (
        f"grid eta*={g['eta']:.5f} gamma*={g['gamma']:.5f} gain={g['gain']:.5f}; "
        f"boundary eta*={b['eta']:.5f} gamma*={b['gamma']:.5f} gain={b['gain']:.5f} "
        f"phi*={b['phi_deg']:.4f} deg; {elapsed:.2f}s ({kernels.BACKEND} kernels)"
    )
    check(acceptance_log, 1, "optimal point", ok, detail)


def test_2_distillation_numbers(acceptance_log):
    params = EtaGammaParams(0.019, 0.164)
    B = from_eta_gamma(params)
    n = chsh(B)
    nd = chsh(xor_wire(B, B))
    worst = 0.0
    grid = np.linspace(0.01, 0.99, 40)
    for e in [0.019, *grid]:
        for g in [0.164, *grid]:
            p = EtaGammaParams(e, g)
            box = from_eta_gamma(p)
            worst = max(worst, float(np.max(np.abs(xor_wire(box, box).p - from_eta_gamma(distill_map(p)).p))))
    ok = abs(n - 2.214) <= 0.001 and abs(nd - 2.3247) <= 0.001 and worst <= 1e-12
    check(acceptance_log, 2, "distillation numbers", ok,
          f"N(P)={n:.6f} N(Pd)={nd:.6f} wiring vs closed form max diff {worst:.1e}")


def test_3_bound_saturation(acceptance_log):
    n_pr = chsh(pr_box())
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(10_000):
        f = MeasurementFrame(*(random_unit(rng) for _ in range(4)))
        worst = max(worst, chsh(singlet_box(f, 1.0)))
    r = 1 / math.sqrt(2)
    c = [r, r, r, -r]
    total = float(tlm_sums(c)[0])
    ok = (
        n_pr == 4.0
        and worst <= 2 * math.sqrt(2) + 1e-9
        and tlm_feasible(c, 1e-9)
        and abs(total - math.pi) <= 1e-9
    )
    check(acceptance_log, 3, "bound saturation", ok,
          f"N(PR)={n_pr!r}; max singlet N over 1e4 frames={worst:.9f}; "
          f"Tsirelson arcsine sum - pi={total - math.pi:.1e}")


def test_4_wiring_invariants(acceptance_log):
    rng = np.random.default_rng(4)
    worst_norm = worst_sig = worst_sym = worst_brute = 0.0
    all_ns = True
    for _ in range(1000):
        P1 = CondProbTable(random_ns_table(rng))
        P2 = CondProbTable(random_ns_table(rng))
        a, b = xor_wire(P1, P2), xor_wire(P2, P1)
        worst_norm = max(worst_norm, float(np.max(np.abs(a.p.sum(axis=1) - 1))))
        all_ns &= is_nonsignalling(a, 1e-12)
        worst_sig = max(worst_sig, signalling_residual(a))
        worst_sym = max(worst_sym, float(np.max(np.abs(a.p - b.p))))
        worst_brute = max(worst_brute, float(np.max(np.abs(a.p - brute_xor(P1.p, P2.p)))))
    ok = worst_norm <= 1e-12 and all_ns and worst_sig <= 1e-12 and worst_sym <= 1e-12 and worst_brute <= 1e-12
    check(acceptance_log, 4, "wiring invariants", ok,
          f"1000 pairs: norm err {worst_norm:.1e}, signalling {worst_sig:.1e}, "
          f"asymmetry {worst_sym:.1e}, vs brute force {worst_brute:.1e}")


def test_5_necessary_condition(acceptance_log):
    axis = np.linspace(0.0, 1.0, 502)[1:-1]
    E, G = np.meshgrid(axis, axis, indexing="ij")
    e, g = E.ravel(), G.ravel()

    def family_tables(eta, gamma):
        row = lambda q: np.stack([(1 - q) / 2, q / 2, q / 2, (1 - q) / 2], axis=-1)
        return np.ascontiguousarray(np.stack([row(eta), row(eta), row(eta), row(gamma)], axis=1))

    n = kernels.batch_chsh(family_tables(e, g))
    ed, gd = 2 * (e - e * e), 2 * (g - g * g)
    nd = kernels.batch_chsh(family_tables(ed, gd))
    closed_gain = 2 * g - 4 * g * g - 6 * e + 12 * e * e
    nonlocal_ = g > 3 * e
    inside = (0 < e) & (e < g / 3) & (g / 3 < 1 / 6)
    improving = nonlocal_ & ((nd - n) > 0)
    improving_closed = nonlocal_ & (closed_gain > 0)
    violations = int(np.sum(improving & ~inside) + np.sum(improving_closed & ~inside))
    ok = violations == 0 and improving.sum() > 0
    check(acceptance_log, 5, "necessary-condition scan", ok,
          f"500x500 grid: {int(improving.sum())} improving nonlocal points, {violations} outside region")


def test_6_experiment_emulation(acceptance_log):
    v = visibility_for_chsh(2.14, PHI)
    noise = NoiseModel(v, 0.0, 0.1)
    t0 = time.perf_counter()
    results = [run_experiment(PHI, noise, 10**6, 10**5, seed) for seed in range(5)]
    elapsed = time.perf_counter() - t0
    gaps = [r.significance for r in results]
    singles = [r.estimates["P1"].value for r in results]
    ok = all(s > 3 for s in gaps) and elapsed < 30.0
    r = results[0]
    check(acceptance_log, 6, "experiment emulation", ok,
          f"v={v:.4f}, N(P1)~{np.mean(singles):.4f}; seed 0: N(Pd)={r.estimates['Pd']}, "
          f"gap over 5 seeds {min(gaps):.1f}-{max(gaps):.1f} sigma; {elapsed:.2f}s for 5 runs")


def test_7_error_bar_calibration(acceptance_log):
    P = singlet_box(planar_frame(PHI), 1.0)
    shots = 10**4
    values, delta, worst_boot = [], [], 0.0
    for seed in range(100):
        c = sample_counts(P, shots, seed)
        d = chsh_estimate(c)
        b = bootstrap_chsh(c, 1000, seed + 10_000)
        values.append(d.value)
        delta.append(d.stderr)
        worst_boot = max(worst_boot, abs(b.stderr - d.stderr) / d.stderr)
    empirical = float(np.std(values, ddof=1))
    rel = abs(float(np.mean(delta)) - empirical) / empirical
    ok = rel <= 0.25 and worst_boot <= 0.20
    check(acceptance_log, 7, "error-bar calibration", ok,
          f"100 seeds: empirical sd {empirical:.5f} vs delta {np.mean(delta):.5f} "
          f"({rel:.1%}); worst bootstrap deviation {worst_boot:.1%}")


def test_8_determinism(acceptance_log, tmp_path):
    commands = [
        ("eval", "--eta", "0.019", "--gamma", "0.164", "--format", "json", "--out", "{d}/eval.json"),
        ("distill", "--phi", "15.95", "--out", "{d}/box.json"),
        ("optimize", "--mode", "both", "--format", "json", "--out", "{d}/opt.json"),
        ("simulate", "--target-chsh", "2.14", "--background", "0.1", "--jitter", "0.2",
         "--shots-pair", "100000", "--shots-fourfold", "20000", "--seed", "17", "--out", "{d}/sim"),
    ]
    outputs = []
    for run_id in ("a", "b"):
        d = tmp_path / run_id
        d.mkdir()
        files = {}
        for cmd in commands:
            r = cli(*(arg.format(d=d) for arg in cmd))
            assert r.returncode == 0, r.stderr
        for f in sorted(d.iterdir()):
            if f.suffix == ".json":
                files[f.name] = f.read_bytes()
        outputs.append(files)
    same = outputs[0] == outputs[1] and len(outputs[0]) == 4
    check(acceptance_log, 8, "determinism", same,
          f"{len(outputs[0])} JSON outputs compared byte for byte across two invocations")
