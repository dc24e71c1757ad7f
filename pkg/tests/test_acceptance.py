"""Acceptance criteria, one PASS/FAIL line each.

Run under pytest (lines are collected into the terminal summary) or
directly with ``python tests/test_acceptance.py``.
"""

import math
import sys
import time

import numpy as np
import pytest

from twinphoton import estimate as est
from twinphoton import fitmodel, pipeline
from twinphoton.coinc import accidental_counts, count_coincidences, g2_histogram
from twinphoton.phasematch import default_crystal, pm_residual, solve_signal_angle, tuning_curve
from twinphoton.tables import TABLE_IDS, load_table, reproduce_table
from twinphoton.twinstream import SampleModel, SourceConfig, apply_dead_time, generate_gate, simulate_gates

RESULTS = []


def table_reproduction():
    t0 = time.perf_counter()
    worst, bad = {"Tcc": 0.0, "Tsc": 0.0}, []
    for tid in TABLE_IDS:
        for r in reproduce_table(tid):
            for key, tol in (("Tcc", 0.02), ("Tsc", 0.03)):
                d = r["delta"][key]
                if d is None:
                    continue
                worst[key] = max(worst[key], abs(d))
                if abs(d) > tol:
                    bad.append(f"table {tid} row {r['row']} {key} {r[key]:.3f} vs {r['printed'][key]}")
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 1.0
    detail = f"max |dTcc|={worst['Tcc']:.3f}, max |dTsc|={worst['Tsc']:.3f}, {elapsed:.2f}s"
    if bad:
        detail += "; out of tolerance: " + "; ".join(bad)
    return ok, detail


def uncertainty_reproduction():
    rows = {r["row"]: r for r in reproduce_table(1)}
    cc2 = round(rows[2]["dTcc"], 2)
    sc3 = round(rows[3]["dTsc"], 2)
    deltas = [
        f"row {n} {k} {rows[n]['delta'][k]:+.3f}"
        for n in rows for k in ("dTcc", "dTsc")
        if rows[n]["delta"][k] is not None and abs(rows[n]["delta"][k]) > 0.02
    ]
    ok = cc2 == 0.09 and sc3 == 0.16
    worst = max(abs(rows[n]["delta"][k]) for n in rows for k in ("dTcc", "dTsc")
                if rows[n]["delta"][k] is not None)
    detail = f"row 2 dTcc={cc2}, row 3 dTsc={sc3}, max |delta|={worst:.3f}"
    detail += "; beyond 0.02: " + (", ".join(deltas) if deltas else "none")
    return ok, detail


def snr_aggregate():
    rows = load_table(1)[1:7]
    cc = float(np.mean([est.snr_db(r.Ncc, r.dNcc) for r in rows]))
    sc = float(np.mean([est.snr_db(r.N2, r.dN2) for r in rows]))
    ok = 35.0 <= cc <= 37.5 and 29.5 <= sc <= 31.0 and cc - sc >= 5.0
    return ok, f"CC {cc:.2f} dB, SC {sc:.2f} dB, gap {cc - sc:.2f} dB"


def fresnel():
    a, b = est.fresnel_index(0.9361), est.fresnel_index(0.9561)
    ok = abs(a - 1.677) <= 0.003 and abs(b - 1.530) <= 0.004
    return ok, f"n(0.9361)={a:.4f}, n(0.9561)={b:.4f}"


def phase_matching():
    crystal = default_crystal()
    theta = solve_signal_angle(810.0, crystal)
    pts = tuning_curve(700.0, 950.0, 51, crystal)
    solved = [p for p in pts if p.phase_matched]
    worst_res = max(abs(pm_residual(p.lambda_signal, p.theta_signal_out, crystal)) for p in solved)
    worst_energy = max(
        abs((1 / p.lambda_signal + 1 / p.lambda_idler) * 405.0 - 1) for p in solved
    )
    ok = abs(theta - 3.0) <= 0.5 and worst_res < 1e-10 and worst_energy < 1e-12 and solved
    return ok, (f"theta_s(810 nm)={theta:.4f} deg, {len(solved)}/{len(pts)} solved, "
                f"max |residual|={worst_res:.1e}, max energy error={worst_energy:.1e}")


def round_trip():
    t0 = time.perf_counter()
    base = SourceConfig()
    coverage = {}
    for T in (0.55, 0.85, 0.95):
        hits = 0
        for rep in range(50):
            cfg = pipeline.RunConfig(
                source=SourceConfig(**{**base.__dict__, "seed": rep, "n_gates": 100}),
                sample=SampleModel(T), level="counts",
            )
            r = pipeline.run_pipeline(cfg)
            hits += abs(r["Tcc"] - 100 * T) <= 3 * r["dTcc"]
        coverage[T] = hits / 50
    se = {}
    for n in (25, 100, 400):
        vals = []
        for rep in range(50):
            cfg = pipeline.RunConfig(
                source=SourceConfig(**{**base.__dict__, "seed": 1000 + rep, "n_gates": n}),
                sample=SampleModel(0.85), level="counts", standard_error=True,
            )
            vals.append(pipeline.run_pipeline(cfg)["dTcc"])
        se[n] = float(np.mean(vals))
    ratios = [se[25] / se[100] / 2, se[100] / se[400] / 2]
    elapsed = time.perf_counter() - t0
    ok = (all(c >= 0.95 for c in coverage.values())
          and all(abs(x - 1) <= 0.2 for x in ratios) and elapsed < 120)
    cov = ", ".join(f"T={T}: {c:.0%}" for T, c in coverage.items())
    return ok, (f"coverage {cov}; spread ratio / (1/sqrt n) = {ratios[0]:.3f}, {ratios[1]:.3f}; "
                f"{elapsed:.1f}s")


def coincidence_statistics():
    cfg = SourceConfig(pair_rate=0.0, dark1=1e5, dark2=1e5, jitter_sigma_ps=0.0,
                       dead_time_ns=0.0, gate_s=0.3, n_gates=200, seed=17)
    measured = expected = 0.0
    hist = None
    for g, (i, s) in enumerate(simulate_gates(cfg, SampleModel(1.0), dead_time=False)):
        r = count_coincidences(i, s, 7.1)
        measured += r.Ncc
        expected += accidental_counts(r.N1, r.N2, 7.1, 0.3)
        if g < 20:
            h = g2_histogram(i, s, 10.0, 210.0)
            hist = h if hist is None else hist + h
    z_cc = (measured - expected) / math.sqrt(expected)
    g_flat = hist.g2
    z_g2 = (g_flat.mean() - 1) * math.sqrt(hist.counts.sum())

    twin = SourceConfig(pair_rate=1e5, eta1=1.0, eta2=1.0, dark1=0, dark2=0, jitter_sigma_ps=50,
                        dead_time_ns=0, gate_s=0.3, n_gates=20, seed=5)
    th = None
    for i, s in simulate_gates(twin, SampleModel(1.0), dead_time=False):
        h = g2_histogram(i, s, 2.0, 22.0)
        th = h if th is None else th + h
    central = th.g2[len(th.g2) // 2]
    analytic = 1 + 1 / (1e5 * 2e-9)
    rel = central / analytic - 1
    ok = abs(z_cc) <= 4 and abs(z_g2) <= 3 and abs(rel) <= 0.10
    return ok, (f"Ncc z={z_cc:+.2f}, flat g2 mean z={z_g2:+.2f}, "
                f"central g2={central:.0f} vs {analytic:.0f} ({rel:+.2%})")


def dead_time():
    r, tau = 1e6, 50.0
    cfg = SourceConfig(pair_rate=0.0, dark1=r, dark2=0.0, jitter_sigma_ps=0.0, dead_time_ns=tau,
                       gate_s=0.01, n_gates=100, seed=23)
    kept = 0
    for g in range(cfg.n_gates):
        i, _ = generate_gate(cfg, SampleModel(1.0), g)
        kept += len(apply_dead_time(i, tau))
    expected = cfg.n_gates * r * cfg.gate_s / (1 + r * tau * 1e-9)
    z = (kept - expected) / math.sqrt(expected)
    gamma = est.dead_time_factor(1.24e6, 50.0)
    ok = abs(z) <= 3 and round(gamma, 3) == 0.938
    return ok, f"retained z={z:+.2f}, gamma(1.24 Mcps, 50 ns)={gamma:.4f}"


def fit_criteria():
    true = fitmodel.ConcentrationModel(5.0, 50.0, 84.0, 5e4)
    grid = np.logspace(-2, 5, 8)
    res = fitmodel.fit([(c, fitmodel.eval_model(true, c), 0.05) for c in grid])
    worst_par = max(abs(getattr(res.model, k) / v - 1) for k, v in true.as_dict().items())

    worst_inv = 0.0
    for T0, C0, Tinf, Cinf in ((5, 50, 84, 5e4), (30, 1, 60, 1e3), (2, 0.5, 87, 8e3)):
        m = fitmodel.ConcentrationModel(T0, C0, Tinf, Cinf)
        for c in np.logspace(-2, 3, 11):
            worst_inv = max(worst_inv, abs(fitmodel.invert(m, fitmodel.eval_model(m, c)) / c - 1))

    rows = load_table(1)[2:7]
    model = fitmodel.fit([(r.concentration, r.Tcc, r.dTcc) for r in rows]).model
    curve = fitmodel.eval_model(model, np.logspace(-2, 2, 2000))
    monotone = bool(np.all(np.diff(curve) <= 0))
    ok = worst_par <= 0.01 and worst_inv <= 1e-8 and monotone
    return ok, (f"max parameter error {worst_par:.1e}, max invert/eval error {worst_inv:.1e}, "
                f"table-1 fit monotone={monotone}")


CRITERIA = [
    (1, "table reproduction", table_reproduction),
    (2, "uncertainty reproduction", uncertainty_reproduction),
    (3, "SNR aggregate", snr_aggregate),
    (4, "Fresnel inversion", fresnel),
    (5, "phase matching", phase_matching),
    (6, "simulator round trip", round_trip),
    (7, "coincidence statistics", coincidence_statistics),
    (8, "dead time", dead_time),
    (9, "concentration fit", fit_criteria),
]


def run_one(num, name, fn):
    ok, detail = fn()
    line = f"{'PASS' if ok else 'FAIL'} [{num}] {name}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok, line


@pytest.mark.acceptance
@pytest.mark.parametrize("num, name, fn", CRITERIA, ids=[f"c{n}" for n, _, _ in CRITERIA])
def test_criterion(num, name, fn):
    ok, line = run_one(num, name, fn)
    assert ok, line


if __name__ == "__main__":
    results = [run_one(*c)[0] for c in CRITERIA]
    sys.exit(0 if all(results) else 1)
