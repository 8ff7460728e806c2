"""Acceptance criteria, one test and one PASS/FAIL line each.

Run directly (``python3 tests/test_acceptance.py``) or through pytest; in
the latter case the lines are repeated in the terminal summary.
"""
import itertools
import math
import time

import numpy as np

from bellkcbs.dataset import load_dataset
from bellkcbs.hidden import (
    enumerate_local_vertices,
    enumerate_noncontextual_vertices,
    max_functional_local,
    max_functional_noncontextual,
)
from bellkcbs.inequalities import (
    alpha_chsh,
    beta_kcbs,
    correlators_from_behavior,
    evaluate,
    quantum_correlators,
)
from bellkcbs.quantum import (
    QuantumModel,
    behavior_of_ket,
    bob_observable,
    commutator_norm,
    kcbs_vector,
    maximally_mixed_behavior,
    state_psi,
)
from bellkcbs.scenario import (
    PENTAGON,
    Scenario,
    check_no_disturbance,
    check_no_signalling,
    marginalize_bob,
)
from bellkcbs.search import TABULATED_PHIS, alpha_beta_at, joint_violation_window, optimize_state_params
from bellkcbs.shotnoise import simulate_experiment
from bellkcbs.verify import FLAGGED, PASS, verify_paper

LINES: list[str] = []


def record(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {number} {title}: {'PASS' if ok else 'FAIL'} | {detail}"
    LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_1_theory_table():
    records = load_dataset()
    t0 = time.perf_counter()
    worst = 0.0
    for r in records:
        res = evaluate(QuantumModel(r.phi))
        worst = max(worst, abs(res.alpha - r.summary.alpha_theory), abs(res.beta - r.summary.beta_theory))
    dt = time.perf_counter() - t0
    record(1, "theory reproduction", worst <= 0.01 and dt < 1.0,
           f"max |delta| = {worst:.4f} (tol 0.01) over 11 states; {dt:.3f} s (limit 1 s)")


def test_criterion_2_window():
    t0 = time.perf_counter()
    w = joint_violation_window(resolution=1e-4)
    dt = time.perf_counter() - t0
    ok = w is not None and w[0] <= 0.30 and w[1] >= 0.54 and w[0] >= 0.27 and w[1] <= 0.57
    shown = "none" if w is None else f"[{w[0]:.4f}, {w[1]:.4f}]"
    record(2, "joint-violation window", ok and dt < 5.0,
           f"window {shown}, needs [0.30,0.54] inside and inside [0.27,0.57]; {dt:.3f} s (limit 5 s)")


def test_criterion_3_classical_bounds():
    t0 = time.perf_counter()
    local = enumerate_local_vertices()
    nc = enumerate_noncontextual_vertices()
    a_loc, _ = max_functional_local(local, alpha_chsh)
    b_nc, _ = max_functional_noncontextual(nc, beta_kcbs)
    b_loc, _ = max_functional_local(local, beta_kcbs)
    dt = time.perf_counter() - t0
    ok = len(local) == 8192 and len(nc) == 32 and a_loc == 2 and b_nc == 3 and b_loc == 5
    record(3, "classical bounds", ok and dt < 1.0,
           f"max alpha local {a_loc} / 8192 vertices, max beta NC {b_nc} / 32, max beta local {b_loc}; "
           f"{dt:.3f} s (limit 1 s)")


def test_criterion_4_structure():
    t0 = time.perf_counter()
    overlap = max(abs(np.vdot(kcbs_vector(j), kcbs_vector((j + 1) % 5))) for j in range(5))
    comm = max(commutator_norm(bob_observable(j), bob_observable((j + 1) % 5)) for j in range(5))
    square = max(np.abs(bob_observable(j) @ bob_observable(j) - np.eye(3)).max() for j in range(5))
    grid = np.linspace(0, math.pi, 20)
    scenario = Scenario.default()
    worst, failures = 0.0, 0
    for phi, tu, tv in itertools.product(grid, grid, grid):
        b = behavior_of_ket(state_psi(phi, tu, tv), scenario)
        ns = check_no_signalling(b, 1e-10)
        nd = check_no_disturbance(marginalize_bob(b), 1e-10)
        failures += (not ns.ok) + (not nd.ok)
        worst = max(worst, ns.max_violation, nd.max_violation)
    dt = time.perf_counter() - t0
    ok = overlap < 1e-12 and comm < 1e-12 and square < 1e-12 and failures == 0
    record(4, "structural exactness", ok and dt < 10.0,
           f"max overlap {overlap:.1e}, max commutator {comm:.1e}, max |B^2-1| {square:.1e}, "
           f"8000 behaviors with {failures} failures; {dt:.2f} s (limit 10 s)")


def test_criterion_5_arithmetic_identity():
    records = load_dataset()
    t0 = time.perf_counter()
    report = verify_paper(records)
    dt = time.perf_counter() - t0
    summary = [c for c in report.checks if c.field.startswith("summary.") and not c.field.endswith("_theory")]
    values = [c for c in summary if c.field in ("summary.alpha", "summary.beta")]
    sigmas = [c for c in summary if c.field.endswith("_sigma")]
    # Only the Psi9 inconsistency is exempt; everything else counts.
    failed = [c for c in summary if c.status != PASS and c.state_id != "Psi9"]
    psi9 = [c for c in report.checks if c.state_id == "Psi9" and c.status != PASS]
    psi9_flagged = bool(psi9) and all(c.status == FLAGGED for c in psi9)
    psi5 = report.states[4]
    ok = (len(values) == 22 and len(sigmas) == 22 and not failed and psi9_flagged
          and (psi5.alpha_exp, psi5.beta_exp, psi5.sigma_alpha, psi5.sigma_beta) == (2.1382, 3.5034, 0.0442, 0.0529))
    detail = ", ".join(f"{c.state_id} {c.field} {c.recomputed:.4f} vs {c.reported:.4f}" for c in failed)
    record(5, "experimental arithmetic identity", ok and dt < 1.0,
           f"Psi5 -> {psi5.alpha_exp}, {psi5.beta_exp} ({psi5.sigma_alpha}, {psi5.sigma_beta}); "
           f"Psi9 flagged: {psi9_flagged}; mismatches: {detail or 'none'}; {dt:.3f} s")


def test_criterion_6_shot_noise():
    t0 = time.perf_counter()
    sa, sb, dist = [], [], []
    for seed in range(200):
        r = simulate_experiment(QuantumModel(TABULATED_PHIS[seed % 11]), 5500, seed=seed)
        sa.append(r.sigma_alpha)
        sb.append(r.sigma_beta)
        dist.append(r.distance)
    dt = time.perf_counter() - t0
    sa, sb, dist = np.array(sa), np.array(sb), np.array(dist)
    ok_a = np.all((sa >= 0.030) & (sa <= 0.066))
    ok_b = np.all((sb >= 0.035) & (sb <= 0.080))
    ok_d = np.all((dist >= 0) & (dist <= 5e-4))
    record(6, "shot-noise realism", bool(ok_a and ok_b and ok_d) and dt < 30.0,
           f"sigma_alpha [{sa.min():.4f}, {sa.max():.4f}], sigma_beta [{sb.min():.4f}, {sb.max():.4f}], "
           f"distance [{dist.min():.1e}, {dist.max():.1e}] mean {dist.mean():.1e}, "
           f"{np.mean(dist > 5e-4):.0%} of runs above 5e-4; 200 seeds over 11 states; {dt:.1f} s (limit 30 s)")


def test_criterion_7_oracles():
    # trace oracle for the maximally mixed qutrit: <B_j B_k> = Tr(B_j B_k) / 3
    oracle = sum(
        (-1 if c == (4, 0) else 1) * np.trace(bob_observable(c[0]) @ bob_observable(c[1])).real / 3 for c in PENTAGON
    )
    mixed = correlators_from_behavior(maximally_mixed_behavior(Scenario.default()))
    beta_mixed = beta_kcbs(mixed)
    rng = np.random.default_rng(20240917)
    worst = 0.0
    for phi, tu, tv in rng.uniform(0, 2 * math.pi, size=(100, 3)):
        model = QuantumModel(phi, tu, tv)
        tables = correlators_from_behavior(model.behavior())
        direct = quantum_correlators(model)
        worst = max(worst, max(abs(tables.get(k) - v) for k, v in direct.as_labels().items()))
    ok = abs(oracle - 5 / 3) < 1e-12 and abs(beta_mixed - 5 / 3) < 1e-12 and worst < 1e-12
    record(7, "oracle equivalence", ok,
           f"mixed beta {beta_mixed:.15f} (trace oracle {oracle:.15f}, 5/3); "
           f"max table-vs-operator gap {worst:.1e} over 100 random parameters")


def test_criterion_8_optimizer_floor():
    t0 = time.perf_counter()
    shortfalls = []
    for phi in TABULATED_PHIS:
        r = optimize_state_params(phi, "max_min_margin")
        a, b = alpha_beta_at(phi, 2.868, 1.449)
        witness = min(a - 2, b - 3)
        if r.objective_value < witness:
            shortfalls.append((phi, r.objective_value, witness))
    dt = time.perf_counter() - t0
    record(8, "optimizer floor", not shortfalls and dt < 60.0,
           f"{11 - len(shortfalls)}/11 phi values at or above the (2.868, 1.449) witness; {dt:.1f} s (limit 60 s)")


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass
