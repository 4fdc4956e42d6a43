"""End-to-end acceptance checks, one test per criterion.

Each test reports a PASS/FAIL line through the ``criterion`` fixture; the
lines are repeated in the terminal summary.
"""

import numpy as np

from triodflow import FlowConfig, FlowState, evolve, single_curve_mode
from triodflow import analysis as an
from triodflow import functionals as fn
from triodflow.cli import main
from triodflow.geometry import DiscreteCurve, curvatures
from triodflow.junction import lambda_from_k
from triodflow.scenarios import bowed_curve, build_scenario, steiner_triod

FOUR_ROOT3 = 4 * np.sqrt(3)


def test_c1_steiner_stationary(criterion):
    s = FlowState(steiner_triod(n=64))
    J, L = s.triod.junction.copy(), fn.total_length(s)
    cfg = FlowConfig(max_steps=1000, t_end=np.inf, record_states=False, embeddedness=False, monitor_every=1000)
    final = evolve(s, cfg).final
    dJ = float(np.linalg.norm(final.triod.junction - J))
    dL = abs(fn.total_length(final) - L)
    ok = final.step_count == 1000 and dJ < 1e-8 and dL < 1e-10
    criterion(1, "Steiner triod stationary", ok, f"steps={final.step_count} |dJ|={dJ:.2e} |dL|={dL:.2e}")


def _dissipation_ratios(n, t_end=0.1):
    cfg = FlowConfig(t_end=t_end, resample_every=0, embeddedness=False, record_states=False)
    R = evolve(FlowState(bowed_curve(n=n)), cfg).records
    return np.array([fn.length_dissipation_residual(R[i - 1 : i + 2]) / R[i].k_l2_sq for i in range(1, len(R) - 1)])


def test_c2_dissipation_identity(criterion):
    worst = {n: float(np.max(_dissipation_ratios(n))) for n in (32, 64, 128)}
    orders = [np.log2(worst[a] / worst[b]) for a, b in ((32, 64), (64, 128))]
    ok = worst[128] < 0.05 and min(orders) >= 1.0
    detail = f"max ratio n=128 {worst[128]:.2e}, orders {orders[0]:.2f} {orders[1]:.2f}"
    criterion(2, "length dissipation identity", ok, detail)


def _evolving_sum_k(n, t_end=0.2):
    s = build_scenario("perturbed_steiner", {"n": n}, seed=7)
    cfg = FlowConfig(t_end=t_end, resample_every=0, embeddedness=False, record_states=False, monitor_every=10**9)
    return abs(evolve(s, cfg).records[-1].sum_k)


def test_c3_junction_algebra(criterion):
    rng = np.random.default_rng(2024)
    K = rng.normal(size=(100_000, 3)) * 10.0 ** rng.uniform(-3, 3, size=(100_000, 1))
    K -= K.mean(axis=1, keepdims=True)
    lam = np.array([lambda_from_k(k) for k in K])
    scale = np.sum(K**2, axis=1)
    e_sum = np.max(np.abs(lam.sum(axis=1)) / np.sqrt(scale))
    e_norm = np.max(np.abs(np.sum(lam**2, axis=1) - scale) / scale)
    e_orth = np.max(np.abs(np.sum(K * lam, axis=1)) / scale)
    algebra_ok = max(e_sum, e_norm, e_orth) < 1e-12
    sums = [_evolving_sum_k(n) for n in (17, 33, 65)]
    orders = [np.log2(sums[i] / sums[i + 1]) for i in range(2)]
    ok = algebra_ok and min(orders) >= 0.9
    detail = (f"identity errors {e_sum:.1e} {e_norm:.1e} {e_orth:.1e}; "
              f"|sum k| {sums[0]:.1e} {sums[1]:.1e} {sums[2]:.1e}, orders {orders[0]:.2f} {orders[1]:.2f}")
    criterion(3, "junction algebra", ok, detail)


def _grim_error(n, t_end=0.5):
    c = an.grim_reaper((1.0, 0.0), n, 1.3)
    p0, p1 = c.points[0].copy(), c.points[-1].copy()
    flow = single_curve_mode(c, endpoint_path=lambda t: (p0 + [t, 0.0], p1 + [t, 0.0]))
    s = flow.run(t_end)
    p = s.geometry.points
    return float(np.max(np.abs(p[:, 0] - an.grim_reaper_x(p[:, 1], s.t))))


def test_c4_grim_reaper(criterion):
    static = an.translator_residual(an.grim_reaper((1.0, 0.0), 257, 1.3), (1.0, 0.0))
    e33, e65 = _grim_error(33), _grim_error(65)
    order = np.log2(e33 / e65)
    ok = static < 1e-3 and e65 < 1e-3 and order >= 1.5
    criterion(4, "grim reaper", ok, f"static {static:.2e}; flow error n=33 {e33:.2e} n=65 {e65:.2e}, order {order:.2f}")


def test_c5_density_catalog(criterion):
    T, t, x0 = 1.3, 0.4, (0.3, -0.2)
    extent = 10 * np.sqrt(2 * (T - t))
    probe = fn.DensityProbe(x0, T)
    line = an.halfline_star(x0, extent, count=2, n=257, angle=0.3)
    got = {
        "line": fn.gaussian_density(FlowState(line, t=t), probe),
        "halfline": fn.gaussian_density(FlowState(an.halfline_star(x0, extent, count=1, n=257), t=t), probe),
        "three": fn.gaussian_density(FlowState(an.halfline_star(x0, extent, count=3, n=257), t=t), probe),
    }
    want = {"line": 1.0, "halfline": 0.5, "three": 1.5}
    err = {k: abs(got[k] - want[k]) for k in want}
    ok = max(err.values()) < 1e-4
    criterion(5, "Gaussian density catalog", ok, " ".join(f"{k} {got[k]:.8f}" for k in want))


def test_c6_monotonicity(criterion):
    c = bowed_curve(n=128)
    probe = fn.DensityProbe(tuple(c.points[64]), 0.3)
    cfg = FlowConfig(t_end=0.05, resample_every=0, embeddedness=False)
    S = evolve(FlowState(c), cfg, probes=[probe]).states
    ratios = []
    for i in range(1, len(S) - 1):
        r = fn.monotonicity_residual(S[i - 1 : i + 2], probe)
        ratios.append(abs(r.residual) / r.dissipation)
    bints = fn.boundary_term_integrals(S, probe)
    ok = max(ratios) < 0.05 and np.all(bints <= 0.5 + 1e-3)
    detail = f"max residual/dissipation {max(ratios):.2e} over {len(ratios)} samples; boundary integrals {np.round(bints, 4)}"
    criterion(6, "monotonicity", ok, detail)


def test_c7_embeddedness(criterion):
    s = build_scenario("perturbed_steiner", {"n": 33}, seed=7)
    E = evolve(s, FlowConfig(t_end=1.0, record_states=False, monitor_every=5)).series("E")
    exact = fn.embeddedness_ratio(steiner_triod(n=64))
    ok = E.min() >= 0.5 * E[0] and E.max() <= FOUR_ROOT3 + 1e-12 and abs(exact - FOUR_ROOT3) < 1e-6
    criterion(7, "embeddedness", ok, f"E0={E[0]:.4f} min={E.min():.4f} max={E.max():.4f}; Steiner E={exact:.10f}")


def test_c8_steiner_convergence(criterion):
    s = build_scenario("perturbed_steiner", {"n": 33}, seed=7)
    P = s.triod.endpoints
    angles_ok = an.steiner_point(*P) is not None
    final = evolve(s, FlowConfig(t_end=3.0, record_states=False, embeddedness=False, monitor_every=1000)).final
    h, gap = an.steiner_distance(final, *P)
    ok = angles_ok and h < 1e-3 and abs(gap) < 1e-6
    criterion(8, "convergence to the Steiner tree", ok, f"t={final.t:g} hausdorff {h:.2e} length gap {gap:.2e}")


def test_c9_blowup_and_rescaling(criterion):
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(500):
        C, T = 10 ** rng.uniform(-1, 2), rng.uniform(0.5, 10)
        t = np.linspace(0, rng.uniform(0.5, 0.95) * T, int(rng.integers(8, 60)))
        fit = an.estimate_blowup(t, C / (T - t))
        worst = max(worst, abs(fit.T_est / T - 1), abs(fit.C_est / C - 1))
    R0 = 1.0
    ts = np.linspace(0, R0**2 / 2 - 1e-3, 200)
    gap = 0.05
    th = np.linspace(gap, 2 * np.pi - gap, 257)
    states = [FlowState(DiscreteCurve(np.sqrt(R0**2 - 2 * t) * np.column_stack((np.cos(th), np.sin(th)))), t=t)
              for t in ts]
    k_err = circ_err = 0.0
    for _, (snap,) in an.hamilton_rescale(states, R0**2 / 2):
        c, j = snap.marked
        k_err = max(k_err, abs(curvatures(snap.geometry)[j] - 1.0))
        centre = -snap.factor * np.asarray(snap.origin)
        circ_err = max(circ_err, float(np.max(np.abs(np.linalg.norm(snap.geometry.points - centre, axis=1) - 1.0))))
    ok = worst < 0.01 and k_err < 1e-6 and circ_err < 1e-3
    detail = f"worst (T, C) relative error {worst:.2e}; marked k error {k_err:.1e}, circle error {circ_err:.2e}"
    criterion(9, "blow-up fit and rescaling", ok, detail)


def test_c10_determinism(criterion, tmp_path):
    import json

    scenarios = {
        "steiner": {"family": "steiner", "params": {"n": 17}, "flow": {"t_end": 0.1}},
        "perturbed": {"family": "perturbed_steiner", "params": {"n": 17}, "seed": 11,
                      "flow": {"t_end": 0.2, "monitor_every": 7}, "probes": [{"x0": [0.1, 0.0], "T": 1.0}]},
        "bowed": {"family": "bowed", "params": {"n": 33}, "flow": {"t_end": 0.1}},
    }
    same = True
    for name, doc in scenarios.items():
        cfg = tmp_path / f"{name}.json"
        cfg.write_text(json.dumps(doc), encoding="utf-8")
        outs = [tmp_path / f"{name}_{i}" for i in (0, 1)]
        for out in outs:
            assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
        for fname in ("series.csv", "initial.json", "final.json"):
            same &= (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()
    criterion(10, "determinism", same, f"{len(scenarios)} scenarios, CSV and JSON compared byte for byte")
