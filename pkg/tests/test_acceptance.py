"""Acceptance criteria, one test per criterion.

Each test computes every sub-check, records a single PASS/FAIL line (shown
in the terminal summary) and then asserts.
"""

import numpy as np
import pytest

from conserva import LotkaVolterraSystem, lv_to_replicator
from conserva.cli import main
from conserva.conservation import (ConservationCertificate, ConstantOfMotion, build_Q2,
                                   build_Qbar1, certificate_from_gauge, certificate_matrix,
                                   certificate_search_general, certificate_search_reduced,
                                   gauge_skew_symmetrizer, representative_certificate)
from conserva.dirac import classify
from conserva.dynamics import (IntegratorConfig, check_identity_2_5, check_pushforward_5_1,
                               conservation_drift, gradient_check, integrate,
                               pointwise_orthogonality, random_chart_points)
from conserva.equilibrium import formal_equilibrium_lv, normalize_lv_equilibrium
from conserva.linalg import projection_residual, subspace_residual
from conserva.systems import B_of, phi

from conftest import LAMBDA_AP, LAMBDA_R, zero_last_row_payoff, record

Y0 = np.array([0.5, 1.5, 1.2, 0.8])
ADAPTIVE_20 = IntegratorConfig(t_end=20.0, abs_tol=1e-10, rel_tol=1e-10)
J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def lambda_setup():
    lv = LotkaVolterraSystem(LAMBDA_AP, LAMBDA_R)
    qp = formal_equilibrium_lv(lv).representative
    q = normalize_lv_equilibrium(qp)
    B = B_of(lv_to_replicator(lv))
    fam = certificate_search_general(B, q)
    cert = representative_certificate(fam, q, B)
    return lv, qp, q, B, fam, cert


def gauge_systems(count=20, seed=2024):
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        m = (2, 3, 4)[k % 3]
        S = rng.normal(size=(m, m))
        S = np.triu(S, 1)
        S = S - S.T
        dp = rng.uniform(0.3, 3.0, size=m)
        Ap = S @ np.diag(1 / dp)
        qp = rng.uniform(0.3, 2.0, size=m)
        lv = LotkaVolterraSystem(Ap, -Ap @ qp)
        y0 = qp * rng.uniform(0.6, 1.4, size=m)
        out.append((lv, qp, dp, y0))
    return out


def _fmt(x):
    return f"{x:.2e}"


# --- 1 -------------------------------------------------------------------------

def test_criterion_1_lambda_example():
    lv, qp, q, B, _, cert = lambda_setup()
    a = np.abs(qp - 1).max()
    fam_r = certificate_search_reduced(LAMBDA_AP, q)
    b = projection_residual(np.array([[1.0, -1.0, 0.0, 0.0]]), fam_r.d_basis) \
        if fam_r.dimension else 1.0
    gauge = gauge_skew_symmetrizer(LAMBDA_AP)
    com_y = cert.constant("y")
    traj = integrate("lv", lv, Y0, ADAPTIVE_20, com_y)
    d_drift = traj.drift["H"]["max_rel"]
    d_ok = traj.completed and d_drift < 1e-6
    # same orbit on the u-chart flow, whose time is complete
    com_u = cert.constant("u")
    traj_u = integrate("xtilde", (B, q), np.log(Y0), ADAPTIVE_20, com_u)
    sup = conservation_drift(traj_u, com_u)["max_rel_drift"]
    checks = {"a": a < 1e-10, "b": b < 1e-8, "c": not gauge.success, "d": d_ok}
    detail = (f"(a) |q'-1|={_fmt(a)}; (b) proj={_fmt(b)}; (c) gauge: {gauge.reason or 'ok'}; "
              f"(d) LV status={traj.status} at t={traj.times[-1]:.4f}, drift before stop "
              f"{_fmt(d_drift)}; u-chart flow t=20 status={traj_u.status} drift {_fmt(sup)}")
    record("1", all(checks.values()), detail)
    assert checks["a"] and checks["b"] and checks["c"]
    assert traj_u.completed and sup < 1e-6
    assert checks["d"], detail


# --- 2 -------------------------------------------------------------------------

def test_criterion_2_gauge_inclusion():
    worst_proj, worst_drift, failures = 0.0, 0.0, []
    for k, (lv, qp, dp, y0) in enumerate(gauge_systems()):
        q = normalize_lv_equilibrium(qp)
        fam = certificate_search_general(B_of(lv_to_replicator(lv)), q)
        com = certificate_from_gauge(qp, dp)
        D = certificate_matrix(com.c, com.g)
        proj = projection_residual(D.reshape(1, -1), fam.flat_basis) if fam.dimension else 1.0
        traj = integrate("lv", lv, y0, ADAPTIVE_20, com)
        drift = traj.drift["H"]["max_rel"] if traj.completed else float("inf")
        worst_proj, worst_drift = max(worst_proj, proj), max(worst_drift, drift)
        if not (proj < 1e-8 and drift < 1e-6):
            failures.append(k)
    ok = not failures
    record("2", ok, f"20 systems, max proj {_fmt(worst_proj)}, max H_y drift "
                    f"{_fmt(worst_drift)}, failing {failures}")
    assert ok


# --- 3 -------------------------------------------------------------------------

def test_criterion_3_chart_identities():
    rng = np.random.default_rng(303)
    worst_25 = worst_51 = 0.0
    for k in range(20):
        n = 2 + k % 5
        A = rng.normal(size=(n, n))
        U = random_chart_points(rng, n - 1, 20)
        X = np.array([phi(u) for u in U])
        worst_25 = max(worst_25, check_identity_2_5(A, U))
        worst_51 = max(worst_51, check_pushforward_5_1(A, X))
    ok = worst_25 < 1e-10 and worst_51 < 1e-10
    record("3", ok, f"identity max {_fmt(worst_25)}, push-forward max {_fmt(worst_51)}")
    assert ok


# --- 4 -------------------------------------------------------------------------

def test_criterion_4_orthogonality():
    rng = np.random.default_rng(404)
    _, _, q, B, _, cert = lambda_setup()
    cases = [(B, q, cert.constant("u"))]
    for lv, qp, dp, _ in gauge_systems():
        com = certificate_from_gauge(qp, dp)
        cases.append((B_of(lv_to_replicator(lv)), normalize_lv_equilibrium(qp),
                      ConstantOfMotion(com.c, com.g, "u")))
    worst = max(pointwise_orthogonality(Bk, qk, ck, random_chart_points(rng, Bk.shape[0], 100))
                for Bk, qk, ck in cases)
    ok = worst < 1e-10
    record("4", ok, f"{len(cases)} certificates x 100 points, max normalized "
                    f"|<X,grad H>| {_fmt(worst)}")
    assert ok


# --- 5 -------------------------------------------------------------------------

def test_criterion_5_search_paths():
    rng = np.random.default_rng(505)
    worst, bad, dims = 0.0, [], []
    for k in range(20):
        m = 1 + k % 5
        q = rng.dirichlet(np.ones(m + 1) * 2)
        if k % 2:
            S = rng.normal(size=(m, m))
            S = S - S.T
            d = rng.uniform(0.5, 2.0, size=m) * rng.choice([-1, 1], size=m)
            A_sub = np.diag(1 / d) @ np.linalg.solve(build_Qbar1(q), S) \
                @ np.linalg.inv(build_Q2(q))
        else:
            A_sub = rng.normal(size=(m, m))
        B = B_of(zero_last_row_payoff(A_sub, q))
        g = certificate_search_general(B, q)
        r = certificate_search_reduced(A_sub, q)
        dims.append(g.dimension)
        if g.dimension != r.dimension:
            bad.append(k)
            continue
        if g.dimension:
            res = subspace_residual(g.flat_basis, r.flat_basis)
            worst = max(worst, res)
            if res >= 1e-8:
                bad.append(k)
    ok = not bad
    record("5", ok, f"dimensions {dims}, max mutual projection {_fmt(worst)}, failing {bad}")
    assert ok


# --- 6 -------------------------------------------------------------------------

def test_criterion_6_negative_control(rps_normalized):
    q = np.full(3, 1 / 3)
    dim_g = certificate_search_general(B_of(rps_normalized), q).dimension
    dim_r = certificate_search_reduced(rps_normalized[:2, :2], q).dimension
    _, _, q5, B, _, _ = lambda_setup()
    D_bad = build_Qbar1(q5) * np.array([1.1, -1.0, 0.0, 0.0])[None, :]
    com = ConservationCertificate(D_bad, q5).constant("u")
    traj = integrate("xtilde", (B, q5), np.log(Y0), ADAPTIVE_20, com)
    drift = conservation_drift(traj, com)["max_abs_drift"]
    ok = dim_g == 0 and dim_r == 0 and drift > 1e-3
    record("6", ok, f"RPS dims general={dim_g} reduced={dim_r}; perturbed certificate "
                    f"drift {_fmt(drift)}")
    assert ok


# --- 7 -------------------------------------------------------------------------

def test_criterion_7_classification():
    _, _, q, B, _, cert = lambda_setup()
    pp_B = -J2 @ build_Q2(np.full(3, 1 / 3))
    pp_D = np.array([[2.0, 1.0], [1.0, 2.0]])
    hand = [
        (J2, np.eye(2), "symplectic"),
        (np.zeros((2, 2)), np.eye(2), "Poisson"),
        (np.zeros((2, 2)), np.zeros((2, 2)), "big-isotropic"),
    ]
    labels_ok = all(classify(Bk, Dk).class_label == lab for Bk, Dk, lab in hand)
    omega = classify(J2, np.eye(2)).presymplectic_matrix
    labels_ok &= np.allclose(omega, [[0, -1], [1, 0]])
    labels_ok &= classify(np.zeros((2, 2)), np.eye(2)).is_dirac
    pairs = [(Bk, Dk) for Bk, Dk, _ in hand] + [(pp_B, pp_D), (B, cert.D)]
    skew_worst = 0.0
    for Bk, Dk in pairs:
        cl = classify(Bk, Dk)
        for R in (cl.presymplectic_matrix, cl.poisson_matrix):
            if R is not None:
                skew_worst = max(skew_worst, float(np.abs(R + R.T).max()))
    invariant = all(classify(lam * Bk, lam * Dk).class_label == classify(Bk, Dk).class_label
                    for lam in (0.5, 2.0, 10.0) for Bk, Dk in pairs)
    ok = labels_ok and skew_worst < 1e-10 and invariant
    record("7", ok, f"hand labels {'ok' if labels_ok else 'WRONG'}, reduction skew max "
                    f"{_fmt(skew_worst)}, scale invariance {'ok' if invariant else 'BROKEN'}; "
                    f"predator-prey={classify(pp_B, pp_D).class_label}, "
                    f"lambda={classify(B, cert.D).class_label}")
    assert ok


# --- 8 -------------------------------------------------------------------------

def test_criterion_8_numerical_hygiene(tmp_path, capsys):
    rng = np.random.default_rng(808)
    _, _, _, _, _, cert = lambda_setup()
    constants = [cert.constant("u"), ConstantOfMotion([1.0, 1.0], [-1.0, -1.0])]
    for _, qp, dp, _ in gauge_systems(6):
        constants.append(certificate_from_gauge(qp, dp))
    grad = max(gradient_check(c, random_chart_points(rng, c.m, 50)) for c in constants)

    pp = LotkaVolterraSystem(J2, [-1.0, 1.0])
    pp_com = ConstantOfMotion([1.0, 1.0], [-1.0, -1.0], "y")
    drifts = [integrate("lv", pp, [0.5, 1.5], IntegratorConfig(method="rk4", step=h,
                                                                 t_end=20.0), pp_com)
              .drift["H"]["max_abs"] for h in (0.1, 0.05, 0.025)]
    ratios = [drifts[0] / drifts[1], drifts[1] / drifts[2]]
    order_ok = all(8 <= r <= 32 for r in ratios)

    from pathlib import Path
    system = Path(__file__).resolve().parents[1] / "systems" / "lambda_example.json"
    outs = []
    for k in range(2):
        target = tmp_path / f"rep{k}.json"
        main(["analyze", str(system), "--method", "both", "--seed", "99", "--samples", "30",
              "--out", str(target)])
        outs.append(target.read_bytes())
    capsys.readouterr()
    same = outs[0] == outs[1]
    ok = grad < 1e-6 and order_ok and same
    record("8", ok, f"gradient check max {_fmt(grad)}; RK4 drift ratios "
                    f"{ratios[0]:.1f}, {ratios[1]:.1f}; CLI reports identical: {same}")
    assert ok
