import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conserva.exceptions import DomainError, InputError
from conserva.systems import (B_of, LotkaVolterraSystem, ReplicatorSystem, build_E, dphi,
                              eta_q, from_lv_coordinates, lv_coordinates_jacobian, lv_field,
                              lv_to_replicator, normalize_payoff, phi, phi_inv, pi_A,
                              projective_transform, replicator_field, replicator_to_lv,
                              restrict_to_face, scalar_factor, to_lv_coordinates,
                              xtilde_field, ybold_field)
from conserva.conservation import build_Q2
from conserva.equilibrium import formal_equilibrium_replicator

from conftest import zero_last_row_payoff, random_simplex_interior

RPS_LIKE = np.array([[0, 1, -1], [-1, 0, 1], [0, 0, 0]], dtype=float)


def fd_directional(f, x, v, eps=1e-6):
    return (f(x + eps * v) - f(x - eps * v)) / (2 * eps)


# --- normalize_payoff ---------------------------------------------------------

def test_normalize_payoff_rps(rng):
    A = np.array([[0, -1, 1], [1, 0, -1], [-1, 1, 0]], dtype=float)
    N = normalize_payoff(ReplicatorSystem(A)).payoff
    np.testing.assert_array_equal(N, [[1, -2, 1], [2, -1, -1], [0, 0, 0]])
    for x in random_simplex_interior(rng, 3, 10):
        np.testing.assert_allclose(replicator_field(N, x), replicator_field(A, x), atol=1e-15)


def test_normalize_payoff_trivial_cases():
    A = np.array([[1.0, 2.0], [0.0, 0.0]])
    np.testing.assert_array_equal(normalize_payoff(A).payoff, A)
    assert not normalize_payoff(np.ones((3, 3))).payoff.any()


# --- fields -------------------------------------------------------------------

def test_vertices_are_equilibria(rng):
    A = rng.normal(size=(4, 4))
    for i in range(4):
        assert not replicator_field(A, np.eye(4)[i]).any()


def test_equal_rows_give_zero_field(rng):
    A = np.tile(rng.normal(size=4), (4, 1))
    x = random_simplex_interior(rng, 4, 1)[0]
    assert np.abs(replicator_field(A, x)).max() < 1e-15


def test_uniform_point_equilibrium():
    assert np.abs(replicator_field(RPS_LIKE, np.ones(3) / 3)).max() < 1e-16


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(2, 7))
def test_replicator_tangent_and_kernel(seed, n):
    r = np.random.default_rng(seed)
    A = r.normal(size=(n, n))
    C = np.tile(r.normal(size=n), (n, 1))
    x = r.dirichlet(np.ones(n))
    v = replicator_field(A, x)
    assert abs(v.sum()) < 1e-12
    assert np.abs(v - replicator_field(A + C, x)).max() < 1e-12


def test_field_dimension_mismatch():
    with pytest.raises(InputError):
        replicator_field(np.eye(3), [0.5, 0.5])
    with pytest.raises(InputError):
        lv_field(LotkaVolterraSystem(np.eye(2), [0, 0]), [1.0])


def test_lv_field_examples(rng):
    sys = LotkaVolterraSystem([[0, 1], [-1, 0]], [-1, 1])
    assert not lv_field(sys, [0, 0]).any()
    assert not lv_field(sys, [1, 1]).any()
    big = LotkaVolterraSystem(rng.normal(size=(3, 3)), rng.normal(size=3))
    assert lv_field(big, [0.3, 0.0, 2.0])[1] == 0.0


# --- pi_A and the chart -------------------------------------------------------

def test_pi_A_zero_and_vertex(rng):
    assert not pi_A(np.zeros((3, 3)), np.ones(3) / 3).any()
    A = rng.normal(size=(3, 3))
    x = np.array([0.0, 0.0, 1.0])
    T = np.outer(x, np.ones(3)) - np.eye(3)
    D = np.diag(x)
    np.testing.assert_allclose(pi_A(A, x), -T @ D @ A @ D @ T.T)


def test_pi_A_times_gradient_is_field(rng):
    A = zero_last_row_payoff(rng.normal(size=(3, 3)), np.array([0.1, 0.2, 0.3, 0.4]))
    q = formal_equilibrium_replicator(A).representative
    for x in random_simplex_interior(rng, 4, 10):
        np.testing.assert_allclose(pi_A(A, x) @ (q / x), replicator_field(A, x), atol=1e-10)


def test_phi_basics(rng):
    np.testing.assert_allclose(phi(np.zeros(3)), np.full(4, 0.25))
    for u in rng.uniform(-5, 5, size=(100, 3)):
        assert np.abs(phi_inv(phi(u)) - u).max() < 1e-12
    assert phi(np.array([800.0, 0.0])).sum() == pytest.approx(1.0)


def test_phi_inv_rejects_boundary():
    with pytest.raises(DomainError):
        phi_inv([0.5, 0.5, 0.0])


def test_dphi_matches_finite_differences(rng):
    for u in rng.uniform(-3, 3, size=(10, 3)):
        J = dphi(u)
        fd = np.column_stack([fd_directional(phi, u, e) for e in np.eye(3)])
        np.testing.assert_allclose(J, fd, atol=1e-9)
        np.testing.assert_allclose(J.sum(axis=0), 0.0, atol=1e-15)


# --- E, B, eta ----------------------------------------------------------------

def test_build_E():
    np.testing.assert_array_equal(build_E(2), [[-1, 1]])
    np.testing.assert_array_equal(build_E(3), [[-1, 0, 1], [0, -1, 1]])
    for n in range(2, 8):
        assert not (build_E(n) @ np.ones(n)).any()
    with pytest.raises(InputError):
        build_E(1)


def test_B_of_zero_last_row_matches_Q2(rng):
    for _ in range(10):
        m = rng.integers(1, 6)
        q = rng.dirichlet(np.ones(m + 1))
        A_sub = rng.normal(size=(m, m))
        A = zero_last_row_payoff(A_sub, q)
        assert not B_of(np.zeros((m + 1, m + 1))).any()
        assert np.abs(B_of(A) + A_sub @ build_Q2(q)).max() < 1e-12


def test_B_of_two_by_two_hand_case():
    a, q1, q2 = 1.7, 0.3, 0.7
    A = np.array([[a, -(q1 / q2) * a], [0, 0]])
    assert B_of(A)[0, 0] == pytest.approx(-a / q2, rel=1e-14)


def test_eta_q(rng):
    assert not eta_q(np.full(4, 0.25), np.zeros(3)).any()
    q = rng.dirichlet(np.ones(4))
    u = rng.normal(size=3)
    np.testing.assert_allclose(eta_q(q, u), q[:3] - phi(u)[:3])

    def Hq_phi(v):
        return q[:3] @ v - np.log1p(np.exp(v).sum())

    for u in rng.uniform(-3, 3, size=(10, 3)):
        fd = np.array([fd_directional(Hq_phi, u, e) for e in np.eye(3)])
        np.testing.assert_allclose(eta_q(q, u), fd, rtol=1e-6, atol=1e-9)


# --- u-chart fields -----------------------------------------------------------

def test_xtilde_vanishes_at_equilibrium_image(rng):
    q = rng.dirichlet(np.ones(4))
    B = rng.normal(size=(3, 3))
    assert np.abs(xtilde_field(B, q, phi_inv(q))).max() < 1e-15


def test_xtilde_pushes_forward_to_replicator(rng):
    q = rng.dirichlet(np.ones(5))
    A = zero_last_row_payoff(rng.normal(size=(4, 4)), q)
    B = B_of(A)
    for u in rng.uniform(-3, 3, size=(20, 4)):
        lhs = dphi(u) @ xtilde_field(B, q, u)
        assert np.abs(lhs - replicator_field(A, phi(u))).max() < 1e-10


def test_ybold_scalar_factor(rng):
    q = np.full(4, 0.25)
    B = rng.normal(size=(3, 3))
    u = np.array([0.4, -0.1, 0.2])
    np.testing.assert_allclose(ybold_field(B, q, np.zeros(3)), 4 * xtilde_field(B, q, np.zeros(3)))
    np.testing.assert_allclose(ybold_field(B, q, u) / scalar_factor(u), xtilde_field(B, q, u),
                               rtol=1e-14)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(2, 6))
def test_chart_bivector_identity_property(seed, n):
    r = np.random.default_rng(seed)
    A = r.normal(size=(n, n))
    B = B_of(A)
    for u in r.uniform(-3, 3, size=(5, n - 1)):
        J = dphi(u)
        assert np.abs(J @ B @ J.T - pi_A(A, phi(u))).max() < 1e-10


# --- conversions --------------------------------------------------------------

def test_lv_to_replicator_block():
    A = lv_to_replicator(LotkaVolterraSystem([[0, 1], [-1, 0]], [-1, 1])).payoff
    np.testing.assert_array_equal(A, RPS_LIKE)


def test_round_trip(rng):
    for m in range(1, 6):
        lv = LotkaVolterraSystem(rng.normal(size=(m, m)), rng.normal(size=m))
        back = replicator_to_lv(lv_to_replicator(lv))
        np.testing.assert_array_equal(back.interaction, lv.interaction)
        np.testing.assert_array_equal(back.growth, lv.growth)


def test_replicator_to_lv_formula(rng):
    A = rng.normal(size=(4, 4))
    lv = replicator_to_lv(A)
    np.testing.assert_allclose(lv.interaction, A[:3, :3] - A[3, :3])
    np.testing.assert_allclose(lv.growth, A[:3, 3] - A[3, 3])


def test_lv_pushforward(rng):
    for n in range(2, 7):
        A = rng.normal(size=(n, n))
        lv = replicator_to_lv(A)
        for x in random_simplex_interior(rng, n, 20):
            y = to_lv_coordinates(x)
            v = replicator_field(A, x)
            lhs = lv_coordinates_jacobian(x) @ v
            # independent: directional finite difference of x -> x/x_n
            fd = fd_directional(lambda z: z[:-1] / z[-1], x, v)
            np.testing.assert_allclose(lhs, fd, rtol=1e-6, atol=1e-8)
            assert np.abs(lhs - x[-1] * lv_field(lv, y)).max() < 1e-10


def test_lv_coordinate_round_trip(rng):
    for x in random_simplex_interior(rng, 5, 20):
        assert np.abs(from_lv_coordinates(to_lv_coordinates(x)) - x).max() < 1e-12


# --- projective transform -----------------------------------------------------

def test_projective_identity(rng):
    A = rng.normal(size=(3, 3))
    pt = projective_transform(A, np.ones(3))
    np.testing.assert_array_equal(pt.system.payoff, A)
    x = random_simplex_interior(rng, 3, 1)[0]
    np.testing.assert_allclose(pt.map(x), x)


def test_projective_pushforward(rng):
    for _ in range(5):
        n = rng.integers(2, 6)
        A = rng.normal(size=(n, n))
        c = rng.uniform(0.2, 5.0, size=n)
        pt = projective_transform(A, c)
        for x in random_simplex_interior(rng, n, 20):
            v = replicator_field(A, x)
            xb = pt.map(x)
            lhs = pt.jacobian(x) @ v
            np.testing.assert_allclose(lhs, fd_directional(pt.map, x, v), rtol=1e-6, atol=1e-8)
            rhs = pt.time_factor(xb) * replicator_field(pt.system, xb)
            assert np.abs(lhs - rhs).max() < 1e-10
            np.testing.assert_allclose(pt.inverse(xb), x, atol=1e-14)


def test_projective_equilibrium_transport():
    qp = np.array([0.5, 2.0, 1.5])
    s = 1 + qp.sum()
    q = np.append(qp, 1.0) / s
    c = np.append(s / qp, s)
    pt = projective_transform(np.zeros((4, 4)), c)
    np.testing.assert_allclose(pt.map(q), np.full(4, 0.25), atol=1e-15)


def test_projective_rejects_nonpositive():
    with pytest.raises(InputError):
        projective_transform(np.eye(2), [1.0, 0.0])


# --- faces --------------------------------------------------------------------

def test_restrict_to_face(rng):
    A = rng.normal(size=(5, 5))
    np.testing.assert_array_equal(restrict_to_face(A, range(5)).payoff, A)
    kept = [0, 2, 3]
    sub = restrict_to_face(A, kept)
    for xf in random_simplex_interior(rng, 3, 10):
        x = np.zeros(5)
        x[kept] = xf
        full = replicator_field(A, x)
        assert np.abs(full[kept] - replicator_field(sub, xf)).max() < 1e-12
        assert not np.delete(full, kept).any()
    single = restrict_to_face(A, [4])
    assert single.n == 1 and not replicator_field(single, [1.0]).any()
    with pytest.raises(InputError):
        restrict_to_face(A, [])
