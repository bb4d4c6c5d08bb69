import numpy as np
import pytest
from numpy.testing import assert_allclose

from cqlqg.errors import NonSymmetricRError, ShapeError
from cqlqg.linalg import canonical_ccr, classify, project
from cqlqg.model import (ControllerParams, Dimensions, QuantumPlant,
                         assemble_closed_loop, check_initial_covariance,
                         equivalent_classical_plant, make_pr_plant,
                         realize_controller, realize_node, theta0, theta_rhs,
                         validate_controller_pr, validate_plant_pr)

DIMS = Dimensions(n=2, m1=2, m2=2, p1=2, p2=2, r=2)
K1 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def random_plant(seed, nodes=1, dims=DIMS):
    rng = np.random.default_rng(seed)
    B = rng.uniform(-1, 1, (dims.n, dims.m1))
    D = rng.uniform(-1, 1, (dims.p1, dims.m1))
    E = rng.uniform(-1, 1, (dims.n, dims.p2))
    d = rng.uniform(-1, 1, (dims.p2, dims.m2))
    rp = rng.uniform(-1, 1, (dims.n, dims.n))
    plant = make_pr_plant(dims, B, D, E, d, K1, R_plant=(rp + rp.T) / 2,
                          nodes=nodes)
    return plant, d


def test_dimensions_reject_odd_state():
    with pytest.raises(ShapeError):
        Dimensions(n=3, m1=2, m2=2, p1=2, p2=2, r=2)


def test_dimensions_half_sizes():
    d = Dimensions(n=4, m1=2, m2=6, p1=3, p2=2, r=1)
    assert (d.nu, d.mu1, d.mu2) == (2, 1, 3)


def test_zero_plant_passes_pr():
    z = np.zeros((2, 2))
    plant = QuantumPlant(dims=DIMS, A=z, B=z, C=z, D=z, E=z, K1=K1)
    res = validate_plant_pr(plant, z, 0)
    assert res["pass"] and res["res11"] == 0.0 and res["res12"] == 0.0


def test_make_pr_plant_zero_inputs():
    plant = make_pr_plant(DIMS, np.zeros((2, 2)), np.eye(2), np.zeros((2, 2)),
                          np.eye(2), K1)
    assert_allclose(plant.A[0], 0.0)
    assert_allclose(plant.C[0], 0.0)


@pytest.mark.parametrize("seed", range(10))
def test_make_pr_plant_residuals(seed):
    plant, d = random_plant(seed)
    res = validate_plant_pr(plant, d, 0, tol=1e-12)
    assert res["pass"], res


def test_r_plant_shifts_a_but_keeps_pr():
    rng = np.random.default_rng(5)
    B, D, E, d = (rng.uniform(-1, 1, (2, 2)) for _ in range(4))
    r = rng.uniform(-1, 1, (2, 2))
    r = (r + r.T) / 2
    base = make_pr_plant(DIMS, B, D, E, d, K1)
    moved = make_pr_plant(DIMS, B, D, E, d, K1, R_plant=r)
    assert_allclose(moved.A[0] - base.A[0], K1 @ r, atol=1e-14)
    assert validate_plant_pr(moved, d, 0, tol=1e-12)["pass"]


def test_plant_pr_detects_drift_perturbation():
    plant, d = random_plant(3)
    bad = QuantumPlant(dims=DIMS, A=plant.A + 1e-3 * np.eye(2), B=plant.B,
                       C=plant.C, D=plant.D, E=plant.E, K1=plant.K1)
    res = validate_plant_pr(bad, d, 0, tol=1e-10)
    assert not res["pass"] and res["res11"] > 1e-4


def test_realize_zero_controller():
    j = canonical_ccr(1)
    a, c = realize_node(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2)),
                        np.eye(2), np.eye(2), j, j, j)
    assert_allclose(a, 0.0)
    assert_allclose(c, 0.0)


def test_realize_pure_hamiltonian_part():
    j = canonical_ccr(1)
    r = np.array([[1.0, 0.3], [0.3, -0.5]])
    a, _ = realize_node(np.zeros((2, 2)), np.zeros((2, 2)), r,
                        np.eye(2), np.eye(2), j, j, j)
    assert_allclose(a, j @ r)
    assert classify(a, j, 1e-12).hamiltonian


def test_realize_rejects_asymmetric_r():
    j = canonical_ccr(1)
    with pytest.raises(NonSymmetricRError):
        realize_node(np.zeros((2, 2)), np.zeros((2, 2)),
                     np.array([[0.0, 1.0], [0.0, 0.0]]),
                     np.eye(2), np.eye(2), j, j, j)


@pytest.mark.parametrize("seed", range(20))
def test_realized_controller_is_pr(seed):
    rng = np.random.default_rng(seed)
    plant, d = random_plant(seed + 100, nodes=3)
    r = rng.uniform(-1, 1, (3, 2, 2))
    params = ControllerParams(dims=DIMS, b=rng.uniform(-1, 1, (3, 2, 2)),
                              e=rng.uniform(-1, 1, (3, 2, 2)),
                              R=(r + r.transpose(0, 2, 1)) / 2, d=d)
    ctrl = realize_controller(params, plant)
    for k in range(3):
        res = validate_controller_pr(ctrl.a[k], ctrl.b[k], ctrl.c[k],
                                     ctrl.e[k], ctrl.d, plant.D[k],
                                     DIMS.j0, DIMS.j1, DIMS.j2, tol=1e-12)
        assert res["pass"], res


def test_controller_pr_detects_defect():
    plant, d = random_plant(7, nodes=1)
    rng = np.random.default_rng(7)
    params = ControllerParams(dims=DIMS, b=rng.uniform(-1, 1, (1, 2, 2)),
                              e=rng.uniform(-1, 1, (1, 2, 2)),
                              R=np.zeros((1, 2, 2)), d=d)
    ctrl = realize_controller(params, plant)
    bad_a = ctrl.a[0] + 1e-3 * np.eye(2)  # symmetric, outside J0 * Sym
    res = validate_controller_pr(bad_a, ctrl.b[0], ctrl.c[0], ctrl.e[0],
                                 ctrl.d, plant.D[0], DIMS.j0, DIMS.j1, DIMS.j2)
    assert not res["pass"] and res["res1"] > 1e-4


def test_hamiltonian_decomposition_of_a():
    # a - J0 R is skew-Hamiltonian; J0 R is Hamiltonian
    rng = np.random.default_rng(11)
    plant, d = random_plant(11, nodes=1)
    r = rng.uniform(-1, 1, (2, 2))
    r = (r + r.T) / 2
    a, _ = realize_node(rng.uniform(-1, 1, (2, 2)), rng.uniform(-1, 1, (2, 2)),
                        r, plant.D[0], d, DIMS.j0, DIMS.j1, DIMS.j2)
    j0 = DIMS.j0
    assert np.linalg.norm(project(a - j0 @ r, "hamiltonian", j0)) < 1e-12
    assert np.linalg.norm(project(j0 @ r, "skew_hamiltonian", j0)) < 1e-12


def build_loop(seed, nodes=1):
    rng = np.random.default_rng(seed)
    plant, d = random_plant(seed, nodes=nodes)
    params = ControllerParams(dims=DIMS, b=rng.uniform(-1, 1, (nodes, 2, 2)),
                              e=rng.uniform(-1, 1, (nodes, 2, 2)),
                              R=np.zeros((nodes, 2, 2)), d=d)
    ctrl = realize_controller(params, plant)
    F = rng.uniform(-1, 1, (2, 2))
    G = rng.uniform(-1, 1, (2, 2))
    return plant, ctrl, F, G, d


def test_assemble_zero_controller_blocks():
    plant, d = random_plant(13)
    params = ControllerParams.zero(DIMS, 1, d)
    ctrl = realize_controller(params, plant)
    F = np.eye(2)
    cl = assemble_closed_loop(plant, ctrl, F, np.zeros((2, 2)))
    assert_allclose(cl.A[0][:2, :2], plant.A[0])
    assert_allclose(cl.A[0][:2, 2:], 0.0)
    assert_allclose(cl.A[0][2:, 2:], 0.0)
    assert_allclose(cl.C[0], np.hstack([F, np.zeros((2, 2))]))


def test_assemble_block_read_back():
    plant, ctrl, F, G, d = build_loop(17)
    cl = assemble_closed_loop(plant, ctrl, F, G)
    assert_allclose(cl.A[0][:2, 2:], plant.E[0] @ ctrl.c[0])
    assert_allclose(cl.A[0][2:, :2], ctrl.e[0] @ plant.C[0])
    assert_allclose(cl.B[0][:2, 2:], plant.E[0] @ d)
    assert_allclose(cl.B[0][2:, :2], ctrl.e[0] @ plant.D[0])
    assert_allclose(cl.B[0][2:, 2:], ctrl.b[0])
    assert_allclose(cl.C[0][:, 2:], G @ ctrl.c[0])


def test_assemble_coupling_block_formula():
    # with the PR expression for c, the (1,2) drift block is E d J2 b^T J0
    plant, ctrl, F, G, d = build_loop(19)
    cl = assemble_closed_loop(plant, ctrl, F, G)
    expected = plant.E[0] @ d @ DIMS.j2 @ ctrl.b[0].T @ DIMS.j0
    assert_allclose(cl.A[0][:2, 2:], expected, atol=1e-14)


def test_assemble_linear_in_each_block():
    # assembly is purely structural: each input block enters linearly
    from cqlqg.model import ControllerRealization
    plant, ctrl, F, G, d = build_loop(37)
    rng = np.random.default_rng(37)
    other_c = rng.uniform(-1, 1, (1, 2, 2))

    def with_c(c):
        moved = ControllerRealization(dims=ctrl.dims, a=ctrl.a, b=ctrl.b,
                                      c=c, e=ctrl.e, d=ctrl.d)
        return assemble_closed_loop(plant, moved, F, G)

    lhs = with_c(ctrl.c + other_c)
    base = with_c(ctrl.c)
    delta = with_c(other_c)
    zero = with_c(np.zeros_like(ctrl.c))
    assert_allclose(lhs.A, base.A + delta.A - zero.A, atol=1e-14)
    assert_allclose(lhs.C, base.C + delta.C - zero.C, atol=1e-14)


def test_classical_plant_blocks():
    plant, d = random_plant(23)
    F = np.eye(2)
    G = 0.5 * np.eye(2)
    blocks = equivalent_classical_plant(plant, d, F, G)
    assert blocks.noise_input.shape == (2, 4)  # m1 + m2 noise columns
    assert_allclose(blocks.noise_input[:, :2], plant.B[0])
    assert_allclose(blocks.noise_input[:, 2:], plant.E[0] @ d)
    assert_allclose(blocks.control_input, plant.E[0])
    assert_allclose(blocks.observation_state, plant.C[0])
    assert_allclose(blocks.observation_noise[:, :2], plant.D[0])
    arr = blocks.as_array(DIMS)
    assert arr.shape == (2 + 2 + 2 + 2, 2 + 4 + 2)
    assert_allclose(arr[:2, :2], plant.A[0])
    assert_allclose(arr[2:4, 6:], G)
    assert_allclose(arr[4:6, 4:6], np.eye(2))
    assert_allclose(arr[6:, :2], plant.C[0])


def test_zero_plant_classical_blocks():
    z = np.zeros((2, 2))
    plant = QuantumPlant(dims=DIMS, A=z, B=z, C=z, D=z, E=z, K1=K1)
    arr = equivalent_classical_plant(plant, z, z, z).as_array(DIMS)
    expected = np.zeros_like(arr)
    expected[4:6, 4:6] = np.eye(2)
    assert_allclose(arr, expected)


def test_theta_rhs_zero_system():
    th = np.array([[0.0, 1.0], [-1.0, 0.0]])
    assert_allclose(theta_rhs(th, np.zeros((2, 2)), np.zeros((2, 2)),
                              np.eye(2)), 0.0)


def test_theta_rhs_vanishes_for_pr_loop():
    plant, ctrl, F, G, d = build_loop(29)
    cl = assemble_closed_loop(plant, ctrl, F, G)
    th0 = theta0(plant.K1, DIMS.j0)
    rhs = theta_rhs(th0, cl.A[0], cl.B[0], cl.J)
    assert np.linalg.norm(rhs) < 1e-12 * (1.0 + np.linalg.norm(cl.A[0]))


def test_theta_rhs_sees_non_pr_controller():
    plant, ctrl, F, G, d = build_loop(31)
    cl = assemble_closed_loop(plant, ctrl, F, G)
    th0 = theta0(plant.K1, DIMS.j0)
    bad_a = cl.A[0].copy()
    bad_a[2:, 2:] += 1e-3 * np.eye(2)
    assert np.linalg.norm(theta_rhs(th0, bad_a, cl.B[0], cl.J)) > 1e-4


def test_initial_covariance_identity_is_admissible():
    th0 = theta0(K1, canonical_ccr(1))
    assert check_initial_covariance(np.eye(4), th0)


def test_initial_covariance_zero_p_rejected():
    th0 = theta0(K1, canonical_ccr(1))
    assert not check_initial_covariance(np.zeros((4, 4)), th0)


def test_initial_covariance_classical_limit():
    rng = np.random.default_rng(37)
    m = rng.uniform(-1, 1, (4, 4))
    assert check_initial_covariance(m @ m.T, np.zeros((4, 4)))
