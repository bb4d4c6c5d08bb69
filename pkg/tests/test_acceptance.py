"""Acceptance gate: one test per criterion, each printing PASS/FAIL.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Scale: n = 2, m1 = m2 = p1 = p2 = 2, T = 1, N = 200.
"""

import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_SEEDS, build_scenario

import cqlqg as cq
from cqlqg.dynamics import TimeGrid, integrate_p, integrate_q
from cqlqg.gains import (BlockView, PlantNode, control_hamiltonian,
                         minimized_hamiltonian, optimal_gains)
from cqlqg.grade_ops import GradeROperator
from cqlqg.verify import (check_appendix_a, check_ccr_preservation,
                          check_ccr_preservation_negative,
                          check_hankelian_identity, check_r_independence,
                          check_skew_hamiltonian_h22,
                          check_symplectic_invariance,
                          vshape_block_invariants)

GRID = TimeGrid(T=1.0, N=200)


def report(number, name, passed, detail):
    print(f"[criterion {number:02d}] {'PASS' if passed else 'FAIL'} "
          f"{name}: {detail}")
    assert passed, f"criterion {number} ({name}): {detail}"


def test_criterion_01_ccr_preservation(solved_scenario):
    dims, plant, F, G, d, P0, grid, traj, rep = solved_scenario
    pos = check_ccr_preservation(plant, F, G, d, traj.gains, grid, tol=1e-8)
    neg = check_ccr_preservation_negative(plant, F, G, d, traj.gains, grid,
                                          defect=1e-3, floor=1e-4)
    report(1, "CCR preservation", pos.passed and neg.passed,
           f"drift {pos.residual:.2e} <= 1e-8; "
           f"perturbed drift {neg.context['observed']:.2e} > 1e-4")


def test_criterion_02_pr_residuals():
    rng = np.random.default_rng(2024)
    dims = cq.Dimensions(n=2, m1=2, m2=2, p1=2, p2=2, r=2)
    draws = 1000
    plant = cq.make_pr_plant(dims, rng.uniform(-1, 1, (2, 2)),
                             np.eye(2) + 0.3 * rng.uniform(-1, 1, (2, 2)),
                             rng.uniform(-1, 1, (2, 2)), np.eye(2),
                             np.array([[0.0, 1.0], [-1.0, 0.0]]), nodes=draws)
    r = rng.uniform(-1, 1, (draws, 2, 2))
    params = cq.ControllerParams(dims=dims, b=rng.uniform(-1, 1, (draws, 2, 2)),
                                 e=rng.uniform(-1, 1, (draws, 2, 2)),
                                 R=(r + r.transpose(0, 2, 1)) / 2,
                                 d=np.eye(2))
    ctrl = cq.realize_controller(params, plant)
    worst = 0.0
    for k in range(draws):
        res = cq.validate_controller_pr(ctrl.a[k], ctrl.b[k], ctrl.c[k],
                                        ctrl.e[k], ctrl.d, plant.D[k],
                                        dims.j0, dims.j1, dims.j2, tol=1e-12)
        assert res["pass"]
        worst = max(worst, res["res1"], res["res2"])
    report(2, "PR residuals over 1000 draws", worst < 1e-11,
           f"worst residual {worst:.2e}")


def test_criterion_03_operator_algebra():
    rng = np.random.default_rng(3)
    worst_adj = worst_vec = worst_rt = worst_sym = 0.0
    psd_min = np.inf
    for trial in range(200):
        grade = 1 + trial % 3
        pairs = tuple((rng.standard_normal((3, 3)), rng.standard_normal((2, 2)))
                      for _ in range(grade))
        op = GradeROperator(pairs)
        x = rng.standard_normal((3, 2))
        y = rng.standard_normal((3, 2))
        lhs = cq.frobenius(op.apply(x), y)
        rhs = cq.frobenius(x, op.adjoint().apply(y))
        worst_adj = max(worst_adj, abs(lhs - rhs) / (1.0 + abs(lhs)))
        gamma = op.to_matrix()
        worst_vec = max(worst_vec, np.linalg.norm(
            cq.vectorize(op.apply(x)) - gamma @ cq.vectorize(x)))
        if np.linalg.cond(gamma) < 1e10:
            back = op.solve(op.apply(x), mode="exact")
            worst_rt = max(worst_rt, np.linalg.norm(back - x)
                           / (1.0 + np.linalg.norm(x)))
        # spectral symmetry for antisymmetric pairs
        a = rng.standard_normal((4, 4))
        b = rng.standard_normal((3, 3))
        anti = GradeROperator((((a - a.T) / 2, (b - b.T) / 2),))
        _, eigs = anti.definiteness()
        worst_sym = max(worst_sym, np.linalg.norm(
            np.sort(eigs) + np.sort(-eigs)[::-1]))
        psd = GradeROperator(((a @ a.T, b @ b.T),))
        psd_min = min(psd_min, psd.definiteness()[1][0])
    ok = (worst_adj < 1e-9 and worst_vec < 1e-9 and worst_rt < 1e-9
          and worst_sym < 1e-10 and psd_min >= -1e-12)
    report(3, "operator algebra", ok,
           f"adjoint {worst_adj:.1e}, vec {worst_vec:.1e}, round-trip "
           f"{worst_rt:.1e}, spectral symmetry {worst_sym:.1e}, "
           f"PSD min eig {psd_min:.1e}")


def test_criterion_04_gain_optimality(solved_scenario):
    dims, plant, F, G, d, P0, grid, traj, rep = solved_scenario
    z = np.zeros((2, 2))
    worst_grad = 0.0
    for k in range(1, grid.N):
        node = PlantNode.from_plant(plant, k)
        u = (traj.gains.b[k], traj.gains.e[k], traj.gains.R[k])
        pi0 = control_hamiltonian(traj.P[k], u, traj.Q[k], node, F, G, d, dims)
        for which in (0, 1):
            target = u[which]
            for idx in np.ndindex(target.shape):
                delta = 1e-4 * (1.0 + abs(target[idx]))
                up = [u[0].copy(), u[1].copy(), u[2]]
                dn = [u[0].copy(), u[1].copy(), u[2]]
                up[which][idx] += delta
                dn[which][idx] -= delta
                hi = control_hamiltonian(traj.P[k], tuple(up), traj.Q[k],
                                         node, F, G, d, dims)
                lo = control_hamiltonian(traj.P[k], tuple(dn), traj.Q[k],
                                         node, F, G, d, dims)
                worst_grad = max(worst_grad,
                                 abs(hi - lo) / (2 * delta) / (1 + abs(pi0)))
    # 200 random perturbations at a node with definite operators
    k = grid.N // 2
    blocks = BlockView.from_pq(traj.P[k], traj.Q[k])
    node = PlantNode.from_plant(plant, k)
    pair = optimal_gains(blocks, node, F, G, d, dims, mode="pseudo")
    assert pair.m_min_eig > 0 and pair.n_min_eig > 0
    pi_star = control_hamiltonian(traj.P[k], (pair.b, pair.e, z), traj.Q[k],
                                  node, F, G, d, dims)
    rng = np.random.default_rng(4)
    decreases = 0
    for _ in range(200):
        db = 1e-3 * rng.standard_normal((2, 2)) * (1 + np.abs(pair.b))
        de = 1e-3 * rng.standard_normal((2, 2)) * (1 + np.abs(pair.e))
        pi = control_hamiltonian(traj.P[k], (pair.b + db, pair.e + de, z),
                                 traj.Q[k], node, F, G, d, dims)
        if pi < pi_star - 1e-12 * (1 + abs(pi_star)):
            decreases += 1
    report(4, "gain optimality", worst_grad < 1e-6 and decreases == 0,
           f"max FD gradient {worst_grad:.2e} < 1e-6; "
           f"{decreases}/200 perturbations decreased Pi")


def test_criterion_05_quasi_separation_and_r_independence(solved_scenario):
    dims, plant, F, G, d, P0, grid, traj, rep = solved_scenario
    rng = np.random.default_rng(5)
    k = grid.N // 2
    blocks = BlockView.from_pq(traj.P[k], traj.Q[k])
    node = PlantNode.from_plant(plant, k)
    e_ref = cq.gain_e(blocks, node, dims.j1, dims.j0, mode="pseudo")
    b_ref = cq.gain_b(blocks, node, F, G, d, dims.j0, dims.j2, mode="pseudo")
    # perturb every N-side input: e must not move
    node_n = PlantNode(A=node.A, B=node.B, C=node.C, D=node.D,
                       E=node.E + rng.uniform(-1, 1, (2, 2)))
    e_new = cq.gain_e(blocks, node_n, dims.j1, dims.j0, mode="pseudo")
    sep_e = np.abs(e_new - e_ref).max()
    # perturb every M-side input: b must not move
    node_m = PlantNode(A=node.A, B=node.B + rng.uniform(-1, 1, (2, 2)),
                       C=node.C + rng.uniform(-1, 1, (2, 2)), D=node.D,
                       E=node.E)
    b_new = cq.gain_b(blocks, node_m, F, G, d, dims.j0, dims.j2, mode="pseudo")
    sep_b = np.abs(b_new - b_ref).max()
    r_res = check_r_independence(blocks, node, F, G, d, dims, seed=5,
                                 draws=10, tol=1e-9)
    ok = sep_e <= 1e-12 and sep_b <= 1e-12 and r_res.passed
    report(5, "quasi-separation and R-independence", ok,
           f"gain shifts {sep_e:.1e}/{sep_b:.1e} <= 1e-12; "
           f"Pi spread over R {r_res.residual:.2e} < 1e-9")


def test_criterion_06_bvp_convergence():
    details = []
    ok = True
    for seed in ACCEPTANCE_SEEDS:
        dims, plant, F, G, d, P0 = build_scenario(seed)
        start = time.perf_counter()
        traj, rep = cq.solve_cqlqg(plant, F, G, d, P0, GRID,
                                   cq.SolverConfig(max_iterations=200,
                                                   gain_tolerance=1e-8))
        elapsed = time.perf_counter() - start
        zero = cq.ControllerParams.zero(dims, GRID.nodes, d)
        baseline, _ = cq.evaluate_candidate(plant, F, G, d, zero, P0, GRID)
        good = (rep.converged and rep.iterations <= 200
                and rep.final_gain_delta <= 1e-8
                and rep.cost <= baseline and elapsed < 60.0)
        ok = ok and good
        details.append(f"seed {seed}: it={rep.iterations} "
                       f"cost={rep.cost:.4f}<={baseline:.4f} {elapsed:.1f}s")
    report(6, "BVP convergence on 5 scenarios", ok, "; ".join(details))


def test_criterion_07_skew_hamiltonian_hankelian():
    worst = 0.0
    for seed in ACCEPTANCE_SEEDS:
        dims, plant, F, G, d, P0 = build_scenario(seed)
        traj, rep = cq.solve_cqlqg(plant, F, G, d, P0, GRID,
                                   cq.SolverConfig(max_iterations=200))
        assert rep.converged
        res = check_skew_hamiltonian_h22(traj, dims.j0, tol=1e-6)
        worst = max(worst, res.residual)
    report(7, "skew-Hamiltonian Hankelian block", worst <= 1e-6,
           f"max relative Hamiltonian part {worst:.2e} <= 1e-6")


def test_criterion_08_symplectic_invariance(solved_scenario):
    dims, plant, F, G, d, P0, grid, traj, rep = solved_scenario
    worst_cost = 0.0
    worst_block = 0.0
    for i in range(10):
        res = check_symplectic_invariance(plant, F, G, d, traj.gains, P0,
                                          grid, seed=800 + i, tol=1e-7)
        worst_cost = max(worst_cost, res.residual)
        sigma = cq.random_symplectic(800 + i, dims.n, 0.2)
        s = np.eye(4)
        s[2:, 2:] = sigma
        moved = s @ P0 @ s.T
        for x, y in zip(vshape_block_invariants(P0, dims.j0),
                        vshape_block_invariants(moved, dims.j0)):
            worst_block = max(worst_block, np.linalg.norm(x - y)
                              / (1.0 + np.linalg.norm(x)))
    ok = worst_cost <= 1e-7 and worst_block <= 1e-10
    report(8, "symplectic invariance", ok,
           f"cost mismatch {worst_cost:.2e} <= 1e-7 over 10 draws; "
           f"block invariants {worst_block:.2e} <= 1e-10")


def test_criterion_09_hankelian_derivative_identity(solved_scenario):
    dims, plant, F, G, d, P0, grid, traj, rep = solved_scenario
    res = check_hankelian_identity(plant, F, G, d, traj.gains, P0, grid)
    report(9, "Hankelian derivative identity", res.passed,
           f"step-halving error ratio {res.context['ratio']:.2f} "
           f"(order two is 4)")


def test_criterion_10_appendix_pde_structure():
    ok = True
    details = []
    for n in (2, 4):
        results = check_appendix_a(seed=99 + n, n=n, tol=1e-6,
                                   neg_floor=1e-2)
        worst = max(r.residual for r in results if "negative" not in r.name)
        neg = [r for r in results if "negative" in r.name][0]
        ok = ok and all(r.passed for r in results)
        details.append(f"n={n}: worst residual {worst:.1e}, "
                       f"negative control {neg.context['observed']:.1e}")
    report(10, "PDE solution structure", ok, "; ".join(details))


def test_criterion_11_integrator_order():
    rng = np.random.default_rng(11)
    from test_dynamics import constant_loop
    A = rng.uniform(-1, 1, (4, 4)) - np.eye(4)
    B = rng.uniform(-1, 1, (4, 4))
    C = rng.uniform(-1, 1, (4, 4))
    P0 = np.eye(4)

    def p_err(N):
        ref = integrate_p(constant_loop(A, B, C, 8 * N + 1), P0,
                          TimeGrid(1.0, 8 * N))
        val = integrate_p(constant_loop(A, B, C, N + 1), P0, TimeGrid(1.0, N))
        return np.linalg.norm(val[-1] - ref[-1])

    def q_err(N):
        ref = integrate_q(constant_loop(A, B, C, 8 * N + 1), TimeGrid(1.0, 8 * N))
        val = integrate_q(constant_loop(A, B, C, N + 1), TimeGrid(1.0, N))
        return np.linalg.norm(val[0] - ref[0])

    rp = p_err(25) / p_err(50)
    rq = q_err(25) / q_err(50)
    ok = 12.0 <= rp <= 20.0 and 12.0 <= rq <= 20.0
    report(11, "integrator order", ok,
           f"step-halving ratios P {rp:.1f}, Q {rq:.1f} in [12, 20]")


def test_criterion_12_hje_consistency(solved_scenario):
    dims, plant, F, G, d, P0, grid, traj, rep = solved_scenario
    z = np.zeros((2, 2))
    worst = 0.0
    for k in range(1, grid.N):
        blocks = BlockView.from_pq(traj.P[k], traj.Q[k])
        node = PlantNode.from_plant(plant, k)
        pair = optimal_gains(blocks, node, F, G, d, dims, mode="pseudo")
        mh = minimized_hamiltonian(blocks, node, F, G, d, dims, mode="pseudo")
        ch = control_hamiltonian(traj.P[k], (pair.b, pair.e, z), traj.Q[k],
                                 node, F, G, d, dims)
        worst = max(worst, abs(mh - ch) / (1.0 + abs(ch)))
    report(12, "HJE consistency", worst <= 1e-8,
           f"max relative mismatch {worst:.2e} <= 1e-8 at interior nodes")
