import json
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qaoa_lsc.qubo import (
    BRUTE_FORCE_MAX_N,
    InstanceError,
    PortfolioInstance,
    QuboMatrix,
    all_bitstrings,
    bits_to_index,
    brute_force_optimum,
    build_qubo,
    enumerate_feasible,
    format_bitstring,
    generate_instance,
    qubo_energy,
    qubo_to_ising,
    random_search,
    shipped_instances,
    simulated_annealing,
)


def penalty_only(n=2, k=1, p=1.0):
    return PortfolioInstance(n, k, np.zeros(n), np.zeros((n, n)), 0.0, p)


def double_loop_energy(q, offset, x):
    total = offset
    for i in range(len(x)):
        for j in range(len(x)):
            total += q[i][j] * x[i] * x[j]
    return total


def test_generate_is_deterministic():
    a = generate_instance(2, 1, "low", 7)
    b = generate_instance(2, 1, "low", 7)
    assert a.to_dict() == b.to_dict()


def test_high_volatility_has_more_offdiagonal_mass():
    lo = generate_instance(8, 4, "low", 1).sigma_mat
    hi = generate_instance(8, 4, "high", 1).sigma_mat
    off = ~np.eye(8, dtype=bool)
    assert np.abs(hi[off]).sum() > np.abs(lo[off]).sum()
    assert np.allclose(hi[off], 2 * lo[off])


@pytest.mark.parametrize("n,k,vol,seed", [(6, 3, "low", 1), (8, 4, "high", 1), (5, 2, "low", 9)])
def test_penalty_dominates_objective(n, k, vol, seed):
    inst = generate_instance(n, k, vol, seed)
    fmax = max(abs(inst.objective(x)) for x in all_bitstrings(n))
    assert inst.penalty > fmax
    sigma_eigs = np.linalg.eigvalsh(inst.sigma_mat)
    assert sigma_eigs.min() >= -1e-9


@pytest.mark.parametrize("n,k", [(1, 0), (4, 0), (4, 4), (3, 5)])
def test_generate_rejects_bad_nk(n, k):
    with pytest.raises(InstanceError):
        generate_instance(n, k)


def test_build_qubo_hand_expansion():
    Q = build_qubo(penalty_only())
    assert np.allclose(np.diag(Q.q), [-1, -1])
    assert Q.q[0, 1] == Q.q[1, 0] == 1
    assert Q.offset == 1


def test_qubo_energy_matches_penalized_objective_everywhere():
    inst = generate_instance(7, 3, "high", 4)
    Q = build_qubo(inst)
    for x in all_bitstrings(7):
        expected = inst.objective(x) + inst.penalty * (x.sum() - inst.k) ** 2
        assert qubo_energy(Q, x) == pytest.approx(expected, abs=1e-9)


def test_qubo_energy_against_double_loop(six_var):
    q = six_var.Q.q.tolist()
    for x in all_bitstrings(6):
        assert qubo_energy(six_var.Q, x) == pytest.approx(double_loop_energy(q, six_var.Q.offset, x.tolist()), abs=1e-12)


def test_qubo_energy_constant_and_length_check():
    Q = QuboMatrix(np.zeros((3, 3)), 5.0)
    assert qubo_energy(Q, np.array([1, 0, 1])) == 5.0
    with pytest.raises(ValueError):
        qubo_energy(Q, np.array([1, 0]))


def test_feasible_energy_equals_objective(six_var):
    inst = six_var.inst
    feas = enumerate_feasible(6, 3)
    best = min(feas, key=inst.objective)
    assert qubo_energy(six_var.Q, best) == pytest.approx(inst.objective(best), abs=1e-9)


def test_ising_hand_examples():
    H = qubo_to_ising(QuboMatrix([[1.0]], 0.0))
    assert H.h == pytest.approx([-0.5])
    assert H.constant == pytest.approx(0.5)

    H = qubo_to_ising(QuboMatrix([[0.0, 1.0], [1.0, 0.0]], 0.0))
    assert H.j[0, 1] == pytest.approx(0.5)
    assert H.h == pytest.approx([-0.5, -0.5])
    assert H.constant == pytest.approx(0.5)


def test_ising_matches_qubo_exhaustively(rng):
    a = rng.normal(size=(6, 6))
    Q = QuboMatrix(a + a.T, 1.7)
    H = qubo_to_ising(Q)
    for x in all_bitstrings(6):
        assert H.energy(x) == pytest.approx(qubo_energy(Q, x), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(2, 8),
    seed=st.integers(0, 10_000),
    vol=st.sampled_from(["low", "high"]),
    data=st.data(),
)
def test_ising_round_trip_property(n, seed, vol, data):
    k = data.draw(st.integers(1, n - 1))
    Q = build_qubo(generate_instance(n, k, vol, seed))
    H = qubo_to_ising(Q)
    X = all_bitstrings(n)
    spin = np.array([H.energy(x) for x in X])
    binary = np.array([qubo_energy(Q, x) for x in X])
    assert np.max(np.abs(spin - binary)) < 1e-9


def test_brute_force_ties_pick_lowest_index():
    x, e = brute_force_optimum(QuboMatrix(np.zeros((4, 4)), 0.0))
    assert x.tolist() == [0, 0, 0, 0] and e == 0.0

    x, e = brute_force_optimum(build_qubo(penalty_only()))
    # minimizers are 01 (index 1) and 10 (index 2); energies by enumeration
    energies = {format_bitstring(b): qubo_energy(build_qubo(penalty_only()), b) for b in all_bitstrings(2)}
    assert energies == {"00": 1.0, "01": 0.0, "10": 0.0, "11": 1.0}
    assert format_bitstring(x) == "01" and bits_to_index(x) == 1
    assert e == 0.0


def test_brute_force_cap():
    with pytest.raises(ValueError):
        brute_force_optimum(QuboMatrix(np.zeros((BRUTE_FORCE_MAX_N + 1,) * 2)))


@pytest.mark.parametrize("n,k,vol,seed", [(6, 3, "low", 1), (8, 4, "low", 1), (8, 4, "high", 1), (7, 2, "high", 5)])
def test_brute_force_minimizer_is_feasible(n, k, vol, seed):
    Q = build_qubo(generate_instance(n, k, vol, seed))
    x, e = brute_force_optimum(Q)
    assert x.sum() == k
    assert e == min(qubo_energy(Q, b) for b in all_bitstrings(n))


@given(c=st.floats(0.01, 100.0), seed=st.integers(0, 1000))
@settings(max_examples=30, deadline=None)
def test_brute_force_argmin_invariant_under_positive_rescaling(c, seed):
    Q = build_qubo(generate_instance(5, 2, "low", seed))
    x, e = brute_force_optimum(Q)
    xc, ec = brute_force_optimum(Q.scaled(c))
    assert np.array_equal(x, xc)
    assert ec == pytest.approx(c * e, rel=1e-9, abs=1e-12)


def test_enumerate_feasible_counts():
    assert len(enumerate_feasible(6, 3)) == 20
    assert len(enumerate_feasible(8, 4)) == 70
    assert [format_bitstring(x) for x in enumerate_feasible(2, 1)] == ["01", "10"]
    idx = [bits_to_index(x) for x in enumerate_feasible(6, 3)]
    assert idx == sorted(idx)
    assert 20 / 64 == 0.3125 and round(70 / 256, 4) == 0.2734
    assert all(x.sum() == 3 for x in enumerate_feasible(6, 3))
    assert len(enumerate_feasible(9, 4)) == comb(9, 4)


def test_simulated_annealing_trivial_and_deterministic(six_var):
    x, e = simulated_annealing(QuboMatrix(np.zeros((3, 3))), sweeps=5, seed=0)
    assert e == 0.0
    assert simulated_annealing(six_var.Q, 200, 4)[1] == simulated_annealing(six_var.Q, 200, 4)[1]


@pytest.mark.parametrize("idx,sweeps", [(0, 1000), (1, 2000), (2, 2000)])
def test_simulated_annealing_finds_optimum(shipped, idx, sweeps):
    p = shipped[idx]
    _, e_star = brute_force_optimum(p.Q)
    _, e = simulated_annealing(p.Q, sweeps, seed=0)
    assert e == e_star


def test_random_search(six_var):
    assert random_search(QuboMatrix(np.zeros((3, 3)), 2.5), samples=1, seed=0)[1] == 2.5
    _, e_star = brute_force_optimum(six_var.Q)
    assert random_search(six_var.Q, 10_000, seed=3)[1] == e_star

    Q4 = build_qubo(generate_instance(4, 2, "low", 3))
    x, e = random_search(Q4, 4**4, seed=0)
    assert e <= brute_force_optimum(Q4)[1]


def test_instance_json_round_trip(tmp_path):
    inst = generate_instance(6, 3, "high", 2, label="x")
    path = tmp_path / "inst.json"
    inst.save(path)
    d = json.loads(path.read_text())
    assert set(d) == {"label", "n", "k", "mu", "sigma", "risk_aversion", "penalty", "seed"}
    back = PortfolioInstance.load(path)
    assert back.to_dict() == inst.to_dict()


def test_shipped_instances_shape():
    insts = shipped_instances()
    assert [(i.n, i.k) for i in insts] == [(6, 3), (8, 4), (8, 4)]
