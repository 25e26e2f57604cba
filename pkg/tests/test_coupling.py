import numpy as np
import pytest

from projrecon import (
    ConfigError,
    candidate_support,
    coupling_from_json,
    coupling_marginal,
    coupling_to_json,
    critical_grid,
    diagonal_coupling,
    independent_coupling,
    measure_from_coupling,
    measures_equal,
    new_discrete_measure,
    pushforward,
    sample_coupling,
    sample_stack,
    weight_polytope_uniqueness,
    weight_vector_feasible,
)


def _critical_instance(seed=0, n=3):
    rng = np.random.default_rng(seed)
    Z = new_discrete_measure(rng.standard_normal((n, 2)), np.full(n, 1.0 / n))
    stack = sample_stack(2, [1, 1], "gaussian", seed=seed + 1)
    support = candidate_support(Z, stack)
    grid = critical_grid(support, n, 2)
    return Z, stack, support, grid


def test_independent_singleton():
    c = independent_coupling([1.0], 3)
    assert c.entries.shape == (1,)
    assert c.entries[0] == 1.0


def test_independent_uniform_two_atoms():
    c = independent_coupling([0.5, 0.5], 2)
    assert np.allclose(c.entries, 0.25)
    for axis in range(2):
        assert np.allclose(coupling_marginal(c, axis), [0.5, 0.5])


def test_independent_entries_and_marginals():
    b = np.array([0.2, 0.3, 0.5])
    c = independent_coupling(b, 2)
    t = c.tensor()
    assert abs(t[1, 2] - 0.15) < 1e-15  # 0.3 * 0.5
    assert np.allclose(t.sum(axis=1), b)
    assert np.allclose(t.sum(axis=0), b)


def test_diagonal_coupling():
    c = diagonal_coupling([0.5, 0.5], 2)
    t = c.tensor()
    assert t[0, 0] == 0.5 and t[1, 1] == 0.5
    assert t[0, 1] == 0.0 and t[1, 0] == 0.0
    c3 = diagonal_coupling([0.2, 0.8], 3)
    for axis in range(3):
        assert np.allclose(coupling_marginal(c3, axis), [0.2, 0.8], atol=1e-12)


def test_diagonal_coupling_reconstructs_original_measure():
    Z, _, _, grid = _critical_instance(seed=2)
    c = diagonal_coupling(Z.weights, 2)
    m = measure_from_coupling(c, grid)
    assert measures_equal(m, Z, 1e-7)


def test_sample_coupling_zero_steps_is_independent():
    b = [0.2, 0.3, 0.5]
    assert np.array_equal(sample_coupling(b, 2, seed=4, steps=0).entries,
                          independent_coupling(b, 2).entries)


def test_sample_coupling_preserves_marginals():
    rng = np.random.default_rng(0)
    for trial in range(20):
        n, p = int(rng.integers(2, 5)), int(rng.integers(2, 4))
        b = rng.dirichlet(np.ones(n))
        c = sample_coupling(b, p, seed=trial, steps=200)
        assert float(np.min(c.entries)) >= 0.0
        assert abs(float(np.sum(c.entries)) - 1.0) < 1e-12
        for axis in range(p):
            assert np.max(np.abs(coupling_marginal(c, axis) - b)) < 1e-10


def test_single_exchange_move_is_marginal_exact():
    # one move against the untouched product tensor, per-axis identity
    for seed in range(20):
        b = np.random.default_rng(seed).dirichlet(np.ones(3))
        base = independent_coupling(b, 3)
        moved = sample_coupling(b, 3, seed=seed, steps=1)
        for axis in range(3):
            before = coupling_marginal(base, axis)
            after = coupling_marginal(moved, axis)
            assert np.max(np.abs(after - before)) < 1e-12


def test_uniform_weights_feasible_on_uniform_grid():
    # with uniform original weights, the uniform reweighting of the full
    # critical grid satisfies every marginal constraint
    Z, stack, support, _ = _critical_instance(seed=11)
    k = len(support.points)
    assert weight_vector_feasible(support, Z, stack, np.full(k, 1.0 / k))


def test_sample_coupling_explores_polytope():
    b = [0.5, 0.5]
    values = set()
    for seed in range(100):
        c = sample_coupling(b, 2, seed=seed, steps=50)
        values.add(round(float(c.entries[0]), 6))
    assert len(values) > 10  # entries move well beyond the independent 0.25


def test_coupling_pushforward_equivalence():
    # any polytope member reweighting the grid reproduces every pushforward
    Z, stack, _, grid = _critical_instance(seed=5)
    for seed in range(5):
        c = sample_coupling(Z.weights, 2, seed=seed, steps=100)
        gamma = measure_from_coupling(c, grid)
        for block in stack.blocks:
            assert measures_equal(pushforward(gamma, block), pushforward(Z, block), 1e-9)


def test_weight_uniqueness_supercritical():
    rng = np.random.default_rng(8)
    Z = new_discrete_measure(rng.standard_normal((5, 3)), rng.dirichlet(np.ones(5)))
    stack = sample_stack(3, [2, 2], "gaussian", seed=21)
    support = candidate_support(Z, stack)
    assert len(support.points) == 5
    unique, witness = weight_polytope_uniqueness(support, Z, stack)
    assert unique
    # candidates are the original atoms, so the witness is the original weights
    locations = np.array([cp.location for cp in support.points])
    order = np.lexsort(locations.T[::-1])
    assert np.allclose(witness[order], Z.weights, atol=1e-8)


def test_weight_uniqueness_fails_on_critical_grid():
    Z, stack, support, _ = _critical_instance(seed=3)
    assert len(support.points) == 9
    unique, witness = weight_polytope_uniqueness(support, Z, stack)
    assert not unique
    assert witness is not None
    assert weight_vector_feasible(support, Z, stack, witness)


def test_weight_uniqueness_single_atom():
    Z = new_discrete_measure([(0.3, -0.2)], [1.0])
    stack = sample_stack(2, [1, 1], "gaussian", seed=2)
    support = candidate_support(Z, stack)
    assert len(support.points) == 1
    unique, witness = weight_polytope_uniqueness(support, Z, stack)
    assert unique
    assert np.allclose(witness, [1.0])


def test_weight_vector_feasible_rejects_wrong_weights():
    Z, stack, support, _ = _critical_instance(seed=6)
    bad = np.zeros(len(support.points))
    bad[0] = 1.0
    assert not weight_vector_feasible(support, Z, stack, bad)


def test_budget_and_validation():
    with pytest.raises(ConfigError):
        independent_coupling([0.5, 0.6], 2)  # not a probability vector
    with pytest.raises(ConfigError):
        sample_coupling([1.0], 2, seed=0)  # needs n >= 2


def test_empty_polytope_raises_infeasible():
    from projrecon import CandidateSupport, InfeasibleError

    # dropping grid points that must carry mass empties the polytope
    Z, stack, support, _ = _critical_instance(seed=7)
    truncated = CandidateSupport(support.points[:2], support.regime, ())
    with pytest.raises(InfeasibleError):
        weight_polytope_uniqueness(truncated, Z, stack)


def test_coupling_json_roundtrip():
    c = sample_coupling([0.2, 0.8], 3, seed=9, steps=40)
    again = coupling_from_json(coupling_to_json(c))
    assert again.n == c.n and again.p == c.p
    assert np.array_equal(again.entries, c.entries)
