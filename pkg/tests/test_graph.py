import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvlab.graph import (
    ABSORBING_FLAGGED,
    GraphValidationError,
    build_from_conductance,
    build_from_kernel,
    ball,
    bfs_distances,
    distance,
    random_conductance_graph,
    truncate,
    two_vertex_graph,
    validate,
    volume,
    z_non_h2_graph,
)
from curvlab.groups import CayleyOracle, GroupSpec, generate_cayley
from curvlab.operators import gamma2, gamma_sq, laplacian


def test_two_vertex_graph():
    g = build_from_kernel([("a", 1.0), ("b", 1.0)], [("a", "b", 1.0, 1.0)])
    assert g.alpha == 1.0
    assert validate(g).ok


def test_path_with_reversible_measure():
    g = build_from_kernel(
        [("a", 1.0), ("b", 2.0), ("c", 1.0)],
        [("a", "b", 1.0, 0.5), ("b", "c", 0.5, 1.0)],
    )
    rep = validate(g)
    assert g.alpha == 0.5
    assert rep.reversibility_residual_max == 0.0


def test_path_with_wrong_measure_is_rejected():
    with pytest.raises(GraphValidationError) as e:
        build_from_kernel(
            [("a", 1.0), ("b", 1.0), ("c", 1.0)],
            [("a", "b", 1.0, 0.5), ("b", "c", 0.5, 1.0)],
        )
    assert e.value.kind == "reversibility"
    assert set(e.value.record) == {"a", "b"}


def test_markov_row_sum_violation():
    with pytest.raises(GraphValidationError) as e:
        build_from_kernel([("a", 1.0), ("b", 1.0)], [("a", "b", 0.5, 0.5)])
    assert e.value.kind == "markov"


def test_unnormalized_mode_skips_row_sums():
    g = build_from_kernel([("a", 1.0), ("b", 1.0)], [("a", "b", 0.5, 0.5)], mode="unnormalized")
    assert g.alpha == 0.5


def test_disconnected_graph_is_rejected():
    with pytest.raises(GraphValidationError) as e:
        build_from_conductance([("a", "b", 1.0), ("c", "d", 1.0)])
    assert e.value.kind == "disconnected"


def test_empty_neighbor_list_is_rejected():
    with pytest.raises(GraphValidationError) as e:
        build_from_kernel([("a", 1.0), ("b", 1.0), ("c", 1.0)], [("a", "b", 1.0, 1.0)])
    assert e.value.kind == "isolated"


def test_alpha_assertion_checked():
    with pytest.raises(GraphValidationError):
        build_from_kernel([("a", 1.0), ("b", 1.0)], [("a", "b", 1.0, 1.0)], alpha=0.5)


def test_four_cycle_conductances():
    g = build_from_conductance([("0", "1", 1), ("1", "2", 1), ("2", "3", 1), ("3", "0", 1)])
    assert np.all(g.weights == 0.5)
    assert np.all(g.mu == 2.0)
    assert g.alpha == 0.5


def test_star_conductances():
    g = build_from_conductance([("c", "x", 1), ("c", "y", 1), ("c", "z", 1)])
    c = g.vertex("c")
    assert np.allclose(g.neighbor_weights(c), 1 / 3)
    for leaf in "xyz":
        assert g.neighbor_weights(leaf).tolist() == [1.0]
    assert g.alpha == pytest.approx(1 / 3)


def test_isolated_conductance_vertex():
    with pytest.raises(GraphValidationError):
        build_from_conductance([("a", "b", 1.0)], vertices=["a", "b", "c"])


@pytest.mark.parametrize("radius", [5, 10, 20])
def test_z_example_without_bounded_d_mu(radius):
    g = z_non_h2_graph(radius)
    rep = validate(g)
    assert rep.ok
    assert g.alpha == 0.5
    # row sum at i is (sum of incident conductances) / mu(i), computed directly
    def w(i, j):
        return 1.0 if 0 in (i, j) else 1.0 / (i * j)

    sums = []
    for i in range(-radius, radius + 1):
        mu = 1.0 if i == 0 else float(i) ** -4
        tot = sum(w(min(i, j), max(i, j)) for j in (i - 1, i + 1) if abs(j) <= radius)
        sums.append(tot / mu)
    assert rep.d_mu_sup == pytest.approx(max(sums), rel=1e-12)
    assert not rep.measure_ratio_ok


def test_z_example_d_mu_grows():
    sups = [validate(z_non_h2_graph(r)).d_mu_sup for r in (5, 10, 20, 40)]
    assert all(b > 3 * a for a, b in zip(sups, sups[1:]))


@given(st.integers(0, 500))
@settings(max_examples=40, deadline=None)
def test_conductance_graphs_validate(seed):
    g = random_conductance_graph(seed=seed, max_vertices=25)
    rep = validate(g)
    assert rep.ok
    assert rep.reversibility_residual_max <= 4 * np.finfo(float).eps
    assert rep.markov_residual_max <= 1e-12
    assert rep.valence_bound_ok
    assert rep.max_valence <= math.floor(1 / g.alpha + 1e-12)
    assert rep.measure_ratio_ok


def test_canonical_order_is_bfs_then_label():
    g = build_from_conductance([("b", "a", 1), ("a", "c", 1), ("c", "d", 1)])
    assert g.labels == ("b", "a", "c", "d")


# ---------------------------------------------------------------------------
# Cayley


def test_cyclic_five():
    g = generate_cayley(GroupSpec.cyclic(5))
    assert g.n == 5
    assert np.all(g.weights == 0.5) and np.all(g.mu == 2.0)
    assert distance(g, "0", "2") == 2
    assert distance(g, "0", "3") == 2


def test_symmetric_three():
    g = generate_cayley(GroupSpec.symmetric(3))
    assert g.n == 6
    assert np.all(g.valence() == 3)
    # bipartite: even and odd permutations alternate
    d = bfs_distances(g, 0)
    for x, y in zip(g.edge_rows, g.indices):
        assert (d[x] + d[y]) % 2 == 1


def test_lattice_ball_count():
    g = generate_cayley(GroupSpec.integer_lattice(2), radius=6)
    assert g.n == 2 * 36 + 2 * 6 + 1


def test_markov_cayley_rows_are_uniform():
    for spec in (GroupSpec.torus(2, 5), GroupSpec.symmetric(4), GroupSpec.cyclic(7)):
        g = generate_cayley(spec)
        k = len(g.cayley.generator_names)
        assert np.all(g.valence() == k)
        assert np.all(g.weights == 1.0 / k)


def test_torus_mod_two_deduplicates_generators():
    g = generate_cayley(GroupSpec.torus(2, 2))
    assert len(g.cayley.generator_names) == 2
    assert validate(g).ok


def test_generator_errors():
    with pytest.raises(ValueError, match="identity"):
        generate_cayley(GroupSpec.custom_abelian([(0, 0), (1, 0), (-1, 0)]))
    with pytest.raises(ValueError, match="symmetric"):
        generate_cayley(GroupSpec.custom_abelian([(1, 0), (0, 1), (0, -1)]))
    with pytest.raises(ValueError, match="radius"):
        generate_cayley(GroupSpec.integer_lattice(1))


def test_custom_abelian_on_torus():
    g = generate_cayley(GroupSpec.custom_abelian([(1, 1), (-1, -1), (1, 0), (-1, 0)], modulus=5))
    assert g.n == 25
    assert validate(g).ok


# ---------------------------------------------------------------------------
# metric


def test_distance_ball_volume_basics():
    g = random_conductance_graph(seed=4)
    for x in range(g.n):
        assert distance(g, x, x) == 0
        assert ball(g, x, 0).tolist() == [x]
        assert volume(g, x, 0) == g.mu[x]


def test_lattice_one_volumes():
    g = generate_cayley(GroupSpec.integer_lattice(1), radius=10)
    assert volume(g, "0", 2) == 10
    assert volume(g, "0", 4) == 18


@given(st.integers(0, 300), st.data())
@settings(max_examples=30, deadline=None)
def test_distance_is_a_metric(seed, data):
    g = random_conductance_graph(seed=seed, max_vertices=20)
    D = np.array([bfs_distances(g, v) for v in range(g.n)])
    assert np.array_equal(D, D.T)
    x, y, z = (data.draw(st.integers(0, g.n - 1)) for _ in range(3))
    assert D[x, z] <= D[x, y] + D[y, z]


# ---------------------------------------------------------------------------
# truncation


def test_truncation_of_small_graph_is_identity():
    g = random_conductance_graph(seed=2, n_vertices=12)
    tr = truncate(g, 0, 50)
    h = tr.graph
    assert h.n == g.n
    order = [h.vertex(lab) for lab in g.labels]
    assert np.allclose(h.kernel.toarray()[np.ix_(order, order)], g.kernel.toarray())


def test_reflecting_lattice_truncation():
    tr = truncate(CayleyOracle(GroupSpec.integer_lattice(1)), (0,), 10)
    g = tr.graph
    for lab in ("10", "-10"):
        assert g.p(lab, lab) == 0.5
    assert np.all(g.row_sums == 1.0)
    assert g.stochastic


def test_absorbing_lattice_truncation():
    tr = truncate(CayleyOracle(GroupSpec.integer_lattice(1)), (0,), 10, boundary_mode=ABSORBING_FLAGGED)
    g = tr.graph
    assert g.row_sums[g.vertex("10")] == 0.5
    assert g.row_sums[g.vertex("-10")] == 0.5
    assert not g.stochastic


def test_margin_larger_than_radius():
    with pytest.raises(ValueError):
        truncate(two_vertex_graph(), 0, 1, margin=2)


def test_trusted_interior_operators_match():
    big = generate_cayley(GroupSpec.torus(2, 15))
    tr = truncate(big, 0, 5, margin=2)
    rng = np.random.default_rng(0)
    f_big = rng.standard_normal(big.n)
    idx = np.array([big.vertex(lab) for lab in tr.graph.labels])
    f_small = f_big[idx]
    for op in (laplacian, gamma_sq, gamma2):
        a = op(big, f_big)[idx][tr.trusted]
        b = op(tr.graph, f_small)[tr.trusted]
        assert np.array_equal(a, b) or np.max(np.abs(a - b)) <= 1e-14 * max(1, np.max(np.abs(a)))
