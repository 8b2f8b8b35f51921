import itertools

import numpy as np
import pytest

from pmbo.multiindex import total_degree_set
from pmbo.sampling import (
    GeneratingNodes,
    SeedConfig,
    chebyshev_seed,
    leja_chebyshev_nodes,
    node_for_index,
    random_uniform_points,
    sobol_points,
)

BITS = 32


def sobol_2d_oracle(n):
    """Gray-code Sobol for dims 1-2 from the Joe-Kuo primitive data (d=2: s=1, a=0, m1=1)."""
    m1 = [1] * BITS
    m2 = [1]
    for _ in range(1, BITS):
        m2.append((2 * m2[-1]) ^ m2[-1])
    v = [[m1[k] << (BITS - 1 - k) for k in range(BITS)], [m2[k] << (BITS - 1 - k) for k in range(BITS)]]
    x = [0, 0]
    out = [(0.0, 0.0)]
    for i in range(1, n):
        c = 0
        j = i - 1
        while j & 1:
            j >>= 1
            c += 1
        x = [x[d] ^ v[d][c] for d in range(2)]
        out.append((x[0] / 2**BITS, x[1] / 2**BITS))
    return np.array(out)


class TestLeja:
    def test_small_cases(self):
        assert leja_chebyshev_nodes(0).nodes.tolist() == [0.0]
        assert np.allclose(leja_chebyshev_nodes(2).nodes, [1, -1, 0], atol=1e-15)
        assert np.allclose(leja_chebyshev_nodes(4).nodes[:3], [1, -1, 0], atol=1e-15)

    def test_greedy_rule_by_brute_force(self):
        # recompute the greedy product rule directly from the Lobatto points
        for K in (3, 6, 9, 16):
            pts = sorted(np.cos(np.pi * np.arange(K + 1) / K))
            order = [1.0]
            rest = [p for p in pts if abs(p - 1.0) > 1e-12]
            while rest:
                scores = [np.prod([abs(p - q) for q in order]) for p in rest]
                best = max(scores)
                pick = min(p for p, s in zip(rest, scores) if s >= best * (1 - 1e-9))
                order.append(pick)
                rest.remove(pick)
            assert np.allclose(leja_chebyshev_nodes(K).nodes, order, atol=1e-12)

    def test_default_nodes_distinct_in_cube(self):
        g = leja_chebyshev_nodes(127).nodes
        assert len(g) == 128 and len(np.unique(g)) == 128
        assert np.all(np.abs(g) <= 1.0)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            leja_chebyshev_nodes(-1)


class TestNodeForIndex:
    def test_examples(self):
        g2 = leja_chebyshev_nodes(2)
        assert node_for_index((0, 0), g2).tolist() == [1.0, 1.0]
        assert np.allclose(node_for_index((1, 2), g2), [-1, 0], atol=1e-15)
        assert node_for_index((0,), leja_chebyshev_nodes(0)).tolist() == [0.0]

    def test_rejects_large_exponent(self):
        with pytest.raises(ValueError):
            node_for_index((3, 0), leja_chebyshev_nodes(2))

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_injective(self, m):
        g = leja_chebyshev_nodes(4)
        imgs = {tuple(node_for_index(a, g)) for a in itertools.product(range(5), repeat=m)}
        assert len(imgs) == 5 ** m


class TestSeeds:
    def test_random(self):
        assert random_uniform_points(3, 0, 1).shape == (0, 3)
        P = random_uniform_points(2, 50, 0)
        assert P.shape == (50, 2) and np.all(np.abs(P) <= 1)
        assert np.array_equal(P, random_uniform_points(2, 50, 0))

    def test_sobol_matches_oracle(self):
        ref = 2.0 * sobol_2d_oracle(65)[1:] - 1.0
        assert np.array_equal(sobol_points(2, 64), ref)
        assert sobol_points(2, 1).tolist() == [[0.0, 0.0]]

    def test_sobol_properties(self):
        P = sobol_points(6, 50)
        assert P.shape == (50, 6) and np.all(np.abs(P) <= 1)
        assert np.array_equal(P, sobol_points(6, 50))
        Q = sobol_points(2, 4)
        assert len({tuple(q) for q in Q}) == 4
        assert sobol_points(3, 0).shape == (0, 3)

    @pytest.mark.parametrize("m", [0, 17])
    def test_sobol_rejects_dimension(self, m):
        with pytest.raises(ValueError):
            sobol_points(m, 4)

    def test_chebyshev_seed(self):
        g2 = leja_chebyshev_nodes(2)
        assert np.allclose(chebyshev_seed(1, 3, g2), [[1], [-1], [0]], atol=1e-15)
        assert chebyshev_seed(2, 1, g2).tolist() == [[1.0, 1.0]]
        expected = [node_for_index(a, g2) for a in [(0, 0), (0, 1), (1, 0)]]
        assert np.array_equal(chebyshev_seed(2, 3, g2), np.array(expected))
        with pytest.raises(ValueError):
            chebyshev_seed(1, 4, g2)

    def test_chebyshev_seed_covers_total_degree_nodes(self):
        g = leja_chebyshev_nodes(127)
        P = chebyshev_seed(3, 50, g)
        assert len({tuple(p) for p in P}) == 50
        A = total_degree_set(3, 3)
        nodes = {tuple(node_for_index(a, g)) for a in A}
        assert nodes <= {tuple(p) for p in P}

    def test_seed_config_validation(self):
        with pytest.raises(ValueError):
            SeedConfig("latin", 50, 0)
        with pytest.raises(ValueError):
            SeedConfig("random", 0, 0)


def test_generating_nodes_are_read_only():
    g = GeneratingNodes([1.0, -1.0])
    with pytest.raises(ValueError):
        g.nodes[0] = 3.0
