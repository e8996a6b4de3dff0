import numpy as np
import pytest

import synprune as sp
from synprune.tests.helpers import (
    random_mask, random_network, redundant_by_enumeration)


class TestSimilarity:
    def setup_method(self, method):
        self.arch = sp.Architecture([3, 3, 1])

    def mask(self, conns):
        return sp.ConnectionMask.from_connections(self.arch, conns)

    def test_examples(self):
        a = self.mask([(0, 0, 0), (0, 1, 1)])
        b = self.mask([(0, 0, 0), (0, 2, 2)])
        assert sp.mask_similarity(a, a) == 1.0
        assert sp.mask_similarity(a, b) == 1 / 3.0
        assert sp.mask_similarity(a, self.mask([(1, 0, 0)])) == 0.0
        assert sp.mask_similarity(self.mask([]), self.mask([])) == 1.0

    def test_overlap(self):
        a = self.mask([(0, 0, 0), (0, 1, 1)])
        b = self.mask([(0, 0, 0)])
        assert sp.mask_similarity(a, b, 'overlap') == 1.0
        assert sp.mask_similarity(a, b, 'jaccard') == 0.5
        with pytest.raises(ValueError):
            sp.mask_similarity(a, b, 'cosine')

    def test_mismatch(self):
        other = sp.ConnectionMask.full(sp.Architecture([3, 2, 1]))
        with pytest.raises(ValueError):
            sp.mask_similarity(self.mask([]), other)

    def test_matrix(self):
        rng = np.random.default_rng(0)
        masks = [random_mask([4, 4, 2], rng) for _ in range(3)]
        matrix = sp.similarity_matrix(masks, ['a', 'b', 'c'])
        values = matrix.values
        assert matrix.dims == ('run', 'other')
        assert matrix.attrs['metric'] == 'jaccard'
        assert np.array_equal(values, values.T)
        assert np.all(np.diag(values) == 1)
        for i in range(3):
            for j in range(3):
                if i != j:
                    assert values[i, j] == sp.mask_similarity(masks[i],
                                                              masks[j])
        assert float(matrix.sel(run='a', other='b')) == values[0, 1]

    def test_matrix_identical(self):
        m = self.mask([(0, 1, 2)])
        assert np.array_equal(sp.similarity_matrix([m, m.copy()],
                                                   ['x', 'y']).values,
                              np.ones((2, 2)))

    def test_matrix_errors(self):
        with pytest.raises(ValueError):
            sp.similarity_matrix([self.mask([])], ['x'])
        with pytest.raises(ValueError):
            sp.similarity_matrix([self.mask([]), self.mask([])], ['x'])


class TestRedundancy:
    def test_hidden_only(self):
        arch = sp.Architecture([2, 3, 3, 1])
        mask = sp.ConnectionMask.from_connections(arch, [(1, 0, 1)])
        assert sp.find_redundant(mask, arch) == [(1, 0, 1)]

    def test_dangling_chain(self):
        arch = sp.Architecture([2, 2, 2, 1])
        mask = sp.ConnectionMask.from_connections(arch, [(0, 0, 0),
                                                         (2, 1, 0)])
        assert sp.find_redundant(mask, arch) == [(0, 0, 0), (2, 1, 0)]
        assert sp.dag_prune(mask, arch).enabled_count == 0

    def test_walk_mask(self):
        arch = sp.Architecture()
        mask = sp.init_subnetwork_mask(arch, 3)
        assert sp.find_redundant(mask, arch) == []
        assert sp.dag_prune(mask, arch) == mask

    def test_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(300):
            widths = [int(w) for w in rng.integers(1, 7, 3)] + [1]
            mask = random_mask(widths, rng, density=float(rng.random()))
            arch = sp.Architecture(widths)
            redundant = sp.find_redundant(mask, arch)
            assert redundant == redundant_by_enumeration(mask, widths)
            pruned = sp.dag_prune(mask, arch)
            assert pruned.connections() == sorted(
                set(mask.connections()) - set(redundant))
            assert sp.dag_prune(pruned, arch) == pruned
            assert sp.find_redundant(pruned, arch) == []

    def test_mismatch(self):
        mask = sp.ConnectionMask.full(sp.Architecture([2, 2, 1]))
        with pytest.raises(ValueError):
            sp.find_redundant(mask, sp.Architecture([2, 3, 1]))


class TestDagPruneNetwork:
    @pytest.fixture(autouse=True, params=[0, 1, 2])
    def setup(self, request):
        self.rng = np.random.default_rng(request.param)

    def test_zero_bias_exact(self):
        for _ in range(200):
            widths = [int(w) for w in self.rng.integers(1, 7, 3)] + [1]
            net = random_network(widths, self.rng, density=0.4,
                                 bias_scale=0.0)
            pruned, removed = sp.dag_prune_network(net)
            assert removed == sp.find_redundant(net.mask, net.architecture)
            assert pruned.is_consistent()
            x = self.rng.normal(size=(8, widths[0]))
            assert np.array_equal(sp.forward(net, x)[1],
                                  sp.forward(pruned, x)[1])

    def test_biased_close(self):
        for _ in range(200):
            widths = [int(w) for w in self.rng.integers(1, 7, 3)] + [1]
            net = random_network(widths, self.rng, density=0.4)
            pruned, removed = sp.dag_prune_network(net)
            x = self.rng.normal(size=(8, widths[0]))
            assert np.allclose(sp.forward(net, x)[1],
                               sp.forward(pruned, x)[1], rtol=0, atol=1e-12)
            assert pruned.mask == sp.dag_prune(net.mask, net.architecture)

    def test_original_untouched(self):
        net = random_network([4, 4, 4, 1], self.rng, density=0.3)
        before = net.copy()
        sp.dag_prune_network(net)
        assert net.mask == before.mask
        for a, b in zip(net.biases, before.biases):
            assert np.array_equal(a, b)
