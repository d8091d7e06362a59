import numpy as np
import pytest
from hypothesis import given, settings

from mwrc.distribution import conditional_entropy, entropy, identical, independent_bits, validate
from mwrc.errors import EmptySubset, WeightOutOfRange
from mwrc.imeasure import (
    AtomTable,
    compute_atoms,
    conditional_from_atoms,
    entropy_from_atoms,
    oracle_atoms,
    weight_extrema,
)
from mwrc.subsets import full_mask, members, popcount

from corpus import dirichlet_pmf
from oracles import brute_entropy
from test_distribution import pmfs


def brute_atoms(pmf):
    """Linear-system solve on entropies from the outcome-walking oracle."""
    n = (1 << pmf.L) - 1
    masks = np.arange(1, n + 1)
    A = ((masks[:, None] & masks[None, :]) != 0).astype(float)
    h = np.array([brute_entropy(pmf, members(S)) for S in masks])
    return np.concatenate([[0.0], np.linalg.solve(A, h)])


class TestComputeAtoms:
    def test_independent(self):
        pmf = independent_bits(4)
        atoms = compute_atoms(pmf)
        assert len(atoms) == 15
        for K, v in atoms.items():
            expected = entropy(pmf, K) if popcount(K) == 1 else 0.0
            assert v == pytest.approx(expected, abs=1e-12)

    def test_xor_triple(self, xor):
        atoms = compute_atoms(xor)
        expected = brute_atoms(xor)
        # frozen from the oracle: pairs 1, triple -1, singletons 0
        assert expected[[3, 5, 6]] == pytest.approx([1.0, 1.0, 1.0], abs=1e-12)
        assert expected[7] == pytest.approx(-1.0, abs=1e-12)
        assert expected[[1, 2, 4]] == pytest.approx([0.0, 0.0, 0.0], abs=1e-12)
        assert atoms.values == pytest.approx(expected, abs=1e-12)

    def test_identical_triple(self, ident):
        atoms = compute_atoms(ident)
        assert atoms[0b111] == pytest.approx(1.0, abs=1e-12)
        for K, v in atoms.items():
            if K != 0b111:
                assert v == pytest.approx(0.0, abs=1e-12)

    def test_remark_example_is_conditional_mi(self):
        # mu(a({1,2})) for L=4 equals I(W1;W2|W3,W4)
        pmf = dirichlet_pmf(np.random.default_rng(5), 4)
        cmi = (
            conditional_entropy(pmf, 0b0001, 0b1100)
            + conditional_entropy(pmf, 0b0010, 0b1100)
            - conditional_entropy(pmf, 0b0011, 0b1100)
        )
        assert compute_atoms(pmf)[0b0011] == pytest.approx(cmi, abs=1e-12)


class TestOracle:
    def test_independent_pair(self):
        assert oracle_atoms(independent_bits(2))[0b11] == pytest.approx(0.0, abs=1e-12)

    def test_xor_triple(self, xor):
        assert oracle_atoms(xor)[0b111] == pytest.approx(-1.0, abs=1e-12)

    @pytest.mark.parametrize("L", [2, 3, 4, 5])
    def test_equivalence(self, L):
        rng = np.random.default_rng(100 + L)
        for _ in range(20):
            pmf = dirichlet_pmf(rng, L)
            assert compute_atoms(pmf).values == pytest.approx(oracle_atoms(pmf).values, abs=1e-10)

    def test_brute_route_agrees(self):
        rng = np.random.default_rng(9)
        for L in (3, 4):
            pmf = dirichlet_pmf(rng, L)
            assert compute_atoms(pmf).values[1:] == pytest.approx(brute_atoms(pmf)[1:], abs=1e-10)


class TestIdentities:
    @settings(max_examples=50, deadline=None)
    @given(pmfs())
    def test_reconstruction_and_conditionals(self, pmf):
        atoms = compute_atoms(pmf)
        full = full_mask(pmf.L)
        for S in range(1, full + 1):
            assert entropy_from_atoms(atoms, S) == pytest.approx(entropy(pmf, S), abs=1e-9)
            assert conditional_from_atoms(atoms, S) == pytest.approx(
                conditional_entropy(pmf, S, full & ~S), abs=1e-9
            )

    @settings(max_examples=50, deadline=None)
    @given(pmfs())
    def test_low_weight_atoms_nonnegative(self, pmf):
        for K, v in compute_atoms(pmf).items():
            if popcount(K) <= 2:
                assert v >= -1e-9

    def test_conditional_examples(self, xor, ident):
        assert conditional_from_atoms(compute_atoms(xor), 0b011) == pytest.approx(1.0, abs=1e-12)
        assert conditional_from_atoms(compute_atoms(ident), 0b011) == pytest.approx(0.0, abs=1e-12)
        pmf = independent_bits(3)
        assert conditional_from_atoms(compute_atoms(pmf), 0b001) == pytest.approx(entropy(pmf, 1))

    def test_empty(self, xor):
        with pytest.raises(EmptySubset):
            conditional_from_atoms(compute_atoms(xor), 0)


class TestExtrema:
    def test_xor(self, xor):
        atoms = compute_atoms(xor)
        assert weight_extrema(atoms, 2) == pytest.approx((1.0, 1.0), abs=1e-12)
        assert weight_extrema(atoms, 1) == pytest.approx((0.0, 0.0), abs=1e-12)

    def test_independent(self):
        assert weight_extrema(compute_atoms(independent_bits(3)), 2) == pytest.approx((0.0, 0.0), abs=1e-12)

    @pytest.mark.parametrize("K", [0, 3])
    def test_range(self, xor, K):
        with pytest.raises(WeightOutOfRange):
            weight_extrema(compute_atoms(xor), K)


def test_synthetic_table():
    atoms = AtomTable.from_mapping(3, {0b011: 0.3, 0b101: 0.1})
    assert atoms[0b011] == 0.3 and atoms[0b110] == 0.0
    assert len(atoms) == 7


def test_max_users_tractable():
    pmf = validate(np.full(1 << 12, 1 / (1 << 12)), [2] * 12)
    atoms = compute_atoms(pmf)
    assert atoms[1] == pytest.approx(1.0, abs=1e-9)
    assert weight_extrema(atoms, 2) == pytest.approx((0.0, 0.0), abs=1e-9)
