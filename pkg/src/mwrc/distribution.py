"""Joint source distributions: validation, subset entropies and sampling."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    EmptySubset,
    NegativeProbability,
    OverlappingSubsets,
    ShapeMismatch,
    SumNotOne,
    TooManyUsers,
)
from .subsets import full_mask, members

PMF_TOL = 1e-12
MAX_USERS = 12


@dataclass(frozen=True, eq=False)
class JointPmf:
    """Joint pmf of (W_1, ..., W_L) as a dense table.

    ``table`` has one axis per user (user 1 on axis 0) so that the flattened
    array is row-major with user 1 slowest.
    """

    table: np.ndarray = field(repr=False)

    @property
    def L(self) -> int:
        return self.table.ndim

    @property
    def alphabet_sizes(self) -> tuple[int, ...]:
        return tuple(self.table.shape)

    @property
    def probs(self) -> np.ndarray:
        return self.table.reshape(-1)

    def marginal(self, S: int) -> np.ndarray:
        """Marginal table over the users in ``S`` (axes kept in user order)."""
        keep = set(members(S))
        drop = tuple(a for a in range(self.L) if a not in keep)
        return self.table.sum(axis=drop) if drop else self.table

    @cached_property
    def subset_entropies(self) -> np.ndarray:
        """H(W_S) in bits for every mask S (index 0 holds 0.0)."""
        out = np.zeros(1 << self.L)
        for S in range(1, 1 << self.L):
            out[S] = _entropy_bits(self.marginal(S))
        out.setflags(write=False)
        return out


def _entropy_bits(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def validate(probs: Sequence[float] | np.ndarray, alphabet_sizes: Sequence[int]) -> JointPmf:
    """Check a flat probability table and wrap it as a :class:`JointPmf`."""
    sizes = [int(a) for a in alphabet_sizes]
    if len(sizes) < 2:
        raise ShapeMismatch(f"need at least 2 users, got {len(sizes)}")
    if len(sizes) > MAX_USERS:
        raise TooManyUsers(f"L={len(sizes)} exceeds the supported maximum {MAX_USERS}")
    if any(a < 1 for a in sizes):
        raise ShapeMismatch(f"alphabet sizes must be >= 1, got {sizes}")
    arr = np.asarray(probs, dtype=float).reshape(-1)
    expected = int(np.prod(sizes))
    if arr.size != expected:
        raise ShapeMismatch(
            f"probs has {arr.size} entries, alphabet sizes {sizes} need {expected}"
        )
    if not np.all(np.isfinite(arr)):
        raise ShapeMismatch("probs contains non-finite values")
    if np.any(arr < 0):
        k = int(np.argmin(arr))
        raise NegativeProbability(f"probs[{k}] = {arr[k]!r} is negative")
    total = float(arr.sum())
    if abs(total - 1.0) > PMF_TOL:
        raise SumNotOne(f"probabilities sum to {total!r}")
    table = arr.reshape(sizes).copy()
    table.setflags(write=False)
    return JointPmf(table)


def from_outcomes(outcomes: Mapping[tuple[int, ...], float], alphabet_sizes: Sequence[int]) -> JointPmf:
    """Build a pmf from a sparse ``{symbol tuple: probability}`` map."""
    sizes = [int(a) for a in alphabet_sizes]
    flat = np.zeros(int(np.prod(sizes)) if sizes else 0)
    for outcome, p in outcomes.items():
        if len(outcome) != len(sizes) or any(
            not 0 <= s < a for s, a in zip(outcome, sizes)
        ):
            raise ShapeMismatch(f"outcome {tuple(outcome)} outside alphabets {sizes}")
        flat[np.ravel_multi_index(tuple(outcome), sizes)] += p
    return validate(flat, sizes)


def _check_nonempty(S: int, L: int) -> None:
    if S == 0:
        raise EmptySubset("subset must be nonempty")
    if not 0 < S <= full_mask(L):
        raise ShapeMismatch(f"mask {S} is not a subset of {{1..{L}}}")


def entropy(pmf: JointPmf, S: int) -> float:
    """H(W_S) in bits."""
    _check_nonempty(S, pmf.L)
    return float(pmf.subset_entropies[S])


def conditional_entropy(pmf: JointPmf, S: int, T: int = 0) -> float:
    """H(W_S | W_T) = H(W_{S u T}) - H(W_T) in bits."""
    _check_nonempty(S, pmf.L)
    if S & T:
        raise OverlappingSubsets(f"masks {S} and {T} overlap")
    if T == 0:
        return entropy(pmf, S)
    h = pmf.subset_entropies
    return float(h[S | T] - h[T])


def sample(pmf: JointPmf, m: int, seed: int | np.random.SeedSequence | np.random.Generator) -> np.ndarray:
    """Draw ``m`` i.i.d. outcomes; returns an ``(m, L)`` array of symbol indices."""
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    flat = pmf.probs
    idx = rng.choice(flat.size, size=m, p=flat / flat.sum())
    return np.stack(np.unravel_index(idx, pmf.alphabet_sizes), axis=1).astype(np.int64)


# Fixtures used across the test-suite, CLI examples and README.

def xor_triple() -> JointPmf:
    """W1, W2 i.i.d. uniform bits and W3 = W1 xor W2."""
    return from_outcomes(
        {(a, b, a ^ b): 0.25 for a in (0, 1) for b in (0, 1)}, [2, 2, 2]
    )


def identical(L: int = 3) -> JointPmf:
    """W1 = ... = WL = one uniform bit."""
    return from_outcomes({(0,) * L: 0.5, (1,) * L: 0.5}, [2] * L)


def independent_bits(L: int = 3) -> JointPmf:
    n = 1 << L
    return validate(np.full(n, 1.0 / n), [2] * L)
