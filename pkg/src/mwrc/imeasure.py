"""Signed I-measure of the atoms of the information diagram.

Atom ``a(K)`` for a nonempty user set ``K`` has measure equal to the mutual
information among ``{W_i : i in K}`` conditioned on the remaining users.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping

import numpy as np

from .distribution import JointPmf
from .errors import EmptySubset, ShapeMismatch, SingularSystem, WeightOutOfRange
from .subsets import full_mask, nonempty, of_weight, popcount, submasks


@dataclass(frozen=True, eq=False)
class AtomTable:
    """mu*(a(K)) in bits for every nonempty mask K; ``values[0]`` is unused."""

    L: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.values.shape != (1 << self.L,):
            raise ShapeMismatch(f"need {1 << self.L} slots for L={self.L}")
        self.values.setflags(write=False)

    @classmethod
    def from_mapping(cls, L: int, mu: Mapping[int, float]) -> "AtomTable":
        """Synthetic table; atoms not listed are zero."""
        vals = np.zeros(1 << L)
        for K, v in mu.items():
            if not 0 < K <= full_mask(L):
                raise ShapeMismatch(f"mask {K} is not a nonempty subset of {{1..{L}}}")
            vals[K] = v
        return cls(L, vals)

    def __getitem__(self, K: int) -> float:
        if K == 0:
            raise EmptySubset("no atom for the empty set")
        return float(self.values[K])

    def __len__(self) -> int:
        return (1 << self.L) - 1

    def items(self) -> Iterator[tuple[int, float]]:
        for K in nonempty(self.L):
            yield K, float(self.values[K])


def compute_atoms(pmf: JointPmf) -> AtomTable:
    """Atoms from the alternating sum of conditional entropies.

    mu*(a(K)) = sum over nonempty T in K of (-1)^(|T|+1) H(W_T | W_{K^c}).
    """
    L = pmf.L
    h = pmf.subset_entropies
    full = full_mask(L)
    vals = np.zeros(1 << L)
    for K in nonempty(L):
        rest = full & ~K
        acc = 0.0
        for T in submasks(K):
            sign = 1.0 if popcount(T) % 2 else -1.0
            acc += sign * (h[T | rest] - h[rest])
        vals[K] = acc
    return AtomTable(L, vals)


def oracle_atoms(pmf: JointPmf) -> AtomTable:
    """Atoms by solving sum_{K: K & S != 0} mu(K) = H(W_S) over all nonempty S."""
    L = pmf.L
    n = (1 << L) - 1
    masks = np.arange(1, n + 1)
    A = ((masks[:, None] & masks[None, :]) != 0).astype(float)
    b = np.asarray(pmf.subset_entropies[1:], dtype=float)
    try:
        mu = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - system is nonsingular
        raise SingularSystem(str(exc)) from exc
    vals = np.zeros(1 << L)
    vals[1:] = mu
    return AtomTable(L, vals)


def conditional_from_atoms(atoms: AtomTable, S: int) -> float:
    """H(W_S | W_{S^c}) as the total measure of the atoms inside S."""
    if S == 0:
        raise EmptySubset("subset must be nonempty")
    return float(sum(atoms.values[K] for K in submasks(S)))


def entropy_from_atoms(atoms: AtomTable, S: int) -> float:
    """H(W_S) as the total measure of atoms meeting S."""
    if S == 0:
        raise EmptySubset("subset must be nonempty")
    return float(sum(v for K, v in atoms.items() if K & S))


def weight_extrema(atoms: AtomTable, K: int) -> tuple[float, float]:
    """(largest, smallest) measure among atoms of weight ``K``."""
    if not 1 <= K <= atoms.L - 1:
        raise WeightOutOfRange(f"weight {K} outside 1..{atoms.L - 1}")
    vals = [atoms.values[s] for s in of_weight(atoms.L, K)]
    return float(max(vals)), float(min(vals))
