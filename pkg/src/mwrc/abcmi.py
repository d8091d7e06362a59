"""The almost-balanced conditional mutual information (ABCMI) test."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .errors import DivisionByZero, ParameterOutOfRange
from .imeasure import AtomTable, weight_extrema
from .subsets import of_weight

ABCMI_TOL = 1e-9


def _check_lsk(L: int, S: int, K: int) -> None:
    if not 2 <= K <= S <= L - 2:
        raise ParameterOutOfRange(f"need 2 <= K <= S <= L-2, got L={L}, S={S}, K={K}")


def alpha(L: int, S: int, K: int) -> int:
    _check_lsk(L, S, K)
    return S * comb(L - 1, K) - (S - K) * comb(S, K)


def beta(L: int, S: int, K: int) -> int:
    _check_lsk(L, S, K)
    return S * comb(L - 1, K) - (L - 1) * comb(S, K)


def weight_bound_exact(L: int, K: int) -> Fraction:
    """Multiplier on the smallest weight-K atom, as an exact rational."""
    if L < 3 or not 2 <= K <= L - 1:
        raise ParameterOutOfRange(f"need L >= 3 and 2 <= K <= L-1, got L={L}, K={K}")
    if K == L - 1:
        return 1 + Fraction(1, L - 2)
    ratios = []
    for S in range(K, L - 1):
        a = alpha(L, S, K)
        if a == 0:
            raise DivisionByZero(f"alpha({L},{S},{K}) = 0")
        ratios.append(Fraction(beta(L, S, K), a))
    return 1 + Fraction(1, K - 1) * min(ratios)


def weight_bound(L: int, K: int) -> float:
    return float(weight_bound_exact(L, K))


@dataclass(frozen=True)
class WeightRecord:
    K: int
    mu_max: float
    mu_min: float
    allowed_ratio_bound: float
    satisfied: bool
    negative_atom: bool

    @property
    def slack(self) -> float:
        """Non-negative when the weight-K inequality holds (before tolerance)."""
        return self.mu_min * self.allowed_ratio_bound - self.mu_max


@dataclass(frozen=True)
class AbcmiReport:
    L: int
    records: list[WeightRecord] = field(default_factory=list)

    @property
    def overall(self) -> bool:
        return all(r.satisfied for r in self.records)

    @property
    def negative_atom(self) -> bool:
        return any(r.negative_atom for r in self.records)


def check_abcmi(atoms: AtomTable) -> AbcmiReport:
    """Evaluate the ABCMI inequality for every weight 2..L-1.

    Signed atoms are evaluated literally; a weight whose atoms include a
    negative value is flagged with ``negative_atom``.  L = 2 passes vacuously.
    """
    L = atoms.L
    records = []
    for K in range(2, L):
        hi, lo = weight_extrema(atoms, K)
        bound = weight_bound(L, K)
        neg = any(atoms.values[s] < 0 for s in of_weight(L, K))
        records.append(
            WeightRecord(
                K=K,
                mu_max=hi,
                mu_min=lo,
                allowed_ratio_bound=bound,
                satisfied=hi <= lo * bound + ABCMI_TOL,
                negative_atom=neg,
            )
        )
    return AbcmiReport(L, records)
