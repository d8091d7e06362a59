"""Source-coding rates, the channel region and the achievable-rate threshold.

The rate assignment gives every atom of weight 1..L-1 a signed share in each
user's rate; the region checks compare those rates (or any other tuple)
against the Slepian-Wolf-type constraints and the finite-field MWRC
capacity region.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import log2
from typing import Sequence

import numpy as np

from .distribution import JointPmf, PMF_TOL, conditional_entropy
from .errors import (
    DegenerateChannel,
    InconsistentRates,
    NegativeProbability,
    ParameterOutOfRange,
    ShapeMismatch,
    SumNotOne,
    WeightOutOfRange,
)
from .imeasure import AtomTable
from .lp import phase1
from .subsets import full_mask, members, popcount, strict_nonempty

RATE_TOL = 1e-9
KAPPA_SEARCH_SPAN = 64.0
KAPPA_SEARCH_TOL = 1e-6


# ---------------------------------------------------------------- channel

def _is_prime_power(q: int) -> bool:
    if q < 2:
        return False
    p = 2
    while p * p <= q:
        if q % p == 0:
            while q % p == 0:
                q //= p
            return q == 1
        p += 1
    return True


def _check_noise(p: Sequence[float], q: int, name: str) -> np.ndarray:
    arr = np.asarray(p, dtype=float).reshape(-1)
    if arr.size != q:
        raise ShapeMismatch(f"{name} has {arr.size} entries, field has {q} elements")
    if np.any(arr < 0):
        raise NegativeProbability(f"{name} has a negative entry")
    if abs(float(arr.sum()) - 1.0) > PMF_TOL:
        raise SumNotOne(f"{name} sums to {float(arr.sum())!r}")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def _entropy_bits(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    """Finite-field MWRC: field order plus relay and per-user noise pmfs."""

    q: int
    noise_relay: np.ndarray
    noise_users: tuple[np.ndarray, ...]

    def __init__(self, q: int, noise_relay: Sequence[float], noise_users: Sequence[Sequence[float]]):
        q = int(q)
        if not _is_prime_power(q):
            raise ParameterOutOfRange(f"field order {q} is not a prime power")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "noise_relay", _check_noise(noise_relay, q, "noise_relay"))
        users = tuple(
            _check_noise(p, q, f"noise_users[{i}]") for i, p in enumerate(noise_users)
        )
        if len(users) < 2:
            raise ShapeMismatch("need noise pmfs for at least 2 users")
        object.__setattr__(self, "noise_users", users)

    @classmethod
    def noiseless(cls, q: int, L: int) -> "ChannelSpec":
        point = [1.0] + [0.0] * (q - 1)
        return cls(q, point, [point] * L)

    @property
    def L(self) -> int:
        return len(self.noise_users)

    @property
    def relay_entropy(self) -> float:
        return _entropy_bits(self.noise_relay)

    @property
    def user_entropies(self) -> list[float]:
        return [_entropy_bits(p) for p in self.noise_users]

    def capacities(self) -> list[float]:
        """Per-user bound log2 q - max(H(N_0), H(N_i)) on the sum of the others' rates."""
        h0 = self.relay_entropy
        caps = [log2(self.q) - max(h0, hi) for hi in self.user_entropies]
        for i, c in enumerate(caps):
            if c <= PMF_TOL:
                raise DegenerateChannel(
                    f"user {i + 1}: log2 q - max(H(N_0), H(N_i)) = {c:.3g}, no positive rate"
                )
        return caps


# ------------------------------------------------------------------ rates

@dataclass(frozen=True)
class RateTuple:
    """Per-user source-coding rates in bits per source symbol.

    ``clamped`` lists (0-based) users whose tiny negative rate was set to 0;
    ``negative`` lists users whose rate is negative beyond tolerance (kept as
    computed so region checks can report it).
    """

    r: tuple[float, ...]
    clamped: tuple[int, ...] = ()
    negative: tuple[int, ...] = ()

    @classmethod
    def of(cls, values: Sequence[float]) -> "RateTuple":
        vals = []
        clamped = []
        negative = []
        for i, v in enumerate(values):
            v = float(v)
            if v < 0:
                if v >= -RATE_TOL:
                    clamped.append(i)
                    v = 0.0
                else:
                    negative.append(i)
            vals.append(v)
        return cls(tuple(vals), tuple(clamped), tuple(negative))

    def __len__(self) -> int:
        return len(self.r)

    def __getitem__(self, i: int) -> float:
        return self.r[i]

    @property
    def array(self) -> np.ndarray:
        return np.array(self.r)

    def require_nonnegative(self) -> "RateTuple":
        if self.negative:
            users = [i + 1 for i in self.negative]
            raise InconsistentRates(f"negative rates for users {users}: {self.r}")
        return self


def contribution(i: int, K: int, atoms: AtomTable) -> float:
    """Share of atom ``a(K)`` credited to user ``i`` (0-based)."""
    L = atoms.L
    k = popcount(K)
    if not 1 <= k <= L - 1:
        raise WeightOutOfRange(f"atom weight {k} outside 1..{L - 1}")
    if K >> i & 1:
        return (L - k) / (L - 1) * atoms[K]
    return -(k - 1) / (L - 1) * atoms[K]


def assign_rates(atoms: AtomTable) -> RateTuple:
    L = atoms.L
    r = [0.0] * L
    for K in strict_nonempty(L):
        for i in range(L):
            r[i] += contribution(i, K, atoms)
    return RateTuple.of(r)


@dataclass(frozen=True)
class SubsetRecord:
    S: int
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.lhs - self.rhs


@dataclass(frozen=True)
class RegionReport:
    L: int
    records: list[SubsetRecord] = field(default_factory=list)

    @property
    def c1_records(self) -> list[SubsetRecord]:
        return [rec for rec in self.records if popcount(rec.S) <= self.L - 2]

    @property
    def c2_records(self) -> list[SubsetRecord]:
        return [rec for rec in self.records if popcount(rec.S) == self.L - 1]

    @property
    def c1(self) -> bool:
        return all(rec.slack >= -RATE_TOL for rec in self.c1_records)

    @property
    def c2(self) -> bool:
        return all(abs(rec.slack) <= RATE_TOL for rec in self.c2_records)

    @property
    def in_region(self) -> bool:
        """Every Slepian-Wolf-type constraint holds (equality not required)."""
        return all(rec.slack >= -RATE_TOL for rec in self.records)


def check_conditions(pmf: JointPmf, r: RateTuple | Sequence[float]) -> RegionReport:
    L = pmf.L
    vals = r.r if isinstance(r, RateTuple) else tuple(float(v) for v in r)
    if len(vals) != L:
        raise ShapeMismatch(f"{len(vals)} rates for {L} users")
    full = full_mask(L)
    records = []
    for S in strict_nonempty(L):
        lhs = float(sum(vals[i] for i in members(S)))
        rhs = conditional_entropy(pmf, S, full & ~S)
        records.append(SubsetRecord(S, lhs, rhs))
    return RegionReport(L, records)


# --------------------------------------------------------- channel region

@dataclass(frozen=True)
class ChannelCheck:
    ok: bool
    slack: tuple[float, ...]


def channel_region_ok(R: Sequence[float], ch: ChannelSpec) -> ChannelCheck:
    """Does the channel-rate tuple ``R`` (bits per channel use) fit the region?"""
    R = [float(v) for v in R]
    if len(R) != ch.L:
        raise ShapeMismatch(f"{len(R)} rates for a {ch.L}-user channel")
    if any(v < 0 for v in R):
        raise ParameterOutOfRange("channel rates must be nonnegative")
    caps = ch.capacities()
    total = sum(R)
    slack = tuple(c - (total - R[i]) for i, c in enumerate(caps))
    return ChannelCheck(all(s >= -RATE_TOL for s in slack), slack)


def kappa_star(pmf: JointPmf, ch: ChannelSpec) -> float:
    """Smallest achievable channel uses per source symbol (for ABCMI sources)."""
    if pmf.L != ch.L:
        raise ShapeMismatch(f"source has {pmf.L} users, channel has {ch.L}")
    caps = ch.capacities()
    full = full_mask(pmf.L)
    best = 0.0
    for i in range(pmf.L):
        num = conditional_entropy(pmf, full & ~(1 << i), 1 << i)
        best = max(best, num / caps[i])
    return best


def required_kappa(r: Sequence[float], ch: ChannelSpec) -> float:
    """Smallest kappa for which R = r / kappa lies in the channel region."""
    caps = ch.capacities()
    total = float(sum(r))
    return max((total - float(r[i])) / caps[i] for i in range(len(caps)))


# ------------------------------------------------------------ intersection

@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    witness: RateTuple | None
    kappa: float


def region_constraints(pmf: JointPmf, ch: ChannelSpec, kappa: float):
    """(A_ub, b_ub, A_ge, b_ge) for the intersection polytope in r >= 0."""
    L = pmf.L
    full = full_mask(L)
    caps = ch.capacities()
    A_ge, b_ge = [], []
    for S in strict_nonempty(L):
        A_ge.append([1.0 if S >> i & 1 else 0.0 for i in range(L)])
        b_ge.append(conditional_entropy(pmf, S, full & ~S))
    A_ub, b_ub = [], []
    for i in range(L):
        A_ub.append([0.0 if j == i else 1.0 for j in range(L)])
        b_ub.append(kappa * caps[i])
    return np.array(A_ub), np.array(b_ub), np.array(A_ge), np.array(b_ge)


def intersection_feasible(pmf: JointPmf, ch: ChannelSpec, kappa: float) -> Feasibility:
    """Do the source region and the kappa-scaled channel region intersect?"""
    if not kappa > 0:
        raise ParameterOutOfRange(f"kappa must be positive, got {kappa}")
    if pmf.L != ch.L:
        raise ShapeMismatch(f"source has {pmf.L} users, channel has {ch.L}")
    cons = region_constraints(pmf, ch, kappa)
    res = phase1(*cons, tol=RATE_TOL)
    witness = None
    if res.feasible:
        # prefer a witness of the unrelaxed polytope when there is one
        exact = phase1(*cons, tol=0.0)
        witness = RateTuple.of((exact if exact.feasible else res).x)
    return Feasibility(res.feasible, witness, float(kappa))


def min_feasible_kappa(pmf: JointPmf, ch: ChannelSpec) -> float | None:
    """Bisection for the smallest kappa with a nonempty intersection.

    Searches [kappa*, kappa* + 64]; returns None when even the upper end is
    infeasible.  Useful for sources outside the ABCMI class.
    """
    lo = kappa_star(pmf, ch)
    hi = lo + KAPPA_SEARCH_SPAN
    if lo > 0 and intersection_feasible(pmf, ch, lo).feasible:
        return lo
    if not intersection_feasible(pmf, ch, hi).feasible:
        return None
    while hi - lo > KAPPA_SEARCH_TOL:
        mid = 0.5 * (lo + hi)
        if mid > 0 and intersection_feasible(pmf, ch, mid).feasible:
            hi = mid
        else:
            lo = mid
    return hi
