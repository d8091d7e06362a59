"""Monte Carlo simulation of the dithered separate source-channel scheme.

Each trial draws ``m`` source tuples, bins every user's block, dithers the
bin indices, moves them across the relay and lets every user decode all
other blocks from the indices plus its own block.

Two transports are available:

``ideal-channel``
    The channel code is replaced by its guarantee: indices arrive intact
    when R = r / kappa lies in the finite-field MWRC capacity region, and
    the trial fails otherwise.
``symbol-level``
    A concrete but deliberately simple two-phase time-division exchange over
    the field: every user sends its index to the relay with a short random
    linear code, the relay decodes and re-broadcasts each index.  This is
    plumbing to exercise the channel model, not a capacity-achieving code.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Sequence

import numpy as np

from .distribution import JointPmf, sample
from .errors import (
    IndexOutOfRange,
    NotPrime,
    ParameterOutOfRange,
    ShapeMismatch,
    SymbolOutOfField,
    TractabilityExceeded,
)
from .imeasure import compute_atoms
from .rates import (
    ChannelSpec,
    RateTuple,
    assign_rates,
    channel_region_ok,
    required_kappa,
)

MODES = ("ideal-channel", "symbol-level")
MAX_BLOCK_SPACE = 1 << 20
MAX_DECODE_CANDIDATES = 1 << 20
SYMBOL_MAX_M = 12
SYMBOL_MAX_BINS = 1 << 16
TIE_TOL = 1e-9
_Z95 = NormalDist().inv_cdf(0.975)


def _mode(mode: str) -> str:
    aliases = {"ideal": "ideal-channel", "symbol": "symbol-level"}
    mode = aliases.get(mode, mode)
    if mode not in MODES:
        raise ParameterOutOfRange(f"unknown mode {mode!r}")
    return mode


def _is_prime(q: int) -> bool:
    return q >= 2 and all(q % p for p in range(2, math.isqrt(q) + 1))


# ------------------------------------------------------------------ channel

def channel_use(x: Sequence[int], ch: ChannelSpec, rng: np.random.Generator) -> tuple[int, list[int]]:
    """One use of the MWRC.  ``x[0]`` is the relay input, ``x[1:]`` the users'."""
    y0, y = channel_block(np.asarray(x[1:])[None, :], np.asarray([x[0]]), ch, rng)
    return int(y0[0]), [int(v) for v in y[0]]


def channel_block(
    x_users: np.ndarray, x_relay: np.ndarray, ch: ChannelSpec, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """``n`` channel uses at once.

    x_users is ``(n, L)``, x_relay is ``(n,)``.  Returns the relay outputs
    ``(n,)`` and user outputs ``(n, L)``.
    """
    q = ch.q
    if not _is_prime(q):
        raise NotPrime(f"simulation needs a prime field order, got {q}")
    x_users = np.asarray(x_users, dtype=np.int64)
    x_relay = np.asarray(x_relay, dtype=np.int64)
    if x_users.ndim != 2 or x_users.shape[1] != ch.L or x_relay.shape != (x_users.shape[0],):
        raise ShapeMismatch("channel inputs do not match the channel's user count")
    for arr in (x_users, x_relay):
        if arr.size and (arr.min() < 0 or arr.max() >= q):
            raise SymbolOutOfField(f"channel input outside GF({q})")
    n = x_users.shape[0]
    n0 = rng.choice(q, size=n, p=ch.noise_relay)
    y0 = (x_users.sum(axis=1) + n0) % q
    y = np.empty((n, ch.L), dtype=np.int64)
    for i, pmf in enumerate(ch.noise_users):
        y[:, i] = (x_relay + rng.choice(q, size=n, p=pmf)) % q
    return y0, y


# ----------------------------------------------------------------- binning

def bin_bits(rate: float, m: int) -> int:
    """ceil(m * rate) with a guard against floating noise just above an integer."""
    return max(0, math.ceil(m * rate - 1e-9))


def block_codes(blocks: np.ndarray, A: int) -> np.ndarray:
    """Lexicographic integer code of each row of ``blocks`` (first symbol most significant)."""
    blocks = np.atleast_2d(blocks)
    weights = A ** np.arange(blocks.shape[1] - 1, -1, -1, dtype=np.int64)
    return blocks.astype(np.int64) @ weights


def code_blocks(codes: np.ndarray, A: int, m: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    out = np.empty((codes.size, m), dtype=np.int64)
    rem = codes.copy()
    for t in range(m - 1, -1, -1):
        out[:, t] = rem % A
        rem //= A
    return out


class Binning:
    """Seeded random binning of every user's block space into equal-size bins.

    Each user's blocks are shuffled by a permutation drawn from
    ``(seed, user)`` and dealt round-robin into ``2**bits`` bins, so every
    block is uniformly likely to land in any bin while bin sizes differ by
    at most one.  Bin indices are 1-based.
    """

    def __init__(self, alphabet_sizes: Sequence[int], m: int, bits: Sequence[int], seed: int):
        self.alphabet_sizes = tuple(int(a) for a in alphabet_sizes)
        self.m = m
        self.bits = tuple(int(b) for b in bits)
        self.seed = int(seed)
        self.table = []
        for j, (A, b) in enumerate(zip(self.alphabet_sizes, self.bits)):
            space = A ** m
            if space > MAX_BLOCK_SPACE:
                raise TractabilityExceeded(
                    f"user {j + 1}: {A}^{m} blocks exceed {MAX_BLOCK_SPACE}"
                )
            perm = np.random.default_rng([self.seed, j]).permutation(space)
            self.table.append(perm % (1 << b) + 1)

    def n_bins(self, j: int) -> int:
        return 1 << self.bits[j]

    def encode(self, j: int, block: np.ndarray) -> int:
        code = int(block_codes(np.asarray(block)[None, :], self.alphabet_sizes[j])[0])
        return int(self.table[j][code])

    def members(self, j: int, index: int) -> np.ndarray:
        """Block codes of user ``j`` in bin ``index``, ascending."""
        return np.flatnonzero(self.table[j] == index)


def _rates_of(r: RateTuple | Sequence[float]) -> tuple[float, ...]:
    return r.r if isinstance(r, RateTuple) else tuple(float(v) for v in r)


def sw_encode(w: np.ndarray, i: int, r: RateTuple | Sequence[float], m: int, seed: int,
              alphabet_size: int) -> int:
    """Bin index (1-based) of user ``i``'s block (``i`` is 0-based).

    Agrees with :class:`Binning` built from the same seed, so decoders that
    hold the full binning see the same index.
    """
    w = np.asarray(w, dtype=np.int64)
    A = int(alphabet_size)
    rates = _rates_of(r)
    bits = [0] * len(rates)
    bits[i] = bin_bits(rates[i], m)
    sizes = [1] * len(rates)
    sizes[i] = A
    return Binning(sizes, m, bits, seed).encode(i, w)


# ------------------------------------------------------------------ dither

def apply_dither(index: int, dither: int, modulus: int) -> int:
    """Shift a 1-based index by ``dither`` modulo ``modulus``."""
    _check_index(index, dither, modulus)
    return (index - 1 + dither) % modulus + 1


def remove_dither(index: int, dither: int, modulus: int) -> int:
    _check_index(index, dither, modulus)
    return (index - 1 - dither) % modulus + 1


def _check_index(index: int, dither: int, modulus: int) -> None:
    if modulus < 1 or not 1 <= index <= modulus or not 0 <= dither < modulus:
        raise IndexOutOfRange(f"index {index}, dither {dither}, modulus {modulus}")


# ---------------------------------------------------------------- decoding

def _log_marginals(pmf: JointPmf) -> dict[int, np.ndarray]:
    out = {}
    with np.errstate(divide="ignore"):
        for S in range(1, 1 << pmf.L):
            out[S] = np.log2(pmf.marginal(S))
    return out


def decode_with_binning(
    binning: Binning,
    bins: dict[int, int],
    w_own: np.ndarray,
    i: int,
    pmf: JointPmf,
    logm: dict[int, np.ndarray] | None = None,
) -> dict[int, np.ndarray]:
    """Maximum joint-probability decoding of all blocks but user ``i``'s.

    Candidates are enumerated in lexicographic order of the tuple
    (block of the lowest other user first), partial tuples with zero
    marginal probability are pruned, and the first maximiser wins ties.
    """
    L = pmf.L
    m = binning.m
    logm = logm if logm is not None else _log_marginals(pmf)
    w_own = np.asarray(w_own, dtype=np.int64)
    others = [j for j in range(L) if j != i]

    blocks = {i: w_own[None, :]}
    mask = 1 << i
    score = np.zeros(1)
    for j in others:
        codes = binning.members(j, bins[j])
        if codes.size == 0:
            # corrupted index pointing at an empty bin: the index carries nothing
            codes = np.arange(binning.table[j].size)
        cand = code_blocks(codes, binning.alphabet_sizes[j], m)
        P, C = score.size, cand.shape[0]
        if P * C > MAX_DECODE_CANDIDATES:
            raise TractabilityExceeded(f"decoder {i + 1}: {P * C} candidate tuples")
        blocks = {u: np.repeat(b, C, axis=0) for u, b in blocks.items()}
        blocks[j] = np.tile(cand, (P, 1))
        mask |= 1 << j
        users = sorted(blocks)
        score = logm[mask][tuple(blocks[u] for u in users)].sum(axis=1)
        keep = np.isfinite(score)
        if not keep.any():
            # nothing has positive probability: fall back to the first tuple
            keep[:1] = True
        blocks = {u: b[keep] for u, b in blocks.items()}
        score = score[keep]

    best = np.flatnonzero(score >= score.max() - TIE_TOL)[0]
    return {j: blocks[j][best].copy() for j in others}


def sw_decode(
    bins: dict[int, int] | Sequence[int],
    w_own: np.ndarray,
    i: int,
    pmf: JointPmf,
    r: RateTuple | Sequence[float],
    m: int,
    seed: int,
) -> dict[int, np.ndarray]:
    """Decode the other users' blocks from their (undithered, 1-based) bin indices.

    ``bins`` maps 0-based user -> index, or is a length-L sequence whose entry
    for ``i`` is ignored.
    """
    if not isinstance(bins, dict):
        bins = {j: int(b) for j, b in enumerate(bins) if j != i}
    bits = [bin_bits(v, m) for v in _rates_of(r)]
    binning = Binning(pmf.alphabet_sizes, m, bits, seed)
    return decode_with_binning(binning, bins, w_own, i, pmf)


# ------------------------------------------------------ symbol-level relay

def _digits(values: np.ndarray, q: int, k: int) -> np.ndarray:
    out = np.empty((values.size, k), dtype=np.int64)
    rem = np.asarray(values, dtype=np.int64).copy()
    for t in range(k):
        out[:, t] = rem % q
        rem //= q
    return out


def _generator(k: int, n: int, q: int, rng: np.random.Generator) -> np.ndarray:
    """k x n generator: each column repeats one message symbol plus a random mix."""
    G = np.zeros((k, n), dtype=np.int64)
    if k == 0 or n == 0:
        return G
    cols = np.arange(n)
    G[cols % k, cols] = 1
    if n > k:
        G[:, k:] = (G[:, k:] + rng.integers(0, q, size=(k, n - k))) % q
    return G


def _ml_decode(y: np.ndarray, G: np.ndarray, n_msgs: int, q: int, log_noise: np.ndarray) -> int:
    msgs = np.arange(n_msgs)
    cw = (_digits(msgs, q, G.shape[0]) @ G) % q
    ll = log_noise[(y[None, :] - cw) % q].sum(axis=1)
    return int(np.flatnonzero(ll >= ll.max() - TIE_TOL)[0])


def _split(total: int, weights: Sequence[int]) -> list[int]:
    """Largest-remainder split of ``total`` uses in proportion to ``weights``."""
    wsum = sum(weights)
    if wsum == 0:
        return [0] * len(weights)
    raw = [total * w / wsum for w in weights]
    out = [int(math.floor(v)) for v in raw]
    order = sorted(range(len(weights)), key=lambda j: (-(raw[j] - out[j]), j))
    for j in order[: total - sum(out)]:
        out[j] += 1
    return out


def transport_symbols(
    indices: Sequence[int], n_bins: Sequence[int], n: int, ch: ChannelSpec, rng: np.random.Generator
) -> list[dict[int, int]]:
    """Move 1-based indices through the relay over ``n`` channel uses.

    Returns, for each user ``i``, its estimates of every other user's index.
    """
    q, L = ch.q, ch.L
    k = [0 if nb <= 1 else math.ceil(math.log(nb, q) - 1e-12) for nb in n_bins]
    n_up = n // 2
    up = _split(n_up, k)
    down = _split(n - n_up, k)
    with np.errstate(divide="ignore"):
        log_relay = np.log(ch.noise_relay)
        log_user = [np.log(p) for p in ch.noise_users]

    relay_est = list(indices)
    received: list[dict[int, int]] = [dict() for _ in range(L)]
    for j in range(L):
        if k[j] == 0:
            for i in range(L):
                if i != j:
                    received[i][j] = 1
            continue
        G_up = _generator(k[j], up[j], q, rng)
        G_down = _generator(k[j], down[j], q, rng)

        msg = _digits(np.array([indices[j] - 1]), q, k[j])
        x_users = np.zeros((up[j], L), dtype=np.int64)
        x_users[:, j] = (msg @ G_up)[0] % q
        y0, _ = channel_block(x_users, np.zeros(up[j], dtype=np.int64), ch, rng)
        relay_est[j] = _ml_decode(y0, G_up, n_bins[j], q, log_relay) + 1

        relay_msg = _digits(np.array([relay_est[j] - 1]), q, k[j])
        x_relay = (relay_msg @ G_down)[0] % q
        _, y = channel_block(np.zeros((down[j], L), dtype=np.int64), x_relay, ch, rng)
        for i in range(L):
            if i != j:
                received[i][j] = _ml_decode(y[:, i], G_down, n_bins[j], q, log_user[i]) + 1
    return received


# -------------------------------------------------------------- harness

@dataclass(frozen=True)
class SimConfig:
    m: int
    kappa: float
    trials: int = 1000
    seed: int = 0
    mode: str = "ideal-channel"
    rate_tuple: RateTuple | None = None
    dither: bool = True

    def __post_init__(self):
        object.__setattr__(self, "mode", _mode(self.mode))
        if self.m < 1 or self.trials < 1 or not self.kappa > 0:
            raise ParameterOutOfRange("need m >= 1, trials >= 1 and kappa > 0")

    @property
    def n(self) -> int:
        """Channel uses per block."""
        return math.ceil(self.kappa * self.m - 1e-9)


@dataclass(frozen=True)
class SimResult:
    pe_overall: float
    pe_per_user: tuple[float, ...]
    wilson_interval: tuple[float, float]
    trials_run: int
    kappa: float
    n: int
    mode: str
    rates: tuple[float, ...]
    bits: tuple[int, ...]
    delivered: bool | None = None
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "pe_overall": self.pe_overall,
            "pe_per_user": list(self.pe_per_user),
            "wilson_interval": list(self.wilson_interval),
            "trials_run": self.trials_run,
            "kappa": self.kappa,
            "n": self.n,
            "mode": self.mode,
            "rates": list(self.rates),
            "bits": list(self.bits),
            "delivered": self.delivered,
        }


def wilson_interval(errors: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    p = errors / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def default_rates(pmf: JointPmf, ch: ChannelSpec, kappa: float, m: int | None = None,
                  mode: str = "ideal-channel") -> RateTuple:
    """Atom-based rates, scaled up to use whatever headroom the transport leaves.

    In ideal-channel mode the headroom is the capacity region at ``kappa``;
    the scaling never drops below the assigned rates, so below the required
    kappa the tuple is unchanged and the region check fails.  In
    symbol-level mode it is what the time-division schedule can carry: half
    of the ``ceil(kappa * m)`` uses are uplink, shared by all users.
    """
    r = assign_rates(compute_atoms(pmf)).require_nonnegative()
    if _mode(mode) == "symbol-level":
        if m is None:
            raise ParameterOutOfRange("symbol-level rates need the block length m")
        total = sum(r.r)
        uplink = (math.ceil(kappa * m - 1e-9) // 2) * min(ch.capacities())
        scale = max(1.0, uplink / (m * total)) if total > 0 else 1.0
    else:
        need = required_kappa(r.r, ch)
        scale = max(1.0, kappa / need) if need > 0 else 1.0
    return RateTuple.of([v * scale for v in r.r])


def _threads() -> int:
    env = os.environ.get("MWRC_THREADS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def run_sim(pmf: JointPmf, ch: ChannelSpec, cfg: SimConfig) -> SimResult:
    if pmf.L != ch.L:
        raise ShapeMismatch(f"source has {pmf.L} users, channel has {ch.L}")
    if not _is_prime(ch.q):
        raise NotPrime(f"simulation needs a prime field order, got {ch.q}")
    ch.capacities()  # DegenerateChannel

    rates = cfg.rate_tuple if cfg.rate_tuple is not None else default_rates(pmf, ch, cfg.kappa, cfg.m, cfg.mode)
    rates = RateTuple.of(rates.r if isinstance(rates, RateTuple) else rates).require_nonnegative()
    if len(rates) != pmf.L:
        raise ShapeMismatch(f"{len(rates)} rates for {pmf.L} users")
    bits = tuple(bin_bits(v, cfg.m) for v in rates.r)
    n_bins = [1 << b for b in bits]
    for A in pmf.alphabet_sizes:
        if A ** cfg.m > MAX_BLOCK_SPACE:
            raise TractabilityExceeded(f"{A}^{cfg.m} blocks exceed {MAX_BLOCK_SPACE}")
    if cfg.mode == "symbol-level":
        if cfg.m > SYMBOL_MAX_M:
            raise TractabilityExceeded(f"symbol mode needs m <= {SYMBOL_MAX_M}, got {cfg.m}")
        if max(n_bins) > SYMBOL_MAX_BINS:
            raise TractabilityExceeded(f"symbol mode needs <= {SYMBOL_MAX_BINS} bins per user")

    delivered = None
    if cfg.mode == "ideal-channel":
        delivered = channel_region_ok([v / cfg.kappa for v in rates.r], ch).ok

    L = pmf.L
    logm = _log_marginals(pmf)

    def trial(t: int) -> tuple[bool, tuple[bool, ...]]:
        ss = np.random.SeedSequence(cfg.seed, spawn_key=(t,))
        s_src, s_bin, s_dither, s_chan = ss.spawn(4)
        if cfg.mode == "ideal-channel" and not delivered:
            return True, (True,) * L
        w = sample(pmf, cfg.m, np.random.default_rng(s_src))
        binning = Binning(pmf.alphabet_sizes, cfg.m, bits, int(s_bin.generate_state(1)[0]))
        d_rng = np.random.default_rng(s_dither)
        dithers = [int(d_rng.integers(0, nb)) for nb in n_bins]
        if not cfg.dither:
            dithers = [0] * L
        sent = [
            apply_dither(binning.encode(j, w[:, j]), dithers[j], n_bins[j]) for j in range(L)
        ]
        if cfg.mode == "ideal-channel":
            received = [{j: sent[j] for j in range(L) if j != i} for i in range(L)]
        else:
            received = transport_symbols(sent, n_bins, cfg.n, ch, np.random.default_rng(s_chan))
        user_err = []
        for i in range(L):
            bins = {j: remove_dither(received[i][j], dithers[j], n_bins[j]) for j in received[i]}
            est = decode_with_binning(binning, bins, w[:, i], i, pmf, logm)
            user_err.append(any(not np.array_equal(est[j], w[:, j]) for j in est))
        return any(user_err), tuple(user_err)

    workers = _threads()
    if workers > 1 and cfg.trials > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(trial, range(cfg.trials)))
    else:
        outcomes = [trial(t) for t in range(cfg.trials)]

    errors = sum(o[0] for o in outcomes)
    per_user = tuple(sum(o[1][i] for o in outcomes) / cfg.trials for i in range(L))
    return SimResult(
        pe_overall=errors / cfg.trials,
        pe_per_user=per_user,
        wilson_interval=wilson_interval(errors, cfg.trials),
        trials_run=cfg.trials,
        kappa=float(cfg.kappa),
        n=cfg.n,
        mode=cfg.mode,
        rates=rates.r,
        bits=bits,
        delivered=delivered,
    )
