"""Random joint pmfs shared by the property and acceptance tests."""

import itertools

import numpy as np

from mwrc.distribution import JointPmf, validate


def dirichlet_pmf(rng: np.random.Generator, L: int, max_alphabet: int = 3) -> JointPmf:
    sizes = rng.integers(2, max_alphabet + 1, L)
    return validate(rng.dirichlet(np.full(int(np.prod(sizes)), 0.5)), sizes)


def common_cause_pmf(rng: np.random.Generator, L: int, eps: float) -> JointPmf:
    """W_i = Z xor E_i with Z a fair bit and E_i i.i.d., then multiplicatively perturbed."""
    p = rng.uniform(0.05, 0.45)
    probs = []
    for bits in itertools.product((0, 1), repeat=L):
        total = 0.0
        for z in (0, 1):
            k = sum(b != z for b in bits)
            total += 0.5 * p**k * (1 - p) ** (L - k)
        probs.append(total)
    probs = np.array(probs) * (1 + eps * rng.uniform(-1, 1, 1 << L))
    return validate(probs / probs.sum(), [2] * L)


def exchangeable_pmf(rng: np.random.Generator, L: int) -> JointPmf:
    """Binary pmf depending only on the number of ones."""
    w = rng.dirichlet(np.ones(L + 1))
    probs = np.array([w[sum(b)] for b in itertools.product((0, 1), repeat=L)])
    return validate(probs / probs.sum(), [2] * L)


def mixed_corpus(seed: int, size: int, Ls=(3, 4, 5)) -> list[JointPmf]:
    """Cycle through L values and generator families."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(size):
        L = Ls[k % len(Ls)]
        family = (k // len(Ls)) % 4
        if family == 0:
            out.append(dirichlet_pmf(rng, L))
        elif family == 1:
            out.append(common_cause_pmf(rng, L, 0.0))
        elif family == 2:
            out.append(common_cause_pmf(rng, L, rng.uniform(0, 0.05)))
        else:
            out.append(exchangeable_pmf(rng, L))
    return out
