"""Slow reference implementation on explicit occupation tuples.

Independent of the package's ranking and ladder code: states are looked up
in a dict built from ``enumerate_sector`` and operators are applied one
basis vector at a time.
"""
import math

import numpy as np

from fockbench.fock import enumerate_sector


def basis(d, n_max):
    states = [s for n in range(n_max + 1) for s in enumerate_sector(d, n)]
    return states, {s: k for k, s in enumerate(states)}


def lower(state, i):
    if state[i] == 0:
        return 0.0, None
    s = list(state)
    s[i] -= 1
    return math.sqrt(state[i]), tuple(s)


def raise_(state, i, n_max):
    if sum(state) + 1 > n_max:
        return 0.0, None
    s = list(state)
    s[i] += 1
    return math.sqrt(state[i] + 1), tuple(s)


def word_matrix(d, n_max, word):
    """Dense matrix of a product of ladder operators, rightmost applied first.

    ``word`` is a list of ``("a" | "c", mode)``; intermediate states above the
    cutoff are dropped, as in the compressed products.
    """
    states, index = basis(d, n_max)
    out = np.zeros((len(states), len(states)), dtype=complex)
    for col, st in enumerate(states):
        amp, cur = 1.0, st
        for kind, mode in reversed(word):
            f, cur = lower(cur, mode) if kind == "a" else raise_(cur, mode, n_max)
            amp *= f
            if cur is None:
                break
        if cur is not None and amp != 0:
            out[index[cur], col] += amp
    return out


def annihilation(d, n_max, f):
    return sum(np.conj(f[i]) * word_matrix(d, n_max, [("a", i)]) for i in range(d))


def second_quantization(d, n_max, h):
    return sum(h[i, j] * word_matrix(d, n_max, [("c", i), ("a", j)]) for i in range(d) for j in range(d))


def rayleigh_search(a, b, evaluations=10_000, seed=0):
    """Maximise ``‖a x‖² / x† b x`` by a (1+1) evolution strategy.

    Independent of any factorisation: only matrix-vector products.  The step
    size follows the one-fifth success rule.  Returns the best quotient seen,
    which is a lower bound on the top generalized eigenvalue.
    """
    rng = np.random.default_rng(seed)
    n = b.shape[0]

    def quotient(x):
        ax = a @ x
        return float(np.vdot(ax, ax).real / np.vdot(x, b @ x).real)

    x = rng.normal(size=n) + 1j * rng.normal(size=n)
    best = quotient(x)
    sigma = 0.5
    for _ in range(evaluations - 1):
        y = x + sigma * np.linalg.norm(x) / np.sqrt(n) * (rng.normal(size=n) + 1j * rng.normal(size=n))
        q = quotient(y)
        if q > best:
            x, best = y, q
            sigma *= 1.5
        else:
            sigma *= 1.5 ** -0.25
        sigma = min(max(sigma, 1e-8), 2.0)
    return best
