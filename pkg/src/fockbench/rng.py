"""SplitMix64 generator, vectorised as a counter-based stream.

Output ``k`` of a generator seeded with ``s`` is ``mix(s + (k+1)·γ)``, so a
block of draws is a pure function of the seed and the draw counter.  That
keeps sampled violation counts reproducible bit-for-bit.
"""
from __future__ import annotations

import numpy as np

GOLDEN_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO_M53 = 2.0 ** -53


def _mix(z: np.ndarray) -> np.ndarray:
    z ^= z >> np.uint64(30)
    z *= _M1
    z ^= z >> np.uint64(27)
    z *= _M2
    z ^= z >> np.uint64(31)
    return z


class SplitMix64:
    def __init__(self, seed: int):
        self.state = np.uint64(seed % 2**64)

    def next_u64(self, size: int) -> np.ndarray:
        with np.errstate(over="ignore"):
            out = np.arange(1, size + 1, dtype=np.uint64)
            out *= GOLDEN_GAMMA
            out += self.state
            _mix(out)
            self.state = self.state + np.uint64(size) * GOLDEN_GAMMA
        return out

    def uniform(self, size: int) -> np.ndarray:
        """Doubles in [0, 1) from the top 53 bits."""
        bits = self.next_u64(size)
        bits >>= np.uint64(11)
        out = bits.astype(np.float64)
        out *= _TWO_M53
        return out

    def _polar(self, half: int):
        """Box-Muller radius and angle from ``2·half`` uniforms."""
        u = self.uniform(2 * half)
        r = u[:half]
        np.negative(r, out=r)
        np.log1p(r, out=r)
        r *= -2.0
        np.sqrt(r, out=r)
        t = u[half:]
        t *= 2.0 * np.pi
        return r, t

    def normal(self, size: int) -> np.ndarray:
        """Standard normals by Box-Muller (two uniforms per pair)."""
        half = (size + 1) // 2
        r, t = self._polar(half)
        out = np.empty(2 * half)
        np.multiply(r, np.cos(t), out=out[:half])
        np.multiply(r, np.sin(t), out=out[half:])
        return out[:size]

    def complex_normal(self, shape) -> np.ndarray:
        """``x + iy`` with ``x``, ``y`` independent standard normals.

        Same stream as ``normal(2·size)`` split into real and imaginary halves.
        """
        shape = (shape,) if np.isscalar(shape) else tuple(shape)
        size = int(np.prod(shape))
        r, t = self._polar(size)
        out = np.empty(size, dtype=complex)
        np.multiply(r, np.cos(t), out=out.real)
        np.multiply(r, np.sin(t), out=out.imag)
        return out.reshape(shape)

    def gamma(self, shape: float, size: int) -> np.ndarray:
        """Gamma(shape, 1) variates by Marsaglia-Tsang squeeze-rejection.

        Shapes below 1 use the boost ``G(a) = G(a+1) · U^{1/a}``; shape 0 gives zeros.
        """
        if shape < 0:
            raise ValueError("gamma shape must be >= 0")
        if shape == 0:
            return np.zeros(size)
        if shape < 1:
            return self.gamma(shape + 1.0, size) * self.uniform(size) ** (1.0 / shape)
        d = shape - 1.0 / 3.0
        c = 1.0 / np.sqrt(9.0 * d)
        out = np.empty(size)
        todo = np.arange(size)
        while todo.size:
            x = self.normal(todo.size)
            u = self.uniform(todo.size)
            v = (1.0 + c * x) ** 3
            ok = v > 0
            with np.errstate(invalid="ignore", divide="ignore"):
                ok &= np.log(u) < 0.5 * x * x + d - d * v + d * np.log(np.where(ok, v, 1.0))
            out[todo[ok]] = d * v[ok]
            todo = todo[~ok]
        return out

    def unit_vector(self, dim: int) -> np.ndarray:
        v = self.complex_normal(dim)
        return v / np.linalg.norm(v)

    def spawn(self, key: int) -> "SplitMix64":
        """Independent child stream; keyed children are order-independent."""
        with np.errstate(over="ignore"):
            seed = int(_mix(np.array([self.state ^ np.uint64(key % 2**64)], dtype=np.uint64))[0])
        return SplitMix64(seed)
