"""Seedable, splittable random streams.

Generator: Philox4x64-10 (counter-based), as shipped with numpy. Stream
``i`` of master seed ``s`` uses the 128-bit Philox key ``s + (i << 64)``
with the counter starting at zero; streams never overlap.

Uniforms are ``((raw >> 11) + 0.5) * 2**-53`` for each 64-bit output word,
so they lie strictly inside (0, 1). Complex Gaussians use the polar form
``sqrt(-log u1) * exp(2j*pi*u2)`` (unit variance, modulus squared ~ Exp(1)).
Poisson variates come from numpy's ``Generator.poisson`` on the same stream.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


class Stream:
    def __init__(self, seed: int, stream: int = 0):
        if not 0 <= stream <= MASK64:
            raise ValueError(f"stream id must fit in 64 bits, got {stream}")
        self.seed = int(seed) & MASK64
        self.stream = int(stream)
        self._bitgen = np.random.Philox(key=self.seed | (self.stream << 64))
        self._generator = np.random.Generator(self._bitgen)

    def raw(self, size: int) -> np.ndarray:
        return self._bitgen.random_raw(size)

    def uniform(self, size) -> np.ndarray:
        shape = (size,) if np.isscalar(size) else tuple(size)
        raw = self.raw(int(np.prod(shape)))
        return (((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53).reshape(shape)

    def complex_normal(self, shape) -> np.ndarray:
        """Standard complex Gaussians.

        Each row along the last axis consumes ``2 * shape[-1]`` words: the
        moduli first, then the phases. Drawing rows one at a time or in a
        batch therefore gives the same numbers.
        """
        shape = (shape,) if np.isscalar(shape) else tuple(shape)
        u = self.uniform(shape[:-1] + (2, shape[-1]))
        return np.sqrt(-np.log(u[..., 0, :])) * np.exp(2j * np.pi * u[..., 1, :])

    def poisson(self, lam) -> np.ndarray:
        return self._generator.poisson(lam)


def spawn(seed: int, count: int) -> list[Stream]:
    """Streams 0..count-1 of a master seed."""
    return [Stream(seed, i) for i in range(count)]
