"""Deterministic counter-based random number generation.

Every random decision in the toolkit (index sampling, snapshot draws, data
shuffles, synthetic data) goes through :class:`Rng` so that a run is a pure
function of its seed.  The generator is fixed and documented rather than
delegated to a platform library:

* the raw stream is ``out_k = mix64(key + k * GOLDEN)`` where ``mix64`` is
  the SplitMix64 finalizer and ``GOLDEN`` is 2^64 / phi rounded to odd;
* ``key`` is derived from ``(seed, stream)``, which makes the generator
  splittable: distinct streams give statistically independent sequences;
* integers in ``[0, n)`` use rejection sampling, so they are exactly
  uniform (no modulo bias);
* floats use the top 53 bits of one 64-bit word; normals use Box-Muller.

Two processes on any platform that draw the same sequence of calls from the
same ``(seed, stream)`` observe identical values, which is what makes solver
traces bit-reproducible.
"""

import math

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class Rng:
    """Splittable counter-based generator with a 64-bit state key."""

    __slots__ = ("_key", "_counter", "_spare_normal")

    def __init__(self, seed: int, stream: int = 0):
        self._key = _mix64((_mix64(seed & _MASK64) + _GOLDEN * (stream & _MASK64)) & _MASK64)
        self._counter = 0
        self._spare_normal = None

    def next_u64(self) -> int:
        self._counter += 1
        return _mix64((self._key + self._counter * _GOLDEN) & _MASK64)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n), unbiased via rejection sampling."""
        if n <= 0:
            raise ValueError("below() needs n >= 1")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % n

    def uniform(self) -> float:
        """Float in [0, 1) with 53 random mantissa bits."""
        return (self.next_u64() >> 11) * 2.0 ** -53

    def normal(self) -> float:
        """Standard normal draw (Box-Muller; the paired value is cached)."""
        if self._spare_normal is not None:
            z = self._spare_normal
            self._spare_normal = None
            return z
        u1 = 1.0 - self.uniform()  # (0, 1], keeps log finite
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        a = 2.0 * math.pi * u2
        self._spare_normal = r * math.sin(a)
        return r * math.cos(a)

    def normals(self, k: int) -> list:
        return [self.normal() for _ in range(k)]

    def split(self, stream: int) -> "Rng":
        """Independent substream derived from this generator's key."""
        return Rng(self._key, stream)
