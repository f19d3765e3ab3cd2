"""Counter-based random substreams.

Replication ``i`` of a run seeded with ``seed`` draws from a SplitMix64
sequence whose starting state is a pure function of ``(seed, i)``.  Nothing is
shared between replications, so they can be evaluated in any order or in
parallel and still produce the same numbers.  The compiled simulation core
implements the same arithmetic.
"""

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
_TO_UNIT = 2.0**-52


def mix64(z: int) -> int:
    """SplitMix64 finaliser (a bijection on 64-bit integers)."""
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, index: int) -> int:
    return mix64((mix64((seed + GOLDEN) & MASK64) + index) & MASK64)


class CounterStream:
    """Uniform draws on the open interval (0, 1) for one replication."""

    __slots__ = ("seed", "index", "_state")

    def __init__(self, seed: int, index: int):
        self.seed = seed
        self.index = index
        self._state = stream_key(seed & MASK64, index)

    def random(self) -> float:
        self._state = (self._state + GOLDEN) & MASK64
        return ((mix64(self._state) >> 12) + 0.5) * _TO_UNIT
