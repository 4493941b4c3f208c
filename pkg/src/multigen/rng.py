"""SplitMix64: the fixed pseudo-random generator used everywhere.

Platform default generators differ, so every seeded behavior (level
generation, world RNG state) goes through this one algorithm to keep results
bit-identical across machines and language runtimes.
"""

MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a SplitMix64 state; returns (next_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


class Rng:
    """Small deterministic helper over splitmix64."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state, out = splitmix64(self.state)
        return out

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * (self.next_u64() / 2**64)

    def randint(self, lo: int, hi: int) -> int:
        """Integer in [lo, hi] inclusive."""
        span = hi - lo + 1
        return lo + self.next_u64() % span

    def choice(self, seq):
        return seq[self.randint(0, len(seq) - 1)]
