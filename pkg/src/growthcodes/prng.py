"""SplitMix64, the generator behind every ESI.

The encoder and decoder must regenerate identical neighbor sets on any
platform, so the draws are defined here bit-exactly instead of relying on
numpy's ``Generator`` methods (whose streams may change between releases).
"""

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z):
    """SplitMix64 output function (the finalizer of Steele et al.)."""
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed):
        self.state = seed & MASK64

    def next_u64(self):
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def random(self):
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def below(self, n):
        """Unbiased integer in [0, n) using Lemire's multiply-and-reject."""
        if n <= 0:
            raise ValueError("n must be positive")
        m = self.next_u64() * n
        low = m & MASK64
        if low < n:
            threshold = ((1 << 64) - n) % n
            while low < threshold:
                m = self.next_u64() * n
                low = m & MASK64
        return m >> 64


def sample_distinct(rng, k, d):
    """First ``d`` entries of a Fisher-Yates shuffle of ``range(k)``.

    Swaps are kept in a dict so the cost is O(d) regardless of ``k``.
    """
    swaps = {}
    out = []
    for i in range(d):
        j = i + rng.below(k - i)
        vj = swaps.get(j, j)
        swaps[j] = swaps.get(i, i)
        out.append(vj)
    return out


def split_seed(master, index):
    """Derive an independent 64-bit seed for sub-stream ``index``."""
    return mix64((master + GOLDEN * (index + 1)) & MASK64)
