"""Portable 64-bit PRNG used for instance generation.

The generator is xorshift64* (shift triple 12/25/27, multiplier
0x2545F4914F6CDD1D) seeded through one round of splitmix64, so seed 0 is
valid and nearby seeds give unrelated streams. Everything is plain integer
arithmetic masked to 64 bits, which makes the stream bit-exact on every
platform and Python version.
"""

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


class XorShift64Star:
    def __init__(self, seed: int):
        state = splitmix64(seed & MASK64)
        # all-zero state is a fixed point of xorshift
        self.state = state or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & MASK64

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound) by rejection, no modulo bias."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % bound

    def coin(self) -> bool:
        return bool(self.next_u64() >> 63)
