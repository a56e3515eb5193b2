"""Deterministic seed derivation.

Sequential procedures need many independent streams (initial design, one
reference set and one candidate set per iteration, oracle noise, evaluation
designs). Deriving them all from one base seed with splitmix64 keeps runs
reproducible across platforms without threading RNG state through every call.
"""

_MASK64 = (1 << 64) - 1

# purpose tags; values are arbitrary but frozen for reproducibility
TAG_INIT = 0xA1
TAG_REF = 0xA2
TAG_CAND = 0xA3
TAG_NOISE = 0xA4
TAG_EVAL = 0xA5
TAG_FIT = 0xA6


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def mix_seed(*parts: int) -> int:
    """Fold integer parts into one well-mixed, non-negative 62-bit seed."""
    acc = 0x8B72E7E2D1F5B3C9
    for p in parts:
        acc = _splitmix64(acc ^ (int(p) & _MASK64))
    return acc >> 2
