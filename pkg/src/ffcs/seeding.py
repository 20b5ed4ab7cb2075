"""Deterministic 64-bit seed derivation for parallel Monte Carlo trials.

Every random draw in the pipeline gets its own seed derived from
(master_seed, trial_index, stream_index), so trials can run in any order,
serially or in a pool, and still reproduce bit-identical results.
"""

MASK64 = (1 << 64) - 1

# splitmix64 constants (Steele, Lea, Flood 2014)
GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """splitmix64 finalizer: a bijective avalanche mix of a 64-bit word."""
    z = (z + GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return (z ^ (z >> 31)) & MASK64


def derive_seed(master: int, *path: int) -> int:
    """Fold an index path (e.g. trial, stream) into an independent seed.

    The master is finalized first and each component advances the state by
    a Weyl step before re-finalizing, so distinct (master, path) pairs
    cannot alias the way a plain XOR of small integers would.
    """
    s = mix64(master & MASK64)
    for p in path:
        s = mix64((s + (p & MASK64) * GAMMA) & MASK64)
    return s
