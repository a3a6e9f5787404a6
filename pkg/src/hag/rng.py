"""Named, independently seeded random streams and stateless shuffle keys.

Every stochastic stage of the generator draws from its own substream of a
single 64-bit master seed, spawned through ``numpy.random.SeedSequence`` on
top of the counter-based Philox engine.  Changing how one stage consumes
randomness therefore leaves every other stage's draws untouched, and a run
is reproducible across machines from ``(master seed, stream name)`` alone.

Bulk shuffles inside the half-edge matcher do not use a sequential generator
at all: each record gets a 64-bit sort key from a stateless splitmix64 hash
of (stage seed, height, link node, occurrence index), so the shuffle outcome
is independent of array order and of how records are partitioned across
workers.
"""

from __future__ import annotations

import numpy as np

#: Identifier of the bit generator recorded in generation reports.
ENGINE = "numpy.random.Philox"

#: Stage names in fixed order; the position is the SeedSequence spawn key.
STREAMS = ("tree", "colors", "marks", "wildness", "heights", "matching", "walks")


def substream(master_seed: int, name: str) -> np.random.Generator:
    """Return the dedicated generator for one named stage.

    Parameters
    ----------
    master_seed:
        The run's master seed (any Python int; 64-bit values are typical).
    name:
        One of :data:`STREAMS`.
    """
    try:
        idx = STREAMS.index(name)
    except ValueError:
        raise ValueError(f"unknown stream {name!r}; expected one of {STREAMS}") from None
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(idx,))
    return np.random.Generator(np.random.Philox(seq))


def stream_seed(master_seed: int, name: str) -> int:
    """A stable 64-bit scalar seed for one named stage.

    Used where randomness is consumed through hashing (the matcher's shuffle
    keys) instead of through a sequential generator.
    """
    idx = STREAMS.index(name)
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(idx,))
    return int(seq.generate_state(1, np.uint64)[0])


_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def splitmix64(x) -> np.ndarray | np.uint64:
    """Vectorized splitmix64 finalizer: uint64 -> well-mixed uint64.

    Accepts scalars or arrays; uint64 arithmetic wraps modulo 2**64 by
    construction.  Scalar input returns a ``np.uint64`` scalar.
    """
    scalar = np.ndim(x) == 0
    z = np.atleast_1d(np.asarray(x, dtype=np.uint64)).copy()
    z += _GAMMA
    z ^= z >> np.uint64(30)
    z *= _MIX1
    z ^= z >> np.uint64(27)
    z *= _MIX2
    z ^= z >> np.uint64(31)
    return np.uint64(z[0]) if scalar else z


def shuffle_keys(stage_seed: int, height: int, link: np.ndarray, counter: np.ndarray) -> np.ndarray:
    """Order-independent pseudo-random sort keys for per-link-node shuffles.

    The key of a half-edge depends only on (stage seed, height, link node,
    occurrence index within that link node's canonical record order), never
    on array position.  Sorting records by ``(link, key)`` is therefore a
    uniform per-link shuffle whose outcome cannot change if records arrive
    in a different order or are split across workers.
    """
    base = splitmix64(np.uint64(stage_seed) ^ splitmix64(np.uint64(height)))
    h = splitmix64(link.astype(np.uint64, copy=False) ^ base)
    return splitmix64(h ^ splitmix64(counter.astype(np.uint64, copy=False) ^ np.uint64(stage_seed)))
