"""Counter-based derivation of independent RNG streams.

Every random draw in the library comes from a ``numpy.random.Generator``
over a Philox bit generator keyed by the logical coordinates of the draw:
(master seed, namespace, index a, index b).  Philox is a counter-mode
block cipher, so distinct keys give independent streams by construction
and a stream depends only on its coordinates (island index, step,
replication index, ...), never on scheduling order.  That is what makes
runs bit-reproducible under any worker count.
"""

from __future__ import annotations

import threading

import numpy as np

# Namespaces keeping unrelated stream families apart.
INIT = 0         # per-island initial draws:  (seed, INIT, island)
ISLAND = 1       # per-island per-step draws: (seed, ISLAND, island, step)
ACROSS = 2       # across-island selection:   (seed, ACROSS, step)
REPLICATION = 3  # harness replication seeds: (seed, REPLICATION, cell, rep)
DATA = 4         # synthetic observation sequences
REFERENCE = 5    # high-N reference (oracle) runs

_INDEX_BITS = 29
_INDEX_CAP = 1 << _INDEX_BITS
_SEED_CAP = 1 << 63
_U63 = np.uint64(1) << np.uint64(63)


def _key(seed: int, namespace: int, a: int, b: int) -> np.ndarray:
    if not 0 <= seed < _SEED_CAP:
        raise ValueError(f"seed must be a 63-bit nonnegative integer, got {seed!r}")
    if not 0 <= namespace < 32:
        raise ValueError(f"namespace out of range: {namespace!r}")
    if not (0 <= a < _INDEX_CAP and 0 <= b < _INDEX_CAP):
        raise ValueError(f"stream indices out of range: ({a!r}, {b!r})")
    word = (namespace << (2 * _INDEX_BITS)) | (a << _INDEX_BITS) | b
    return np.array([seed, word], dtype=np.uint64)


def derive_rng(seed: int, namespace: int, a: int = 0, b: int = 0) -> np.random.Generator:
    """Generator for the stream keyed by ``(seed, namespace, a, b)``."""
    return np.random.Generator(np.random.Philox(key=_key(seed, namespace, a, b)))


def derive_seed(seed: int, namespace: int, a: int = 0, b: int = 0) -> int:
    """A 63-bit child seed for the stream at the same coordinates.

    Used where a plain integer must be recorded (e.g. the per-replication
    ``seed`` column of the raw CSV); runs seeded with it use their own
    namespaces, so the child never collides with the parent's streams.
    """
    bits = np.random.Philox(key=_key(seed, namespace, a, b)).random_raw(1)[0]
    return int(np.uint64(bits) % _U63)


class StreamPool:
    """Reusable Philox generators, re-keyed per logical stream.

    Keying an existing Philox is ~7x cheaper than constructing one, and the
    re-keyed generator reproduces the freshly constructed stream bit for
    bit (counter and buffers reset).  Slots are distinct objects, so
    different slots may be handed to concurrent workers; re-keying a slot
    must happen between uses.
    """

    def __init__(self):
        self._bgs: list[np.random.Philox] = []
        self._gens: list[np.random.Generator] = []

    def stream(
        self, slot: int, seed: int, namespace: int, a: int = 0, b: int = 0
    ) -> np.random.Generator:
        while slot >= len(self._bgs):
            bg = np.random.Philox(key=np.zeros(2, dtype=np.uint64))
            self._bgs.append(bg)
            self._gens.append(np.random.Generator(bg))
        bg = self._bgs[slot]
        st = bg.state
        st["state"]["key"][:] = _key(seed, namespace, a, b)
        st["state"]["counter"][:] = 0
        st["buffer_pos"] = 4
        st["has_uint32"] = 0
        bg.state = st
        return self._gens[slot]


_local = threading.local()


def local_pool() -> StreamPool:
    """The calling thread's stream pool."""
    pool = getattr(_local, "pool", None)
    if pool is None:
        pool = _local.pool = StreamPool()
    return pool
