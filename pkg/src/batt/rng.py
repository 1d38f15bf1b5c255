"""Deterministic, splittable random streams.

Every stochastic operation in the package takes an :class:`RngStream` (or a
``numpy`` generator derived from one). A stream is identified by a 64-bit
seed plus a tuple of sub-stream ids; identical identifiers reproduce the
identical draw sequence for a given numpy generator version. Sub-streams
derived through :meth:`RngStream.substream` never overlap, which is what
lets trials (and the per-arm / per-policy streams inside them) run in any
order, or in parallel, without perturbing each other's draws.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["RngStream"]


def _normalize_ids(stream_id) -> tuple[int, ...]:
    if isinstance(stream_id, (int, np.integer)):
        return (int(stream_id),)
    return tuple(int(i) for i in stream_id)


@dataclass(frozen=True)
class RngStream:
    """Value identifying one reproducible stream of random draws.

    ``stream_id`` is a tuple so nested components (trial, policy, arm, ...)
    can each claim their own namespace without coordinating integer ranges.
    """

    seed: int
    stream_id: tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "stream_id", _normalize_ids(self.stream_id))
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")

    def substream(self, *ids: int) -> "RngStream":
        """A child stream; children with distinct ids never share draws."""
        return RngStream(self.seed, self.stream_id + _normalize_ids(ids))

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        seq = np.random.SeedSequence(self.seed, spawn_key=self.stream_id)
        return np.random.Generator(np.random.PCG64(seq))


def as_generator(rng) -> np.random.Generator:
    """Accept either an RngStream or an already-built numpy Generator."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng)!r}")
