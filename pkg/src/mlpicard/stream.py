"""Deterministic hierarchical randomness.

Maps a ``StreamKey`` (64-bit root seed plus a finite signed-integer path,
an element of the scheme's index set) to an independent, reproducible
random stream of uniforms and standard Gaussian vectors.  Streams are
counter-mode: the draw sequence is a pure function of the key, so disjoint
keys may be consumed concurrently in any schedule.

Not cryptographic; statistical independence only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from mlpicard._kernel import impl


class StreamError(ValueError):
    pass


@dataclass(frozen=True)
class StreamKey:
    """Address of one independent random source."""

    root_seed: int
    path: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "root_seed", int(self.root_seed) & ((1 << 64) - 1))
        object.__setattr__(self, "path", tuple(int(e) for e in self.path))

    def child(self, *elements: int) -> "StreamKey":
        return StreamKey(self.root_seed, self.path + tuple(elements))


@dataclass
class Stream:
    """Sequential view of a keyed counter stream.

    ``position`` counts scalar draws; uniforms consume one counter each and
    a d-dimensional Gaussian vector consumes exactly d, so the ledger
    contract "one scalar random variable per scalar drawn" holds by
    construction.
    """

    key: StreamKey
    position: int = 0
    _h: tuple[int, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._h = impl.derive_key(self.key.root_seed, self.key.path)

    def next_uniform(self) -> float:
        u = float(impl.uniforms_from_key(self._h[0], self._h[1], self.position, 1)[0])
        self.position += 1
        return u

    def next_gaussian_vector(self, d: int) -> np.ndarray:
        if d < 1:
            raise StreamError("empty dimension")
        z = impl.gaussians_from_key(self._h[0], self._h[1], self.position, d)
        self.position += d
        return z

    def uniforms(self, count: int) -> np.ndarray:
        u = impl.uniforms_from_key(self._h[0], self._h[1], self.position, count)
        self.position += count
        return u


def derive_stream(root_seed: int, path=()) -> Stream:
    """Stream for (root_seed, path); deterministic in its inputs."""
    return Stream(StreamKey(root_seed, tuple(path)))
