"""Seedable random sources.

Every draw is addressed by ``(seed, stream_id, draw_index)``: the generator
for a draw is built from a :class:`numpy.random.SeedSequence` whose spawn key
is ``(stream_id, draw_index)``.  Batch output therefore never depends on how
the draws are split across worker threads.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import NonPositiveParameter
from .spectra import WeightVector


@dataclass(frozen=True)
class RngState:
    seed: int = 0
    stream_id: int = 0

    def generator(self, draw_index: int = 0) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed & 0xFFFFFFFFFFFFFFFF,
                                    spawn_key=(self.stream_id & 0xFFFFFFFFFFFFFFFF, draw_index))
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, stream_id: int) -> "RngState":
        return RngState(self.seed, stream_id)


RngLike = Union[RngState, np.random.Generator, int, None]


def as_generator(rng: RngLike) -> np.random.Generator:
    """Coerce an ``RngState``, ``Generator``, integer seed or ``None``."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngState):
        return rng.generator(0)
    return np.random.default_rng(rng)


def dirichlet(params: Sequence[float], rng: RngLike = None) -> WeightVector:
    """Dirichlet draw on the simplex, by normalising independent Gamma variates.

    Parameters may be non-integer (``1/2`` for the real-Gaussian ensembles).
    """
    return WeightVector.of(dirichlet_array(params, rng))


def dirichlet_array(params, rng: RngLike = None, size: int | None = None) -> np.ndarray:
    """Like :func:`dirichlet` but returns a plain array, optionally ``size`` rows."""
    s = np.asarray(params, dtype=float)
    if s.ndim != 1 or len(s) == 0:
        raise NonPositiveParameter("need a nonempty 1-d parameter vector")
    if np.any(~(s > 0)):
        raise NonPositiveParameter(f"Dirichlet parameters must be positive, got {s}")
    gen = as_generator(rng)
    shape = s.shape if size is None else (size, len(s))
    g = gen.standard_gamma(s, size=shape)
    total = g.sum(axis=-1, keepdims=True)
    # all-underflow is possible only for tiny shapes; redraw is not worth it
    if np.any(total == 0):
        raise NonPositiveParameter("all Gamma variates underflowed")
    return g / total


def unit_gaussian_vector(dim: int, field: str = "complex", rng: RngLike = None) -> np.ndarray:
    """Standard Gaussian vector in ``R^dim`` or ``C^dim`` scaled to unit length."""
    if dim < 1:
        raise ValueError("dim must be at least 1")
    gen = as_generator(rng)
    if field == "real":
        x = gen.standard_normal(dim)
    elif field == "complex":
        x = gen.standard_normal(dim) + 1j * gen.standard_normal(dim)
    else:
        raise ValueError(f"unknown field {field!r}")
    return x / np.linalg.norm(x)


def block_weights(x: np.ndarray, multiplicities: Sequence[int]) -> np.ndarray:
    """Squared moduli of ``x`` summed over consecutive multiplicity blocks."""
    sq = np.abs(x) ** 2
    edges = np.cumsum((0,) + tuple(multiplicities))
    return np.add.reduceat(sq, edges[:-1])


def _haar(dim, gen, complex_):
    if complex_:
        z = (gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))) / np.sqrt(2)
    else:
        z = gen.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    # without this phase fix QR output is not Haar distributed
    ph = d / np.abs(d)
    return q * ph[np.newaxis, :]


def haar_unitary(dim: int, rng: RngLike = None) -> np.ndarray:
    """Haar-distributed element of U(dim)."""
    if dim < 1:
        raise ValueError("dim must be at least 1")
    return _haar(dim, as_generator(rng), True)


def haar_orthogonal(dim: int, rng: RngLike = None) -> np.ndarray:
    """Haar-distributed element of O(dim)."""
    if dim < 1:
        raise ValueError("dim must be at least 1")
    return _haar(dim, as_generator(rng), False)
