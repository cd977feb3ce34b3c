"""Batch sampling by either route (secular or oracle) with deterministic substreams.

Draw ``i`` always uses the generator ``RngState(seed, stream_id).generator(i)``
and draws are processed in fixed-size chunks, so the output is identical for
any number of worker threads.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import oracle, secular
from .errors import UnsupportedCase
from .randsrc import RngState, dirichlet_array
from .spectra import EigenSample

CASES = ("additive", "projection", "multiplicative", "quadform", "diag")
METHODS = ("secular", "oracle")
CHUNK = 512


def _secular_chunk(case, spec, gens, field, b, phi):
    if case == "additive":
        W = np.array([dirichlet_array(secular.dirichlet_params(spec.multiplicities, field), g) for g in gens])
        lam = secular.solve_additive(spec.values, W, b)
        return [secular._additive_sample(spec, row, b, w) for row, w in zip(lam, W)]
    if case == "projection":
        W = np.array([dirichlet_array(secular.dirichlet_params(spec.multiplicities, field), g) for g in gens])
        lam = secular.solve_projection(spec.values, W).reshape(len(gens), spec.n - 1)
        return [secular._projection_sample(spec, row, w) for row, w in zip(lam, W)]
    if case == "multiplicative":
        if field != "complex":
            raise UnsupportedCase("the multiplicative case is complex only")
        Q = np.array([dirichlet_array(spec.mult_array, g) for g in gens])
        psi = secular.solve_multiplicative(spec.angles, Q, phi)
        return [secular._multiplicative_sample(spec, row, phi, q) for row, q in zip(psi, Q)]
    if case == "quadform":
        # x = sum_j w_j b_j with Dirichlet(1, ..., 1) weights
        bvec = np.asarray(spec, dtype=float)
        W = np.array([dirichlet_array(np.ones(len(bvec)), g) for g in gens])
        return [EigenSample(np.array([w @ bvec]), "quadratic_form", (), 0.0, w) for w in W]
    raise UnsupportedCase(f"case {case!r} has no secular sampler")


def _oracle_chunk(case, spec, gens, field, b, phi, p):
    if case == "additive":
        return [oracle.sample_additive_matrix(spec, b, field, g) for g in gens]
    if case == "projection":
        return [oracle.sample_projection_matrix(spec, field, g) for g in gens]
    if case == "multiplicative":
        if field != "complex":
            raise UnsupportedCase("the multiplicative case is complex only")
        return [oracle.sample_multiplicative_matrix(spec, phi, g) for g in gens]
    if case == "quadform":
        return [EigenSample(np.array([oracle.sample_quadratic_form(spec, g)]), "quadratic_form")
                for g in gens]
    if case == "diag":
        n = len(spec)
        return [EigenSample(oracle.sample_diagonal_entries(spec, p or n, g), "diagonal_entries")
                for g in gens]
    raise UnsupportedCase(f"unknown case {case!r}")


def draw_samples(case: str, spec, count: int, *, method: str = "secular", field: str = "complex",
                 b: float | None = None, phi: float | None = None, p: int | None = None,
                 seed: int = 0, stream_id: int = 0, threads: int = 1) -> list[EigenSample]:
    """Draw ``count`` samples of ``case``.

    ``spec`` is a :class:`SpectrumSpec` (additive, projection), an
    :class:`AngularSpectrum` (multiplicative) or a plain sequence of the
    eigenvalues of ``B`` (quadform, diag).
    """
    if case not in CASES:
        raise UnsupportedCase(f"unknown case {case!r}")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if case == "additive" and not (b is not None and b > 0):
        raise ValueError("additive case needs b > 0")
    if case == "multiplicative" and phi is None:
        raise ValueError("multiplicative case needs phi")
    state = RngState(seed, stream_id)
    chunks = [range(i, min(i + CHUNK, count)) for i in range(0, count, CHUNK)]

    def run(idx):
        gens = [state.generator(i) for i in idx]
        if method == "secular":
            return _secular_chunk(case, spec, gens, field, b, phi)
        return _oracle_chunk(case, spec, gens, field, b, phi, p)

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(idx) for idx in chunks]
    return [s for part in parts for s in part]


def sample_rows(case: str, spec, count: int, **kwargs) -> np.ndarray:
    """``draw_samples`` flattened to a ``(count, k)`` array of the random coordinates."""
    samples = draw_samples(case, spec, count, **kwargs)
    if not samples:
        return np.empty((0, 0))
    return np.vstack([np.asarray(s.eigenvalues, dtype=float) for s in samples])
