"""Brute-force samplers: build the random matrices and diagonalise them.

These are the ground truth for the secular samplers and the closed-form
densities, so nothing here touches the secular equations.  Hermitian
problems go through LAPACK ``eigh``; unitary products go through a Cayley
transform so that the same Hermitian solver delivers the eigenphases.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import EigensolverFailure
from .randsrc import RngLike, as_generator, haar_unitary, unit_gaussian_vector
from .spectra import TWO_PI, AngularSpectrum, EigenSample, SpectrumSpec, phase_residual, wrap_angle

#: deterministic eigenvalues are matched within this, times the spectral diameter
DETECT_ATOL = 1e-8


def eigvalsh_desc(m: np.ndarray) -> np.ndarray:
    try:
        ev = np.linalg.eigvalsh(m)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc
    return ev[::-1]


def _strip(ev, targets, tol, circular=False):
    """Remove, for each ``(value, count)``, the ``count`` entries of ``ev`` nearest ``value``."""
    ev = list(ev)
    for value, count in targets:
        for _ in range(count):
            arr = np.asarray(ev)
            dist = np.abs(arr - value)
            if circular:
                dist = np.minimum(dist, TWO_PI - dist)
            k = int(np.argmin(dist))
            if dist[k] > tol:
                raise EigensolverFailure(
                    f"expected a deterministic eigenvalue at {value!r}, nearest is {ev[k]!r}")
            ev.pop(k)
    return np.asarray(ev)


def sample_additive_matrix(spec: SpectrumSpec, b: float, field: str = "complex",
                           rng: RngLike = None) -> EigenSample:
    """Eigenvalues of ``A + b x x^dagger`` (``x x^T`` for ``field='real'``)."""
    if not b > 0:
        raise ValueError("shift b must be positive")
    gen = as_generator(rng)
    x = unit_gaussian_vector(spec.total_dim, field, gen)
    c = np.diag(spec.expanded()).astype(x.dtype) + b * np.outer(x, x.conj())
    ev = eigvalsh_desc(c)
    det = tuple((float(v), m - 1) for v, m in zip(spec.values, spec.multiplicities) if m > 1)
    tol = DETECT_ATOL * max(1.0, spec.diameter + b)
    lam = _strip(ev, det, tol)
    resid = math.fsum(ev) - math.fsum(spec.expanded()) - b
    return EigenSample(lam, "additive", det, resid)


def sample_projection_matrix(spec: SpectrumSpec, field: str = "complex",
                             rng: RngLike = None) -> EigenSample:
    """Eigenvalues of ``Pi A Pi`` with ``Pi = I - x x^dagger``; the zero is split off."""
    gen = as_generator(rng)
    x = unit_gaussian_vector(spec.total_dim, field, gen)
    proj = np.eye(spec.total_dim, dtype=x.dtype) - np.outer(x, x.conj())
    m = proj @ np.diag(spec.expanded()).astype(x.dtype) @ proj
    ev = eigvalsh_desc(0.5 * (m + m.conj().T))
    pairs = {0.0: 1}
    for v, mult in zip(spec.values, spec.multiplicities):
        if mult > 1:
            pairs[float(v)] = pairs.get(float(v), 0) + mult - 1
    det = tuple(sorted(pairs.items(), key=lambda p: -p[0]))
    tol = DETECT_ATOL * max(1.0, spec.diameter)
    lam = _strip(ev, det, tol)
    return EigenSample(lam, "projection", det, 0.0)


def unitary_eigenphases(s: np.ndarray) -> np.ndarray:
    """Eigenphases in ``[0, 2*pi)`` of a unitary matrix, via a rotated Cayley transform.

    ``S`` is first rotated by ``e^{i alpha}`` so that ``-1`` sits in the widest
    gap of its spectrum (located with a cheap general eigensolver); then
    ``H = i (I - S')(I + S')^{-1}`` is Hermitian with eigenvalues
    ``tan(psi'/2)``.
    """
    n = s.shape[0]
    try:
        rough = np.sort(wrap_angle(np.angle(np.linalg.eigvals(s))))
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc
    gaps = np.diff(np.concatenate((rough, [rough[0] + TWO_PI])))
    k = int(np.argmax(gaps))
    centre = rough[k] + 0.5 * gaps[k]
    alpha = math.pi - centre
    rot = np.exp(1j * alpha) * s
    eye = np.eye(n)
    h = 1j * np.linalg.solve((eye + rot).T, (eye - rot).T).T
    t = eigvalsh_desc(0.5 * (h + h.conj().T))
    return np.sort(wrap_angle(2.0 * np.arctan(t) - alpha))


def sample_multiplicative_matrix(spec: AngularSpectrum, phi: float, rng: RngLike = None) -> EigenSample:
    """Eigenphases of ``A W B W^dagger`` with ``W`` Haar and ``B = diag(e^{i phi}, 1, ..., 1)``."""
    gen = as_generator(rng)
    N = spec.total_dim
    w = haar_unitary(N, gen)
    bdiag = np.ones(N, dtype=complex)
    bdiag[0] = np.exp(1j * phi)
    s = np.exp(1j * spec.expanded())[:, None] * ((w * bdiag[None, :]) @ w.conj().T)
    psi = unitary_eigenphases(s)
    det = tuple((float(v), m - 1) for v, m in zip(spec.angles, spec.multiplicities) if m > 1)
    psi = np.sort(_strip(psi, det, DETECT_ATOL * TWO_PI, circular=True))
    return EigenSample(psi, "multiplicative", det, phase_residual(psi, spec.angles, phi))


def sample_quadratic_form(b_spec, rng: RngLike = None) -> float:
    """``z B z^dagger`` for ``z`` uniform on the complex unit sphere, ``B = diag(b)``."""
    b = np.asarray(b_spec, dtype=float)
    z = unit_gaussian_vector(len(b), "complex", as_generator(rng))
    val = np.vdot(z, np.diag(b) @ z)
    return float(val.real)


def sample_diagonal_entries(b_spec, p: int, rng: RngLike = None) -> np.ndarray:
    """First ``p`` diagonal entries of ``U diag(b) U^dagger`` for Haar ``U``."""
    b = np.asarray(b_spec, dtype=float)
    if not 1 <= p <= len(b):
        raise ValueError("need 1 <= p <= n")
    u = haar_unitary(len(b), as_generator(rng))
    m = (u * b[None, :]) @ u.conj().T
    return np.real(np.diagonal(m))[:p].copy()


def hciz_monte_carlo(x, y, n_draws: int, rng: RngLike = None, batch: int = 4096):
    """Haar Monte Carlo estimate of ``E exp(Tr U^dagger X U Y)``; returns ``(mean, stderr)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    gen = as_generator(rng)
    vals = np.empty(n_draws)
    done = 0
    while done < n_draws:
        k = min(batch, n_draws - done)
        z = (gen.standard_normal((k, n, n)) + 1j * gen.standard_normal((k, n, n))) / np.sqrt(2)
        q, r = np.linalg.qr(z)
        d = np.diagonal(r, axis1=1, axis2=2)
        q = q * (d / np.abs(d))[:, None, :]
        # Tr(U^dagger X U Y) = sum_{jk} |U_jk|^2 x_j y_k
        vals[done:done + k] = np.exp(np.einsum("kij,i,j->k", np.abs(q) ** 2, x, y))
        done += k
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n_draws))
