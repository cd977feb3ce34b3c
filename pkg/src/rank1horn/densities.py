"""Closed-form eigenvalue densities of rank-1 randomised Horn problems.

Conventions
-----------
* Real spectra are descending, ``a_1 > ... > a_n``; multiplicities may be any
  positive reals internally (``1/2`` encodes the real-Gaussian ensembles).
* Densities on a constrained set are densities in the free coordinates:
  the additive case uses ``lam_1..lam_{n-1}`` and recovers ``lam_n`` from the
  trace identity; the multiplicative case uses the ``n - 1`` smallest
  eigenphases in ``[0, 2*pi)`` and recovers the largest from the phase sum.
* Outside the support every density is exactly ``0``.  Where an exponent is
  negative (half-integer multiplicities) a point on the support boundary
  returns ``inf``.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import NearConfluent
from .spectra import TWO_PI, AngularSpectrum, SpectrumSpec, arc_indices, validate_spectrum


def _spectrum(a, multiplicities=None):
    if isinstance(a, SpectrumSpec):
        return np.asarray(a.values), np.asarray(a.multiplicities, dtype=float)
    vals = validate_spectrum(a).values
    m = np.ones(len(vals)) if multiplicities is None else np.asarray(multiplicities, dtype=float)
    return np.asarray(vals), m


def _log_prefactor(m):
    return math.lgamma(float(np.sum(m))) - sum(math.lgamma(float(x)) for x in m)


def desc_vandermonde(u) -> float:
    """``prod_{j<k} (u_j - u_k)``; positive for descending ``u``."""
    u = np.asarray(u, dtype=float)
    iu = np.triu_indices(len(u), 1)
    return float(np.prod((u[:, None] - u[None, :])[iu]))


def vandermonde(u) -> float:
    """``Delta_n(u) = prod_{j<k} (u_k - u_j)``."""
    u = np.asarray(u, dtype=float)
    iu = np.triu_indices(len(u), 1)
    return float(np.prod((u[None, :] - u[:, None])[iu]))


def _chain_status(chain):
    """1 strictly decreasing, 0 non-increasing with a tie, -1 otherwise."""
    steps = np.diff(chain)
    if np.all(steps < 0):
        return 1
    if np.all(steps <= 0):
        return 0
    return -1


def _cross_log(lam, a, m):
    """``sum_{j,p} (m_p - 1) log|lam_j - a_p|`` and whether a negative power hits zero."""
    dist = np.abs(lam[:, None] - a[None, :])
    expo = np.broadcast_to(m - 1.0, dist.shape)
    hit = dist == 0
    if np.any(hit & (expo < 0)):
        return math.inf, True
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(expo == 0, 0.0, expo * np.log(dist))
    return float(terms.sum()), False


def _log_spectrum_gaps(a, m):
    iu = np.triu_indices(len(a), 1)
    gaps = (a[:, None] - a[None, :])[iu]
    expo = (m[:, None] + m[None, :] - 1.0)[iu]
    return float(np.sum(expo * np.log(gaps)))


def _general_projection(a, m, lam):
    n = len(a)
    lam = np.asarray(lam, dtype=float).ravel()
    if len(lam) != n - 1:
        raise ValueError(f"need {n - 1} eigenvalues, got {len(lam)}")
    if n == 1:
        return 1.0
    chain = np.empty(2 * n - 1)
    chain[0::2] = a
    chain[1::2] = lam
    status = _chain_status(chain)
    if status < 0:
        return 0.0
    cross, blown = _cross_log(lam, a, m)
    if blown:
        return math.inf
    if status == 0:
        return 0.0
    num = desc_vandermonde(lam)
    if num <= 0:
        return 0.0
    logv = _log_prefactor(m) + math.log(num) - _log_spectrum_gaps(a, m) + cross
    return math.exp(logv)


def _general_additive(a, m, b, lam_free):
    n = len(a)
    lam_free = np.asarray(lam_free, dtype=float).ravel()
    if len(lam_free) != n - 1:
        raise ValueError(f"need {n - 1} free coordinates, got {len(lam_free)}")
    if not b > 0:
        raise ValueError("shift b must be positive")
    lam = np.concatenate((lam_free, [a.sum() + b - lam_free.sum()]))
    if n == 1:
        return 1.0
    chain = np.empty(2 * n)
    chain[0::2] = lam
    chain[1::2] = a
    status = _chain_status(chain)
    if status < 0:
        return 0.0
    cross, blown = _cross_log(lam, a, m)
    if blown:
        return math.inf
    if status == 0:
        return 0.0
    num = desc_vandermonde(lam)
    if num <= 0:
        return 0.0
    N = float(np.sum(m))
    logv = (_log_prefactor(m) - (N - 1) * math.log(b) + math.log(num)
            - _log_spectrum_gaps(a, m) + cross)
    return math.exp(logv)


def pdf_projection(a, lam) -> float:
    """Density of the non-zero eigenvalues of ``Pi A Pi`` (complex case, distinct ``a``).

    ``Gamma(n) prod_{j<k<n}(lam_j - lam_k) / prod_{j<k}(a_j - a_k)`` on
    ``a_1 > lam_1 > a_2 > ... > lam_{n-1} > a_n``.
    """
    vals, _ = _spectrum(a)
    return _general_projection(vals, np.ones(len(vals)), lam)


def pdf_additive(a, b, lam_free) -> float:
    """Density of the eigenvalues of ``A + b x x^dagger`` in ``lam_1..lam_{n-1}``.

    ``Gamma(n) b^{-(n-1)} prod_{j<k}(lam_j - lam_k) / prod_{j<k}(a_j - a_k)``
    where ``lam_n = sum(a) + b - sum(lam_free)`` and
    ``lam_1 > a_1 > lam_2 > ... > lam_n > a_n``.
    """
    vals, _ = _spectrum(a)
    return _general_additive(vals, np.ones(len(vals)), b, lam_free)


def pdf_projection_degenerate(spec: SpectrumSpec, lam) -> float:
    """Projection density when ``a_l`` has multiplicity ``m_l``; ``lam`` are the ``n-1`` random eigenvalues."""
    vals, m = _spectrum(spec)
    return _general_projection(vals, m, lam)


def pdf_additive_degenerate(spec: SpectrumSpec, b, lam_free) -> float:
    """Additive density with multiplicities: prefactor ``Gamma(N)/prod Gamma(m_l) * b^{-(N-1)}``."""
    vals, m = _spectrum(spec)
    return _general_additive(vals, m, b, lam_free)


def pdf_projection_real(a, lam) -> float:
    """Real-Gaussian projection: ``Gamma(n/2) pi^{-n/2} Delta_{n-1}(lam) / prod |lam_j - a_p|^{1/2}``."""
    vals, _ = _spectrum(a)
    return _general_projection(vals, np.full(len(vals), 0.5), lam)


def pdf_additive_real(a, b, lam_free) -> float:
    """Real-Gaussian additive case: the degenerate formula at ``m_l = 1/2``, ``N = n/2``."""
    vals, _ = _spectrum(a)
    return _general_additive(vals, np.full(len(vals), 0.5), b, lam_free)


def spacing_support(a1, a2, b) -> tuple[float, float]:
    return abs(a1 - a2 - b), a1 - a2 + b


def pdf_spacing_n2(a1, a2, b, s) -> float:
    """Density of ``s = lam_1 - lam_2`` for the real ``n = 2`` additive case.

    ``(2/pi) s / sqrt((s^2 - s_min^2)(s_max^2 - s^2))`` on ``(|a_1 - a_2 - b|, a_1 - a_2 + b)``.
    """
    smin = a2 - a1 + b
    smax = a1 - a2 + b
    lo, hi = spacing_support(a1, a2, b)
    if not lo <= s <= hi:
        return 0.0
    if s == lo or s == hi:
        return math.inf
    return 2.0 / math.pi * s / math.sqrt((s * s - smin * smin) * (smax * smax - s * s))


def _chord(x, y):
    return 2.0 * np.abs(np.sin(0.5 * (x - y)))


def pdf_multiplicative(spec: AngularSpectrum, phi, psi_free) -> float:
    """Density of the non-trivial eigenphases of ``A W B W^dagger``.

    ``psi_free`` are the ``n - 1`` smallest eigenphases in ``[0, 2*pi)``
    (increasing); the largest is fixed by
    ``sum(psi) = phi + sum(theta)`` modulo ``2*pi``.
    """
    th = np.asarray(spec.angles, dtype=float)
    m = np.asarray(spec.multiplicities, dtype=float)
    n = len(th)
    psi_free = np.asarray(psi_free, dtype=float).ravel()
    if len(psi_free) != n - 1:
        raise ValueError(f"need {n - 1} free angles, got {len(psi_free)}")
    last = math.fmod(phi + math.fsum(th) - math.fsum(psi_free), TWO_PI)
    if last < 0:
        last += TWO_PI
    psi = np.concatenate((psi_free, [last]))
    if np.any(psi < 0) or np.any(psi >= TWO_PI) or np.any(np.diff(psi) <= 0):
        return 0.0
    if np.any(np.isin(psi, th)):
        if np.any(m < 1):
            return math.inf
        return 0.0
    if sorted(arc_indices(th, psi).tolist()) != list(range(n)):
        return 0.0
    iu = np.triu_indices(n, 1)
    chord_psi = _chord(psi[:, None], psi[None, :])[iu]
    chord_th = _chord(th[:, None], th[None, :])[iu]
    expo = (m[:, None] + m[None, :] - 1.0)[iu]
    # cross factors carry the multiplicity of the fixed phase theta_j
    cross = _chord(th[:, None], psi[None, :])
    N = float(m.sum())
    logv = (_log_prefactor(m) - (N - 1) * math.log(2 * abs(math.sin(0.5 * phi)))
            + float(np.sum(np.log(chord_psi))) - float(np.sum(expo * np.log(chord_th)))
            + float(np.sum((m - 1.0)[:, None] * np.log(cross))))
    return math.exp(logv)


def hciz(x, y) -> float:
    """Haar average of ``exp(Tr U^dagger X U Y)`` for Hermitian ``X, Y`` with eigenvalues ``x, y``.

    ``prod_{j=1}^n Gamma(j) det[exp(x_j y_k)] / (Delta_n(x) Delta_n(y))``.

    Raises
    ------
    NearConfluent
        If two entries of ``x`` or of ``y`` are closer than ``1e-8``.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    n = len(x)
    if len(y) != n:
        raise ValueError("x and y must have equal length")
    for u in (x, y):
        if n > 1 and np.min(np.diff(np.sort(u))) < 1e-8:
            raise NearConfluent("HCIZ formula is unreliable for (nearly) equal arguments")
    const = math.prod(math.gamma(j) for j in range(1, n + 1))
    det = np.linalg.det(np.exp(np.outer(x, y)))
    return float(const * det / (vandermonde(x) * vandermonde(y)))


def pdf_quadratic_form(b_spec, x) -> float:
    """Density of ``z B z^dagger`` for ``z`` uniform on the unit sphere of ``C^n``.

    ``(n-1)/2 * det[V; h] / Delta_n(b)`` with the first ``n-1`` rows the powers
    ``b_j^k`` and last row ``(b_j - x)^{n-2} sgn(b_j - x)``, ``b`` ascending.
    """
    b = np.sort(np.asarray(b_spec, dtype=float).ravel())
    n = len(b)
    if n < 2:
        raise ValueError("quadratic form density needs n >= 2")
    if np.min(np.diff(b)) <= 0:
        raise ValueError("eigenvalues of B must be distinct")
    if not b[0] < x < b[-1]:
        return 0.0
    rows = [b ** k for k in range(n - 1)]
    diff = b - x
    rows.append(diff ** (n - 2) * np.sign(diff))
    val = (n - 1) / 2 * np.linalg.det(np.array(rows)) / vandermonde(b)
    return max(float(val), 0.0)


def heckman_n3_regions(b, x):
    """Piecewise-linear value of the ordered ``n = 3`` diagonal-entries density (no prefactor)."""
    b1, b2, b3 = b
    x1, x2, x3 = x
    if not (x3 < x2 < x1):
        return 0.0
    if b2 < x3 and x1 < b1:
        return b2 - b3
    if b2 < x2 and x1 < b1 and b3 < x3 < b2:
        return x3 - b3
    if b2 < x1 < b1 and b3 < x3 and x2 < b2:
        return b1 - x1
    if b3 < x3 and x1 < b2:
        return b1 - b2
    return 0.0


def pdf_heckman_n3(b, x_free, ordered: bool = True) -> float:
    """Density of the diagonal of ``U diag(b) U^dagger``, ``n = 3``, in ``(x_1, x_2)``.

    With ``ordered`` (default) this is the density of the sorted diagonal
    ``x_1 > x_2 > x_3``; otherwise of the exchangeable diagonal, i.e. one sixth
    of the ordered density at the sorted point.  ``x_3 = sum(b) - x_1 - x_2``.
    """
    b = np.sort(np.asarray(b, dtype=float).ravel())[::-1]
    if len(b) != 3 or np.min(-np.diff(b)) <= 0:
        raise ValueError("need three distinct eigenvalues")
    x1, x2 = (float(v) for v in x_free)
    x = np.array([x1, x2, b.sum() - x1 - x2])
    if not ordered:
        x = np.sort(x)[::-1]
    val = 12.0 / abs(vandermonde(b)) * heckman_n3_regions(b, x)
    return val if ordered else val / 6.0
