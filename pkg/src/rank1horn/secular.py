"""Secular equations of rank-1 perturbations and their residue inverses.

Three equations are solved, one root per interlacing bracket:

* additive    ``1 - b * sum_l w_l / (lam - a_l) = 0``          (n roots)
* projection  ``sum_l w_l / (lam - a_l) = 0``                  (n - 1 roots)
* multiplicative
  ``cot(phi/2) - sum_l q_l * cot((psi - theta_l) / 2) = 0``    (n roots, one per arc)

Each root is located by a safeguarded Newton iteration in an offset
coordinate ``tau = lam - origin``, where ``origin`` is the pole closest to the
root.  Working relative to the nearest pole keeps the small gaps
``lam - a_l`` accurate to a few ulps, which is what the residue inverses need.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceFailure,
    DegenerateWeight,
    NonRealResidue,
    SupportViolation,
)
from .randsrc import RngLike, as_generator, dirichlet_array
from .spectra import (
    CONSTRAINT_ATOL,
    TWO_PI,
    AngularSpectrum,
    EigenSample,
    SpectrumSpec,
    WeightVector,
    arc_indices,
    phase_residual,
    wrap_angle,
)

#: weights below this are deflated: the pole is dropped and its root pinned to it
WEIGHT_FLOOR = 1e-14
MAXITER = 400
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SecularProblem:
    """Distinct fixed spectrum, simplex weights and either a shift or a phase."""

    spectrum: SpectrumSpec | AngularSpectrum
    weights: WeightVector
    shift: float | None = None
    phase: float | None = None

    def __post_init__(self):
        if len(self.weights) != self.spectrum.n:
            raise ValueError("weights length must equal the number of distinct eigenvalues")
        if (self.shift is None) == (self.phase is None):
            raise ValueError("exactly one of shift / phase must be given")


# ---------------------------------------------------------------------------
# root finding kernel

def _bracketed_newton(fun, lo, hi, x0, maxiter=MAXITER):
    """Vectorised safeguarded Newton for increasing functions on ``(lo, hi)``.

    ``fun(x)`` returns ``(f, df)`` with the same shape as ``x``; the root of
    every entry is known to lie strictly inside its bracket.  Steps leaving the
    current bracket are replaced by bisection.
    """
    lo = lo.copy()
    hi = hi.copy()
    x = x0.copy()
    active = np.ones(x.shape, dtype=bool)
    for _ in range(maxiter):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            f, df = fun(x)
            lo = np.where(active & (f < 0), x, lo)
            hi = np.where(active & (f > 0), x, hi)
            xn = x - f / df
        outside = ~((xn > lo) & (xn < hi))
        xn = np.where(outside, 0.5 * (lo + hi), xn)
        tiny = 4 * _EPS * np.maximum(np.abs(x), np.abs(xn))
        done = (f == 0) | (np.abs(xn - x) <= tiny) | (hi - lo <= 2 * tiny)
        x = np.where(active & (f != 0), xn, x)
        active &= ~done
        if not active.any():
            return x
    raise ConvergenceFailure(f"{int(active.sum())} secular roots unconverged after {maxiter} iterations")


def _check_weights(W):
    if np.any(W < 0) or not np.all(np.isfinite(W)):
        raise DegenerateWeight("weights must be finite and nonnegative")


def _split_rows(W):
    """Rows needing deflation (some weight below the floor) vs regular rows."""
    small = W < WEIGHT_FLOOR
    return np.flatnonzero(small.any(axis=1)), np.flatnonzero(~small.any(axis=1))


# ---------------------------------------------------------------------------
# additive case

def _half_brackets(lo_v, hi_v, f_mid, origin_lo):
    """Pick the half of each bracket holding the root and express it relative to a pole.

    ``f_mid`` is the (increasing) secular function at the bracket midpoints;
    ``origin_lo`` forces the lower pole as origin where the upper end is no pole.
    """
    mid = 0.5 * (lo_v + hi_v)
    lower = f_mid > 0
    use_lo = lower | origin_lo
    origin = np.where(use_lo, lo_v, hi_v)
    lo = np.where(lower, lo_v, mid) - origin
    hi = np.where(lower, mid, hi_v) - origin
    return use_lo, origin, lo, hi


def _additive_core(a, W, b):
    K, n = W.shape
    if n == 1:
        return np.full((K, 1), a[0] + b)
    lo_v = a
    hi_v = np.concatenate(([a[0] + b], a[:-1]))
    mid = 0.5 * (lo_v + hi_v)
    f_mid = 1.0 - b * (W[:, None, :] / (mid[:, None] - a[None, :])[None]).sum(-1)
    top = np.zeros(n, dtype=bool)
    top[0] = True                              # a_1 + b is not a pole
    _, origin, lo, hi = _half_brackets(lo_v, hi_v, f_mid, top)
    # offsets are exact differences of inputs, so the origin pole sits at zero
    d = a[None, None, :] - origin[:, :, None]
    Wb = b * W[:, None, :]

    def fun(tau):
        diff = tau[..., None] - d
        t = Wb / diff
        return 1.0 - t.sum(-1), (t / diff).sum(-1)

    tau = _bracketed_newton(fun, lo, hi, 0.5 * (lo + hi))
    return origin + tau


def solve_additive(a, w, b) -> np.ndarray:
    """Roots of ``1 - b sum w_l/(lam - a_l)`` for descending ``a``; rows of ``w`` are batched.

    Returns the roots in descending order, shape matching ``w``.
    """
    a = np.asarray(a, dtype=float)
    W = np.atleast_2d(np.asarray(w, dtype=float))
    if not b > 0:
        raise ValueError("shift b must be positive")
    _check_weights(W)
    out = np.empty_like(W)
    defl, regular = _split_rows(W)
    if len(regular):
        out[regular] = _additive_core(a, W[regular], b)
    for r in defl:
        keep = W[r] >= WEIGHT_FLOOR
        roots = _additive_core(a[keep], W[r][keep][None], b)[0]
        out[r] = np.sort(np.concatenate((roots, a[~keep])))[::-1]
    return out.reshape(np.shape(w))


def additive_roots(problem: SecularProblem) -> EigenSample:
    """Eigenvalues of ``A + b x x^dagger`` from the additive secular equation."""
    spec = problem.spectrum
    w = problem.weights.weights
    lam = solve_additive(spec.values, w, problem.shift)
    return _additive_sample(spec, lam, problem.shift, w)


def _additive_sample(spec, lam, b, w=None):
    resid = math.fsum(lam) - math.fsum(spec.values) - b
    det = tuple((float(v), m - 1) for v, m in zip(spec.values, spec.multiplicities) if m > 1)
    return EigenSample(lam, "additive", det, resid, w)


# ---------------------------------------------------------------------------
# projection case

def _projection_core(a, W):
    K, n = W.shape
    if n == 1:
        return np.empty((K, 0))
    lo_v = a[1:]
    hi_v = a[:-1]
    mid = 0.5 * (lo_v + hi_v)
    # f = -sum w/(lam - a) is increasing on each gap
    f_mid = -(W[:, None, :] / (mid[:, None] - a[None, :])[None]).sum(-1)
    _, origin, lo, hi = _half_brackets(lo_v, hi_v, f_mid, np.zeros(n - 1, dtype=bool))
    d = a[None, None, :] - origin[:, :, None]
    Wx = W[:, None, :]

    def fun(tau):
        diff = tau[..., None] - d
        t = Wx / diff
        return -t.sum(-1), (t / diff).sum(-1)

    tau = _bracketed_newton(fun, lo, hi, 0.5 * (lo + hi))
    return origin + tau


def solve_projection(a, w) -> np.ndarray:
    """The ``n - 1`` roots of ``sum w_l/(lam - a_l)``, descending; rows of ``w`` batched."""
    a = np.asarray(a, dtype=float)
    W = np.atleast_2d(np.asarray(w, dtype=float))
    _check_weights(W)
    K, n = W.shape
    out = np.empty((K, n - 1))
    defl, regular = _split_rows(W)
    if len(regular):
        out[regular] = _projection_core(a, W[regular])
    for r in defl:
        keep = W[r] >= WEIGHT_FLOOR
        roots = _projection_core(a[keep], W[r][keep][None])[0]
        out[r] = np.sort(np.concatenate((roots, a[~keep])))[::-1]
    return out[0] if np.ndim(w) == 1 else out


def projection_roots(problem: SecularProblem) -> EigenSample:
    """Non-zero eigenvalues of ``Pi A Pi``; the zero is recorded as deterministic."""
    spec = problem.spectrum
    w = problem.weights.weights
    lam = solve_projection(spec.values, w)
    return _projection_sample(spec, lam, w)


def _merge_det(pairs):
    out = {}
    for v, m in pairs:
        if m > 0:
            out[v] = out.get(v, 0) + m
    return tuple(sorted(out.items(), key=lambda p: -p[0]))


def _projection_sample(spec, lam, w=None):
    det = _merge_det([(0.0, 1)] + [(float(v), m - 1) for v, m in zip(spec.values, spec.multiplicities)])
    return EigenSample(lam, "projection", det, 0.0, w)


# ---------------------------------------------------------------------------
# multiplicative case

def _multiplicative_core(theta, Q, phi):
    K, n = Q.shape
    if n == 1:
        return np.full((K, 1), theta[0] + phi - TWO_PI)
    lo_v = np.concatenate(([theta[-1] - TWO_PI], theta[:-1]))
    hi_v = theta
    mid = 0.5 * (lo_v + hi_v)
    cot_half_phi = 1.0 / math.tan(0.5 * phi)

    def raw(psi_arr):
        return cot_half_phi - (Q[:, None, :] / np.tan(0.5 * (psi_arr[..., None] - theta))).sum(-1)

    f_mid = raw(np.broadcast_to(mid, (K, n)))
    use_lo, origin, lo, hi = _half_brackets(lo_v, hi_v, f_mid, np.zeros(n, dtype=bool))
    # origin pole index; arc 0 starts at theta_n - 2*pi
    k = np.where(use_lo, np.arange(n) - 1, np.arange(n)) % n
    # pole offsets reduced to (-pi, pi] so that the origin pole is exactly zero
    d = np.remainder(theta[None, None, :] - theta[k][:, :, None] + np.pi, TWO_PI) - np.pi
    Qx = Q[:, None, :]

    def fun(tau):
        half = 0.5 * (tau[..., None] - d)
        s = np.sin(half)
        c = np.cos(half)
        f = cot_half_phi - (Qx * c / s).sum(-1)
        df = (0.5 * Qx / (s * s)).sum(-1)
        return f, df

    tau = _bracketed_newton(fun, lo, hi, 0.5 * (lo + hi))
    return origin + tau


def solve_multiplicative(theta, q, phi) -> np.ndarray:
    """Eigenphases ``psi`` (one per cyclic arc), wrapped to ``[0, 2*pi)`` and sorted.

    ``theta`` increasing in ``[0, 2*pi)``, ``phi`` in ``(0, 2*pi)``; rows of ``q`` batched.
    """
    theta = np.asarray(theta, dtype=float)
    Q = np.atleast_2d(np.asarray(q, dtype=float))
    if not 0 < phi < TWO_PI:
        raise ValueError("phase phi must lie in (0, 2*pi)")
    _check_weights(Q)
    out = np.empty_like(Q)
    defl, regular = _split_rows(Q)
    if len(regular):
        out[regular] = _multiplicative_core(theta, Q[regular], phi)
    for r in defl:
        keep = Q[r] >= WEIGHT_FLOOR
        roots = _multiplicative_core(theta[keep], Q[r][keep][None], phi)[0]
        out[r] = np.concatenate((roots, theta[~keep]))
    out = np.sort(wrap_angle(out), axis=-1)
    return out.reshape(np.shape(q))


def multiplicative_roots(problem: SecularProblem) -> EigenSample:
    """Non-trivial eigenphases of ``A W B W^dagger`` with ``B = diag(e^{i phi}, 1, ..., 1)``."""
    spec = problem.spectrum
    q = problem.weights.weights
    psi = solve_multiplicative(spec.angles, q, problem.phase)
    return _multiplicative_sample(spec, psi, problem.phase, q)


def _multiplicative_sample(spec, psi, phi, q=None):
    det = tuple((float(v), m - 1) for v, m in zip(spec.angles, spec.multiplicities) if m > 1)
    return EigenSample(psi, "multiplicative", det, phase_residual(psi, spec.angles, phi), q)


# ---------------------------------------------------------------------------
# residue inverses

def _strict_chain(*seqs):
    chain = np.empty(sum(len(s) for s in seqs))
    for k, s in enumerate(seqs):
        chain[k::len(seqs)] = s
    return np.all(np.diff(chain) < 0)


def _to_simplex(w, tol):
    if np.any(w < -tol):
        raise SupportViolation(f"residues give negative weights {w}")
    w = np.clip(w, 0.0, None)
    total = w.sum()
    if abs(total - 1.0) > tol:
        raise SupportViolation(f"recovered weights sum to {total!r}")
    return WeightVector.of(w / total)


def weights_from_roots_additive(a, lam, b) -> WeightVector:
    """Recover ``w`` from the additive roots: ``-b w_j = prod_l (a_j - lam_l) / prod_{l!=j} (a_j - a_l)``."""
    a = np.asarray(a, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if len(lam) != len(a) or not _strict_chain(lam, a) or not (lam[0] < a[0] + b or len(a) == 1):
        raise SupportViolation("roots do not interlace lam_1 > a_1 > lam_2 > ... > lam_n > a_n")
    scale = max(1.0, a[0] - a[-1] + b)
    if abs(lam.sum() - a.sum() - b) > CONSTRAINT_ATOL * scale:
        raise SupportViolation("roots violate the trace identity")
    gaps = a[:, None] - a[None, :]
    np.fill_diagonal(gaps, 1.0)
    w = -np.prod(a[:, None] - lam[None, :], axis=1) / np.prod(gaps, axis=1) / b
    return _to_simplex(w, 1e-10 * scale / b)


def weights_from_roots_projection(a, lam) -> WeightVector:
    """Recover ``w`` from the projection roots: ``w_j = prod_l (a_j - lam_l) / prod_{l!=j} (a_j - a_l)``."""
    a = np.asarray(a, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if len(lam) != len(a) - 1 or not _strict_chain(a[:-1], lam) or (len(lam) and not lam[-1] > a[-1]):
        raise SupportViolation("roots do not interlace a_1 > lam_1 > a_2 > ... > lam_{n-1} > a_n")
    gaps = a[:, None] - a[None, :]
    np.fill_diagonal(gaps, 1.0)
    w = np.prod(a[:, None] - lam[None, :], axis=1) / np.prod(gaps, axis=1)
    return _to_simplex(w, 1e-10)


def weights_from_roots_multiplicative(theta, psi, phi) -> WeightVector:
    """Recover ``q`` from eigenphases via ``-(t-1) lam_j q_j = prod(lam_j - lt_l) / prod_{l!=j}(lam_j - lam_l)``."""
    theta = np.asarray(theta, dtype=float)
    psi = wrap_angle(np.asarray(psi, dtype=float))
    n = len(theta)
    t = complex(math.cos(phi), math.sin(phi))
    if abs(t - 1) < 1e-12:
        raise SupportViolation("phase phi = 0 makes the residue map singular")
    if len(psi) != n or np.any(np.isin(psi, theta)):
        raise SupportViolation("need one eigenphase per arc, distinct from the fixed phases")
    if sorted(arc_indices(theta, psi).tolist()) != list(range(n)):
        raise SupportViolation("eigenphases do not interlace the fixed phases cyclically")
    if abs(phase_residual(psi, theta, phi)) > CONSTRAINT_ATOL:
        raise SupportViolation("eigenphases violate the determinant constraint")
    lam = np.exp(1j * theta)
    lt = np.exp(1j * psi)
    gaps = lam[:, None] - lam[None, :]
    np.fill_diagonal(gaps, 1.0)
    q = np.prod(lam[:, None] - lt[None, :], axis=1) / np.prod(gaps, axis=1) / (-(t - 1) * lam)
    if np.any(np.abs(q.imag) > 1e-10):
        raise NonRealResidue(f"residues have imaginary parts {q.imag}")
    return _to_simplex(q.real, 1e-10)


# ---------------------------------------------------------------------------
# Jacobians

def cauchy_double_alternant(x, y) -> float:
    """Closed form of ``det[1/(x_j - y_l)]``.

    Equals ``(-1)^{m(m-1)/2} prod_{j<k}(x_j - x_k)(y_j - y_k) / prod_{j,k}(x_j - y_k)``
    for ``m = len(x)``; the sign factor is +1 for ``m`` = 0, 1, 4, 5 mod 4.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m = len(x)
    iu = np.triu_indices(m, 1)
    num = np.prod((x[:, None] - x[None, :])[iu]) * np.prod((y[:, None] - y[None, :])[iu])
    den = np.prod(x[:, None] - y[None, :])
    sign = -1.0 if (m * (m - 1) // 2) % 2 else 1.0
    return float(sign * num / den)


def cauchy_matrix(x, y) -> np.ndarray:
    return 1.0 / (np.asarray(x, float)[:, None] - np.asarray(y, float)[None, :])


def _full_additive_point(a, lam, b):
    a = np.asarray(a, dtype=float)
    lam = np.asarray(lam, dtype=float)
    n = len(a)
    if len(lam) not in (n - 1, n):
        raise ValueError(f"need {n - 1} free coordinates, got {len(lam)}")
    free = lam[: n - 1]
    last = a.sum() + b - free.sum()
    return a, np.concatenate((free, [last]))


def additive_jacobian_matrix(a, lam, b) -> np.ndarray:
    """``[1/(a_j - lam_l) - 1/(a_j - lam_n)]`` over ``j, l < n``, with ``lam_n`` from the trace."""
    a, full = _full_additive_point(a, lam, b)
    n = len(a)
    return cauchy_matrix(a[: n - 1], full[: n - 1]) - (1.0 / (a[: n - 1] - full[-1]))[:, None]


def jacobian_additive(a, lam, b) -> float:
    """``|det[1/(a_j - lam_l) - 1/(a_j - lam_n)]|`` by the product formula.

    ``lam`` may hold all ``n`` roots or just the ``n - 1`` free ones; in both
    cases ``lam_n`` is recomputed from ``sum(lam) = sum(a) + b``.
    """
    a, full = _full_additive_point(a, lam, b)
    if not _strict_chain(full, a):
        raise SupportViolation("point is outside the interlacing region")
    n = len(a)
    head_a, head_l, last = a[: n - 1], full[: n - 1], full[-1]
    factor = np.prod((head_l - last) / (head_a - last))
    return abs(float(factor) * cauchy_double_alternant(head_a, head_l))


def jacobian_additive_direct(a, lam, b) -> float:
    """Same quantity as :func:`jacobian_additive` from a dense LU determinant."""
    m = additive_jacobian_matrix(a, lam, b)
    return abs(float(np.linalg.det(m))) if m.size else 1.0


# ---------------------------------------------------------------------------
# secular samplers

def dirichlet_params(multiplicities, field="complex") -> np.ndarray:
    """Dirichlet parameters of the block weights: ``m_l`` (complex) or ``m_l / 2`` (real)."""
    m = np.asarray(multiplicities, dtype=float)
    if field == "complex":
        return m
    if field == "real":
        return m / 2
    raise ValueError(f"unknown field {field!r}")


def sample_additive(spec: SpectrumSpec, b: float, field: str = "complex",
                    rng: RngLike = None) -> EigenSample:
    w = dirichlet_array(dirichlet_params(spec.multiplicities, field), as_generator(rng))
    return _additive_sample(spec, solve_additive(spec.values, w, b), b, w)


def sample_projection(spec: SpectrumSpec, field: str = "complex", rng: RngLike = None) -> EigenSample:
    w = dirichlet_array(dirichlet_params(spec.multiplicities, field), as_generator(rng))
    return _projection_sample(spec, solve_projection(spec.values, w), w)


def sample_multiplicative(spec: AngularSpectrum, phi: float, rng: RngLike = None) -> EigenSample:
    q = dirichlet_array(spec.mult_array, as_generator(rng))
    return _multiplicative_sample(spec, solve_multiplicative(spec.angles, q, phi), phi, q)
