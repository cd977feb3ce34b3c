"""Verification harness: goodness-of-fit tests, quadrature and consistency checks.

Every check returns a :class:`TestReport` whose ``passed`` flag is exactly
``statistic <= threshold``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, stats as sps
from scipy.interpolate import PchipInterpolator
from shapely.geometry import Polygon, box

from . import densities, secular
from .errors import EmptySample, TolUnreached
from .randsrc import RngLike, as_generator, dirichlet_array
from .spectra import TWO_PI, SpectrumSpec, sample_violations


@dataclass
class TestReport:
    __test__ = False  # not a pytest class

    test_name: str
    statistic: float
    threshold: float
    n_samples: int
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"test_name": self.test_name, "statistic": self.statistic,
                "threshold": self.threshold, "n_samples": self.n_samples,
                "pass": self.passed, "details": self.details}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), default=float)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict} {self.test_name}: {self.statistic:.4g} <= {self.threshold:.4g} (n={self.n_samples})"


def make_report(name, statistic, threshold, n, **details):
    statistic = float(statistic)
    threshold = float(threshold)
    return TestReport(name, statistic, threshold, int(n), bool(statistic <= threshold), details)


# ---------------------------------------------------------------------------
# goodness of fit

def ks_two_sample(xs, ys, level: float = 0.01, name: str = "ks_two_sample") -> TestReport:
    """Two-sample Kolmogorov-Smirnov test with the asymptotic (Kolmogorov) null.

    The threshold is the critical distance ``K_{1-level} / sqrt(n m / (n + m))``,
    so ``passed`` is equivalent to the asymptotic p-value being ``>= level``.
    """
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    if len(xs) == 0 or len(ys) == 0:
        raise EmptySample("both samples must be nonempty")
    d = sps.ks_2samp(xs, ys, method="asymp").statistic
    en = len(xs) * len(ys) / (len(xs) + len(ys))
    crit = sps.kstwobign.isf(level) / math.sqrt(en)
    p = float(sps.kstwobign.sf(d * math.sqrt(en)))
    return make_report(name, d, crit, len(xs) + len(ys), p_value=p, level=level)


def ks_one_sample(xs, cdf: Callable, level: float = 0.01, name: str = "ks_one_sample") -> TestReport:
    """One-sample KS test of ``xs`` against ``cdf`` (vectorised callable)."""
    xs = np.asarray(xs, dtype=float).ravel()
    if len(xs) == 0:
        raise EmptySample("sample must be nonempty")
    res = sps.ks_1samp(xs, cdf, method="exact")
    crit = sps.kstwo.isf(level, len(xs))
    return make_report(name, res.statistic, crit, len(xs), p_value=float(res.pvalue), level=level)


def _pool(observed, expected, min_expected):
    """Merge each bin with expected count below ``min_expected`` into its smaller neighbour."""
    obs, exp = list(observed), list(expected)
    while len(exp) > 1:
        k = int(np.argmin(exp))
        if exp[k] >= min_expected:
            break
        if k == 0:
            j = 1
        elif k == len(exp) - 1:
            j = k - 1
        else:
            j = k - 1 if exp[k - 1] <= exp[k + 1] else k + 1
        o, e = obs.pop(k), exp.pop(k)
        j -= j > k
        obs[j] += o
        exp[j] += e
    return np.array(obs), np.array(exp)


def chi_square(observed, expected_prob, n_total: int, level: float = 0.01, min_expected: float = 5.0,
               name: str = "chi_square") -> TestReport:
    """Pearson chi-square test of binned counts against bin probabilities.

    Mass not covered by the bins forms one extra bin.  Bins expecting fewer
    than ``min_expected`` counts are merged into a neighbour.
    """
    observed = np.asarray(observed, dtype=float).ravel()
    expected = np.asarray(expected_prob, dtype=float).ravel() * n_total
    rest_exp = n_total - expected.sum()
    rest_obs = n_total - observed.sum()
    if rest_obs > 0 or rest_exp > 1e-9 * n_total:
        observed = np.append(observed, rest_obs)
        expected = np.append(expected, max(rest_exp, 0.0))
    observed, expected = _pool(observed, expected, min_expected)
    stat = float(np.sum((observed - expected) ** 2 / expected))
    dof = len(expected) - 1
    crit = sps.chi2.isf(level, dof)
    return make_report(name, stat, crit, n_total, dof=dof, p_value=float(sps.chi2.sf(stat, dof)), level=level)


# ---------------------------------------------------------------------------
# quadrature

def _piece(f, lo, hi, tol, limit):
    """Integral over ``[lo, hi]`` with ``x = edge +- u^2`` at both ends."""
    if hi <= lo:
        return 0.0, 0.0
    mid = 0.5 * (lo + hi)
    r = math.sqrt(mid - lo)
    left, e1 = integrate.quad(lambda u: 2 * u * f(lo + u * u), 0.0, r,
                              epsabs=tol / 2, epsrel=0.0, limit=limit)
    r = math.sqrt(hi - mid)
    right, e2 = integrate.quad(lambda u: 2 * u * f(hi - u * u), 0.0, r,
                               epsabs=tol / 2, epsrel=0.0, limit=limit)
    return left + right, e1 + e2


def integrate_1d(f, breaks: Sequence[float], tol: float = 1e-10, limit: int = 200):
    """Integral of ``f`` over ``[breaks[0], breaks[-1]]``, split at every break; returns ``(value, error)``."""
    pts = np.unique(np.asarray(breaks, dtype=float))
    total = err = 0.0
    k = max(len(pts) - 1, 1)
    for lo, hi in zip(pts[:-1], pts[1:]):
        v, e = _piece(f, lo, hi, tol / k, limit)
        total += v
        err += e
    return total, err


def integrate_2d(f, outer_breaks, inner_breaks: Callable, tol: float = 1e-9, limit: int = 200):
    """Nested integral of ``f(outer, inner)``; ``inner_breaks(outer)`` gives the inner breakpoints."""
    inner_err = [0.0]

    def g(x):
        brk = inner_breaks(x)
        if len(brk) < 2 or brk[-1] <= brk[0]:
            return 0.0
        v, e = integrate_1d(lambda y: f(x, y), brk, tol * 1e-2, limit)
        inner_err[0] = max(inner_err[0], e)
        return v

    span = float(np.ptp(outer_breaks)) or 1.0
    val, err = integrate_1d(g, outer_breaks, tol / 2, limit)
    return val, err + inner_err[0] * span


def normalization_integral(density: Callable, support, tol: float = 1e-8):
    """Total mass of ``density`` over ``support``.

    ``support`` is either a sequence of 1-d breakpoints, or a pair
    ``(outer_breaks, inner_breaks)`` for a 2-d density ``density(outer, inner)``.
    Inverse square-root singularities are allowed at every breakpoint.

    Raises
    ------
    TolUnreached
        If the quadrature error estimate exceeds ``tol``.
    """
    if isinstance(support, tuple) and len(support) == 2 and callable(support[1]):
        val, err = integrate_2d(density, support[0], support[1], tol)
    else:
        val, err = integrate_1d(density, support, tol)
    if not err <= tol:
        raise TolUnreached(f"error estimate {err:.3g} exceeds tolerance {tol:.3g}")
    return val


def quadrature_cdf(density: Callable, lo: float, hi: float, nodes: int = 801):
    """Vectorised CDF of a 1-d density on ``(lo, hi)`` built by quadrature.

    Uses ``x = lo + (hi - lo)(1 - cos(pi t))/2``, which removes inverse
    square-root edge singularities, Gauss-Legendre on a fine ``t`` grid and a
    monotone cubic interpolant in ``t``.
    """
    t = np.linspace(0.0, 1.0, nodes)
    gx, gw = np.polynomial.legendre.leggauss(8)
    width = hi - lo

    def g(tt):
        x = lo + width * (1 - np.cos(math.pi * tt)) / 2
        jac = width * math.pi / 2 * np.sin(math.pi * tt)
        return np.array([density(v) for v in x]) * jac

    cells = np.empty(nodes - 1)
    for k in range(nodes - 1):
        a, b = t[k], t[k + 1]
        tt = 0.5 * (b - a) * gx + 0.5 * (a + b)
        cells[k] = 0.5 * (b - a) * np.dot(gw, g(tt))
    cum = np.concatenate(([0.0], np.cumsum(cells)))
    total = cum[-1]
    interp = PchipInterpolator(t, cum / total)

    def cdf(x):
        x = np.asarray(x, dtype=float)
        u = np.clip((x - lo) / width, 0.0, 1.0)
        tt = np.arccos(1 - 2 * u) / math.pi
        return np.clip(interp(tt), 0.0, 1.0)

    cdf.total = total
    return cdf


# ---------------------------------------------------------------------------
# supports of the low-dimensional densities

def additive_support(a, b):
    """Breakpoints for the free coordinates of the ``n = 2`` or ``n = 3`` additive density.

    ``n = 2``: 1-d breaks for ``lam_1``.  ``n = 3``: ``(outer, inner)`` with
    ``lam_2`` outer and ``lam_1`` inner; pair it with :func:`swap_args`.
    """
    a = np.asarray(a, dtype=float)
    if len(a) == 2:
        return [max(a[0], a[1] + b), a[0] + b]
    if len(a) == 3:
        S = a.sum() + b
        top = min(a[0], a[1] + b)
        outer = [a[1], top]
        kink = S - a[0] - a[1]
        if a[1] < kink < top:
            outer.insert(1, kink)
        return outer, lambda l2: [max(a[0], S - l2 - a[1]), S - l2 - a[2]]
    raise ValueError("only n = 2, 3 supported")


def projection_support(a):
    a = np.asarray(a, dtype=float)
    if len(a) == 2:
        return [a[1], a[0]]
    if len(a) == 3:
        return [a[1], a[0]], lambda l1: [a[2], a[1]]
    raise ValueError("only n = 2, 3 supported")


def multiplicative_support_n2(theta, phi):
    """Breakpoints in the smallest eigenphase for ``n = 2`` (all discontinuities included)."""
    c = phi + float(np.sum(theta))
    pts = [0.0, TWO_PI, c % TWO_PI, (c / 2) % math.pi, (c / 2) % math.pi + math.pi]
    pts += [t % TWO_PI for t in theta] + [(c - t) % TWO_PI for t in theta]
    return sorted(set(pts))


def _halfplane(a, b, c, extent=1e6):
    """Polygon approximating ``{a x + b y <= c}`` (large but finite)."""
    nrm = math.hypot(a, b)
    nx, ny = a / nrm, b / nrm
    px, py = nx * c / nrm, ny * c / nrm
    tx, ty = -ny, nx
    L = extent
    return Polygon([(px + L * tx, py + L * ty), (px - L * tx, py - L * ty),
                    (px - L * tx - L * nx, py - L * ty - L * ny),
                    (px + L * tx - L * nx, py + L * ty - L * ny)])


def heckman_n3_pieces(b):
    """Regions of the ordered ``n = 3`` diagonal density in ``(x_1, x_2)``.

    Returns ``[(polygon, value)]`` where ``value(x1, x2)`` is affine on the
    polygon and already includes the normalising prefactor, so integrals are
    exact as ``area * value(centroid)``.
    """
    b1, b2, b3 = np.sort(np.asarray(b, dtype=float))[::-1]
    S = b1 + b2 + b3
    scale = 12.0 / abs(densities.vandermonde([b1, b2, b3]))
    L = 10.0 * (abs(b1) + abs(b3) + 1.0)

    def region(*halfplanes):
        # ordered chamber: x2 < x1 and x3 < x2
        poly = _halfplane(-1.0, 1.0, 0.0, L).intersection(_halfplane(-1.0, -2.0, -S, L))
        for hp in halfplanes:
            poly = poly.intersection(_halfplane(*hp, L))
        return poly

    return [
        # x3 > b2, x1 < b1
        (region((1, 1, S - b2), (1, 0, b1)), lambda x1, x2: scale * (b2 - b3)),
        # x2 > b2, x1 < b1, b3 < x3 < b2
        (region((0, -1, -b2), (1, 0, b1), (1, 1, S - b3), (-1, -1, b2 - S)),
         lambda x1, x2: scale * (S - x1 - x2 - b3)),
        # b2 < x1 < b1, x3 > b3, x2 < b2
        (region((-1, 0, -b2), (1, 0, b1), (1, 1, S - b3), (0, 1, b2)),
         lambda x1, x2: scale * (b1 - x1)),
        # x3 > b3, x1 < b2
        (region((1, 1, S - b3), (1, 0, b2)), lambda x1, x2: scale * (b1 - b2)),
    ]


def heckman_cell_probabilities(b, x1_edges, x2_edges) -> np.ndarray:
    """Exact probabilities of the ordered diagonal falling in each rectangle of a grid."""
    pieces = [(poly, f) for poly, f in heckman_n3_pieces(b) if not poly.is_empty]
    out = np.zeros((len(x1_edges) - 1, len(x2_edges) - 1))
    for i in range(len(x1_edges) - 1):
        for j in range(len(x2_edges) - 1):
            cell = box(x1_edges[i], x2_edges[j], x1_edges[i + 1], x2_edges[j + 1])
            for poly, f in pieces:
                part = cell.intersection(poly)
                if part.area > 0:
                    c = part.centroid
                    out[i, j] += part.area * f(c.x, c.y)
    return out


def heckman_total_mass(b) -> float:
    return float(sum(p.area * f(p.centroid.x, p.centroid.y)
                     for p, f in heckman_n3_pieces(b) if p.area > 0))


def swap_args(f):
    return lambda outer, inner: f(inner, outer)


# ---------------------------------------------------------------------------
# structural checks

def dirichlet_density(w, params) -> float:
    """Dirichlet density on the simplex in the first ``n - 1`` coordinates."""
    w = np.asarray(w, dtype=float)
    s = np.asarray(params, dtype=float)
    logc = math.lgamma(float(s.sum())) - sum(math.lgamma(float(x)) for x in s)
    return math.exp(logc + float(np.sum((s - 1) * np.log(w))))


def roundtrip_report(case_tag: str, spec, params: dict | None = None, n_trials: int = 1000,
                     rng: RngLike = None, threshold: float = 1e-8) -> TestReport:
    """Max-abs error of weights -> roots -> weights over ``n_trials`` random weight draws."""
    params = params or {}
    gen = as_generator(rng)
    worst = 0.0
    for _ in range(n_trials):
        if case_tag == "additive":
            w = dirichlet_array(spec.mult_array, gen)
            lam = secular.solve_additive(spec.values, w, params["b"])
            back = secular.weights_from_roots_additive(spec.values, lam, params["b"])
        elif case_tag == "projection":
            w = dirichlet_array(spec.mult_array, gen)
            lam = secular.solve_projection(spec.values, w)
            back = secular.weights_from_roots_projection(spec.values, lam)
        elif case_tag == "multiplicative":
            w = dirichlet_array(spec.mult_array, gen)
            psi = secular.solve_multiplicative(spec.angles, w, params["phi"])
            back = secular.weights_from_roots_multiplicative(spec.angles, psi, params["phi"])
        else:
            raise ValueError(f"no round trip for case {case_tag!r}")
        worst = max(worst, float(np.max(np.abs(back.weights - w))))
    return make_report(f"roundtrip_{case_tag}_n{spec.n}", worst, threshold, n_trials)


def change_of_variables_check(spec: SpectrumSpec, b: float, n_trials: int = 100,
                              rng: RngLike = None, rtol: float = 1e-8) -> TestReport:
    """Dirichlet density times the residue-map Jacobian against the closed-form additive density.

    For each trial: draw weights, solve for the roots, recover the weights by
    residues and assemble ``Dir(w) * prod_{j<n} w_j * |det[1/(a_j - lam_l) - 1/(a_j - lam_n)]|``
    with the determinant from the Cauchy product formula.  The statistic is
    the worst relative deviation from :func:`densities.pdf_additive_degenerate`.
    """
    gen = as_generator(rng)
    worst = 0.0
    worst_det = 0.0
    for _ in range(n_trials):
        w = dirichlet_array(spec.mult_array, gen)
        lam = secular.solve_additive(spec.values, w, b)
        wr = secular.weights_from_roots_additive(spec.values, lam, b).weights
        jac = secular.jacobian_additive(spec.values, lam[:-1], b)
        lhs = dirichlet_density(wr, spec.mult_array) * float(np.prod(wr[:-1])) * jac
        rhs = densities.pdf_additive_degenerate(spec, b, lam[:-1])
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
        direct = secular.jacobian_additive_direct(spec.values, lam[:-1], b)
        worst_det = max(worst_det, abs(direct - jac) / jac)
    return make_report(f"change_of_variables_n{spec.n}", worst, rtol, n_trials,
                   product_vs_direct_det=worst_det)


def constraint_report(samples, spec, *, b: float | None = None, phi: float | None = None,
                      name: str = "constraints") -> TestReport:
    """Number of samples breaking interlacing or the trace / phase constraint (threshold 0)."""
    bad = 0
    first = None
    for s in samples:
        problems = sample_violations(s, spec, b=b, phi=phi)
        if problems:
            bad += 1
            first = first or problems
    return make_report(name, bad, 0, len(samples), first_violation=first)
