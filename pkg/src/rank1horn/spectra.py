"""Domain types for fixed spectra, weight vectors and eigenvalue samples.

Real spectra are stored in descending order ``a_1 > a_2 > ... > a_n``; angular
spectra in increasing order inside ``[0, 2*pi)``.  Repeated eigenvalues are
given once, with a multiplicity, never as near-equal entries.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DuplicateEigenvalue,
    NonPositiveMultiplicity,
    OrderViolation,
    SpectrumError,
    UnsupportedCase,
)

TWO_PI = 2.0 * math.pi

#: relative gap below which two eigenvalues count as equal
MERGE_RTOL = 1e-10
#: absolute trace / phase-sum tolerance for O(1) spectra
CONSTRAINT_ATOL = 1e-9
#: tolerance on the simplex normalisation of a weight vector
SIMPLEX_ATOL = 1e-12

CASE_TAGS = ("additive", "projection", "multiplicative", "quadratic_form", "diagonal_entries")


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _check_multiplicities(multiplicities, n):
    mult = list(multiplicities)
    if len(mult) != n:
        raise SpectrumError(f"got {n} values but {len(mult)} multiplicities")
    for m in mult:
        if int(m) != m or m < 1:
            raise NonPositiveMultiplicity(f"multiplicity {m!r} is not a positive integer")
    return tuple(int(m) for m in mult)


@dataclass(frozen=True, eq=False)
class SpectrumSpec:
    """Distinct real eigenvalues ``a_1 > ... > a_n`` with multiplicities."""

    values: np.ndarray
    multiplicities: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def total_dim(self) -> int:
        return sum(self.multiplicities)

    @property
    def mult_array(self) -> np.ndarray:
        return np.asarray(self.multiplicities, dtype=float)

    @property
    def diameter(self) -> float:
        return float(self.values[0] - self.values[-1])

    def expanded(self) -> np.ndarray:
        """Diagonal of the ``N x N`` matrix ``A``, each value repeated."""
        return np.repeat(self.values, self.multiplicities)

    def to_dict(self) -> dict:
        return {"values": [float(v) for v in self.values],
                "multiplicities": list(self.multiplicities)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict, allow_sort: bool = False) -> "SpectrumSpec":
        values = d["values"]
        mult = d.get("multiplicities", [1] * len(values))
        return validate_spectrum(values, mult, allow_sort=allow_sort)

    @classmethod
    def from_json(cls, text: str, allow_sort: bool = False) -> "SpectrumSpec":
        return cls.from_dict(json.loads(text), allow_sort=allow_sort)

    def __repr__(self):
        return f"SpectrumSpec(values={list(self.values)}, multiplicities={list(self.multiplicities)})"


@dataclass(frozen=True, eq=False)
class AngularSpectrum:
    """Distinct eigenphases ``0 <= theta_1 < ... < theta_n < 2*pi`` with multiplicities."""

    angles: np.ndarray
    multiplicities: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.angles)

    @property
    def total_dim(self) -> int:
        return sum(self.multiplicities)

    @property
    def mult_array(self) -> np.ndarray:
        return np.asarray(self.multiplicities, dtype=float)

    def expanded(self) -> np.ndarray:
        return np.repeat(self.angles, self.multiplicities)

    def arcs(self) -> list[tuple[float, float]]:
        """Cyclic arcs ``(theta_{i-1}, theta_i)``; the first wraps through zero."""
        th = self.angles
        lows = np.concatenate(([th[-1] - TWO_PI], th[:-1]))
        return [(float(lo), float(hi)) for lo, hi in zip(lows, th)]

    def to_dict(self) -> dict:
        return {"angles": [float(v) for v in self.angles],
                "multiplicities": list(self.multiplicities)}

    @classmethod
    def from_dict(cls, d: dict, allow_sort: bool = False) -> "AngularSpectrum":
        angles = d.get("angles", d.get("values"))
        mult = d.get("multiplicities", [1] * len(angles))
        return validate_angles(angles, mult, allow_sort=allow_sort)

    def __repr__(self):
        return f"AngularSpectrum(angles={list(self.angles)}, multiplicities={list(self.multiplicities)})"


@dataclass(frozen=True, eq=False)
class WeightVector:
    """A point on the probability simplex."""

    weights: np.ndarray

    def __post_init__(self):
        w = self.weights
        if w.ndim != 1 or len(w) == 0:
            raise ValueError("weights must be a nonempty 1-d sequence")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError(f"weights must be finite and nonnegative, got {w}")
        if abs(w.sum() - 1.0) > SIMPLEX_ATOL * max(1, len(w)):
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")

    @classmethod
    def of(cls, weights: Iterable[float]) -> "WeightVector":
        return cls(_frozen(list(weights)))

    def __len__(self):
        return len(self.weights)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.weights, dtype=dtype)


@dataclass(frozen=True, eq=False)
class EigenSample:
    """One draw of the non-deterministic eigenvalues of a rank-1 ensemble.

    ``eigenvalues`` is descending for real cases and increasing in
    ``[0, 2*pi)`` for the multiplicative case.  ``deterministic_part`` lists
    eigenvalues pinned by degeneracy or by the projection (the zero of
    ``Pi A Pi``) as ``(value, multiplicity)`` pairs.
    """

    eigenvalues: np.ndarray
    case_tag: str
    deterministic_part: tuple[tuple[float, int], ...] = ()
    constraint_residual: float = 0.0
    weights: np.ndarray | None = field(default=None, repr=False)

    def all_eigenvalues(self) -> np.ndarray:
        extra = [v for v, m in self.deterministic_part for _ in range(m)]
        return np.concatenate((self.eigenvalues, extra))


def validate_spectrum(values: Sequence[float], multiplicities: Sequence[int] | None = None,
                      allow_sort: bool = False) -> SpectrumSpec:
    """Build a :class:`SpectrumSpec`, enforcing ordering and separation.

    Raises
    ------
    DuplicateEigenvalue
        Two values closer than ``1e-10 * max(1, |a|)``.
    OrderViolation
        Values not strictly descending and ``allow_sort`` is false.
    NonPositiveMultiplicity
        A multiplicity below one or not an integer.
    """
    vals = np.asarray(values, dtype=float).ravel()
    if len(vals) == 0:
        raise SpectrumError("spectrum must be nonempty")
    if not np.all(np.isfinite(vals)):
        raise SpectrumError("spectrum values must be finite")
    if multiplicities is None:
        multiplicities = [1] * len(vals)
    mult = _check_multiplicities(multiplicities, len(vals))

    order = np.argsort(-vals, kind="stable")
    svals = vals[order]
    gaps = svals[:-1] - svals[1:]
    scale = np.maximum(1.0, np.abs(svals[:-1]))
    if np.any(gaps <= MERGE_RTOL * scale):
        raise DuplicateEigenvalue("eigenvalues closer than the merge tolerance; "
                                  "supply them once with a multiplicity")
    if np.any(order != np.arange(len(vals))):
        if not allow_sort:
            raise OrderViolation("eigenvalues must be strictly descending")
        vals = svals
        mult = tuple(mult[i] for i in order)
    return SpectrumSpec(_frozen(vals), mult)


def validate_angles(angles: Sequence[float], multiplicities: Sequence[int] | None = None,
                    allow_sort: bool = False) -> AngularSpectrum:
    """Build an :class:`AngularSpectrum`; angles are radians in ``[0, 2*pi)``."""
    th = np.asarray(angles, dtype=float).ravel()
    if len(th) == 0:
        raise SpectrumError("spectrum must be nonempty")
    if np.any(th < 0) or np.any(th >= TWO_PI) or not np.all(np.isfinite(th)):
        raise SpectrumError("angles must lie in [0, 2*pi)")
    if multiplicities is None:
        multiplicities = [1] * len(th)
    mult = _check_multiplicities(multiplicities, len(th))
    order = np.argsort(th, kind="stable")
    sth = th[order]
    gaps = np.diff(np.concatenate((sth, [sth[0] + TWO_PI])))
    if len(th) > 1 and np.any(gaps <= MERGE_RTOL * TWO_PI):
        raise DuplicateEigenvalue("angles closer than the merge tolerance")
    if np.any(order != np.arange(len(th))):
        if not allow_sort:
            raise OrderViolation("angles must be strictly increasing")
        th = sth
        mult = tuple(mult[i] for i in order)
    return AngularSpectrum(_frozen(th), mult)


def interlacing_support(spec: SpectrumSpec, case_tag: str, b: float | None = None):
    """Open intervals holding the random eigenvalues, in descending order.

    additive: ``(a_1, a_1 + b), (a_2, a_1), ..., (a_n, a_{n-1})``; the upper end
    of the first interval follows from the trace identity.
    projection: ``(a_2, a_1), ..., (a_n, a_{n-1})``.
    """
    a = spec.values
    gaps = [(float(a[i]), float(a[i - 1])) for i in range(1, spec.n)]
    if case_tag == "additive":
        if b is None or not b > 0:
            raise ValueError("additive case needs b > 0")
        return [(float(a[0]), float(a[0] + b))] + gaps
    if case_tag == "projection":
        return gaps
    raise UnsupportedCase(f"no real interlacing support for case {case_tag!r}")


def wrap_angle(x):
    return np.mod(x, TWO_PI)


def arc_indices(angles: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Index ``i`` of the cyclic arc ``(theta_{i-1}, theta_i)`` holding each ``psi``."""
    k = np.searchsorted(angles, wrap_angle(psi), side="right")
    return np.mod(k, len(angles))


def sample_violations(sample: EigenSample, spec, *, b: float | None = None,
                      phi: float | None = None, tol: float = CONSTRAINT_ATOL) -> list[str]:
    """List the ways ``sample`` breaks its ensemble's invariants (empty if none).

    Real cases check strict interlacing with the distinct values of ``spec`` and
    (additive) the trace identity ``sum(lambda) = sum(a) + b``.  The
    multiplicative case checks one phase per cyclic arc and
    ``sum(psi) = phi + sum(theta)`` modulo ``2*pi``.
    """
    problems = []
    ev = np.asarray(sample.eigenvalues, dtype=float)
    tag = sample.case_tag
    if tag in ("additive", "projection"):
        a = spec.values
        scale = max(1.0, spec.diameter + (b or 0.0))
        if tag == "additive":
            chain = np.empty(2 * spec.n)
            chain[0::2] = ev
            chain[1::2] = a
            if len(ev) != spec.n:
                return [f"expected {spec.n} eigenvalues, got {len(ev)}"]
            resid = ev.sum() - a.sum() - b
            if abs(resid) > tol * scale:
                problems.append(f"trace residual {resid:.3e}")
            if not ev[0] < a[0] + b:
                problems.append("top eigenvalue above a_1 + b")
        else:
            if len(ev) != spec.n - 1:
                return [f"expected {spec.n - 1} eigenvalues, got {len(ev)}"]
            zeros = [m for v, m in sample.deterministic_part if v == 0.0]
            if sum(zeros) < 1:
                problems.append("no deterministic zero eigenvalue recorded")
            chain = np.empty(2 * spec.n - 1)
            chain[0::2] = a
            chain[1::2] = ev
        if np.any(np.diff(chain) >= 0):
            problems.append("eigenvalues do not strictly interlace the spectrum")
    elif tag == "multiplicative":
        th = spec.angles
        if len(ev) != spec.n:
            return [f"expected {spec.n} angles, got {len(ev)}"]
        if np.any(np.isin(wrap_angle(ev), th)):
            problems.append("an eigenphase coincides with a fixed phase")
        idx = arc_indices(th, ev)
        if sorted(idx.tolist()) != list(range(spec.n)):
            problems.append("eigenphases do not interlace cyclically")
        resid = phase_residual(ev, th, phi)
        if abs(resid) > tol:
            problems.append(f"phase residual {resid:.3e}")
    else:
        raise UnsupportedCase(f"no invariants defined for case {tag!r}")
    return problems


def phase_residual(psi, theta, phi) -> float:
    """``sum(psi) - sum(theta) - phi`` reduced to ``(-pi, pi]``."""
    r = math.fsum(psi) - math.fsum(theta) - phi
    return math.remainder(r, TWO_PI)
