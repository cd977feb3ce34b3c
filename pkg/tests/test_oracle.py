import math

import numpy as np
import pytest

from rank1horn import densities, oracle
from rank1horn.errors import EigensolverFailure
from rank1horn.randsrc import RngState, haar_unitary
from rank1horn.spectra import TWO_PI, sample_violations, validate_angles, validate_spectrum


def test_additive_matrix_sample_invariants():
    spec = validate_spectrum([2.0, 0.5, -1.0], [1, 2, 1])
    for i in range(200):
        s = oracle.sample_additive_matrix(spec, 0.8, "complex", RngState(1).generator(i))
        assert sample_violations(s, spec, b=0.8) == []
        assert s.deterministic_part == ((0.5, 1),)
        assert abs(s.constraint_residual) < 1e-12


def test_additive_matrix_real_field():
    spec = validate_spectrum([1.0, 0.0])
    s = oracle.sample_additive_matrix(spec, 1.0, "real", 3)
    assert sample_violations(s, spec, b=1.0) == []


def test_projection_matrix_zero_split_off():
    spec = validate_spectrum([3.0, 1.0, -1.0], [2, 1, 1])
    s = oracle.sample_projection_matrix(spec, "complex", 5)
    assert dict(s.deterministic_part) == {0.0: 1, 3.0: 1}
    assert len(s.eigenvalues) == 2
    assert sample_violations(s, spec) == []


def test_projection_single_level():
    s = oracle.sample_projection_matrix(validate_spectrum([4.0]), "complex", 0)
    assert len(s.eigenvalues) == 0


@pytest.mark.parametrize("dim", [1, 3, 8])
def test_unitary_eigenphases_match_eig(dim):
    u = haar_unitary(dim, RngState(dim).generator())
    ref = np.sort(np.mod(np.angle(np.linalg.eigvals(u)), TWO_PI))
    got = oracle.unitary_eigenphases(u)
    d = np.abs(got - ref)
    assert np.all(np.minimum(d, TWO_PI - d) < 1e-10)


def test_unitary_eigenphases_near_minus_one():
    phases = np.array([math.pi - 1e-12, math.pi + 1e-12, 0.3])
    v = haar_unitary(3, 4)
    s = v @ np.diag(np.exp(1j * phases)) @ v.conj().T
    got = oracle.unitary_eigenphases(s)
    np.testing.assert_allclose(got, np.sort(phases), atol=1e-9)


def test_multiplicative_matrix_invariants():
    spec = validate_angles([0.3, 2.0, 4.5], [1, 2, 1])
    for i in range(200):
        s = oracle.sample_multiplicative_matrix(spec, 2.0, RngState(7).generator(i))
        assert sample_violations(s, spec, phi=2.0) == []


def test_strip_raises_when_missing():
    with pytest.raises(EigensolverFailure):
        oracle._strip(np.array([1.0, 0.0]), [(0.5, 1)], 1e-8)


def test_quadratic_form_within_hull():
    b = [2.0, 0.5, -1.0]
    vals = [oracle.sample_quadratic_form(b, RngState(2).generator(i)) for i in range(500)]
    assert min(vals) >= -1.0 and max(vals) <= 2.0
    # mean of z B z^dag is tr(B)/n
    big = [oracle.sample_quadratic_form(b, RngState(3).generator(i)) for i in range(20_000)]
    assert abs(np.mean(big) - 0.5) < 0.02


def test_diagonal_entries_sum_to_trace():
    b = [2.0, 0.5, -1.0]
    d = oracle.sample_diagonal_entries(b, 3, 1)
    assert d.sum() == pytest.approx(1.5, abs=1e-12)
    assert len(oracle.sample_diagonal_entries(b, 2, 1)) == 2
    with pytest.raises(ValueError):
        oracle.sample_diagonal_entries(b, 4, 1)


@pytest.mark.parametrize("x, y", [([1.0, 0.0], [1.0, 0.0]), ([0.5, -0.2, 0.9, 0.1], [0.3, 1.0, -0.4, 0.0])])
def test_hciz_monte_carlo_matches(x, y):
    mean, se = oracle.hciz_monte_carlo(x, y, 100_000, RngState(11).generator())
    assert abs(mean - densities.hciz(x, y)) < 3 * se
