import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rank1horn import stats
from rank1horn.errors import NonPositiveParameter
from rank1horn.randsrc import (RngState, as_generator, block_weights, dirichlet, dirichlet_array,
                               haar_orthogonal, haar_unitary, unit_gaussian_vector)


def test_generator_is_deterministic_per_index():
    st_ = RngState(5, 2)
    a = st_.generator(17).standard_normal(4)
    b = RngState(5, 2).generator(17).standard_normal(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, st_.generator(18).standard_normal(4))
    assert not np.array_equal(a, st_.substream(3).generator(17).standard_normal(4))


def test_as_generator_accepts_variants():
    assert isinstance(as_generator(None), np.random.Generator)
    assert isinstance(as_generator(3), np.random.Generator)
    g = np.random.default_rng(0)
    assert as_generator(g) is g
    np.testing.assert_array_equal(as_generator(RngState(4)).random(3), RngState(4).generator(0).random(3))


@settings(max_examples=30)
@given(st.lists(st.floats(0.3, 5.0), min_size=1, max_size=8), st.integers(0, 2**31))
def test_dirichlet_on_simplex(params, seed):
    w = dirichlet(params, seed)
    assert np.all(w.weights >= 0)
    assert abs(w.weights.sum() - 1) < 1e-12


def test_dirichlet_rejects_nonpositive():
    with pytest.raises(NonPositiveParameter):
        dirichlet_array([1.0, 0.0])


def test_dirichlet_moments():
    s = np.array([0.5, 1.0, 2.5])
    w = dirichlet_array(s, RngState(1).generator(), size=200_000)
    np.testing.assert_allclose(w.mean(axis=0), s / s.sum(), atol=3e-3)


@pytest.mark.parametrize("field", ["complex", "real"])
def test_unit_vector(field):
    x = unit_gaussian_vector(6, field, 1)
    assert abs(np.linalg.norm(x) - 1) < 1e-14
    assert np.iscomplexobj(x) == (field == "complex")


def test_block_weights():
    np.testing.assert_allclose(block_weights(np.array([1, 2, 3, 4]), [1, 3]), [1.0, 29.0])  # squared moduli summed per block


def test_haar_is_unitary():
    u = haar_unitary(5, 3)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(5), atol=1e-13)
    o = haar_orthogonal(4, 3)
    assert not np.iscomplexobj(o)
    np.testing.assert_allclose(o.T @ o, np.eye(4), atol=1e-13)


def test_haar_column_matches_unit_vector():
    st_ = RngState(9)
    cols = np.array([np.abs(haar_unitary(4, st_.generator(i))[0, 0]) ** 2 for i in range(10_000)])
    vecs = np.array([np.abs(unit_gaussian_vector(4, "complex", st_.substream(1).generator(i))[0]) ** 2
                     for i in range(10_000)])
    assert stats.ks_two_sample(cols, vecs).passed


def test_haar_phase_correction_matters():
    # |U_11|^2 is Beta(1, n-1) for Haar U; mean 1/n
    st_ = RngState(10)
    vals = [abs(haar_unitary(3, st_.generator(i))[0, 0]) ** 2 for i in range(20_000)]
    assert abs(np.mean(vals) - 1 / 3) < 5e-3
    # the diagonal phases of Haar U are uniform, so E[U_11] = 0
    z = np.mean([haar_unitary(3, st_.generator(i))[0, 0] for i in range(20_000)])
    assert abs(z) < 0.02
