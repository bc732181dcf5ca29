import numpy as np
import pytest
import scipy.linalg as sla
import scipy.sparse as sp

from conftest import random_hermitian
from fockbench import linalg
from fockbench.rng import SplitMix64


# ------------------------------------------------------------------ rng

def test_splitmix_reference_values():
    assert int(SplitMix64(0).next_u64(1)[0]) == 0xE220A8397B1DCDAF
    assert [int(x) for x in SplitMix64(42).next_u64(3)] == [
        13679457532755275413, 2949826092126892291, 5139283748462763858]


def test_stream_is_deterministic_and_chunk_independent():
    a = SplitMix64(7)
    b = SplitMix64(7)
    whole = a.next_u64(10)
    parts = np.concatenate([b.next_u64(3), b.next_u64(7)])
    assert np.array_equal(whole, parts)


def test_spawn_is_deterministic_and_distinct():
    base = SplitMix64(5)
    x = base.spawn(1).uniform(4)
    y = SplitMix64(5).spawn(1).uniform(4)
    z = SplitMix64(5).spawn(2).uniform(4)
    assert np.array_equal(x, y) and not np.array_equal(x, z)


def test_uniform_range_and_mean():
    u = SplitMix64(1).uniform(100_000)
    assert u.min() >= 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 0.01


def test_normal_moments():
    x = SplitMix64(2).normal(200_001)
    assert x.shape == (200_001,)
    assert abs(x.mean()) < 0.01
    assert abs(x.var() - 1.0) < 0.02


def test_complex_normal_moments():
    z = SplitMix64(3).complex_normal((50_000, 4))
    assert z.shape == (50_000, 4)
    assert abs(np.mean(np.abs(z) ** 2) - 2.0) < 0.04
    assert abs(np.mean(z.real * z.imag)) < 0.01


@pytest.mark.parametrize("shape", [0.3, 1.0, 2.5, 40.0])
def test_gamma_moments(shape):
    g = SplitMix64(4).gamma(shape, 100_000)
    assert np.all(g >= 0)
    assert g.mean() == pytest.approx(shape, rel=0.02)
    assert g.var() == pytest.approx(shape, rel=0.05)


def test_gamma_zero_shape():
    assert not np.any(SplitMix64(4).gamma(0.0, 10))


def test_unit_vector_norm():
    v = SplitMix64(9).unit_vector(17)
    assert np.linalg.norm(v) == pytest.approx(1.0)


# -------------------------------------------------------------- scaling fit

def test_scaling_fit_exact_power():
    xs = np.arange(4, 25, dtype=float)
    slope, _, resid = linalg.scaling_fit(xs, 2.0 * xs ** 1.5)
    assert slope == pytest.approx(1.5, abs=1e-12)
    assert resid < 1e-12


def test_scaling_fit_constant():
    xs = np.arange(4, 25, dtype=float)
    slope, intercept, _ = linalg.scaling_fit(xs, np.full(xs.shape, 3.0))
    assert abs(slope) < 1e-12
    assert intercept == pytest.approx(np.log(3.0))


def test_scaling_fit_noisy():
    rng = np.random.default_rng(0)
    xs = np.arange(4, 25, dtype=float)
    ys = 3.0 * xs ** 0.5 * (1 + 0.01 * rng.normal(size=xs.size))
    assert linalg.scaling_fit(xs, ys)[0] == pytest.approx(0.5, abs=0.05)


def test_scaling_fit_rejects_bad_input():
    with pytest.raises(ValueError):
        linalg.scaling_fit([1, 2], [1, 2])
    with pytest.raises(ValueError):
        linalg.scaling_fit([1, 2, 3], [1, 0, 2])


# -------------------------------------------------------------- eigen

@pytest.mark.parametrize("n", [1, 2, 5, 30])
def test_jacobi_matches_lapack(n, rng):
    a = random_hermitian(rng, n)
    w, v = linalg.jacobi_eigh(a)
    assert np.allclose(w, np.linalg.eigvalsh(a), atol=1e-10)
    assert np.allclose(a @ v, v * w, atol=1e-9)


def test_jacobi_rejects_non_hermitian():
    with pytest.raises(ValueError):
        linalg.jacobi_eigh(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_eigvalsh_methods_agree(rng):
    a = random_hermitian(rng, 12)
    assert np.allclose(linalg.eigvalsh(a, "jacobi"), linalg.eigvalsh(a, "lapack"), atol=1e-10)


def _pencil(rng, rows, n):
    a = rng.normal(size=(rows, n)) + 1j * rng.normal(size=(rows, n))
    c = rng.normal(size=(n, n))
    b = c @ c.T + n * np.eye(n)
    return a, b


@pytest.mark.parametrize("rows", [5, 40])
def test_generalized_lambda_dense(rows, rng):
    a, b = _pencil(rng, rows, 20)
    ref = sla.eigh(a.conj().T @ a, b, eigvals_only=True)[-1]
    assert linalg.generalized_lambda_max(a, b) == pytest.approx(ref, rel=1e-12)


def test_generalized_lambda_lanczos_agrees(rng):
    n = 700
    a = sp.random(n, n, density=0.01, random_state=1, format="csr") * (1 + 0.5j)
    b = sp.diags(1.0 + np.arange(n) / n, format="csc")
    ref = sla.eigh((a.conj().T @ a).toarray(), b.toarray(), eigvals_only=True)[-1]
    assert n > linalg.DENSE_LIMIT
    assert linalg.generalized_lambda_max(a, b) == pytest.approx(ref, rel=1e-8)


def test_generalized_lambda_zero_operator():
    assert linalg.generalized_lambda_max(np.zeros((3, 3)), np.eye(3)) == 0.0


def test_spectral_norm(rng):
    a = rng.normal(size=(6, 4))
    assert linalg.spectral_norm(a) == pytest.approx(np.linalg.svd(a)[1][0])
    assert linalg.spectral_norm(sp.csr_matrix(a)) == pytest.approx(np.linalg.svd(a)[1][0])
