import math

import numpy as np
import pytest

from fockbench import models, qop
from fockbench.fock import FockSpace
from fockbench.modelspec import lower_bounds
from fockbench.opdsl import ModelError, compile_model, make_model


def basis_vector(space, occ, L=1, particle=0):
    v = np.zeros(L * space.dim, dtype=complex)
    n, pos = space.state_index(occ)
    v[L * space.offsets[n] + particle * space.dims[n] + pos] = 1.0
    return v


def band_support(op, n):
    return sorted(m for (m, k) in op.blocks if k == n and np.any(op.blocks[(m, k)] != 0))


# ------------------------------------------------------------------ boson

def test_free_boson_has_bandwidth_zero():
    model = models.build_boson_model(3, np.diag([1.0, 2.0, 3.0]))
    c = compile_model(model, FockSpace(3, 4))
    assert c.H.bandwidth == 0 and not c.HI.blocks


def test_single_mode_linear_amplitude():
    model = models.build_boson_model(1, np.ones((1, 1)), V1=np.ones(1))
    space = FockSpace(1, 4)
    out = compile_model(model, space).H.apply(basis_vector(space, (1,)))
    assert out[space.flat_index((2,))] == pytest.approx(math.sqrt(2))
    assert out[space.flat_index((1,))] == pytest.approx(1.0)
    assert out[space.flat_index((0,))] == pytest.approx(1.0)


def test_boson_preset_terms():
    m = models.boson_preset(d=3, quartic=True)
    assert m.family == "boson"
    assert {t.kind for t in m.terms} == {"create", "quad", "pair_create", "quartic"}
    assert compile_model(m, FockSpace(3, 5)).HI.bandwidth == 2


def test_boson_rejects_asymmetric_quartic():
    with pytest.raises(ModelError):
        models.build_boson_model(2, np.eye(2), V4=np.array([[0.0, 1.0], [2.0, 0.0]]))


def test_coulomb_preset():
    m = models.coulomb_preset(n_side=2, spacing=1.0)
    W = m.data["W"].real if "W" in m.data else m.data["V4"].real
    assert m.d == 8
    assert W[0, 1] == pytest.approx(1.0)          # nearest neighbours
    assert W[0, 7] == pytest.approx(1 / math.sqrt(3))
    assert W[0, 0] == pytest.approx(2.0)
    assert np.allclose(W, W.T)
    assert compile_model(m, FockSpace(8, 2)).HI.bandwidth == 0


def test_dirichlet_laplacian_positive():
    lap = models.dirichlet_laplacian((3, 3))
    assert np.linalg.eigvalsh(lap)[0] > 0
    assert np.allclose(lap, lap.T)


# ------------------------------------------------------------------- toys

def test_h3_support_and_element():
    m = models.build_toy("H3")
    space = FockSpace(1, 10)
    hi = compile_model(m, space).HI
    assert band_support(hi, 5) == [2, 8]
    h = compile_model(m, space).H
    assert band_support(h, 5) == [2, 5, 8]
    out = hi.apply(basis_vector(space, (2,)))
    assert out[space.flat_index((5,))] == pytest.approx(math.sqrt(60))


def test_hda_support():
    m = models.build_toy("Hda", K=8)
    hi = compile_model(m, FockSpace(1, 8)).HI
    assert band_support(hi, 4) == [2, 3, 5, 6]


def test_hdaa_support():
    m = models.build_toy("Hdaa", K=8)
    hi = compile_model(m, FockSpace(1, 8)).HI
    assert band_support(hi, 4) == [2, 6]


def test_toy_errors():
    with pytest.raises(ModelError, match="K"):
        models.build_toy("Hda", K=3)
    with pytest.raises(ModelError):
        models.build_toy("H4")


def test_spectral_derivative_is_exact():
    K = 8
    dx = models.spectral_operator(models.grid_momenta(K))
    x = 2 * np.pi * np.arange(K) / K
    # -i d/dx e^{2ix} = 2 e^{2ix}
    assert np.allclose(dx @ np.exp(2j * x), 2 * np.exp(2j * x), atol=1e-12)


# ------------------------------------------------------------------ Nelson

def test_nelson_zero_coupling_is_free():
    m = models.build_nelson(4, 3, np.ones(3), np.zeros(4), np.zeros((4, 3)))
    c = compile_model(m, FockSpace(3, 3))
    assert not c.HI.blocks and c.H.bandwidth == 0


def test_nelson_massless_mode_assembles():
    m = models.build_nelson(1, 1, np.zeros(1), np.zeros(1), np.full((1, 1), 0.7))
    space = FockSpace(1, 4)
    hi = compile_model(m, space).HI.to_dense()
    ref = 0.7 * (qop.creation_matrix(space, [1.0]) + qop.annihilation_matrix(space, [1.0])).to_dense()
    assert np.allclose(hi, ref, atol=1e-14)


def test_nelson_single_site_matches_boson(rng):
    d = 3
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    omega = np.array([1.0, 2.0, 0.5])
    nel = models.build_nelson(1, d, omega, np.zeros(1), v[None, :])
    bos = models.build_boson_model(d, np.diag(omega), V1=v)
    space = FockSpace(d, 4)
    assert np.allclose(compile_model(nel, space).HI.to_dense(), compile_model(bos, space).HI.to_dense(), atol=1e-14)


def test_nelson_rejects_negative_inputs():
    with pytest.raises(ModelError, match="omega"):
        models.build_nelson(2, 2, [-1.0, 1.0], np.zeros(2), np.zeros((2, 2)))
    with pytest.raises(ModelError, match="Vext"):
        models.build_nelson(2, 2, [1.0, 1.0], [-1.0, 0.0], np.zeros((2, 2)))


def test_nelson_preset_bandwidth():
    m = models.nelson_preset(L=4, d=4)
    assert compile_model(m, FockSpace(4, 3)).HI.bandwidth == 1


# ------------------------------------------------------------ Pauli-Fierz

def test_pf_zero_chi_is_free():
    m = models.build_pauli_fierz(K=3, M=4, chi=np.zeros(15))
    c = compile_model(m, FockSpace(m.d, 2))
    assert not c.HI.blocks


def test_pf_rejects_weight_on_zero_mode():
    chi = np.zeros(16)
    chi[0] = 1.0
    with pytest.raises(ModelError, match="k = 0"):
        models.build_pauli_fierz(K=3, M=4, chi=chi)


def test_pf_band_supports():
    m = models.build_pauli_fierz(K=3, M=4)
    space = FockSpace(m.d, 4)
    from fockbench.opdsl import compile_terms
    lin = compile_terms([t for t in m.terms if t.kind == "create"], space, m.L)
    quad = compile_terms([t for t in m.terms if t.kind != "create"], space, m.L)
    assert band_support(lin, 2) == [1, 3]
    assert band_support(quad, 2) == [0, 2, 4]


def test_pf_polarisation_transverse():
    m = models.build_pauli_fierz(K=3, M=4)
    ks = np.array(m.meta["modes"], dtype=float)
    assert np.max(np.abs(np.sum(ks * m.data["pol"].real, axis=1))) == 0.0


def test_pf_divergence_free():
    m = models.build_pauli_fierz(K=3, M=4)
    space = FockSpace(m.d, 3)
    ax, ay, px, py = models.vector_potential(m, space)
    div = qop.commutator(px, ax) + qop.commutator(py, ay)
    assert qop.max_abs(div) <= 1e-14


def test_pf_interaction_matches_minimal_coupling():
    m = models.build_pauli_fierz(K=3, M=4)
    space = FockSpace(m.d, 3)
    ax, ay, px, py = models.vector_potential(m, space)
    expected = qop.scale(-2.0, ax @ px + ay @ py) + ax @ ax + ay @ ay
    hi = compile_model(m, space).HI
    interior = range(space.n_max - 1)
    assert qop.max_abs(hi - expected, interior) <= 1e-12


# -------------------------------------------------------------- bounds

def test_lower_bounds():
    m = make_model("x", 2, 1, {"H01": np.diag([-2.0, 1.0]), "h": np.ones((1, 1))}, "0", "h", "H01")
    assert lower_bounds(m) == (2.0, 0.0)
    m = make_model("x", 2, 1, {"H01": np.diag([0.5, 1.0]), "h": np.ones((1, 1))}, "0", "h", "H01")
    assert lower_bounds(m) == (0.0, 0.0)


def test_presets_registry():
    for name in models.PRESETS:
        m = models.preset(name)
        assert m.name
    with pytest.raises(ModelError, match="unknown preset"):
        models.preset("nope")
