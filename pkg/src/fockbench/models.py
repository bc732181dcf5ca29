"""Hamiltonian builders on finite grids and the named preset registry.

Every builder returns a :class:`ModelSpec` produced through the expression
layer, so presets and hand-written JSON documents go through the same
validation.  Coefficient arrays that only the bound checks read (for
instance the particle Laplacian of the Nelson model) are kept in the data
section under fixed names.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from .modelspec import ModelSpec
from .opdsl import ModelError, make_model


def _herm(name: str, m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ModelError(name, f"must be square, got shape {m.shape}")
    dev = np.abs(m - m.conj().T)
    if dev.size and dev.max() > 1e-12:
        i, j = np.unravel_index(np.argmax(dev), dev.shape)
        raise ModelError(name, f"not Hermitian at entry ({i},{j})")
    return m


def _nonneg(name: str, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        i = int(np.flatnonzero(x < 0)[0])
        raise ModelError(name, f"entry {i} is negative ({x[i]:.3g})")
    return x


# ------------------------------------------------------------ grids

def grid_momenta(K: int) -> np.ndarray:
    """Integer momenta of a ``K``-point periodic grid on a box of length 2π (FFT order)."""
    return np.fft.fftfreq(K) * K


def dft_matrix(K: int) -> np.ndarray:
    """Unitary DFT, ``F[p, x] = exp(-i p x) / sqrt(K)`` on ``x = 2π m / K``."""
    return np.fft.fft(np.eye(K), norm="ortho")


def spectral_operator(symbol: np.ndarray) -> np.ndarray:
    """``F† diag(symbol) F``: a Fourier multiplier written in the position basis."""
    f = dft_matrix(len(symbol))
    return f.conj().T @ (symbol[:, None] * f)


def periodic_laplacian_1d(d: int) -> np.ndarray:
    """Nearest-neighbour ``-Δ`` on a ring of ``d`` sites (unit spacing)."""
    lap = 2.0 * np.eye(d)
    if d > 1:
        idx = np.arange(d)
        lap[idx, (idx + 1) % d] -= 1.0
        lap[(idx + 1) % d, idx] -= 1.0
    return lap


def dirichlet_laplacian(shape: tuple[int, ...], spacing: float = 1.0) -> np.ndarray:
    """Finite-difference ``-Δ`` with zero boundary values on a box of sites."""
    mats = []
    for n in shape:
        m = 2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
        mats.append(m / spacing**2)
    out = np.zeros((int(np.prod(shape)),) * 2)
    for axis, m in enumerate(mats):
        term = np.ones((1, 1))
        for k, n in enumerate(shape):
            term = np.kron(term, m if k == axis else np.eye(n))
        out += term
    return out


def pair_kernel_matrix(points: np.ndarray, kernel: Callable[[np.ndarray], np.ndarray], self_value: float) -> np.ndarray:
    """``W[i, j] = kernel(|x_i - x_j|)`` off the diagonal and ``self_value`` on it."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 1 and np.asarray(points).ndim == 1:
        pts = pts.T
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    w = np.empty_like(dist)
    off = ~np.eye(len(pts), dtype=bool)
    w[off] = kernel(dist[off])
    w[~off] = self_value
    return w


# ------------------------------------------------------- boson many-body

def build_boson_model(d: int, h0, V1=None, V2=None, V3=None, V4=None, name: str = "boson",
                      meta: dict | None = None) -> ModelSpec:
    """``dΓ(h0) + a*(V1) + a(V1) + Σ V2 a*a + (Σ V3 a*a* + h.c.) + ½ Σ W a*a*aa``.

    ``V4`` is the sampled pair kernel ``W[i, j] = V4(x_i - x_j)`` (real
    symmetric ``d×d``).  Zero coefficients are left out of the expression
    but kept in the data section.
    """
    h0 = _herm("h0", h0)
    if h0.shape != (d, d):
        raise ModelError("h0", f"shape {h0.shape}, expected {(d, d)}")
    if np.linalg.eigvalsh(h0)[0] < -1e-10:
        raise ModelError("h0", "must be positive semi-definite")
    V1 = np.zeros(d, dtype=complex) if V1 is None else np.asarray(V1, dtype=complex)
    V2 = np.zeros((d, d), dtype=complex) if V2 is None else np.asarray(V2, dtype=complex)
    V3 = np.zeros((d, d), dtype=complex) if V3 is None else np.asarray(V3, dtype=complex)
    V4 = np.zeros((d, d)) if V4 is None else np.asarray(V4)
    if V1.shape != (d,):
        raise ModelError("V1", f"shape {V1.shape}, expected {(d,)}")
    if V2.shape != (d, d):
        raise ModelError("V2", f"shape {V2.shape}, expected {(d, d)}")
    _herm("V2", V2)
    if V3.shape != (d, d):
        raise ModelError("V3", f"shape {V3.shape}, expected {(d, d)}")
    asym = np.abs(V3 - V3.T)
    if asym.size and asym.max() > 1e-12:
        i, j = np.unravel_index(np.argmax(asym), asym.shape)
        raise ModelError("V3", f"not symmetric at entry ({i},{j})")
    if V4.shape != (d, d):
        raise ModelError("V4", f"shape {V4.shape}, expected {(d, d)}")
    terms = []
    if np.any(V1):
        terms.append("hc(adag(V1))")
    if np.any(V2):
        terms.append("quad2(V2)")
    if np.any(V3):
        terms.append("hc(pairc(V3))")
    if np.any(V4):
        terms.append("0.5 * quartic(V4)")
    data = {"h0": h0, "V1": V1, "V2": V2, "V3": V3, "V4": V4}
    info = {"family": "boson"}
    info.update(meta or {})
    return make_model(name, 1, d, data, " + ".join(terms) or "0", "h0", None, info)


def boson_preset(d: int = 4, quartic: bool = False, scale: float = 1.0) -> ModelSpec:
    """Ring of ``d`` sites with all quadratic couplings switched on.

    The quartic kernel ``W = 0.3 exp(-|x-y|)`` (ring distance) is added only
    with ``quartic=True``: it is sector-diagonal but grows like ``n^2``,
    which the quadratic compliance value is designed to flag.
    """
    if d < 1:
        raise ModelError("d", "must be positive")
    sites = np.arange(d)
    h0 = periodic_laplacian_1d(d) + np.eye(d)
    V1 = scale * 0.5 * np.cos(2 * np.pi * sites / d) + 0.25j * scale * np.sin(2 * np.pi * sites / d)
    V2 = np.zeros((d, d), dtype=complex)
    for i in range(d):
        V2[i, i] = 0.2 * scale
        if d > 1:
            j = (i + 1) % d
            V2[i, j] += 0.1j * scale
            V2[j, i] -= 0.1j * scale
    V3 = 0.1 * scale * (np.eye(d) + 0.5 * (np.eye(d, k=1) + np.eye(d, k=-1)))
    V4 = None
    if quartic:
        ring = np.minimum(np.abs(sites[:, None] - sites[None, :]), d - np.abs(sites[:, None] - sites[None, :]))
        V4 = 0.3 * scale * np.exp(-ring.astype(float))
    name = "boson-quartic" if quartic else "boson"
    return build_boson_model(d, h0, V1, V2, V3, V4, name=name)


def coulomb_preset(n_side: int = 2, spacing: float = 1.0, sign: float = 1.0) -> ModelSpec:
    """``dΓ(-Δ) ± ½ Σ W a*a*aa`` on an ``n_side³`` lattice with ``W = 1/|x-y|``.

    The self-interaction is regularised at half a lattice spacing,
    ``W_ii = 2 / spacing``.
    """
    if sign not in (1.0, -1.0):
        raise ModelError("sign", "must be +1 or -1")
    axis = np.arange(n_side) * spacing
    pts = np.array(np.meshgrid(axis, axis, axis, indexing="ij")).reshape(3, -1).T
    w = sign * pair_kernel_matrix(pts, lambda r: 1.0 / r, 2.0 / spacing)
    h0 = dirichlet_laplacian((n_side,) * 3, spacing)
    return build_boson_model(len(pts), h0, V4=w, name="coulomb", meta={"spacing": spacing, "sign": sign})


# ---------------------------------------------------------------- toys

def build_toy(kind: str, K: int = 64) -> ModelSpec:
    """``H3`` (single mode, cubic), ``Hda`` and ``Hdaa`` (particle on a ``K``-point ring).

    ``-i∂ₓ`` and ``-∂²ₓ`` are Fourier multipliers on the periodic grid, so
    their spectra are the exact integer momenta ``p`` and ``p²``.
    """
    one = np.ones((1, 1))
    if kind == "H3":
        data = {"one": one, "c3": np.ones(1)}
        return make_model("h3", 1, 1, data, "hc(cubic3(c3))", "one", None, {"family": "toy", "kind": "H3"})
    if kind not in ("Hda", "Hdaa"):
        raise ModelError("kind", f"unknown toy model {kind!r} (expected H3, Hda or Hdaa)")
    if not isinstance(K, (int, np.integer)) or K < 4:
        raise ModelError("K", f"spectral derivative needs at least 4 grid points, got {K!r}")
    p = grid_momenta(int(K))
    data = {"one": one, "f": np.ones(1), "m": one, "Dx": spectral_operator(p), "H01": spectral_operator(p**2)}
    expr = "kron(Dx, hc(adag(f))) + hc(pairc(m))" if kind == "Hda" else "kron(Dx, hc(pairc(m)))"
    return make_model(kind.lower(), int(K), 1, data, expr, "one", "H01", {"family": "toy", "kind": kind, "K": int(K)})


# -------------------------------------------------------------- Nelson

def nelson_coupling(L: int, k: np.ndarray, omega: np.ndarray, lam: float = 1.0, sigma: float = np.inf) -> np.ndarray:
    """``v(x, k) = λ (2π)^{-1/2} (2ω)^{-1/2} e^{-ikx} [|k| ≤ σ]`` on ``x = 2πm/L``.

    Modes with ``ω = 0`` are switched off (the weight is singular there).
    """
    x = 2 * np.pi * np.arange(L) / L
    weight = np.zeros_like(omega, dtype=float)
    ok = (omega > 0) & (np.abs(k) <= sigma)
    weight[ok] = lam / np.sqrt(2 * np.pi) / np.sqrt(2 * omega[ok])
    return weight[None, :] * np.exp(-1j * np.outer(x, k))


def build_nelson(L: int, d: int, omega, Vext, v, name: str = "nelson") -> ModelSpec:
    """One particle on an ``L``-point ring coupled linearly to ``d`` field modes.

    ``H01 = -Δ + V`` (spectral Laplacian), ``H02 = dΓ(diag ω)`` and
    ``HI = Σ_x |x><x| ⊗ (a*(v(x,·)) + a(v(x,·)))``.
    """
    omega = _nonneg("omega", omega)
    Vext = _nonneg("Vext", Vext)
    if omega.shape != (d,):
        raise ModelError("omega", f"shape {omega.shape}, expected {(d,)}")
    if Vext.shape != (L,):
        raise ModelError("Vext", f"shape {Vext.shape}, expected {(L,)}")
    v = np.asarray(v, dtype=complex)
    if v.shape != (L, d):
        raise ModelError("v", f"shape {v.shape}, expected {(L, d)}")
    lap = spectral_operator(grid_momenta(L) ** 2)
    data = {"Lap": lap, "H01": lap + np.diag(Vext), "omega": np.diag(omega), "v": v}
    expr = "hc(adag(v))" if np.any(v) else "0"
    return make_model(name, L, d, data, expr, "omega", "H01", {"family": "nelson"})


def nelson_preset(L: int = 8, d: int = 8, lam: float = 1.0, sigma: float = np.inf, mu: float = 1.0) -> ModelSpec:
    """Field momenta ``k`` on a ``d``-point grid, ``ω = sqrt(k² + μ²)``, potential ``1 - cos x``."""
    if mu < 0:
        raise ModelError("mu", "must be non-negative")
    k = grid_momenta(d)
    omega = np.sqrt(k**2 + mu**2)
    x = 2 * np.pi * np.arange(L) / L
    return build_nelson(L, d, omega, 1.0 - np.cos(x), nelson_coupling(L, k, omega, lam, sigma))


# ------------------------------------------------------- Pauli-Fierz

def _window_shift(p2: np.ndarray, k: np.ndarray) -> np.ndarray:
    """``S_k |p> = |p + k>`` restricted to the plane-wave window (no wrap-around)."""
    lookup = {tuple(q): i for i, q in enumerate(p2.astype(int))}
    s = np.zeros((len(p2), len(p2)))
    for i, q in enumerate(p2.astype(int)):
        j = lookup.get((q[0] + int(k[0]), q[1] + int(k[1])))
        if j is not None:
            s[j, i] = 1.0
    return s


def field_modes(M: int) -> np.ndarray:
    """Nonzero momenta of the ``M×M`` grid, as integer pairs."""
    m = grid_momenta(M)
    grid = np.array(np.meshgrid(m, m, indexing="ij")).reshape(2, -1).T
    return grid[np.any(grid != 0, axis=1)]


def build_pauli_fierz(K: int = 5, M: int = 4, chi=None, Vext=None, cutoff: float = 1.0,
                      name: str = "pauli-fierz") -> ModelSpec:
    """``(i∇ + A(x))² + V`` in two space dimensions with one polarisation.

    The particle lives on the plane waves ``p ∈ grid_momenta(K)²``
    (``L = K²``); ``e^{ik·x}`` acts as the window shift ``S_k``, which keeps
    ``[P_μ, S_k] = k_μ S_k`` exact so that ``k·e(k) = 0`` gives
    ``Σ_μ [P_μ, A_μ] = 0`` on the nose.  ``chi`` weighs the nonzero modes of
    the ``M×M`` field grid (default: indicator of ``|k| ≤ cutoff``); modes
    with zero weight do not couple and are left out of the Fock space
    (an all-zero ``chi`` keeps every mode and gives the free model).
    ``Vext`` is sampled on the ``K×K`` position grid.
    """
    if K < 2:
        raise ModelError("K", "need at least 2 plane waves per axis")
    ks = field_modes(M)
    if chi is None:
        chi = (np.linalg.norm(ks, axis=1) <= cutoff).astype(complex)
    chi = np.asarray(chi, dtype=complex)
    if chi.shape == (M * M,):
        zero = np.flatnonzero(np.all(np.array(np.meshgrid(grid_momenta(M), grid_momenta(M), indexing="ij")).reshape(2, -1).T == 0, axis=1))
        if np.any(chi[zero]):
            raise ModelError("chi", "the k = 0 mode has no polarisation and must carry zero weight")
        chi = np.delete(chi, zero)
    if chi.shape != (len(ks),):
        raise ModelError("chi", f"shape {chi.shape}, expected {(len(ks),)} (nonzero modes of the {M}x{M} grid)")
    free = not np.any(chi)
    if not free:
        keep = np.flatnonzero(chi != 0)
        ks, chi = ks[keep], chi[keep]
    d = len(ks)
    absk = np.linalg.norm(ks, axis=1)
    pol = np.column_stack([-ks[:, 1], ks[:, 0]]) / absk[:, None]

    p1 = grid_momenta(K)
    p2 = np.array(np.meshgrid(p1, p1, indexing="ij")).reshape(2, -1).T
    L = len(p2)
    if Vext is None:
        Vext = np.zeros((K, K))
    Vext = _nonneg("Vext", Vext)
    if Vext.shape != (K, K):
        raise ModelError("Vext", f"shape {Vext.shape}, expected {(K, K)}")
    f2 = np.kron(dft_matrix(K), dft_matrix(K))
    h01 = np.diag(np.sum(p2**2, axis=1)).astype(complex) + f2 @ np.diag(Vext.ravel()) @ f2.conj().T

    shifts = np.stack([_window_shift(p2, k) for k in ks], axis=-1)
    Px, Py = np.diag(p2[:, 0]), np.diag(p2[:, 1])
    Ash = shifts * chi[None, None, :]
    coup = np.empty((L, L, d), dtype=complex)
    for k in range(d):
        coup[:, :, k] = -2.0 * Ash[:, :, k] @ (pol[k, 0] * Px + pol[k, 1] * Py)
    ee = pol @ pol.T
    pair = np.zeros((L, L, d, d), dtype=complex)
    quad = np.zeros((L, L, d, d), dtype=complex)
    for k in range(d):
        for l in range(d):
            sk, sl = Ash[:, :, k], Ash[:, :, l]
            pair[:, :, k, l] = ee[k, l] * sk @ sl
            quad[:, :, k, l] = ee[k, l] * (sk @ sl.conj().T + sl.conj().T @ sk)
    const = sum(Ash[:, :, k].conj().T @ Ash[:, :, k] for k in range(d))
    data = {
        "H01": h01, "omega": np.diag(absk).astype(complex), "chi": chi, "pol": pol, "Ash": Ash,
        "Px": Px, "Py": Py, "Acoup": coup, "App": pair, "Aq": quad, "A0": const,
    }
    expr = "0" if free else "hc(adag(Acoup)) + hc(pairc(App)) + quad2(Aq) + kron(A0, Id)"
    meta = {"family": "pauli-fierz", "K": K, "M": M, "modes": ks.astype(int).tolist()}
    return make_model(name, L, d, data, expr, "omega", "H01", meta)


def vector_potential(model: ModelSpec, space) -> tuple:
    """``(A_x, A_y, P_x ⊗ 1, P_y ⊗ 1)`` as block operators for gauge checks."""
    from . import qop

    ash, pol = model.data["Ash"], model.data["pol"].real
    comps = []
    for mu in range(2):
        c = ash * pol[None, None, :, mu]
        comps.append(qop.field_linear(space, c, model.L, create=True)
                     + qop.field_linear(space, c, model.L, create=False))
    ident = qop.identity(space)
    return (comps[0], comps[1], qop.kron_particle(model.data["Px"], ident),
            qop.kron_particle(model.data["Py"], ident))


# -------------------------------------------------------------- registry

PRESETS: dict[str, Callable[..., ModelSpec]] = {
    "boson": boson_preset,
    "boson-demo": boson_preset,
    "coulomb": coulomb_preset,
    "h3": lambda: build_toy("H3"),
    "hda": lambda K=64: build_toy("Hda", K),
    "hdaa": lambda K=64: build_toy("Hdaa", K),
    "nelson": nelson_preset,
    "pauli-fierz": build_pauli_fierz,
}


def preset(name: str, **options) -> ModelSpec:
    if name not in PRESETS:
        raise ModelError("model", f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return PRESETS[name](**options)
