"""Numerical checks of the self-adjointness hypotheses on truncated models.

Nothing here proves anything about the continuum operator.  Each routine
turns one hypothesis into a finite computation (a band test, a per-sector
generalised eigenvalue, a sampled inequality) whose outcome is a diagnostic.
Sectors within one bandwidth of the cutoff are always excluded, because the
compression ``1_{<=n_max} H 1_{<=n_max}`` is only exact away from the top.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from . import linalg, qop
from .fock import BASIS_ORDER_TAG, FockSpace
from .modelspec import ModelSpec, lower_bounds
from .opdsl import Compiled, compile_model, compile_terms
from .rng import SplitMix64

OFFBAND_TOL = 1e-12
SLOPE_THRESHOLD = 0.1
VIOLATION_SLACK = 1e-8
EPS_GRID = tuple(round(0.1 * k, 1) for k in range(1, 10))
TRUNCATION_NOTE = "operators are compressions 1_{<=n_max} H 1_{<=n_max}; sectors within one bandwidth of n_max excluded"


def _map(fn, items, workers: int):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ------------------------------------------------------------ metric

@dataclass(frozen=True, eq=False)
class SectorMetric:
    """Gram matrix ``G_n`` of the energy inner product on sector ``n``."""

    n: int
    G: object
    shift: float
    min_eig: float | None = None

    @property
    def size(self) -> int:
        return self.G.shape[0]


def _metric_matrix(h0: qop.BlockOperator, n: int, shift: float):
    blk = h0.block(n, n)
    eye = sp.identity(blk.shape[0], dtype=complex, format="csr")
    if sp.issparse(blk):
        return (blk + shift * eye).tocsc()
    return np.asarray(blk) + shift * np.eye(blk.shape[0])


def sector_metric(model: ModelSpec, space: FockSpace, n: int, compiled: Compiled | None = None) -> SectorMetric:
    """``G_n = (H01⊗1 + 1⊗H02)|_n + (|M1|+|M2|+1)·1``, certified by Cholesky."""
    if not 0 <= n <= space.n_max:
        raise ValueError(f"sector {n} outside 0..{space.n_max}")
    m1, m2 = lower_bounds(model, space.n_max)
    shift = abs(m1) + abs(m2) + 1.0
    h0 = (compiled or compile_model(model, space)).H0
    g = _metric_matrix(h0, n, shift)
    min_eig = None
    if g.shape[0] <= linalg.DENSE_LIMIT:
        gd = g.toarray() if sp.issparse(g) else g
        try:
            sla.cholesky(gd, lower=False)
        except np.linalg.LinAlgError as exc:
            raise ArithmeticError(f"metric on sector {n} is not positive definite: lower bounds are wrong") from exc
        min_eig = float(sla.eigvalsh(gd, subset_by_index=[0, 0])[0])
    return SectorMetric(n, g, shift, min_eig)


# -------------------------------------------------------------- bands

def band_check(op: qop.BlockOperator, expected: int) -> tuple[bool, float]:
    """``(ok, largest entry of blocks with |m - n| > expected)``."""
    worst = max((qop._block_max_abs(b) for (m, n), b in op.blocks.items() if abs(m - n) > expected), default=0.0)
    return worst <= OFFBAND_TOL, worst


# ---------------------------------------------------------- compliance

@dataclass
class ComplianceReport:
    model: str
    variant: str
    n_values: list[int]
    gamma: list[float]
    slope: float | None
    intercept: float | None
    residual: float | None
    band_ok: bool
    max_offband: float
    expected_band: int
    threshold: float
    verdict: str
    n_max: int
    split: dict | None = None
    inequality_results: list[dict] = field(default_factory=list)
    header: dict = field(default_factory=dict)
    note: str = TRUNCATION_NOTE

    def to_json(self) -> dict:
        return asdict(self)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ["n", "gamma"]
        split = self.split or {}
        if split:
            cols += ["gamma2", "C_diag"]
        w.writerow(cols)
        for k, n in enumerate(self.n_values):
            row = [n, repr(self.gamma[k])]
            if split:
                row += [repr(split["gamma2"][k]), repr(split["C_diag"][k])]
            w.writerow(row)
        return buf.getvalue()


def _fit(n_values, vals):
    xs = np.asarray(n_values, dtype=float) + 1.0
    ys = np.asarray(vals, dtype=float)
    pos = ys > 0
    if pos.sum() < 3:
        return None
    return linalg.scaling_fit(xs[pos], ys[pos])


def _check_range(space: FockSpace, n_values, band: int) -> list[int]:
    n_values = [int(n) for n in n_values]
    if not n_values:
        raise ValueError("empty n_range")
    top = space.n_max - band
    bad = [n for n in n_values if n < 0 or n > top]
    if bad:
        raise ValueError(
            f"sectors {bad} are within one bandwidth ({band}) of the cutoff n_max={space.n_max}; "
            f"use n <= {top} or raise n_max"
        )
    return n_values


def gamma_values(model: ModelSpec, space: FockSpace, n_values, variant: str = "quadratic",
                 compiled: Compiled | None = None, workers: int = 1) -> list[float]:
    """``γ(n)² = λ_max(A†A, B)`` with ``A`` the sector-``n`` columns of ``HI``."""
    if variant not in ("quadratic", "quartic"):
        raise ValueError(f"unknown variant {variant!r}")
    compiled = compiled or compile_model(model, space)
    hi = compiled.HI
    m1, m2 = lower_bounds(model, space.n_max)
    shift = abs(m1) + abs(m2) + 1.0
    power = 2 if variant == "quadratic" else 4

    def one(n):
        a = hi.column(n)
        if a.nnz == 0:
            return 0.0
        g = _metric_matrix(compiled.H0, n, shift)
        w = float(n + 1)
        eye = sp.identity(g.shape[0], format="csc") if sp.issparse(g) else np.eye(g.shape[0])
        b = w**power * eye + w ** (power // 2) * g
        return math.sqrt(linalg.generalized_lambda_max(a, b))

    return _map(one, n_values, workers)


def compliance_gamma(model: ModelSpec, space: FockSpace, n_range, variant: str = "quadratic",
                     threshold: float = SLOPE_THRESHOLD, compiled: Compiled | None = None,
                     workers: int = 1) -> ComplianceReport:
    """Per-sector optimal constant of the growth bound and its fitted log-log slope.

    The verdict is ``compliant`` when the interaction respects the band
    (2 for the quadratic variant, 4 for the quartic one) and ``γ(n)`` does
    not grow faster than ``(n+1)^threshold``; ``inconclusive`` when too few
    nonzero values exist for a fit.
    """
    compiled = compiled or compile_model(model, space)
    expected = 2 if variant == "quadratic" else 4
    hi = compiled.HI
    n_values = _check_range(space, n_range, max(hi.bandwidth, 1))
    band_ok, offband = band_check(hi, expected)
    gamma = gamma_values(model, space, n_values, variant, compiled, workers)
    fit = _fit(n_values, gamma)
    slope = intercept = resid = None
    if fit is not None:
        slope, intercept, resid = fit
    if not any(gamma):
        verdict = "compliant" if band_ok else "non-compliant"
    elif not band_ok:
        verdict = "non-compliant"
    elif fit is None:
        verdict = "inconclusive"
    else:
        verdict = "compliant" if slope <= threshold else "non-compliant"
    return ComplianceReport(model.name, variant, n_values, gamma, slope, intercept, resid, band_ok, offband,
                            expected, threshold, verdict, space.n_max)


@dataclass
class SplitReport:
    n_values: list[int]
    diag_ok: bool
    gamma2: list[float]
    slope2: float | None
    residual2: float | None
    C_diag: list[float]
    slope_C: float | None
    verdict: str

    def to_json(self) -> dict:
        return asdict(self)


def split_compliance(model: ModelSpec, space: FockSpace, n_range, threshold: float = SLOPE_THRESHOLD,
                     compiled: Compiled | None = None, workers: int = 1) -> SplitReport:
    """Checks for the diagonal/off-diagonal splitting hypothesis.

    ``γ₂(n) = ‖H2|_n‖ / (n+1)`` must stay bounded; ``C(n) = ‖Hdiag G_n^{-1/2}‖``
    is reported but not thresholded since the diagonal bound may depend on n.
    """
    compiled = compiled or compile_model(model, space)
    n_values = _check_range(space, n_range, max(compiled.HI.bandwidth, 1))
    m1, m2 = lower_bounds(model, space.n_max)
    shift = abs(m1) + abs(m2) + 1.0
    diag_ok = compiled.Hdiag.bandwidth == 0 and all(m != n for (m, n) in compiled.H2.blocks)

    def one(n):
        col = compiled.H2.column(n)
        g2 = linalg.spectral_norm(col) / (n + 1)
        blk = compiled.Hdiag.blocks.get((n, n))
        if blk is None:
            return g2, 0.0
        g = _metric_matrix(compiled.H0, n, shift)
        return g2, math.sqrt(linalg.generalized_lambda_max(sp.csr_matrix(blk), g))

    vals = _map(one, n_values, workers)
    gamma2 = [v[0] for v in vals]
    cdiag = [v[1] for v in vals]
    fit2, fitc = _fit(n_values, gamma2), _fit(n_values, cdiag)
    slope2 = fit2[0] if fit2 else None
    if not diag_ok:
        verdict = "non-compliant"
    elif not any(gamma2):
        verdict = "compliant"
    elif fit2 is None:
        verdict = "inconclusive"
    else:
        verdict = "compliant" if slope2 <= threshold else "non-compliant"
    return SplitReport(n_values, diag_ok, gamma2, slope2, fit2[2] if fit2 else None, cdiag,
                       fitc[0] if fitc else None, verdict)


# ------------------------------------------------------ inequalities

BOUND_FAMILY = {"eq13": "nelson", "eq33": "pauli-fierz", "eq35": "boson", "eq36": "boson"}


@dataclass
class InequalityResult:
    bound: str
    n: int
    samples: int
    max_ratio: float
    max_ratio_aligned: float
    violations: int
    hard_violations: int = 0

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class _Piece:
    """One operator ``T`` with right side ``scale(φ) · Σ_{i in shifts} ‖ψ_{n+i}‖``."""

    op: qop.BlockOperator
    shifts: tuple[int, ...]
    scale: object  # callable: (n, phi block (rows, batch)) -> (batch,)


def _colnorm(x) -> np.ndarray:
    """Euclidean norm of each column of a complex ``(rows, batch)`` array."""
    x = np.ascontiguousarray(x, dtype=complex)
    v = x.view(np.float64)
    sq = np.einsum("ij,ij->j", v, v)
    return np.sqrt(sq.reshape(-1, 2).sum(axis=1))


def _energy(h: qop.BlockOperator, n: int, phi: np.ndarray) -> np.ndarray:
    """``sqrt(<φ, h φ>)`` column-wise for a positive bandwidth-0 operator ``h``."""
    blk = h.blocks.get((n, n))
    if blk is None:
        return np.zeros(phi.shape[1])
    hp = np.ascontiguousarray(blk @ phi, dtype=complex).view(np.float64)
    pv = np.ascontiguousarray(phi, dtype=complex).view(np.float64)
    q = np.einsum("ij,ij->j", pv, hp).reshape(-1, 2).sum(axis=1)
    return np.sqrt(np.maximum(q, 0.0))


def _inv_sqrt(mat: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(mat)
    return (v / np.sqrt(w)) @ v.conj().T


def _pieces(model: ModelSpec, space: FockSpace, bound: str, compiled: Compiled) -> list[_Piece]:
    data, L = model.data, model.L
    if bound == "eq36":
        v1 = float(np.linalg.norm(data["V1"]))
        v3 = float(np.linalg.norm(data["V3"]))
        return [_Piece(compiled.H2, (-2, -1, 1, 2),
                       lambda n, phi: 2 * (math.sqrt(n + 1) * v1 + (n + 1) * v3) * _colnorm(phi))]
    if bound == "eq35":
        h0 = data["h0"]
        v2 = float(np.linalg.norm(data["V2"]))
        w = data["V4"].real
        r = _inv_sqrt(h0 + np.eye(model.d))
        c4 = max((np.linalg.norm(np.diag(w[:, y]) @ r, 2) for y in range(model.d)), default=0.0)
        dg = qop.second_quantization(space, h0)

        def scale(n, phi):
            nrm = _colnorm(phi)
            return n * v2 * nrm + c4 * (n**1.5 * _energy(dg, n, phi) + n**2 * nrm)
        return [_Piece(compiled.Hdiag, (0,), scale)]
    if bound == "eq13":
        v, lap = data["v"], data["Lap"]
        r = _inv_sqrt(np.eye(L) + lap)
        c1 = float(np.linalg.norm([np.linalg.norm(np.diag(v[:, k]) @ r, 2) for k in range(model.d)]))
        c2 = math.sqrt(np.linalg.norm(r @ np.diag(np.sum(np.abs(v) ** 2, axis=1)) @ r, 2))
        kin = qop.kron_particle(lap, qop.identity(space))

        def scale(n, phi):
            return math.sqrt(2) * (2 * math.sqrt(n) * c1 + c2) * (_energy(kin, n, phi) + _colnorm(phi))
        return [_Piece(compiled.HI, (-1, 1), scale)]
    if bound == "eq33":
        chi = float(np.linalg.norm(data["chi"]))
        lin = [t for t in model.terms if t.kind in ("create", "annihilate")]
        rest = [t for t in model.terms if t.kind not in ("create", "annihilate")]
        # A·∇ is -(i/2) times the linear part 2i A·∇
        a_grad = qop.scale(-0.5j, compile_terms(lin, space, L, hermitian=False))
        a_sq = compile_terms(rest, space, L)
        absp = np.sqrt(np.diag(data["Px"]).real ** 2 + np.diag(data["Py"]).real ** 2)
        p2 = qop.kron_particle(np.diag(absp**2), qop.identity(space))
        return [
            _Piece(a_grad, (-1, 1), lambda n, phi: math.sqrt(2) * chi * math.sqrt(n + 1) * _energy(p2, n, phi)),
            _Piece(a_sq, (-2, -1, 0, 1, 2), lambda n, phi: 2 * chi**2 * (n + 1) * _colnorm(phi)),
        ]
    raise ValueError(f"unknown bound {bound!r}; choose from {', '.join(BOUND_FAMILY)}")


def inequality_sampler(model: ModelSpec, bound: str, n: int, samples: int = 1000, seed: int = 42,
                       space: FockSpace | None = None, compiled: Compiled | None = None,
                       n_max: int = 12, batch: int = 32) -> InequalityResult:
    """Sample ``|<ψ, T φ_n>| / RHS`` for one of the model inequalities.

    ``φ_n`` is a random unit vector of sector ``n``.  ``ψ`` is a complex
    Gaussian vector on the sectors the right side sees; components elsewhere
    change neither side.  Both sides only depend on ``<ψ_m, t_m>`` and
    ``‖ψ_m‖`` per row sector ``m`` (``t = T φ_n``), so ``ψ_m`` is drawn in
    that reduced form: a complex normal coordinate ``z`` along ``t_m`` and
    an independent ``χ²`` with ``2(D_m - 1)`` degrees of freedom for the
    orthogonal part.  This has exactly the law of a full Gaussian draw.
    Each ``φ_n`` is also paired with the worst ``ψ`` for it, the unit
    vector along the largest sector component of ``T φ_n``; it maximises
    the ratio because the right side is an ℓ¹ sum over sectors.
    """
    if bound not in BOUND_FAMILY:
        raise ValueError(f"unknown bound {bound!r}; choose from {', '.join(BOUND_FAMILY)}")
    if model.family != BOUND_FAMILY[bound]:
        raise ValueError(f"{bound} applies to {BOUND_FAMILY[bound]} models, got family {model.family!r}")
    space = space or FockSpace(model.d, n_max)
    if not 0 <= n <= space.n_max - 2:
        raise ValueError(f"sector {n} is not interior for n_max={space.n_max} (need n <= {space.n_max - 2})")
    compiled = compiled or compile_model(model, space)
    pieces = _pieces(model, space, bound, compiled)
    rng = SplitMix64(seed).spawn(n)
    L, dims = model.L, space.dims
    size_n = L * dims[n]
    worst = worst_aligned = 0.0
    violations = hard = 0
    done = 0
    while done < samples:
        b = min(batch, samples - done)
        phi = rng.complex_normal((size_n, b))
        phi /= _colnorm(phi)
        for piece in pieces:
            rows = [n + s for s in piece.shifts if 0 <= n + s <= space.n_max]
            tnorm = np.array([_colnorm(piece.op.block(m, n) @ phi) for m in rows])
            rhs_scale = piece.scale(n, phi)
            z = rng.complex_normal((len(rows), b))
            rest = np.array([2.0 * rng.gamma(L * dims[m] - 1, b) for m in rows])
            lhs = np.abs(np.sum(z.conj() * tnorm, axis=0))
            rhs = rhs_scale * np.sum(np.sqrt(np.abs(z) ** 2 + rest), axis=0)
            lhs_star = np.max(tnorm, axis=0)
            for lv, rv in ((lhs, rhs), (lhs_star, rhs_scale)):
                zero = rv <= 0
                hard += int(np.sum(zero & (lv > 1e-13)))
                ratio = np.where(zero, 0.0, lv / np.where(zero, 1.0, rv))
                violations += int(np.sum(ratio > 1 + VIOLATION_SLACK))
            ok = rhs > 0
            if np.any(ok):
                worst = max(worst, float(np.max(lhs[ok] / rhs[ok])))
            ok = rhs_scale > 0
            if np.any(ok):
                worst_aligned = max(worst_aligned, float(np.max(lhs_star[ok] / rhs_scale[ok])))
        done += b
    return InequalityResult(bound, n, samples, worst, worst_aligned, violations + hard, hard)


def sample_all_sectors(model: ModelSpec, bound: str, n_max: int = 12, samples: int = 1000, seed: int = 42,
                       workers: int = 1, space: FockSpace | None = None,
                       compiled: Compiled | None = None) -> list[InequalityResult]:
    """:func:`inequality_sampler` on every interior sector ``0 .. n_max - 2``."""
    space = space or FockSpace(model.d, n_max)
    compiled = compiled or compile_model(model, space)
    return _map(lambda n: inequality_sampler(model, bound, n, samples, seed, space, compiled),
                range(space.n_max - 1), workers)


def aligned_ratio(model: ModelSpec, space: FockSpace, n: int, phi: np.ndarray, variant: str = "quadratic",
                  compiled: Compiled | None = None) -> tuple[float, float]:
    """Growth-bound ratio at ``ψ* = HI φ / ‖HI φ‖`` and the Rayleigh quotient it should equal.

    Returns ``(|<ψ*, HI φ>|² / (Σ‖ψ*_{n+i}‖² · <φ, B φ>), ‖HI φ‖² / <φ, B φ>)``.
    """
    compiled = compiled or compile_model(model, space)
    m1, m2 = lower_bounds(model, space.n_max)
    shift = abs(m1) + abs(m2) + 1.0
    power = 2 if variant == "quadratic" else 4
    a = compiled.HI.column(n)
    t = a @ phi
    g = _metric_matrix(compiled.H0, n, shift)
    w = float(n + 1)
    bq = (w**power * np.vdot(phi, phi) + w ** (power // 2) * np.vdot(phi, g @ phi)).real
    nt = np.linalg.norm(t)
    if nt == 0:
        return 0.0, 0.0
    psi = t / nt
    lhs = abs(np.vdot(psi, t)) ** 2
    return float(lhs / (np.vdot(psi, psi).real * bq)), float(nt**2 / bq)


# ------------------------------------------------------- relative bound

@dataclass
class RelBoundReport:
    exponent: int
    samples: int
    eps: list[float]
    C: list[float]
    C_doubled: list[float]
    stable: list[bool]
    epsilon_min: float | None
    C_at_eps: float | None

    def to_json(self) -> dict:
        return asdict(self)


def _relbound_terms(model, space, compiled, exponent, count, rng, sectors):
    """Per-sample ``(‖HIφ‖, ‖H0φ‖, ‖Kφ‖ + ‖φ‖)`` for random single-sector unit vectors."""
    picks = rng.next_u64(count) % np.uint64(len(sectors))
    out = np.empty((count, 3))
    for k, idx in enumerate(picks):
        n = sectors[int(idx)]
        phi = rng.complex_normal(model.L * space.dims[n])
        phi /= np.linalg.norm(phi)
        hphi = compiled.HI.column(n) @ phi
        h0 = compiled.H0.blocks.get((n, n))
        out[k] = (np.linalg.norm(hphi), 0.0 if h0 is None else np.linalg.norm(h0 @ phi), float(n) ** exponent + 1.0)
    return out


def relative_bound_fit(model: ModelSpec, space: FockSpace, exponent: int = 3, samples: int = 200,
                       seed: int = 42, eps_grid=EPS_GRID, compiled: Compiled | None = None) -> RelBoundReport:
    """Smallest ``ε`` on the grid whose ``C(ε)`` is stable under sample doubling.

    ``C(ε) = max (‖HIφ‖ - ε‖H0φ‖)₊ / (‖N^exponent φ‖ + ‖φ‖)`` over random unit
    vectors drawn from single interior sectors.  Stable means the doubled
    sample changes ``C`` by less than 5 %.
    """
    compiled = compiled or compile_model(model, space)
    eps = [float(e) for e in eps_grid]
    if not compiled.HI.blocks:
        return RelBoundReport(exponent, samples, eps, [0.0] * len(eps), [0.0] * len(eps), [True] * len(eps), 0.0, 0.0)
    sectors = list(range(space.n_max - compiled.HI.bandwidth + 1))
    rng = SplitMix64(seed)
    first = _relbound_terms(model, space, compiled, exponent, samples, rng, sectors)
    second = np.vstack([first, _relbound_terms(model, space, compiled, exponent, samples, rng, sectors)])

    def c_of(vals, e):
        return float(np.max(np.maximum(vals[:, 0] - e * vals[:, 1], 0.0) / vals[:, 2]))

    c1 = [c_of(first, e) for e in eps]
    c2 = [c_of(second, e) for e in eps]
    stable = [abs(b - a) <= 0.05 * max(b, 1e-300) or b == 0 for a, b in zip(c1, c2)]
    best = next((k for k, s in enumerate(stable) if s), None)
    return RelBoundReport(exponent, samples, eps, c1, c2, stable,
                          None if best is None else eps[best], None if best is None else c2[best])


def relbound_across_cutoffs(model: ModelSpec, cutoffs, eps: float = 0.5, exponent: int = 3,
                            samples: int = 200, seed: int = 42) -> dict:
    """``C(ε)`` at fixed ``ε`` for growing cutoffs; stabilises if the last step moves it < 5 %."""
    values = []
    for n_max in cutoffs:
        rep = relative_bound_fit(model, FockSpace(model.d, n_max), exponent, samples, seed, (eps,))
        values.append(rep.C_doubled[0])
    last, prev = values[-1], values[-2] if len(values) > 1 else values[-1]
    return {"cutoffs": list(cutoffs), "eps": eps, "exponent": exponent, "C": values,
            "stabilizes": abs(last - prev) <= 0.05 * max(last, 1e-300)}


# ------------------------------------------------------------ spectrum

@dataclass
class SpectrumRow:
    n_max: int
    dim: int
    eigenvalues: list[float]
    drift: list[float] | None


def spectrum_drift(model: ModelSpec, cutoffs, k: int = 4, method: str = "auto") -> list[SpectrumRow]:
    """Lowest ``k`` eigenvalues of the truncated ``H`` per cutoff and their change.

    Drift is a truncation-instability indicator, not a statement about
    (non-)self-adjointness of the untruncated operator.
    """
    cutoffs = [int(c) for c in cutoffs]
    if any(b <= a for a, b in zip(cutoffs, cutoffs[1:])):
        raise ValueError("cutoffs must be strictly increasing")
    rows, prev = [], None
    for n_max in cutoffs:
        space = FockSpace(model.d, n_max)
        dim = model.L * space.dim
        if k > dim:
            raise ValueError(f"k={k} exceeds dimension {dim} at n_max={n_max}")
        h = compile_model(model, space).H.to_dense()
        w = linalg.eigvalsh(h, method)[:k]
        vals = [float(x) for x in w]
        drift = None if prev is None else [a - b for a, b in zip(vals, prev)]
        rows.append(SpectrumRow(n_max, dim, vals, drift))
        prev = vals
    return rows


def report_header(model_hash: str, version: str) -> dict:
    return {"model_hash": model_hash, "basis": BASIS_ORDER_TAG, "tool_version": version}
