"""Second-quantised operators as sector-banded block matrices.

Every operator lives on ``C^L ⊗ F`` where ``F`` is a truncated Fock space and
``L`` the particle-space dimension (1 when there is no particle).  Block
``(m, n)`` maps sector ``n`` to sector ``m`` and has shape
``(L·dim(m), L·dim(n))`` with the particle index major, i.e. it is built as
``kron(P, F_mn)``.

Truncation convention: operators are compressions ``1_{<=n_max} A 1_{<=n_max}``.
Anything routed above the cutoff is dropped, so commutation relations only
hold exactly on sectors far enough from the top.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np
import scipy.sparse as sp

from .fock import FockSpace
from .rng import SplitMix64

# blocks stored dense up to this many rows/cols, sparse above
DENSE_BLOCK_LIMIT = 512
HERMITIAN_TOL = 1e-12


def _pack(block):
    if max(block.shape) <= DENSE_BLOCK_LIMIT:
        return block.toarray() if sp.issparse(block) else np.asarray(block, dtype=complex)
    return sp.csr_matrix(block, dtype=complex)


def _block_max_abs(block) -> float:
    if sp.issparse(block):
        return float(np.max(np.abs(block.data))) if block.nnz else 0.0
    return float(np.max(np.abs(block))) if block.size else 0.0


class SpaceMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class BlockOperator:
    """Operator on ``C^L ⊗ F`` stored as a map ``(row_sector, col_sector) -> block``."""

    space: FockSpace
    L: int
    blocks: Mapping[tuple[int, int], object]
    hermitian: bool = False

    def __post_init__(self):
        for (m, n), blk in self.blocks.items():
            want = (self.L * self.space.dims[m], self.L * self.space.dims[n])
            if blk.shape != want:
                raise ValueError(f"block {(m, n)} has shape {blk.shape}, expected {want}")

    @property
    def bandwidth(self) -> int:
        return max((abs(m - n) for m, n in self.blocks), default=0)

    @property
    def shape(self) -> tuple[int, int]:
        dim = self.L * self.space.dim
        return dim, dim

    def block(self, m: int, n: int):
        blk = self.blocks.get((m, n))
        if blk is None:
            return _pack(sp.csr_matrix((self.L * self.space.dims[m], self.L * self.space.dims[n])))
        return blk

    def support(self, n: int) -> list[int]:
        """Row sectors that column sector ``n`` reaches through nonzero blocks."""
        return sorted(m for (m, k), blk in self.blocks.items() if k == n and _block_max_abs(blk) > 0)

    def column(self, n: int, rows: Iterable[int] | None = None) -> sp.csr_matrix:
        """Column sector ``n`` stacked over ``rows`` (default: every stored row sector)."""
        if rows is None:
            rows = sorted(m for (m, k) in self.blocks if k == n)
        parts = [sp.csr_matrix(self.block(m, n)) for m in rows]
        if not parts:
            return sp.csr_matrix((0, self.L * self.space.dims[n]), dtype=complex)
        return sp.vstack(parts, format="csr")

    def offsets(self) -> list[int]:
        return [self.L * o for o in self.space.offsets]

    def to_sparse(self) -> sp.csr_matrix:
        dims = [self.L * d for d in self.space.dims]
        grid = [[None] * len(dims) for _ in dims]
        for (m, n), blk in self.blocks.items():
            grid[m][n] = sp.coo_matrix(blk)
        for k, dim in enumerate(dims):
            if grid[k][k] is None:
                grid[k][k] = sp.coo_matrix((dim, dim), dtype=complex)
        return sp.bmat(grid, format="csr", dtype=complex)

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def apply(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        if v.shape[0] != self.shape[1]:
            raise SpaceMismatch(f"vector length {v.shape[0]} != operator size {self.shape[1]}")
        offs = self.offsets() + [self.shape[0]]
        out = np.zeros(v.shape, dtype=complex)
        for (m, n), blk in sorted(self.blocks.items()):
            out[offs[m]:offs[m + 1]] += blk @ v[offs[n]:offs[n + 1]]
        return out

    def max_hermitian_defect(self) -> float:
        worst = 0.0
        for (m, n), blk in self.blocks.items():
            other = self.blocks.get((n, m))
            diff = blk if other is None else blk - other.conj().T
            worst = max(worst, _block_max_abs(diff))
        return worst

    def prune(self, tol: float = 0.0) -> "BlockOperator":
        """Drop blocks whose entries are all at most ``tol`` in magnitude."""
        kept = {k: b for k, b in self.blocks.items() if _block_max_abs(b) > tol}
        return BlockOperator(self.space, self.L, kept, self.hermitian)

    def band_part(self, select: Callable[[int], bool]) -> "BlockOperator":
        """Blocks whose sector shift ``m - n`` satisfies ``select``."""
        kept = {(m, n): b for (m, n), b in self.blocks.items() if select(m - n)}
        return BlockOperator(self.space, self.L, kept, self.hermitian)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(-1.0, other))

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmul__(self, c):
        return scale(c, self)


# ---------------------------------------------------------------- algebra

def _check_compatible(a: BlockOperator, b: BlockOperator) -> None:
    if a.space != b.space or a.L != b.L:
        raise SpaceMismatch(
            f"operators live on different spaces: (d={a.space.d}, n_max={a.space.n_max}, L={a.L}) "
            f"vs (d={b.space.d}, n_max={b.space.n_max}, L={b.L})"
        )


def add(a: BlockOperator, b: BlockOperator) -> BlockOperator:
    _check_compatible(a, b)
    blocks = dict(a.blocks)
    for key, blk in b.blocks.items():
        blocks[key] = _pack(blocks[key] + blk) if key in blocks else blk
    return BlockOperator(a.space, a.L, blocks, a.hermitian and b.hermitian)


def scale(c: complex, a: BlockOperator) -> BlockOperator:
    blocks = {k: _pack(c * b) for k, b in a.blocks.items()}
    return BlockOperator(a.space, a.L, blocks, a.hermitian and complex(c).imag == 0)


def adjoint(a: BlockOperator) -> BlockOperator:
    blocks = {(n, m): _pack(b.conj().T) for (m, n), b in a.blocks.items()}
    return BlockOperator(a.space, a.L, blocks, a.hermitian)


def matmul(a: BlockOperator, b: BlockOperator) -> BlockOperator:
    """Product inside the truncated space; intermediate sectors above the cutoff are absent."""
    _check_compatible(a, b)
    by_row = {}
    for (k, n), blk in b.blocks.items():
        by_row.setdefault(k, []).append((n, blk))
    blocks: dict = {}
    for (m, k), ablk in sorted(a.blocks.items()):
        for n, bblk in by_row.get(k, ()):
            prod = ablk @ bblk
            blocks[(m, n)] = blocks[(m, n)] + prod if (m, n) in blocks else prod
    blocks = {key: _pack(val) for key, val in blocks.items()}
    return BlockOperator(a.space, a.L, blocks, False)


def commutator(a: BlockOperator, b: BlockOperator) -> BlockOperator:
    return add(matmul(a, b), scale(-1.0, matmul(b, a)))


def max_abs(a: BlockOperator, cols: Iterable[int] | None = None) -> float:
    """Largest entry magnitude, optionally only over the given column sectors."""
    keep = None if cols is None else set(cols)
    return max(
        (_block_max_abs(b) for (m, n), b in a.blocks.items() if keep is None or n in keep),
        default=0.0,
    )


# ---------------------------------------------------------- ladder matrices

def lowering(space: FockSpace, mode: int, n: int) -> sp.csr_matrix:
    """Mode annihilator ``a_i`` from sector ``n`` to ``n-1`` (real, sparse).

    Matrix elements come straight from the occupation basis:
    ``a_i |.., k_i, ..> = sqrt(k_i) |.., k_i - 1, ..>``.
    """
    key = ("low", mode, n)
    cache = space._cache
    if key not in cache:
        if n == 0:
            raise ValueError("no sector below the vacuum")
        occ = space.occupations(n)
        cols = np.nonzero(occ[:, mode] > 0)[0]
        target = occ[cols].copy()
        amp = np.sqrt(target[:, mode].astype(float))
        target[:, mode] -= 1
        rows = space.rank(target)
        mat = sp.csr_matrix((amp, (rows, cols)), shape=(space.dims[n - 1], space.dims[n]))
        cache[key] = mat
    return cache[key]


def raising(space: FockSpace, mode: int, n: int) -> sp.csr_matrix:
    """Mode creator ``a*_i`` from sector ``n`` to ``n+1``."""
    return lowering(space, mode, n + 1).T.tocsr()


def hopping(space: FockSpace, i: int, j: int, n: int) -> sp.csr_matrix:
    """``a*_i a_j`` on sector ``n``."""
    if n == 0:
        return sp.csr_matrix((1, 1))
    return (lowering(space, i, n).T @ lowering(space, j, n)).tocsr()


def _pairs(d: int):
    return itertools.product(range(d), range(d))


# ------------------------------------------------------- block assembly

def _particle_parts(coeff: np.ndarray, L: int, nmodes: int):
    """Normalise a coefficient array to per-mode particle matrices.

    ``(d,)`` -> scalars times identity, ``(L, d)`` -> diagonal multiplication
    couplings, ``(L, L, d)`` -> general particle operators.  Returns a list of
    ``(mode, P)`` where ``P`` is sparse ``L×L``; zero modes are skipped.
    """
    coeff = np.asarray(coeff, dtype=complex)
    out = []
    if coeff.shape == (nmodes,):
        for k in range(nmodes):
            if coeff[k] != 0:
                out.append((k, coeff[k] * sp.identity(L, dtype=complex, format="csr")))
    elif coeff.shape == (L, nmodes):
        for k in range(nmodes):
            if np.any(coeff[:, k]):
                out.append((k, sp.diags(coeff[:, k]).tocsr()))
    elif coeff.shape == (L, L, nmodes):
        for k in range(nmodes):
            if np.any(coeff[:, :, k]):
                out.append((k, sp.csr_matrix(coeff[:, :, k])))
    else:
        raise ValueError(f"coefficient shape {coeff.shape} incompatible with L={L}, d={nmodes}")
    return out


def _particle_pair_parts(coeff: np.ndarray, L: int, d: int):
    coeff = np.asarray(coeff, dtype=complex)
    out = []
    if coeff.shape == (d, d):
        eye = sp.identity(L, dtype=complex, format="csr")
        for i, j in _pairs(d):
            if coeff[i, j] != 0:
                out.append((i, j, coeff[i, j] * eye))
    elif coeff.shape == (L, L, d, d):
        for i, j in _pairs(d):
            if np.any(coeff[:, :, i, j]):
                out.append((i, j, sp.csr_matrix(coeff[:, :, i, j])))
    else:
        raise ValueError(f"pair coefficient shape {coeff.shape} incompatible with L={L}, d={d}")
    return out


def _assemble(space: FockSpace, L: int, shift: int, column_block, hermitian=False) -> BlockOperator:
    """Collect ``column_block(n)`` (block from sector ``n`` to ``n+shift``) over all sectors."""
    blocks = {}
    for n in range(space.n_max + 1):
        m = n + shift
        if not 0 <= m <= space.n_max:
            continue
        blk = column_block(n)
        if blk is None:
            continue
        if sp.issparse(blk) and blk.nnz == 0:
            continue
        blocks[(m, n)] = _pack(blk)
    return BlockOperator(space, L, blocks, hermitian)


def _kron_sum(parts, L, fock_of):
    total = None
    for p, fmat in ((p, fock_of(*k)) for *k, p in parts):
        term = sp.kron(p, fmat, format="csr") if L > 1 else p[0, 0] * fmat
        total = term if total is None else total + term
    return total


def field_linear(space: FockSpace, coeff, L: int = 1, create: bool = True) -> BlockOperator:
    """``Σ_k P_k ⊗ a*_k`` (create) or its adjoint ``Σ_k P_k† ⊗ a_k``.

    With scalar coefficients this is ``a*(f) = Σ f_k a*_k`` and
    ``a(f) = Σ conj(f_k) a_k``: the annihilator is antilinear in ``f``.
    """
    parts = _particle_parts(coeff, L, space.d)
    if create:
        def col(n):
            if n == space.n_max or not parts:
                return None
            return _kron_sum(parts, L, lambda k: raising(space, k, n))
        return _assemble(space, L, +1, col)
    adj = [(k, p.conj().T.tocsr()) for k, p in parts]

    def col(n):
        if n == 0 or not adj:
            return None
        return _kron_sum(adj, L, lambda k: lowering(space, k, n))
    return _assemble(space, L, -1, col)


def annihilation_matrix(space: FockSpace, f) -> BlockOperator:
    f = np.asarray(f, dtype=complex)
    if f.shape != (space.d,):
        raise ValueError(f"f has shape {f.shape}, space has d={space.d}")
    if not np.all(np.isfinite(f)):
        raise ValueError("f has non-finite entries")
    return field_linear(space, f, create=False)


def creation_matrix(space: FockSpace, f) -> BlockOperator:
    f = np.asarray(f, dtype=complex)
    if f.shape != (space.d,):
        raise ValueError(f"f has shape {f.shape}, space has d={space.d}")
    if not np.all(np.isfinite(f)):
        raise ValueError("f has non-finite entries")
    return field_linear(space, f, create=True)


def _require_hermitian(h: np.ndarray, name: str, tol: float = HERMITIAN_TOL) -> None:
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"{name} must be square, got shape {h.shape}")
    dev = np.abs(h - h.conj().T)
    if dev.size and dev.max() > tol:
        i, j = np.unravel_index(np.argmax(dev), dev.shape)
        raise ValueError(f"{name} is not Hermitian: |{name}[{i},{j}] - conj({name}[{j},{i}])| = {dev[i, j]:.3g}")


def quad_preserve(space: FockSpace, coeff, L: int = 1) -> BlockOperator:
    """``Σ_ij M_ij a*_i a_j`` with scalar ``(d,d)`` or particle-valued ``(L,L,d,d)`` coefficients."""
    coeff = np.asarray(coeff, dtype=complex)
    d = space.d
    if coeff.shape == (d, d):
        diag = np.diag(coeff)
        off = [(i, j, coeff[i, j]) for i, j in _pairs(d) if i != j and coeff[i, j] != 0]

        def col(n):
            occ = space.occupations(n)
            mat = sp.diags(occ @ diag).tocsr()
            for i, j, c in off:
                mat = mat + c * hopping(space, i, j, n)
            return sp.kron(sp.identity(L), mat, format="csr") if L > 1 else mat
        return _assemble(space, L, 0, col)
    parts = _particle_pair_parts(coeff, L, d)

    def col(n):
        if not parts:
            return None
        return _kron_sum(parts, L, lambda i, j: hopping(space, i, j, n))
    return _assemble(space, L, 0, col)


def second_quantization(space: FockSpace, h) -> BlockOperator:
    """``dΓ(h)``: on each sector the sum of ``h`` acting on every particle slot."""
    h = np.asarray(h, dtype=complex)
    if h.shape != (space.d, space.d):
        raise ValueError(f"h has shape {h.shape}, space has d={space.d}")
    _require_hermitian(h, "h")
    op = quad_preserve(space, h)
    return BlockOperator(space, 1, op.blocks, hermitian=True)


def number_operator(space: FockSpace) -> BlockOperator:
    return second_quantization(space, np.eye(space.d))


def identity(space: FockSpace, L: int = 1) -> BlockOperator:
    return _assemble(space, L, 0, lambda n: sp.identity(L * space.dims[n], dtype=complex, format="csr"),
                     hermitian=True)


def pair_create(space: FockSpace, coeff, L: int = 1) -> BlockOperator:
    """``Σ_ij M_ij a*_i a*_j`` (sector ``n -> n+2``)."""
    parts = _particle_pair_parts(coeff, L, space.d)

    def col(n):
        if n + 2 > space.n_max or not parts:
            return None
        return _kron_sum(parts, L, lambda i, j: raising(space, i, n + 1) @ raising(space, j, n))
    return _assemble(space, L, +2, col)


def pair_annihilate(space: FockSpace, coeff, L: int = 1) -> BlockOperator:
    """Adjoint of :func:`pair_create`: ``Σ_ij M_ij† a_j a_i``."""
    return adjoint(pair_create(space, coeff, L))


def quartic_pair(space: FockSpace, w) -> BlockOperator:
    """``Σ_ij W_ij a*_i a*_j a_i a_j`` for real symmetric ``W``.

    Diagonal in the occupation basis with value ``k·W·k - Σ_i W_ii k_i``.
    """
    w = np.asarray(w)
    if w.shape != (space.d, space.d):
        raise ValueError(f"W has shape {w.shape}, space has d={space.d}")
    if np.iscomplexobj(w) and np.any(np.abs(w.imag) > HERMITIAN_TOL):
        raise ValueError("W must be real")
    w = np.real(w).astype(float)
    asym = np.abs(w - w.T)
    if asym.size and asym.max() > HERMITIAN_TOL:
        i, j = np.unravel_index(np.argmax(asym), asym.shape)
        raise ValueError(f"W must be symmetric: |W[{i},{j}] - W[{j},{i}]| = {asym[i, j]:.3g}")
    wdiag = np.diag(w)

    def col(n):
        occ = space.occupations(n).astype(float)
        vals = np.einsum("si,ij,sj->s", occ, w, occ) - occ @ wdiag
        return sp.diags(vals).tocsr()
    op = _assemble(space, 1, 0, col)
    return BlockOperator(space, 1, op.blocks, hermitian=True)


def cubic_create(space: FockSpace, c: complex = 1.0) -> BlockOperator:
    """``c·(a*)^3`` on a single mode."""
    if space.d != 1:
        raise ValueError("the cubic primitive is only defined for a single mode (d=1)")

    def col(n):
        if n + 3 > space.n_max:
            return None
        return sp.csr_matrix([[c * math.sqrt((n + 1) * (n + 2) * (n + 3))]])
    return _assemble(space, 1, +3, col)


def gamma_unitary(space: FockSpace, u, tol: float = HERMITIAN_TOL) -> BlockOperator:
    """``Γ(u)``: ``u^{⊗n}`` restricted to the symmetric sector ``n``.

    Matrix element ``<m|Γ(u)|k> = perm(U[m,k]) / sqrt(Π m_i! Π k_j!)`` where
    ``U[m,k]`` repeats row ``i`` of ``u`` ``m_i`` times and column ``j``
    ``k_j`` times.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (space.d, space.d):
        raise ValueError(f"u has shape {u.shape}, space has d={space.d}")
    dev = np.abs(u.conj().T @ u - np.eye(space.d)).max()
    if dev > tol:
        raise ValueError(f"u is not unitary: max |u†u - 1| = {dev:.3g}")

    def col(n):
        occ = space.occupations(n)
        dim = occ.shape[0]
        if n == 0:
            return np.ones((1, 1), dtype=complex)
        idx = [np.repeat(np.arange(space.d), o) for o in occ]
        norms = np.array([math.prod(math.factorial(int(c)) for c in o) for o in occ], dtype=float)
        out = np.empty((dim, dim), dtype=complex)
        for r in range(dim):
            for c in range(dim):
                out[r, c] = permanent(u[np.ix_(idx[r], idx[c])])
        return out / np.sqrt(np.outer(norms, norms))
    return _assemble(space, 1, 0, col)


def permanent(m: np.ndarray) -> complex:
    """Permanent by Ryser's formula with Gray-code updates."""
    n = m.shape[0]
    if n == 0:
        return 1.0
    total = 0.0
    row_sums = np.zeros(n, dtype=complex)
    prev = 0
    for k in range(1, 2**n):
        gray = k ^ (k >> 1)
        flip = (gray ^ prev).bit_length() - 1
        if gray & (1 << flip):
            row_sums += m[:, flip]
        else:
            row_sums -= m[:, flip]
        prev = gray
        sign = -1 if bin(gray).count("1") % 2 else 1
        total += sign * np.prod(row_sums)
    return (-1) ** n * total


def kron_particle(p, f: BlockOperator) -> BlockOperator:
    """``P ⊗ F`` block by block; the Fock operator must not carry a particle space yet."""
    p = np.asarray(p.toarray() if sp.issparse(p) else p, dtype=complex)
    if f.L != 1:
        raise ValueError(f"Fock operator already tensored with a particle space (L={f.L})")
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError(f"particle matrix must be square, got {p.shape}")
    ps = sp.csr_matrix(p)
    blocks = {k: _pack(sp.kron(ps, sp.csr_matrix(b), format="csr")) for k, b in f.blocks.items()}
    herm = f.hermitian and np.allclose(p, p.conj().T, atol=HERMITIAN_TOL, rtol=0)
    return BlockOperator(f.space, p.shape[0], blocks, herm)


# ------------------------------------------------------------- projections

def _sector_slice(space: FockSpace, n: int, L: int = 1) -> slice:
    if not 0 <= n <= space.n_max:
        raise ValueError(f"sector {n} outside 0..{space.n_max}")
    start = L * space.offsets[n]
    return slice(start, start + L * space.dims[n])


def project_sector(space: FockSpace, v, n: int, L: int = 1, pad: bool = False) -> np.ndarray:
    """Component of ``v`` in sector ``n`` (zero-padded to full length if ``pad``)."""
    v = np.asarray(v)
    if v.shape[0] != L * space.dim:
        raise ValueError(f"vector length {v.shape[0]} != space size {L * space.dim}")
    sl = _sector_slice(space, n, L)
    if not pad:
        return v[sl].copy()
    out = np.zeros_like(v)
    out[sl] = v[sl]
    return out


def project_upto(space: FockSpace, v, n: int, L: int = 1) -> np.ndarray:
    v = np.asarray(v)
    if n > space.n_max:
        raise ValueError(f"sector {n} above cutoff {space.n_max}")
    if v.shape[0] != L * space.dim:
        raise ValueError(f"vector length {v.shape[0]} != space size {L * space.dim}")
    out = np.zeros_like(v)
    stop = _sector_slice(space, n, L).stop if n >= 0 else 0
    out[:stop] = v[:stop]
    return out


# ------------------------------------------------------------------ CCR check

def ccr_selftest(space: FockSpace, trials: int = 100, seed: int = 42, include_top: bool = False) -> float:
    """Largest violation of ``[a(f1), a*(f2)] = <f1, f2>`` and ``[a(f1), a(f2)] = 0``.

    Column sectors are restricted to ``<= n_max - 1`` (resp. ``n_max - 2``)
    where the compression is exact; ``include_top`` keeps the top sector and
    exposes the truncation defect instead.
    """
    if space.n_max < 2:
        raise ValueError("ccr_selftest needs n_max >= 2")
    rng = SplitMix64(seed)
    interior = range(space.n_max + (1 if include_top else 0))
    interior2 = range(space.n_max - 1 + (1 if include_top else 0))
    eye = identity(space)
    worst = 0.0
    for _ in range(trials):
        f1 = rng.complex_normal(space.d)
        f2 = rng.complex_normal(space.d)
        a1 = annihilation_matrix(space, f1)
        c2 = creation_matrix(space, f2)
        a2 = annihilation_matrix(space, f2)
        inner = np.vdot(f1, f2)
        dev = commutator(a1, c2) - scale(inner, eye)
        worst = max(worst, max_abs(dev, interior))
        worst = max(worst, max_abs(commutator(a1, a2), interior2))
    return worst
