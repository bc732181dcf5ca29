"""Model description shared by the builders, the DSL and the checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

# primitive kind -> expression keyword
KINDS = {
    "dgamma": "dGamma",
    "number": "N",
    "identity": "Id",
    "create": "adag",
    "annihilate": "a",
    "quad": "quad2",
    "pair_create": "pairc",
    "pair_annihilate": "paira",
    "quartic": "quartic",
    "cubic3": "cubic3",
}


@dataclass(frozen=True, eq=False)
class Term:
    """One bound interaction term.

    Its value is ``outer · (inner·T + conj(inner)·T†)`` when ``closure`` is
    set and ``outer · inner · T`` otherwise, where ``T`` is the primitive,
    optionally tensored with the particle matrix ``particle``.
    """

    kind: str
    ref: str | None
    coeff: np.ndarray | None
    inner: complex = 1.0
    outer: complex = 1.0
    closure: bool = False
    particle_ref: str | None = None
    particle: np.ndarray | None = None

    @property
    def bandwidth(self) -> int:
        return {"create": 1, "annihilate": 1, "pair_create": 2, "pair_annihilate": 2, "cubic3": 3}.get(self.kind, 0)


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """``H = H01 ⊗ 1 + 1 ⊗ dΓ(h02) + H_I`` with ``H_I`` given as a term list.

    ``data`` keeps every named coefficient array (including ones only the
    bound checks read) and ``interaction`` the expression the terms were
    bound from, so the model serialises back to the same document.
    """

    name: str
    L: int
    d: int
    H01: np.ndarray
    h02: np.ndarray
    terms: tuple[Term, ...]
    data: dict[str, np.ndarray]
    interaction: str
    h01_ref: str | None
    h02_ref: str
    meta: dict = field(default_factory=dict)

    @cached_property
    def M1(self) -> float:
        """Stored so that ``H01 >= -M1`` with ``M1 >= 0``."""
        return max(0.0, -float(np.linalg.eigvalsh(self.H01)[0]))

    @cached_property
    def M2(self) -> float:
        return max(0.0, -float(np.linalg.eigvalsh(self.h02)[0]))

    @property
    def family(self) -> str | None:
        return self.meta.get("family")


def lower_bounds(model: ModelSpec, n_max: int | None = None) -> tuple[float, float]:
    """``(M1, M2)`` with ``H01 >= -M1`` and ``dΓ(h02) >= -M2`` on sectors ``<= n_max``.

    For ``h02 >= 0`` the second bound is 0.  A negative ``h02`` eigenvalue
    ``e`` gives ``n_max · e`` on the top sector, hence the cutoff argument.
    """
    lam1 = float(np.linalg.eigvalsh(model.H01)[0])
    lam2 = float(np.linalg.eigvalsh(model.h02)[0])
    m1 = max(0.0, -lam1)
    if lam2 >= 0:
        return m1, 0.0
    if n_max is None:
        raise ValueError("h02 is not positive: the lower bound of dΓ(h02) depends on the cutoff")
    return m1, -n_max * lam2
