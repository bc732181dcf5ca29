"""Operator expressions, model documents and compilation to block matrices.

Operator structure is written as an expression string, coefficient data
lives in a JSON document next to it.  Grammar (EBNF)::

    expr      = [sign] term { sign term } | "0" ;
    sign      = "+" | "-" ;
    term      = [ scalar "*" ] primitive ;
    scalar    = real [ "i" ] | "i" | "(" [sign] cnum [ sign cnum ] ")" ;
    cnum      = real [ "i" ] | "i" ;
    primitive = "N" | "Id"
              | ( "dGamma" | "a" | "adag" | "quad2" | "pairc" | "paira"
                | "quartic" | "cubic3" ) "(" ident ")"
              | "kron" "(" ident "," expr ")"
              | "hc" "(" expr ")" ;
    ident     = /[A-Za-z_][A-Za-z0-9_]*/ ;

``hc(x)`` stands for ``x + x†`` and may not be nested.
"""
from __future__ import annotations

import hashlib
import json
import re
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import qop
from .fock import FockSpace
from .modelspec import KINDS, ModelSpec, Term

FORMAT_TAG = "fockbench-model/1"
_KEYWORD_KIND = {v: k for k, v in KINDS.items()}
_BARE = {"N", "Id"}
_WITH_REF = {"dGamma", "a", "adag", "quad2", "pairc", "paira", "quartic", "cubic3"}
_TOL = 1e-12


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int, token: str):
        super().__init__(f"{message} at line {line}, column {column} (token {token!r})")
        self.line, self.column, self.token = line, column, token


class ModelError(ValueError):
    """Model document failed validation; ``field`` names the culprit."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


# ------------------------------------------------------------------- AST

@dataclass(frozen=True)
class Prim:
    name: str
    ref: str | None = None


@dataclass(frozen=True)
class Kron:
    ref: str
    body: "Sum"


@dataclass(frozen=True)
class Hc:
    body: "Sum"


@dataclass(frozen=True)
class Scaled:
    coef: complex
    op: Union[Prim, Kron, Hc]


@dataclass(frozen=True)
class Sum:
    terms: tuple[Scaled, ...]


# ---------------------------------------------------------------- lexer

_TOKEN = re.compile(
    r"(?P<ws>\s+)|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<sym>[-+*(),])"
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks, pos, line, line_start = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError("unexpected character", line, pos - line_start + 1, text[pos])
        kind = m.lastgroup
        if kind == "ws":
            for k, ch in enumerate(m.group()):
                if ch == "\n":
                    line, line_start = line + 1, pos + k + 1
        else:
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("end", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, message: str):
        t = self.tok
        raise ParseError(message, t.line, t.col, t.text or "<end>")

    def take(self, text: str | None = None, kind: str | None = None) -> _Tok:
        t = self.tok
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            self.fail(f"expected {text or kind}")
        self.i += 1
        return t

    def peek(self, k: int = 0) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def parse(self) -> Sum:
        out = self.expr(in_hc=False)
        if self.tok.kind != "end":
            self.fail("unexpected token after expression" if self.tok.text != ")" else "unbalanced parenthesis")
        return out

    def expr(self, in_hc: bool) -> Sum:
        if self.tok.kind == "num" and self.tok.text.strip("0.") == "" and self.peek(1).text in ("", ")"):
            self.i += 1
            return Sum(())
        terms = []
        sign = 1.0
        if self.tok.text in "+-" and self.tok.kind == "sym":
            sign = -1.0 if self.take().text == "-" else 1.0
        terms.append(self.term(sign, in_hc))
        while self.tok.kind == "sym" and self.tok.text in "+-":
            sign = -1.0 if self.take().text == "-" else 1.0
            terms.append(self.term(sign, in_hc))
        return Sum(tuple(terms))

    def term(self, sign: float, in_hc: bool) -> Scaled:
        coef = 1.0 + 0j
        if self.tok.kind == "num" or self.tok.text == "(" or (self.tok.text == "i" and self.peek(1).text == "*"):
            coef = self.scalar()
            self.take("*")
        return Scaled(sign * coef, self.primitive(in_hc))

    def cnum(self) -> complex:
        if self.tok.text == "i":
            self.i += 1
            return 1j
        if self.tok.kind != "num":
            self.fail("expected a number")
        val = float(self.take().text)
        if self.tok.text == "i":
            self.i += 1
            return 1j * val
        return complex(val)

    def scalar(self) -> complex:
        if self.tok.text != "(":
            return self.cnum()
        self.take("(")
        sign = 1.0
        if self.tok.text in ("+", "-"):
            sign = -1.0 if self.take().text == "-" else 1.0
        val = sign * self.cnum()
        if self.tok.text in ("+", "-"):
            sign = -1.0 if self.take().text == "-" else 1.0
            val += sign * self.cnum()
        if self.tok.text != ")":
            self.fail("unbalanced parenthesis in scalar")
        self.take(")")
        return val

    def primitive(self, in_hc: bool):
        t = self.tok
        if t.kind != "id":
            self.fail("expected a primitive")
        name = t.text
        if name in _BARE:
            self.i += 1
            return Prim(name)
        if name not in _WITH_REF and name not in ("kron", "hc"):
            self.fail("unknown primitive")
        self.i += 1
        if self.tok.text != "(":
            self.fail(f"{name} needs an argument list")
        self.take("(")
        if name == "hc":
            if in_hc:
                raise ParseError("nested hc is not allowed", t.line, t.col, t.text)
            body = self.expr(in_hc=True)
            node = Hc(body)
        elif name == "kron":
            ref = self.take(kind="id").text
            self.take(",")
            node = Kron(ref, self.expr(in_hc))
        else:
            node = Prim(name, self.take(kind="id").text)
        if self.tok.text != ")":
            self.fail("unbalanced parenthesis")
        self.take(")")
        return node


def parse_expression(text: str) -> Sum:
    return _Parser(text).parse()


# --------------------------------------------------------- pretty printer

def _fmt_real(x: float) -> str:
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


def _fmt_coef(c: complex) -> str:
    c = complex(c)
    if c.imag == 0:
        return _fmt_real(c.real)
    if c.real == 0:
        return "i" if c.imag == 1 else f"{_fmt_real(c.imag)}i"
    sign = "-" if c.imag < 0 else "+"
    return f"({_fmt_real(c.real)}{sign}{_fmt_real(abs(c.imag))}i)"


def _fmt_op(op) -> str:
    if isinstance(op, Prim):
        return op.name if op.ref is None else f"{op.name}({op.ref})"
    if isinstance(op, Kron):
        return f"kron({op.ref}, {pretty_print(op.body)})"
    return f"hc({pretty_print(op.body)})"


def pretty_print(ast: Sum) -> str:
    if not ast.terms:
        return "0"
    out = []
    for k, t in enumerate(ast.terms):
        c = complex(t.coef)
        neg = (c.imag == 0 and c.real < 0) or (c.real == 0 and c.imag < 0)
        if neg:
            c = -c
        body = _fmt_op(t.op)
        text = body if c == 1 else f"{_fmt_coef(c)} * {body}"
        if k == 0:
            out.append(f"-{text}" if neg else text)
        else:
            out.append(f" - {text}" if neg else f" + {text}")
    return "".join(out)


# ----------------------------------------------------------------- binding

def _as_array(data: dict, ref: str, field: str) -> np.ndarray:
    if ref not in data:
        raise ModelError(field, f"unresolved reference {ref!r}")
    return data[ref]


def _check_hermitian(mat: np.ndarray, field: str) -> None:
    dev = np.abs(mat - mat.conj().T)
    if dev.size and dev.max() > _TOL:
        i, j = np.unravel_index(np.argmax(dev), dev.shape)
        raise ModelError(field, f"not Hermitian: entry ({i},{j}) differs from conj of ({j},{i}) by {dev[i, j]:.3g}")


def _check_coeff(kind: str, arr: np.ndarray, ref: str, L: int, d: int, in_kron: bool) -> None:
    shapes = {
        "dgamma": [(d, d)],
        "create": [(d,)] + ([] if in_kron else [(L, d), (L, L, d)]),
        "quad": [(d, d)] + ([] if in_kron else [(L, L, d, d)]),
        "pair_create": [(d, d)] + ([] if in_kron else [(L, L, d, d)]),
        "quartic": [(d, d)],
        "cubic3": [(), (1,)],
    }
    shapes["annihilate"] = shapes["create"]
    shapes["pair_annihilate"] = shapes["pair_create"]
    if arr.shape not in shapes[kind]:
        raise ModelError(ref, f"shape {arr.shape} does not fit {KINDS[kind]} (allowed {shapes[kind]})")
    if kind == "cubic3" and d != 1:
        raise ModelError(ref, "cubic3 is only admitted for a single mode (d=1)")
    if kind == "dgamma":
        _check_hermitian(arr, ref)
    if kind == "quartic":
        if np.any(np.abs(arr.imag) > _TOL):
            raise ModelError(ref, "quartic kernel must be real")
        asym = np.abs(arr - arr.T)
        if asym.size and asym.max() > _TOL:
            i, j = np.unravel_index(np.argmax(asym), asym.shape)
            raise ModelError(ref, f"quartic kernel must be symmetric, ({i},{j}) differs by {asym[i, j]:.3g}")


def _self_adjoint(term: Term, field: str) -> None:
    """Reject unclosed terms that would make the interaction non-symmetric."""
    kind, arr = term.kind, term.coeff
    if kind in ("create", "annihilate", "pair_create", "pair_annihilate", "cubic3"):
        raise ModelError(field, f"{KINDS[kind]}({term.ref}) changes the particle number; wrap it in hc(...)")
    if complex(term.inner * term.outer).imag != 0:
        raise ModelError(field, f"complex scalar on unclosed term {KINDS[kind]}; wrap it in hc(...)")
    if kind == "quad":
        if arr.ndim == 2:
            _check_hermitian(arr, term.ref)
        else:
            swapped = np.conj(np.transpose(arr, (1, 0, 3, 2)))
            dev = np.abs(arr - swapped).max()
            if dev > _TOL:
                raise ModelError(term.ref, f"particle-valued quad2 coefficient not Hermitian (defect {dev:.3g})")
    if term.particle is not None:
        _check_hermitian(term.particle, term.particle_ref)


def bind_terms(ast: Sum, data: dict, L: int, d: int, field: str = "interaction") -> tuple[Term, ...]:
    out: list[Term] = []

    def walk(node: Sum, outer: complex, inner: complex, closure: bool, pref: str | None):
        for sc in node.terms:
            op = sc.op
            if isinstance(op, Hc):
                walk(op.body, outer * inner, sc.coef, True, pref)
                continue
            coef_outer, coef_inner = (outer, inner * sc.coef)
            if isinstance(op, Kron):
                if pref is not None:
                    raise ModelError(field, "nested kron is not supported")
                p = _as_array(data, op.ref, field)
                if p.shape != (L, L):
                    raise ModelError(op.ref, f"particle factor has shape {p.shape}, expected {(L, L)}")
                walk(op.body, coef_outer, coef_inner, closure, op.ref)
                continue
            kind = _KEYWORD_KIND[op.name]
            arr = None
            if op.ref is not None:
                arr = _as_array(data, op.ref, field)
                _check_coeff(kind, arr, op.ref, L, d, pref is not None)
            term = Term(kind, op.ref, arr, coef_inner, coef_outer, closure, pref,
                        None if pref is None else data[pref])
            if not closure:
                _self_adjoint(term, field)
            elif complex(coef_outer).imag != 0:
                raise ModelError(field, "complex scalar multiplying hc(...) breaks symmetry")
            out.append(term)

    walk(ast, 1.0, 1.0, False, None)
    return tuple(out)


def make_model(name: str, L: int, d: int, data: dict, interaction: str, h02: str,
               h01: str | None = None, meta: dict | None = None) -> ModelSpec:
    """Validate and bind a model from named arrays and an interaction expression."""
    if not isinstance(L, int) or L < 1:
        raise ModelError("L", f"must be a positive integer, got {L!r}")
    if not isinstance(d, int) or d < 1:
        raise ModelError("d", f"must be a positive integer, got {d!r}")
    data = {k: np.asarray(v, dtype=complex) for k, v in data.items()}
    for arr in data.values():
        arr.setflags(write=False)
    if h02 not in data:
        raise ModelError("h02", f"unresolved reference {h02!r}")
    h02m = data[h02]
    if h02m.shape != (d, d):
        raise ModelError("h02", f"shape {h02m.shape}, expected {(d, d)}")
    _check_hermitian(h02m, h02)
    if np.linalg.eigvalsh(h02m)[0] < -1e-10:
        raise ModelError(h02, "one-particle free Hamiltonian must be positive semi-definite")
    if h01 is None:
        h01m = np.zeros((L, L), dtype=complex)
    else:
        if h01 not in data:
            raise ModelError("h01", f"unresolved reference {h01!r}")
        h01m = data[h01]
        if h01m.shape != (L, L):
            raise ModelError("h01", f"shape {h01m.shape}, expected {(L, L)}")
        _check_hermitian(h01m, h01)
    try:
        ast = parse_expression(interaction)
    except ParseError as exc:
        raise ModelError("interaction", str(exc)) from exc
    terms = bind_terms(ast, data, L, d)
    return ModelSpec(name, L, d, h01m, h02m, terms, data, interaction, h01, h02, dict(meta or {}))


# ------------------------------------------------------------ JSON format

def _encode_array(arr: np.ndarray) -> dict:
    flat = np.asarray(arr, dtype=complex).ravel(order="C")
    return {"shape": list(arr.shape), "values": [[float(z.real), float(z.imag)] for z in flat]}


def _decode_array(name: str, obj) -> np.ndarray:
    try:
        shape = tuple(int(s) for s in obj["shape"])
        vals = obj["values"]
        flat = np.array([complex(float(re_), float(im)) for re_, im in vals], dtype=complex)
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError(f"data.{name}", f"malformed array ({exc})") from exc
    if flat.size != int(np.prod(shape, dtype=np.int64)):
        raise ModelError(f"data.{name}", f"{flat.size} values do not fill shape {shape}")
    return flat.reshape(shape)


def model_to_json(model: ModelSpec) -> dict:
    return {
        "format": FORMAT_TAG,
        "name": model.name,
        "L": model.L,
        "d": model.d,
        "h01": model.h01_ref,
        "h02": model.h02_ref,
        "interaction": model.interaction,
        "meta": model.meta,
        "data": {k: _encode_array(v) for k, v in sorted(model.data.items())},
    }


def load_model_json(doc: dict) -> ModelSpec:
    if not isinstance(doc, dict):
        raise ModelError("document", "must be a JSON object")
    fmt = doc.get("format", FORMAT_TAG)
    if fmt != FORMAT_TAG:
        raise ModelError("format", f"unsupported format {fmt!r}")
    for key in ("name", "L", "d", "h02", "interaction", "data"):
        if key not in doc:
            raise ModelError(key, "missing")
    known = {"format", "name", "L", "d", "h01", "h02", "interaction", "meta", "data"}
    extra = set(doc) - known
    if extra:
        raise ModelError(sorted(extra)[0], "unknown field")
    if not isinstance(doc["data"], dict):
        raise ModelError("data", "must be an object of named arrays")
    data = {name: _decode_array(name, obj) for name, obj in doc["data"].items()}
    return make_model(doc["name"], doc["L"], doc["d"], data, doc["interaction"], doc["h02"],
                      doc.get("h01"), doc.get("meta"))


def dumps_model(model: ModelSpec) -> str:
    return json.dumps(model_to_json(model), sort_keys=True, indent=1)


def model_hash(model: ModelSpec) -> str:
    canon = json.dumps(model_to_json(model), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


# -------------------------------------------------------------- compile

def _primitive(term: Term, space: FockSpace, L: int) -> qop.BlockOperator:
    k, c = term.kind, term.coeff
    if k == "dgamma":
        return qop.second_quantization(space, c)
    if k == "number":
        return qop.number_operator(space)
    if k == "identity":
        return qop.identity(space)
    if k == "create":
        return qop.field_linear(space, c, L if c.ndim > 1 else 1, create=True)
    if k == "annihilate":
        return qop.field_linear(space, c, L if c.ndim > 1 else 1, create=False)
    if k == "quad":
        return qop.quad_preserve(space, c, L if c.ndim > 2 else 1)
    if k == "pair_create":
        return qop.pair_create(space, c, L if c.ndim > 2 else 1)
    if k == "pair_annihilate":
        return qop.pair_annihilate(space, c, L if c.ndim > 2 else 1)
    if k == "quartic":
        return qop.quartic_pair(space, c)
    if k == "cubic3":
        return qop.cubic_create(space, complex(np.asarray(c).reshape(-1)[0]))
    raise ValueError(f"unknown term kind {k!r}")


def compile_term(term: Term, space: FockSpace, L: int) -> qop.BlockOperator:
    op = _primitive(term, space, L)
    if term.particle is not None:
        op = qop.kron_particle(term.particle, op)
    elif op.L != L:
        op = qop.kron_particle(np.eye(L), op)
    op = qop.scale(term.inner, op)
    if term.closure:
        op = qop.add(op, qop.adjoint(op))
    return qop.scale(term.outer, op)


def compile_terms(terms, space: FockSpace, L: int, hermitian: bool = True) -> qop.BlockOperator:
    total = qop.BlockOperator(space, L, {}, True)
    for term in terms:
        total = qop.add(total, compile_term(term, space, L))
    total = total.prune(0.0)
    return qop.BlockOperator(space, L, total.blocks, hermitian)


def free_part(model: ModelSpec, space: FockSpace) -> qop.BlockOperator:
    h0 = qop.kron_particle(model.H01, qop.identity(space))
    h0 = qop.add(h0, qop.kron_particle(np.eye(model.L), qop.second_quantization(space, model.h02)))
    return qop.BlockOperator(space, model.L, h0.prune(0.0).blocks, True)


@dataclass(frozen=True)
class Compiled:
    H0: qop.BlockOperator
    HI: qop.BlockOperator
    Hdiag: qop.BlockOperator
    H2: qop.BlockOperator

    def __iter__(self):
        return iter((self.H0, self.HI, self.Hdiag, self.H2))

    @property
    def H(self) -> qop.BlockOperator:
        return qop.BlockOperator(self.H0.space, self.H0.L, qop.add(self.H0, self.HI).blocks, True)


# number of particles each primitive can add or remove
_NOMINAL_BAND = {"dgamma": 0, "number": 0, "identity": 0, "quad": 0, "quartic": 0, "create": 1,
                 "annihilate": 1, "pair_create": 2, "pair_annihilate": 2, "cubic3": 3}


def compile_model(model: ModelSpec, space: FockSpace) -> Compiled:
    """Assemble ``H0``, ``HI`` and the split ``HI = Hdiag + H2`` on a truncated space."""
    if space.d != model.d:
        raise ValueError(f"model has d={model.d} field modes, space has d={space.d}")
    hi = compile_terms(model.terms, space, model.L)
    band = max((_NOMINAL_BAND[t.kind] for t in model.terms), default=0)
    if band and space.n_max < band:
        warnings.warn(f"cutoff n_max={space.n_max} below interaction bandwidth {band}", stacklevel=2)
    hdiag = hi.band_part(lambda s: s == 0)
    h2 = qop.BlockOperator(space, model.L, hi.band_part(lambda s: s != 0).blocks, True)
    return Compiled(free_part(model, space), hi, hdiag, h2)
