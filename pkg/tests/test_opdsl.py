import json
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_hermitian
from fockbench import models, opdsl, qop
from fockbench.fock import FockSpace
from fockbench.opdsl import Hc, Kron, ModelError, ParseError, Prim, Scaled, Sum


# ----------------------------------------------------------------- parsing

def test_parse_sum_with_hc():
    ast = opdsl.parse_expression("dGamma(h0) + hc(a(v1))")
    assert ast == Sum((Scaled(1, Prim("dGamma", "h0")), Scaled(1, Hc(Sum((Scaled(1, Prim("a", "v1")),))))))


def test_parse_scalars_and_minus():
    ast = opdsl.parse_expression("2 * N - dGamma(h)")
    assert ast == Sum((Scaled(2, Prim("N")), Scaled(-1, Prim("dGamma", "h"))))


@pytest.mark.parametrize("text,coef", [
    ("i * N", 1j), ("2.5i * N", 2.5j), ("(1-2i) * N", 1 - 2j), ("(-0.5+i) * N", -0.5 + 1j), ("1e-3 * N", 1e-3),
])
def test_parse_complex_scalars(text, coef):
    assert opdsl.parse_expression(text).terms[0].coef == coef


def test_parse_kron_and_zero():
    ast = opdsl.parse_expression("kron(P, hc(adag(f)))")
    assert isinstance(ast.terms[0].op, Kron) and ast.terms[0].op.ref == "P"
    assert opdsl.parse_expression("0") == Sum(())
    assert opdsl.parse_expression("  \n 0 ") == Sum(())


def test_whitespace_is_insignificant():
    assert opdsl.parse_expression("2*N-dGamma(h)") == opdsl.parse_expression(" 2 *\n N -  dGamma ( h ) ")


@pytest.mark.parametrize("text", ["a*a + a*a*a* + aaa", "foo(x)", "dGamma(h", "dGamma(h))", "N +", "hc(hc(a(v)))",
                                  "2 * ", "N $ N", "dGamma"])
def test_parse_rejects(text):
    with pytest.raises(ParseError):
        opdsl.parse_expression(text)


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        opdsl.parse_expression("N +\n  bogus(h)")
    assert (info.value.line, info.value.column, info.value.token) == (2, 3, "bogus")
    with pytest.raises(ParseError) as info:
        opdsl.parse_expression("dGamma(h")
    assert info.value.token == "<end>"


# ---------------------------------------------------------- pretty printer

def test_unit_scalar_is_dropped():
    assert opdsl.pretty_print(opdsl.parse_expression("1*N")) == "N"


def test_hc_order_preserved():
    text = "hc(adag(f) + 2 * pairc(m)) - 0.5 * quad2(q)"
    out = opdsl.pretty_print(opdsl.parse_expression(text))
    assert out == text


@pytest.mark.parametrize("name", sorted(models.PRESETS))
def test_round_trip_presets(name):
    ast = opdsl.parse_expression(models.preset(name).interaction)
    assert opdsl.parse_expression(opdsl.pretty_print(ast)) == ast


_coef = st.sampled_from([1.0, -1.0, 2.0, -0.25, 1j, -1j, 3j, 1 - 2j, -0.5 + 0.5j, 1e-7, 123456.789])
_prim = st.sampled_from([Prim("N"), Prim("Id"), Prim("dGamma", "h"), Prim("quad2", "q"), Prim("quartic", "w")])
_inner = st.builds(lambda ts: Sum(tuple(ts)), st.lists(st.builds(Scaled, _coef, st.sampled_from(
    [Prim("adag", "f"), Prim("a", "g"), Prim("pairc", "m"), Prim("paira", "m")])), min_size=1, max_size=3))
_op = st.one_of(_prim, st.builds(Hc, _inner))
_ast = st.builds(lambda ts: Sum(tuple(ts)), st.lists(st.builds(Scaled, _coef, _op), max_size=4))


@given(_ast)
def test_round_trip_property(ast):
    assert opdsl.parse_expression(opdsl.pretty_print(ast)) == ast


# ----------------------------------------------------------------- binding

def _free_doc(**over):
    doc = {"name": "free", "L": 1, "d": 2, "h02": "h0", "interaction": "0",
           "data": {"h0": {"shape": [2, 2], "values": [[1, 0], [0, 0], [0, 0], [2, 0]]}}}
    doc.update(over)
    return doc


def test_minimal_document_is_free_model():
    model = opdsl.load_model_json(_free_doc())
    assert model.terms == ()
    h0, hi, hdiag, h2 = opdsl.compile_model(model, FockSpace(2, 3))
    assert h0.bandwidth == 0 and not hi.blocks and not hdiag.blocks and not h2.blocks


def test_non_hermitian_V2_names_field():
    model = models.boson_preset(d=2)
    doc = opdsl.model_to_json(model)
    doc["data"]["V2"]["values"][1] = [5.0, 0.0]
    with pytest.raises(ModelError) as info:
        opdsl.load_model_json(doc)
    assert "V2" in str(info.value)


@pytest.mark.parametrize("over,field", [
    ({"interaction": "dGamma(nope)"}, "interaction"),
    ({"interaction": "quad2(h0) + "}, "interaction"),
    ({"d": 3}, "h02"),
    ({"L": 0}, "L"),
    ({"extra": 1}, "extra"),
    ({"format": "other/9"}, "format"),
])
def test_document_errors_name_field(over, field):
    with pytest.raises(ModelError) as info:
        opdsl.load_model_json(_free_doc(**over))
    assert info.value.field == field


def test_missing_and_malformed():
    doc = _free_doc()
    del doc["h02"]
    with pytest.raises(ModelError, match="h02"):
        opdsl.load_model_json(doc)
    bad = _free_doc()
    bad["data"]["h0"]["values"] = bad["data"]["h0"]["values"][:3]
    with pytest.raises(ModelError, match="data.h0"):
        opdsl.load_model_json(bad)


def test_unclosed_number_changing_term_rejected():
    with pytest.raises(ModelError, match="hc"):
        opdsl.make_model("x", 1, 2, {"h0": np.eye(2), "f": np.ones(2)}, "adag(f)", "h0")


def test_complex_scalar_on_open_term_rejected():
    with pytest.raises(ModelError):
        opdsl.make_model("x", 1, 2, {"h0": np.eye(2)}, "i * N", "h0")


def test_shape_mismatch_rejected():
    with pytest.raises(ModelError) as info:
        opdsl.make_model("x", 1, 2, {"h0": np.eye(2), "f": np.ones(3)}, "hc(adag(f))", "h0")
    assert info.value.field == "f"


def test_cubic_only_single_mode():
    with pytest.raises(ModelError, match="d=1"):
        opdsl.make_model("x", 1, 2, {"h0": np.eye(2), "c": np.ones(1)}, "hc(cubic3(c))", "h0")


def test_non_psd_free_part_rejected():
    with pytest.raises(ModelError):
        opdsl.make_model("x", 1, 2, {"h0": np.diag([1.0, -1.0])}, "0", "h0")


# ----------------------------------------------------------- JSON format

@pytest.mark.parametrize("name", ["boson", "nelson", "pauli-fierz", "h3"])
def test_json_round_trip_entrywise(name):
    model = models.preset(name)
    again = opdsl.load_model_json(json.loads(opdsl.dumps_model(model)))
    assert again.interaction == model.interaction and again.L == model.L and again.d == model.d
    assert model.data.keys() == again.data.keys()
    for key in model.data:
        assert np.array_equal(model.data[key], again.data[key])
    assert np.array_equal(model.H01, again.H01) and np.array_equal(model.h02, again.h02)
    assert opdsl.model_hash(model) == opdsl.model_hash(again)
    assert opdsl.dumps_model(again) == opdsl.dumps_model(model)


# --------------------------------------------------------------- compile

def test_only_V2_is_diagonal():
    model = models.build_boson_model(2, np.eye(2), V2=np.array([[1.0, 0.5j], [-0.5j, 2.0]]))
    _, hi, hdiag, h2 = opdsl.compile_model(model, FockSpace(2, 4))
    assert np.array_equal(hi.to_dense(), hdiag.to_dense()) and not h2.blocks


def test_hda_is_purely_off_diagonal():
    model = models.build_toy("Hda", K=8)
    _, hi, hdiag, h2 = opdsl.compile_model(model, FockSpace(1, 5))
    assert not hdiag.blocks
    assert np.array_equal(hi.to_dense(), h2.to_dense())


@pytest.mark.parametrize("name", ["boson", "nelson", "h3", "pauli-fierz"])
def test_split_is_exact(name):
    model = models.preset(name)
    space = FockSpace(model.d, 4)
    c = opdsl.compile_model(model, space)
    assert np.array_equal((c.Hdiag + c.H2).to_dense(), c.HI.to_dense())
    assert c.H.max_hermitian_defect() <= 1e-12


def test_compile_is_deterministic():
    model = models.preset("boson", quartic=True)
    space = FockSpace(model.d, 4)
    a = opdsl.compile_model(model, space)
    b = opdsl.compile_model(opdsl.load_model_json(opdsl.model_to_json(model)), space)
    for x, y in zip(a, b):
        assert np.array_equal(x.to_dense(), y.to_dense())


def test_cutoff_below_bandwidth_warns():
    model = models.build_toy("H3")
    with pytest.warns(UserWarning, match="bandwidth"):
        opdsl.compile_model(model, FockSpace(1, 2))


def test_dimension_mismatch_raises():
    with pytest.raises(ValueError):
        opdsl.compile_model(models.boson_preset(d=2), FockSpace(3, 2))


def test_free_part_structure(rng):
    H01 = random_hermitian(rng, 2)
    h02 = np.diag([1.0, 2.0])
    model = opdsl.make_model("x", 2, 2, {"H01": H01, "h0": h02}, "0", "h0", "H01")
    space = FockSpace(2, 3)
    ref = qop.kron_particle(H01, qop.identity(space)) + qop.kron_particle(np.eye(2), qop.second_quantization(space, h02))
    assert np.allclose(opdsl.free_part(model, space).to_dense(), ref.to_dense(), atol=1e-14)


def _compiled_hi(expr, data, d, n_max, L=1):
    data = dict(data, h0=np.eye(d))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        model = opdsl.make_model("x", L, d, data, expr, "h0")
        return opdsl.compile_model(model, FockSpace(d, n_max)).HI.to_dense()


@pytest.mark.parametrize("d,n_max", [(1, 5), (2, 4), (3, 3)])
def test_primitives_match_qop(d, n_max, rng):
    space = FockSpace(d, n_max)
    h = random_hermitian(rng, d)
    f = rng.normal(size=d) + 1j * rng.normal(size=d)
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    w = rng.normal(size=(d, d))
    w = w + w.T
    data = {"h": h, "f": f, "m": m, "w": w, "q": h}

    def dense(op):
        return op.to_dense()

    checks = {
        "dGamma(h)": dense(qop.second_quantization(space, h)),
        "N": dense(qop.number_operator(space)),
        "Id": dense(qop.identity(space)),
        "quad2(q)": dense(qop.quad_preserve(space, h)),
        "quartic(w)": dense(qop.quartic_pair(space, w)),
        "hc(adag(f))": dense(qop.creation_matrix(space, f) + qop.annihilation_matrix(space, f)),
        "hc(a(f))": dense(qop.creation_matrix(space, f) + qop.annihilation_matrix(space, f)),
        "hc(pairc(m))": dense(qop.pair_create(space, m) + qop.adjoint(qop.pair_create(space, m))),
        "hc(paira(m))": dense(qop.pair_annihilate(space, m) + qop.adjoint(qop.pair_annihilate(space, m))),
    }
    if d == 1:
        cub = qop.cubic_create(space)
        checks["hc(cubic3(c))"] = dense(cub + qop.adjoint(cub))
        data["c"] = np.ones(1)
    for expr, ref in checks.items():
        assert np.allclose(_compiled_hi(expr, data, d, n_max), ref, atol=1e-12), expr


def test_scalars_and_kron(rng):
    d, n_max, L = 2, 3, 2
    space = FockSpace(d, n_max)
    P = random_hermitian(rng, L)
    f = rng.normal(size=d)
    hi = _compiled_hi("kron(P, hc(2i * adag(f))) - 0.5 * N", {"P": P, "f": f}, d, n_max, L)
    cr = qop.scale(2j, qop.creation_matrix(space, f))
    ref = qop.kron_particle(P, cr + qop.adjoint(cr)) - qop.scale(0.5, qop.kron_particle(np.eye(L), qop.number_operator(space)))
    assert np.allclose(hi, ref.to_dense(), atol=1e-13)


def test_documented_examples_load():
    from pathlib import Path
    import re as _re
    text = (Path(__file__).resolve().parents[1] / "docs" / "model_format.md").read_text()
    blocks = _re.findall(r"```json\n(.*?)```", text, flags=_re.S)
    assert len(blocks) == 3
    for block in blocks:
        model = opdsl.load_model_json(json.loads(block))
        opdsl.compile_model(model, FockSpace(model.d, 4))
