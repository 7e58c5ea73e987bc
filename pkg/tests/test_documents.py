import json
import math

import numpy as np
import pytest

from matpair.scalars import ContextError, Field, Involution, QMatrix, Quaternion
from matpair.spectral import Case, CaseTag, EigIndex
from matpair.canon import CanonicalBlock, FormScalar, PartnerRule, canonicalize
from matpair.instance import AdmissibilityError, GeneratorSpec, MatrixPair, Operator
from matpair.instance import random_instance
from matpair.documents import CanonDocument, DocumentError, FormKind, PairDocument
from matpair.documents import decode_block, decode_entry, decode_matrix, encode_block, encode_entry
from matpair.documents import encode_matrix, load_json, load_pair, parse_block_requests, parse_case
from matpair.documents import save

from .config import all_cases


def test_entry_codec():
    assert encode_entry(2.5, Field.R) == 2.5
    assert encode_entry(1 - 2j, Field.C) == [1.0, -2.0]
    assert encode_entry(Quaternion(1, 2, 3, 4), Field.H) == [1.0, 2.0, 3.0, 4.0]
    assert decode_entry([0.5, 1], Field.C) == complex(0.5, 1)
    assert decode_entry([1, 0, 0, -1], Field.H) == Quaternion(1, 0, 0, -1)


@pytest.mark.parametrize(
    "value,field",
    [([1, 2], Field.R), (1.0, Field.C), ([1, 2, 3], Field.H), (["a", 1], Field.C)],
)
def test_entry_arity(value, field):
    with pytest.raises(DocumentError):
        decode_entry(value, field)


def test_matrix_errors():
    with pytest.raises(DocumentError, match="empty"):
        decode_matrix([], Field.R, "A")
    with pytest.raises(DocumentError, match="different length"):
        decode_matrix([[1, 2], [3]], Field.R, "A")
    with pytest.raises(DocumentError, match="list of rows"):
        decode_matrix([1, 2], Field.R, "A")


def test_quaternion_matrix():
    rows = [[[1, 0, 0, 0], [0, 1, 0, 0]], [[0, 0, 1, 0], [0, 0, 0, 1]]]
    m = decode_matrix(rows, Field.H)
    assert isinstance(m, QMatrix)
    assert m.entry(1, 1) == Quaternion(0, 0, 0, 1)
    assert encode_matrix(m, Field.H) == rows


def test_form_kind():
    assert FormKind.of(Involution.identity, -1) is FormKind.skew
    assert FormKind.of(Involution.quatsemiconj, 1) is FormKind.hermitian
    assert FormKind.skewhermitian.epsilon == -1
    assert not FormKind.symmetric.sesquilinear


pair_c2 = {
    "field": "H",
    "involution": "quatsemiconj",
    "form": "hermitian",
    "r": 2,
    "A": [[[0, 0, 1, 0]]],
    "F": [[[1, 0, 0, 0]]],
}


def test_pair_document():
    doc = PairDocument.from_dict(pair_c2)
    assert doc.to_dict() == pair_c2
    pair = doc.to_pair()
    assert pair.field is Field.H and pair.epsilon == 1 and pair.r == 2
    assert PairDocument.from_pair(pair).to_dict() == pair_c2


def test_pair_document_errors():
    with pytest.raises(DocumentError, match="missing 'F'"):
        PairDocument.from_dict({k: v for k, v in pair_c2.items() if k != "F"})
    with pytest.raises(DocumentError, match="Invalid field"):
        PairDocument.from_dict(pair_c2 | {"field": "Q"})
    with pytest.raises(DocumentError, match="'r' must be an integer"):
        PairDocument.from_dict(pair_c2 | {"r": 2.0})
    with pytest.raises(DocumentError, match="Entry"):
        PairDocument.from_dict(pair_c2 | {"A": [[[0, 1]]]})
    with pytest.raises(ContextError, match="does not match"):
        PairDocument.from_dict(pair_c2 | {"form": "symmetric"}).to_pair()
    with pytest.raises(DocumentError, match="Unknown tolerance"):
        PairDocument.from_dict(pair_c2 | {"tolerances": {"tol_magic": 1.0}}).to_pair()


def test_pair_document_tolerances():
    doc = PairDocument.from_dict(pair_c2 | {"tolerances": {"tol_relation": 1e-4}})
    assert doc.to_pair().tolerances.tol_relation == 1e-4


def test_unitary_document():
    data = {
        "field": "C",
        "involution": "conj",
        "form": "hermitian",
        "r": 3,
        "operator": "unitary",
        "A": [[[-1.0, 0.0]]],
        "F": [[[1.0, 0.0]]],
    }
    pair = PairDocument.from_dict(data).to_pair()
    assert pair.operator is Operator.unitary and pair.r == -3
    assert PairDocument.from_pair(pair).to_dict() == data


def test_save_load_bit_exact(tmp_path, rng):
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    f = a + a.conj().T
    a[0, 0] = math.pi / 7
    pair = MatrixPair(a, f, Field.C, Involution.conj, 1, 3)
    path = tmp_path / "pair.json"
    save(PairDocument.from_pair(pair).to_dict(), path)
    loaded = load_pair(path).to_pair()
    assert np.array_equal(loaded.A, pair.A)
    assert np.array_equal(loaded.F, pair.F)


def test_load_truncated(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(pair_c2)[:40])
    with pytest.raises(DocumentError, match="invalid JSON"):
        load_json(path)


def test_parse_case():
    assert parse_case("b2", -3) == CaseTag(Case.b2, -3)
    with pytest.raises(ContextError, match="Unknown case"):
        parse_case("d1", 2)


def test_block_records():
    tag = CaseTag(Case.b2, 3)
    block = CanonicalBlock.two(EigIndex(1, 8), PartnerRule.conj_pow_r, -1, realified=True)
    record = encode_block(block, tag)
    assert record["partner"] == 5 and record["rule"] == "ConjPowR" and record["off_sign"] == -1
    assert decode_block(record, tag) == block
    # rule recovered from the partner index when omitted
    assert decode_block(record | {"rule": None}, tag) == block
    one = CanonicalBlock.one(EigIndex.zero(8), FormScalar.minus_one)
    assert decode_block(encode_block(one, CaseTag(Case.a2, 3)), CaseTag(Case.a2, 3)) == one


@pytest.mark.parametrize("case", all_cases, ids=lambda c: c.name)
def test_canon_document(case):
    dim = 4 if case in (Case.a3, Case.b2) else 3
    instance = random_instance(GeneratorSpec(CaseTag(case, 3), dim=dim, seed=5))
    form, witness = canonicalize(instance.pair)
    data = CanonDocument.from_form(form, witness).to_dict()
    assert data["m"] == 8 and data["field"] == case.field.value
    assert data["residuals"]["similarity"] < 1e-6
    parsed = CanonDocument.from_dict(json.loads(json.dumps(data)))
    assert parsed.to_form() == instance.truth


def test_block_requests():
    tag = CaseTag(Case.b1, 3)
    requests = [
        {"kind": "one", "eigenvalue": -1, "scalar": "+1", "count": 2},
        {"kind": "one", "eigenvalue": [0, 1], "scalar": "+1"},
        {"kind": "one", "index": "zero", "scalar": "-1"},
    ]
    blocks = parse_block_requests({"blocks": requests}, tag)
    assert len(blocks) == 4
    assert blocks[0] == blocks[1] == CanonicalBlock.one(EigIndex(4, 8), FormScalar.plus_one)
    # i^3 = -i = conj(i), so i is carried by a realified One template
    assert blocks[2].index == EigIndex(2, 8) and blocks[2].realified
    assert blocks[3].index.is_zero and blocks[3].scalar is FormScalar.minus_one


def test_block_requests_errors():
    tag = CaseTag(Case.b1, 2)
    with pytest.raises(AdmissibilityError):
        parse_block_requests([{"kind": "one", "eigenvalue": -1, "scalar": "+1"}], tag)
    with pytest.raises(DocumentError, match="Invalid block kind"):
        parse_block_requests([{"kind": "three", "index": 0}], tag)
    with pytest.raises(DocumentError, match="'count'"):
        parse_block_requests([{"index": 0, "count": "2"}], tag)
