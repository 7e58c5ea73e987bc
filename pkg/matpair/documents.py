"""JSON documents for pairs, canonical forms, block requests and reports.

Matrices are stored row-major as nested lists: real entries as numbers, complex entries as
[re, im], quaternion entries as [a, b, c, d]. Python writes floats with the shortest repr that
reads back to the same double, so documents round trip bit-exactly.
"""

from __future__ import annotations
from dataclasses import dataclass, asdict
from enum import Enum
from pathlib import Path
from typing import Any
import json

import numpy as np

from .scalars import ContextError, Field, Involution, Matrix, QMatrix, Quaternion
from .spectral import Case, CaseTag, EigIndex, idx_pow_r, modulus
from .canon import BlockKind, CanonicalBlock, CanonicalForm, FormScalar, PartnerRule
from .canon import TransformWitness, describe
from .instance import MatrixPair, Operator, ValidationReport, index_of_eigenvalue, resolve_block
from .settings import Tolerances, settings
from .util import MatpairError, isnumber, read_json_with_comments


class DocumentError(MatpairError):
    pass


class FormKind(Enum):
    symmetric = "symmetric"
    skew = "skew"
    hermitian = "hermitian"
    skewhermitian = "skewhermitian"

    @staticmethod
    def of(involution: Involution, epsilon: int):
        if involution is Involution.identity:
            return FormKind.symmetric if epsilon > 0 else FormKind.skew
        return FormKind.hermitian if epsilon > 0 else FormKind.skewhermitian

    @property
    def epsilon(self):
        return 1 if self in (FormKind.symmetric, FormKind.hermitian) else -1

    @property
    def sesquilinear(self):
        return self in (FormKind.hermitian, FormKind.skewhermitian)


def _parse_enum(enum_type: type[Enum], value: Any, what: str):
    try:
        return enum_type(value)
    except ValueError:
        options = ", ".join(str(e.value) for e in enum_type)  # type: ignore
        raise DocumentError(f"Invalid {what} {value!r}, expected one of {options}")


def encode_entry(x, field: Field):
    if field is Field.R:
        return float(np.real(x))
    if field is Field.C:
        z = complex(x)
        return [z.real, z.imag]
    q = Quaternion.of(x)
    return [float(q.a), float(q.b), float(q.c), float(q.d)]


def decode_entry(value: Any, field: Field):
    arity = {Field.R: 1, Field.C: 2, Field.H: 4}[field]
    parts = [value] if field is Field.R else value
    if not isinstance(parts, list) or len(parts) != arity or not all(isnumber(p) for p in parts):
        expected = "a number" if arity == 1 else f"a list of {arity} numbers"
        raise DocumentError(f"Entry {value!r} of a {field.value} matrix must be {expected}")
    if field is Field.R:
        return float(value)
    if field is Field.C:
        return complex(parts[0], parts[1])
    return Quaternion(*(float(p) for p in parts))


def encode_matrix(m: Matrix, field: Field) -> list[list]:
    if isinstance(m, QMatrix):
        return [[encode_entry(x, field) for x in row] for row in m.entries()]
    return [[encode_entry(x, field) for x in row] for row in np.asarray(m)]


def decode_matrix(rows: Any, field: Field, name="matrix") -> Matrix:
    if not isinstance(rows, list) or not all(isinstance(row, list) for row in rows):
        raise DocumentError(f"{name} must be a list of rows")
    if not rows:
        raise DocumentError(f"{name} is empty")
    if len({len(row) for row in rows}) > 1:
        raise DocumentError(f"{name} has rows of different length")
    entries = [[decode_entry(x, field) for x in row] for row in rows]
    if field is Field.H:
        return QMatrix.from_entries(entries)
    return np.array(entries, dtype=float if field is Field.R else complex).reshape(len(rows), -1)


def _require(data: dict, key: str, what="document"):
    if key not in data:
        raise DocumentError(f"{what} is missing '{key}'")
    return data[key]


def _integer(value: Any, name: str):
    if not isinstance(value, int) or isinstance(value, bool):
        raise DocumentError(f"'{name}' must be an integer, got {value!r}")
    return value


@dataclass
class PairDocument:
    field: Field
    involution: Involution
    form: FormKind
    r: int
    A: list
    F: list
    tolerances: dict | None = None
    operator: Operator = Operator.selfadjoint

    @staticmethod
    def from_pair(pair: MatrixPair, tolerances: dict | None = None):
        unitary = pair.operator is Operator.unitary
        return PairDocument(
            pair.field,
            pair.involution,
            FormKind.of(pair.involution, pair.epsilon),
            -pair.r if unitary else pair.r,
            encode_matrix(pair.A, pair.field),
            encode_matrix(pair.F, pair.field),
            tolerances,
            pair.operator,
        )

    @staticmethod
    def from_dict(data: Any):
        if not isinstance(data, dict):
            raise DocumentError("Pair document must be a JSON object")
        field = _parse_enum(Field, _require(data, "field"), "field")
        involution = _parse_enum(Involution, _require(data, "involution"), "involution")
        form = _parse_enum(FormKind, _require(data, "form"), "form")
        operator = _parse_enum(Operator, data.get("operator", "selfadjoint"), "operator")
        tolerances = data.get("tolerances")
        if tolerances is not None and not isinstance(tolerances, dict):
            raise DocumentError("'tolerances' must be an object")
        doc = PairDocument(
            field,
            involution,
            form,
            _integer(_require(data, "r"), "r"),
            _require(data, "A"),
            _require(data, "F"),
            tolerances,
            operator,
        )
        doc.matrices()  # shape and arity errors surface while parsing
        return doc

    def to_dict(self) -> dict[str, Any]:
        result: dict[str, Any] = {
            "field": self.field.value,
            "involution": self.involution.value,
            "form": self.form.value,
            "r": self.r,
        }
        if self.operator is not Operator.selfadjoint:
            result["operator"] = self.operator.value
        result["A"] = self.A
        result["F"] = self.F
        if self.tolerances is not None:
            result["tolerances"] = self.tolerances
        return result

    def matrices(self):
        return decode_matrix(self.A, self.field, "A"), decode_matrix(self.F, self.field, "F")

    def to_pair(self, base: Tolerances | None = None) -> MatrixPair:
        if self.form.sesquilinear != (self.involution is not Involution.identity):
            raise ContextError(
                f"Form '{self.form.value}' does not match involution '{self.involution.value}'"
            )
        base = base or settings.tolerances()
        try:
            tolerances = Tolerances.from_dict(self.tolerances or {}, base)
        except ValueError as e:
            raise DocumentError(str(e))
        a, f = self.matrices()
        epsilon = self.form.epsilon
        if self.operator is Operator.unitary:
            return MatrixPair.from_unitary(
                a, f, self.field, self.involution, epsilon, self.r, tolerances=tolerances
            )
        return MatrixPair(a, f, self.field, self.involution, epsilon, self.r, tolerances)


def encode_index(x: EigIndex):
    return x.label


def decode_index(value: Any, m: int):
    if value == "zero":
        return EigIndex.zero(m)
    return EigIndex.root(_integer(value, "index"), m)


def encode_block(block: CanonicalBlock, tag: CaseTag) -> dict[str, Any]:
    record: dict[str, Any] = {"kind": block.kind.value, "index": encode_index(block.index)}
    if block.kind is BlockKind.one:
        record["scalar"] = block.scalar.value if block.scalar else None
        record["partner"] = None
        record["rule"] = None
    else:
        record["scalar"] = None
        record["partner"] = encode_index(block.partner(tag.r))
        record["rule"] = block.rule.value if block.rule else None
    record["off_sign"] = block.off_sign
    record["realified"] = block.realified
    return record


def decode_block(record: Any, tag: CaseTag) -> CanonicalBlock:
    if not isinstance(record, dict):
        raise DocumentError("Block record must be an object")
    kind = _parse_enum(BlockKind, _require(record, "kind", "block"), "block kind")
    index = decode_index(_require(record, "index", "block"), tag.m)
    realified = bool(record.get("realified", False))
    if kind is BlockKind.one:
        scalar = _parse_enum(FormScalar, _require(record, "scalar", "block"), "form scalar")
        return CanonicalBlock.one(index, scalar, realified)
    off_sign = _integer(_require(record, "off_sign", "block"), "off_sign")
    if record.get("rule") is not None:
        rule = _parse_enum(PartnerRule, record["rule"], "partner rule")
    else:
        partner = decode_index(_require(record, "partner", "block"), tag.m)
        pow_partner = idx_pow_r(index, tag.r)
        rule = PartnerRule.pow_r if partner == pow_partner else PartnerRule.conj_pow_r
    return CanonicalBlock.two(index, rule, off_sign, realified)


def parse_case(name: str, r: int):
    try:
        case = Case[name]
    except KeyError:
        raise ContextError(f"Unknown case '{name}', expected one of a1 a2 a3 b1 b2 c1 c2 c3 c4")
    modulus(r)
    return CaseTag(case, r)


@dataclass
class CanonDocument:
    case: str
    r: int
    m: int
    field: Field
    blocks: list[dict[str, Any]]
    witness: list | None = None
    residuals: dict[str, float] | None = None

    @property
    def tag(self):
        return parse_case(self.case, self.r)

    @staticmethod
    def from_form(form: CanonicalForm, witness: TransformWitness | None = None):
        tag = form.tag
        return CanonDocument(
            tag.case.name,
            tag.r,
            tag.m,
            tag.field,
            [encode_block(b, tag) for b in form.blocks],
            encode_matrix(witness.S, tag.field) if witness else None,
            {
                "similarity": witness.residual_similarity,
                "congruence": witness.residual_congruence,
            }
            if witness
            else None,
        )

    @staticmethod
    def from_dict(data: Any):
        if not isinstance(data, dict):
            raise DocumentError("Canonical form document must be a JSON object")
        case = _require(data, "case")
        r = _integer(_require(data, "r"), "r")
        tag = parse_case(case, r)
        blocks = _require(data, "blocks")
        if not isinstance(blocks, list):
            raise DocumentError("'blocks' must be a list")
        return CanonDocument(
            case, r, tag.m, tag.field, blocks, data.get("witness"), data.get("residuals")
        )

    def to_dict(self) -> dict[str, Any]:
        result: dict[str, Any] = {
            "case": self.case,
            "r": self.r,
            "m": self.m,
            "field": self.field.value,
            "blocks": self.blocks,
        }
        if self.witness is not None:
            result["witness"] = self.witness
        if self.residuals is not None:
            result["residuals"] = self.residuals
        return result

    def to_form(self):
        tag = self.tag
        return CanonicalForm.create(tag, [decode_block(b, tag) for b in self.blocks])


def parse_block_requests(data: Any, tag: CaseTag) -> list[CanonicalBlock]:
    """Blocks from requests {"kind", "index" | "eigenvalue", "scalar"?, "count"?}."""
    if isinstance(data, dict):
        data = _require(data, "blocks", "block request document")
    if not isinstance(data, list):
        raise DocumentError("Block requests must be a list")
    blocks = []
    for request in data:
        if not isinstance(request, dict):
            raise DocumentError("Block request must be an object")
        kind = _parse_enum(BlockKind, request.get("kind", "one"), "block kind")
        if "index" in request:
            x = decode_index(request["index"], tag.m)
        else:
            value = _require(request, "eigenvalue", "block request")
            field = Field.C if isinstance(value, list) else Field.R
            x = index_of_eigenvalue(complex(decode_entry(value, field)), tag)
        scalar = request.get("scalar")
        scalar = _parse_enum(FormScalar, scalar, "form scalar") if scalar is not None else None
        count = _integer(request.get("count", 1), "count")
        blocks += [resolve_block(kind, x, tag, scalar)] * count
    return blocks


def catalog_records(blocks: tuple[CanonicalBlock, ...], tag: CaseTag):
    return [encode_block(b, tag) | {"notation": describe(b, tag)} for b in blocks]


def report_dict(report: ValidationReport) -> dict[str, Any]:
    return {"passed": report.passed, "checks": [asdict(c) for c in report.checks]}


def load_json(path: Path) -> Any:
    try:
        return read_json_with_comments(path)
    except json.JSONDecodeError as e:
        raise DocumentError(f"{path}: invalid JSON ({e})")
    except UnicodeDecodeError as e:
        raise DocumentError(f"{path}: not a text file ({e})")


def load_pair(path: Path) -> PairDocument:
    return PairDocument.from_dict(load_json(path))


def load_canon(path: Path) -> CanonDocument:
    return CanonDocument.from_dict(load_json(path))


def dumps(data: Any) -> str:
    return json.dumps(data, indent=2) + "\n"


def save(data: Any, path: Path):
    path.write_text(dumps(data), encoding="utf-8")
