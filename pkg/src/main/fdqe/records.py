"""
Records

Defines the file and stream formats (elements, multiplicity matrices, verdicts, predicate values, preservation reports)
and how to convert each to and from JSON.

Every format is a `Record` subclass that implements `to_dict()` and `from_dict()`; the base class owns the actual JSON
encoding so that every record is written the same way (key order as declared, compact separators) and output is
byte-identical between runs. None of the formats carries a type tag, so `load_record()` identifies a document by its
keys, trying the registered record types in registration order.
"""

import json
import logging as log
import math

import numpy as np

from fdqe.algebra import BlockSizes, Element, LanguageVariant
from fdqe.bratteli import MultiplicityMatrix
from fdqe.constants import *
from fdqe.errors import ValidationError
from fdqe.numeric import Estimate, Predicate, PredicateReport, SimBounds
from fdqe.qe_engine import Certificate, SweepReport, Verdict, VerdictStats

### Globals ###
RECORD_REGISTRY = [] # List of record types, in the order load_record() tries them


### Helpers ###

def _require(data: dict, *keys):
    if not isinstance(data, dict):
        raise ValidationError(f"Expected a JSON object, got {type(data).__name__}")
    missing = [k for k in keys if k not in data]
    if missing: raise ValidationError(f"Missing key(s): {', '.join(missing)}")


def _int_list(value, what: str) -> list[int]:
    if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        raise ValidationError(f"{what} must be a list of integers")
    return value


def _int(value, what: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValidationError(f"{what} must be an integer")
    return value


def _bool(value, what: str) -> bool:
    if not isinstance(value, bool):
        raise ValidationError(f"{what} must be true or false")
    return value


def _number(value, what: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
        raise ValidationError(f"{what} must be a finite number")
    return float(value)


def _int_rows(value, what: str) -> tuple[tuple[int, ...], ...]:
    if not isinstance(value, list):
        raise ValidationError(f"{what} must be a list of rows")
    return tuple(tuple(_int_list(row, f"{what} row {i}")) for i, row in enumerate(value, start = 1))


def _complex(entry, where: str) -> complex:
    if (not isinstance(entry, list) or len(entry) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) for v in entry)):
        raise ValidationError(f"Entry at {where} must be a [re, im] pair of finite numbers")
    return complex(entry[0], entry[1])


def _matrix_to_json(E: MultiplicityMatrix) -> list:
    return [list(row) for row in E.entries]


def _estimate_value(value) -> float:
    return float(value)


### Classes ###

class Record:

    # Keys that identify this record type in load_record()
    keys: tuple[str, ...] = ()

    def __init__(self, value = None):
        """
        Creates a record wrapping the given value. The decoder constructs a blank record and populates it through
        from_dict(), so subclasses must not require constructor arguments.
        """
        self.value = value

    def encode(self) -> str:
        """
        Encodes this record as a single line of JSON. Subclasses should not override this; override to_dict() instead.
        """
        return json.dumps(self.to_dict(), separators = (",", ":"), allow_nan = False)

    @classmethod
    def decode(cls, text: str):
        """
        Decodes a record of this type from JSON text. Subclasses should not override this; override from_dict() instead.
        """
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValidationError(f"Invalid JSON: {e.msg} (line {e.lineno}, column {e.colno})")
        record = cls()
        record.from_dict(data)
        return record

    # Internal methods

    def to_dict(self) -> dict:
        """
        Called from encode() to build the JSON object for this record's value.
        """
        raise NotImplementedError(f"Attempted to call to_dict() for {type(self).__name__}")

    def from_dict(self, data: dict):
        """
        Called from decode() to rebuild this record's value from a JSON object.
        """
        raise NotImplementedError(f"Attempted to call from_dict() for {type(self).__name__}")


class ElementRecord(Record):
    """
    Element file: {"algebra": [n1, ...], "blocks": [B1, ...]}, each B a row-major matrix of [re, im] entries.
    """
    keys = ("algebra", "blocks")

    def to_dict(self) -> dict:
        x: Element = self.value
        return {
            "algebra": list(x.algebra),
            "blocks": [[[[float(z.real), float(z.imag)] for z in row] for row in b] for b in x.blocks]
        }

    def from_dict(self, data: dict):
        _require(data, *self.keys)
        A = BlockSizes(tuple(_int_list(data["algebra"], "algebra")))
        if not isinstance(data["blocks"], list):
            raise ValidationError("blocks must be a list of matrices")
        blocks = []
        for i, b in enumerate(data["blocks"], start = 1):
            if not isinstance(b, list) or not all(isinstance(row, list) for row in b):
                raise ValidationError(f"Block {i} must be a list of rows")
            blocks.append([[_complex(z, f"block {i}, row {r}, column {c}") for c, z in enumerate(row, start = 1)]
                           for r, row in enumerate(b, start = 1)])
            if len({len(row) for row in b}) > 1:
                raise ValidationError(f"Block {i} has rows of different lengths")
        self.value = Element(A, tuple(np.array(b, dtype = complex).reshape(len(b), len(b[0]) if b else 0) for b in blocks))


class MatrixRecord(Record):
    """
    Matrix file: {"source": [...], "target": [...], "entries": [[...], ...]}.
    """
    keys = ("source", "target", "entries")

    def to_dict(self) -> dict:
        E: MultiplicityMatrix = self.value
        return {"source": list(E.source), "target": list(E.target), "entries": _matrix_to_json(E)}

    def from_dict(self, data: dict):
        _require(data, *self.keys)
        rows = _int_rows(data["entries"], "entries")
        self.value = MultiplicityMatrix(BlockSizes(tuple(_int_list(data["source"], "source"))),
                                        BlockSizes(tuple(_int_list(data["target"], "target"))),
                                        rows)


class VerdictRecord(Record):
    """
    Verdict: {"algebra", "language", "qe", "certificate": {"sub_dims", "e1", "e2"} or null, "stats", "criterion"}.
    """
    keys = ("algebra", "language", "qe")

    def to_dict(self) -> dict:
        v: Verdict = self.value
        cert = None
        if v.certificate:
            cert = {
                "sub_dims": list(v.certificate.sub_dims),
                "e1": _matrix_to_json(v.certificate.e1),
                "e2": _matrix_to_json(v.certificate.e2)
            }
        return {
            "algebra": list(v.algebra),
            "language": v.language.value,
            "qe": v.qe,
            "certificate": cert,
            "stats": {"candidates": v.stats.candidates, "matrices": v.stats.matrices},
            "criterion": v.criterion
        }

    def from_dict(self, data: dict):
        _require(data, *self.keys)
        A = BlockSizes(tuple(_int_list(data["algebra"], "algebra")))
        cert = None
        if data.get("certificate"):
            c = data["certificate"]
            _require(c, "sub_dims", "e1", "e2")
            C = BlockSizes(tuple(_int_list(c["sub_dims"], "sub_dims")))
            cert = Certificate(C,
                               MultiplicityMatrix(C, A, _int_rows(c["e1"], "e1")),
                               MultiplicityMatrix(C, A, _int_rows(c["e2"], "e2")))
        stats = data.get("stats") or {}
        if not isinstance(stats, dict): raise ValidationError("stats must be a JSON object")
        self.value = Verdict(A, LanguageVariant.parse(data["language"]), _bool(data["qe"], "qe"), cert,
                             VerdictStats(_int(stats.get("candidates", 0), "stats.candidates"),
                                          _int(stats.get("matrices", 0), "stats.matrices")))


class PredicateValueRecord(Record):
    """
    Predicate value: {"predicate": "rho_min", "value": v} or {"predicate": "rho_sim", "lower": l, "upper": u}.
    The wrapped value is a (Predicate, Estimate or SimBounds) pair.
    """
    keys = ("predicate",)

    def to_dict(self) -> dict:
        predicate, result = self.value
        if predicate is Predicate.RHO_MIN:
            return {"predicate": predicate.value, "value": _estimate_value(result), "converged": result.converged}
        return {"predicate": predicate.value, "lower": float(result.lower), "upper": float(result.upper),
                "converged": result.converged}

    def from_dict(self, data: dict):
        _require(data, *self.keys)
        predicate = Predicate.parse(data["predicate"])
        converged = _bool(data.get("converged", True), "converged")
        if predicate is Predicate.RHO_MIN:
            _require(data, "value")
            self.value = (predicate, Estimate(_number(data["value"], "value"), converged = converged))
        else:
            _require(data, "lower", "upper")
            bounds = SimBounds(_number(data["lower"], "lower"), _number(data["upper"], "upper"), converged)
            self.value = (predicate, bounds)


class PreservationRecord(Record):
    """
    Preservation report, mirroring PredicateReport.
    """
    keys = ("embedding", "predicate", "max_discrepancy")

    def to_dict(self) -> dict:
        r: PredicateReport = self.value
        return {
            "embedding": MatrixRecord(r.embedding).to_dict(),
            "predicate": r.predicate.value,
            "samples": r.samples,
            "max_discrepancy": r.max_discrepancy,
            "worst_input": ElementRecord(r.worst_input).to_dict(),
            "worst_input_y": None if r.worst_input_y is None else ElementRecord(r.worst_input_y).to_dict(),
            "seed": r.seed,
            "converged": r.converged
        }

    def from_dict(self, data: dict):
        _require(data, *self.keys, "samples", "worst_input")
        embedding, worst, worst_y = MatrixRecord(), ElementRecord(), None
        embedding.from_dict(data["embedding"])
        worst.from_dict(data["worst_input"])
        if data.get("worst_input_y"):
            worst_y = ElementRecord()
            worst_y.from_dict(data["worst_input_y"])
        self.value = PredicateReport(embedding.value, Predicate.parse(data["predicate"]),
                                     _int(data["samples"], "samples"),
                                     _number(data["max_discrepancy"], "max_discrepancy"), worst.value,
                                     None if worst_y is None else worst_y.value,
                                     _int(data.get("seed", DEFAULT_SEED), "seed"),
                                     _bool(data.get("converged", True), "converged"))


### Functions ###

def register(record_type: type[Record]):
    """
    Registers the given class as a record type. The class must inherit from Record.
    """
    RECORD_REGISTRY.append(record_type)


def load_record(text: str) -> Record:
    """
    Decodes a JSON document into the first registered record type whose identifying keys it contains.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"Invalid JSON: {e.msg} (line {e.lineno}, column {e.colno})")
    if not isinstance(data, dict): raise ValidationError("Expected a JSON object")
    for record_type in RECORD_REGISTRY:
        if all(k in data for k in record_type.keys):
            log.debug("Identified document as %s", record_type.__name__)
            record = record_type()
            record.from_dict(data)
            return record
    raise ValidationError(f"Unrecognised document with keys: {', '.join(sorted(data))}")


# Record registry (more specific key sets first)
register(PreservationRecord)
register(VerdictRecord)
register(MatrixRecord)
register(ElementRecord)
register(PredicateValueRecord)


def iter_sweep_json(report: SweepReport):
    """
    Yields one encoded verdict per sweep row, in the report's (lexicographic) order.
    """
    for _, verdict in report.rows:
        yield VerdictRecord(verdict).encode()
