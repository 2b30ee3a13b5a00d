"""File formats: matrix/vector JSON, plot-ready CSV, and the run manifest."""
from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Type, TypeVar

import numpy as np
import numpy.typing as npt
import pandas as pd
from pydantic import BaseModel, Field, ValidationError, model_validator

from ptqm.errors import SchemaError
from ptqm.linalg import ComplexMatrix, ComplexVector, as_matrix, as_vector

Record = TypeVar("Record", bound=BaseModel)


def _all_finite(entries: Sequence[Tuple[float, float]]) -> bool:
    return all(math.isfinite(re) and math.isfinite(im) for re, im in entries)


class MatrixPayload(BaseModel):
    dim: int = Field(gt=0)
    entries: List[Tuple[float, float]]
    conjugates: Optional[bool] = None

    @model_validator(mode="after")
    def _check_entries(self) -> "MatrixPayload":
        if len(self.entries) != self.dim * self.dim:
            raise ValueError(f"entries has length {len(self.entries)}, expected dim*dim = {self.dim * self.dim}")
        if not _all_finite(self.entries):
            raise ValueError("entries must be finite")
        return self

    @classmethod
    def from_array(cls, m: npt.ArrayLike, conjugates: Optional[bool] = None) -> "MatrixPayload":
        m = as_matrix(m)
        flat = m.reshape(-1)
        return cls(
            dim=m.shape[0],
            entries=[(float(z.real), float(z.imag)) for z in flat],
            conjugates=conjugates,
        )

    def to_array(self) -> ComplexMatrix:
        flat = np.array([complex(re, im) for re, im in self.entries], dtype=np.complex128)
        return flat.reshape(self.dim, self.dim)


class VectorPayload(BaseModel):
    dim: int = Field(gt=0)
    entries: List[Tuple[float, float]]

    @model_validator(mode="after")
    def _check_entries(self) -> "VectorPayload":
        if len(self.entries) != self.dim:
            raise ValueError(f"entries has length {len(self.entries)}, expected dim = {self.dim}")
        if not _all_finite(self.entries):
            raise ValueError("entries must be finite")
        return self

    @classmethod
    def from_array(cls, v: npt.ArrayLike) -> "VectorPayload":
        v = as_vector(v)
        return cls(dim=v.shape[0], entries=[(float(z.real), float(z.imag)) for z in v])

    def to_array(self) -> ComplexVector:
        return np.array([complex(re, im) for re, im in self.entries], dtype=np.complex128)


def matrix_to_dict(m: npt.ArrayLike) -> Dict[str, Any]:
    return MatrixPayload.from_array(m).model_dump(exclude_none=True)


def vector_to_dict(v: npt.ArrayLike) -> Dict[str, Any]:
    return VectorPayload.from_array(v).model_dump()


def complex_pairs(values: npt.ArrayLike) -> List[List[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(values, dtype=np.complex128)]


def _read_payload(path: Path, model: Type[Record]) -> Record:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read file ({exc.strerror})", path=str(path)) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}", path=str(path), field=f"line {exc.lineno}") from exc
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or None
        raise SchemaError(first["msg"], path=str(path), field=field) from exc


def dumps(data: Any) -> str:
    return json.dumps(data, indent=2) + "\n"


def load_matrix(path: Path) -> ComplexMatrix:
    return as_matrix(_read_payload(path, MatrixPayload).to_array())


def save_matrix(path: Path, m: npt.ArrayLike, conjugates: Optional[bool] = None) -> None:
    payload = MatrixPayload.from_array(m, conjugates=conjugates)
    Path(path).write_text(dumps(payload.model_dump(exclude_none=True)))


def load_vector(path: Path) -> ComplexVector:
    return as_vector(_read_payload(path, VectorPayload).to_array())


def save_vector(path: Path, v: npt.ArrayLike) -> None:
    Path(path).write_text(dumps(vector_to_dict(v)))


def write_csv(path_or_buf: Any, records: Sequence[BaseModel]) -> None:
    df = pd.DataFrame([r.model_dump() for r in records])
    df.to_csv(path_or_buf, index=False, lineterminator="\n")


def read_csv(path: Path, model: Type[Record]) -> List[Record]:
    df = pd.read_csv(path, float_precision="round_trip")
    return [model(**row) for row in df.to_dict(orient="records")]


def file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class RunManifest(BaseModel):
    command: str
    inputs: Dict[str, str] = Field(default_factory=dict)
    config: Dict[str, Any] = Field(default_factory=dict)
    seed: Optional[int] = None
    outputs: List[str] = Field(default_factory=list)
    timings: Dict[str, float] = Field(default_factory=dict)

    def write(self, path: Path) -> None:
        Path(path).write_text(self.model_dump_json(indent=2) + "\n")
