import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from bellcheck.bell.moments import MomentInstance
from bellcheck.config.settings import settings
from bellcheck.errors import InstanceSchemaError
from bellcheck.quantum.vectors import planar_angle

logger = logging.getLogger("bellcheck.storage")

SCHEMA_VERSION = 1
INSTANCE_SUFFIX = ".instance"


class AngleSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")
    angles_deg: List[float] = Field(min_length=1)


class VectorSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")
    vectors: List[Tuple[float, float, float]] = Field(min_length=1)


PartySettings = Union[AngleSettings, VectorSettings]


class InstanceDocument(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    schema_version: Literal[1] = Field(alias="schema")
    description: Optional[str] = None
    m: Optional[int] = None
    n: Optional[int] = None
    party1: PartySettings
    party2: PartySettings
    targets: List[List[float]]


class MatrixEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")
    real: List[List[float]]
    imag: Optional[List[List[float]]] = None

    def to_array(self) -> np.ndarray:
        re = np.asarray(self.real, dtype=np.float64)
        im = np.zeros_like(re) if self.imag is None else np.asarray(self.imag, dtype=np.float64)
        if re.shape != im.shape:
            raise InstanceSchemaError(f"real part {re.shape} and imaginary part {im.shape} differ")
        return re + 1j * im


class VectorEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")
    real: List[float]
    imag: Optional[List[float]] = None

    def to_array(self) -> np.ndarray:
        re = np.asarray(self.real, dtype=np.float64)
        im = np.zeros_like(re) if self.imag is None else np.asarray(self.imag, dtype=np.float64)
        if re.shape != im.shape:
            raise InstanceSchemaError(f"real part {re.shape} and imaginary part {im.shape} differ")
        return re + 1j * im


class OperatorDocument(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    schema_version: Literal[1] = Field(alias="schema")
    description: Optional[str] = None
    operators: List[MatrixEntry] = Field(min_length=1)
    state: VectorEntry


def _party_settings(party: PartySettings) -> List[Any]:
    if isinstance(party, AngleSettings):
        return [math.radians(a) for a in party.angles_deg]
    return [list(v) for v in party.vectors]


def instance_from_document(doc: Union[Dict[str, Any], InstanceDocument], source: Optional[str] = None) -> MomentInstance:
    try:
        if not isinstance(doc, InstanceDocument):
            doc = InstanceDocument.model_validate(doc)
        p1, p2 = _party_settings(doc.party1), _party_settings(doc.party2)
        if doc.m is not None and doc.m != len(p1):
            raise InstanceSchemaError(f"m={doc.m} but party1 lists {len(p1)} settings", source)
        if doc.n is not None and doc.n != len(p2):
            raise InstanceSchemaError(f"n={doc.n} but party2 lists {len(p2)} settings", source)
        if any(len(row) != len(p2) for row in doc.targets) or len(doc.targets) != len(p1):
            raise InstanceSchemaError(f"targets must be a {len(p1)}x{len(p2)} array", source)
        return MomentInstance.from_settings(p1, p2, doc.targets)
    except ValidationError as e:
        raise InstanceSchemaError(str(e), source) from None
    except InstanceSchemaError:
        raise
    except ValueError as e:
        raise InstanceSchemaError(str(e), source) from None


def load_instance(path: Union[str, Path]) -> MomentInstance:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as e:
            raise InstanceSchemaError(f"not valid JSON: {e}", str(path)) from None
    instance = instance_from_document(raw, str(path))
    logger.info("loaded %dx%d instance from %s", instance.m, instance.n, path)
    return instance


def instance_document(instance: MomentInstance, description: Optional[str] = None) -> InstanceDocument:
    def party(vectors, angles) -> PartySettings:
        if angles is not None:
            return AngleSettings(angles_deg=[math.degrees(a) for a in angles])
        try:
            return AngleSettings(angles_deg=[math.degrees(planar_angle(v)) for v in vectors])
        except ValueError:
            return VectorSettings(vectors=[tuple(float(x) for x in v) for v in vectors])

    return InstanceDocument(
        schema_version=SCHEMA_VERSION,
        description=description,
        m=instance.m,
        n=instance.n,
        party1=party(instance.party1, instance.party1_angles),
        party2=party(instance.party2, instance.party2_angles),
        targets=instance.targets.tolist(),
    )


def dump_instance(instance: MomentInstance, path: Union[str, Path], description: Optional[str] = None) -> None:
    doc = instance_document(instance, description)
    with open(path, "w", encoding="utf-8") as f:
        f.write(doc.model_dump_json(by_alias=True, exclude_none=True, indent=2))
        f.write("\n")


def bundled_instance_path(name: str) -> Path:
    stem = name[: -len(INSTANCE_SUFFIX)] if name.endswith(INSTANCE_SUFFIX) else name
    return Path(settings.data_dir) / f"{stem}{INSTANCE_SUFFIX}"


def list_bundled_instances() -> List[str]:
    return sorted(p.stem for p in Path(settings.data_dir).glob(f"*{INSTANCE_SUFFIX}"))


def operators_from_document(doc: Union[Dict[str, Any], OperatorDocument], source: Optional[str] = None):
    """(operators, state) from an operator document."""
    try:
        if not isinstance(doc, OperatorDocument):
            doc = OperatorDocument.model_validate(doc)
    except ValidationError as e:
        raise InstanceSchemaError(str(e), source) from None
    return [op.to_array() for op in doc.operators], doc.state.to_array()


def load_operator_file(path: Union[str, Path]):
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as e:
            raise InstanceSchemaError(f"not valid JSON: {e}", str(path)) from None
    return operators_from_document(raw, str(path))
