"""
Experiment configuration: one JSON document per experiment.

Validation reports every problem at once, each with a dotted path such as
``parameters.k`` or ``sweep.1.n``. Parameter defaults are read from
data/experiment_defaults.json and fall back to the table below when the file
is absent.
"""

import json
import logging
import math
import os
from dataclasses import dataclass, field as dataclass_field
from typing import Any, Dict, List, Literal, Optional, Type, Union

from pydantic import BaseModel, ConfigDict, Field, StrictInt, ValidationError, model_validator

from netcoding.errors import ConfigError, Diagnostic
from netcoding.fountain import FountainSpec
from netcoding.radio_sim import RadioNetworkSpec
from netcoding.rng import SEED_MAX
from netcoding.storage_code import StorageCodeSpec

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
KINDS = ("storage", "fountain", "radio")
DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(__file__)), "data")
DEFAULTS_FILE = "experiment_defaults.json"


class StorageParameters(BaseModel):
    model_config = ConfigDict(extra="forbid")

    k: StrictInt = Field(ge=1)
    n: StrictInt = Field(ge=1)
    c: float = Field(5.0, gt=0)
    payload_len: StrictInt = Field(32, ge=1)
    degree: Optional[StrictInt] = Field(None, ge=1)
    query_size: Optional[StrictInt] = Field(None, ge=1)

    @model_validator(mode="after")
    def _check_invariants(self):
        if self.k > self.n:
            raise ValueError(f"StorageCodeSpec requires 1 ≤ k ≤ n, got k={self.k} > n={self.n}")
        if self.query_size is not None and not self.k <= self.query_size <= self.n:
            raise ValueError(
                f"query_size must satisfy k ≤ query_size ≤ n, got {self.query_size} with k={self.k}, n={self.n}"
            )
        return self

    @property
    def effective_query_size(self) -> int:
        return self.k if self.query_size is None else self.query_size

    def to_spec(self, seed: int) -> StorageCodeSpec:
        return StorageCodeSpec(
            k=self.k, n=self.n, c=self.c, payload_len=self.payload_len, seed=seed, degree=self.degree,
        )


class FountainParameters(BaseModel):
    model_config = ConfigDict(extra="forbid")

    k: StrictInt = Field(ge=1)
    n: StrictInt = Field(ge=1)
    epsilon: float = Field(0.3, gt=0)
    delta: float = Field(0.05, gt=0, le=1)
    d_max: Optional[StrictInt] = Field(None, ge=1)
    degree_one_floor: float = Field(0.05, ge=0, le=1)
    payload_len: StrictInt = Field(32, ge=1)

    @model_validator(mode="after")
    def _check_invariants(self):
        if self.d_max is not None and self.d_max > self.k:
            raise ValueError(f"FountainSpec requires 1 ≤ d_max ≤ k, got d_max={self.d_max} > k={self.k}")
        needed = math.ceil(round((1 + self.epsilon) * self.k, 9))
        if needed > self.n:
            raise ValueError(
                f"FountainSpec requires ceil((1+epsilon)·k) ≤ n, got ceil((1+{self.epsilon})·{self.k}) = {needed} > n={self.n}"
            )
        return self

    def to_spec(self, seed: int) -> FountainSpec:
        return FountainSpec(
            k=self.k, n=self.n, epsilon=self.epsilon, delta=self.delta, d_max=self.d_max,
            degree_one_floor=self.degree_one_floor, payload_len=self.payload_len, seed=seed,
        )


class RadioParameters(BaseModel):
    model_config = ConfigDict(extra="forbid")

    N: StrictInt = Field(ge=1)
    H: StrictInt = Field(ge=1)
    M: Optional[StrictInt] = Field(None, ge=1)
    density: float = Field(3.0, gt=0)
    mode: Literal["frequency", "timeslot"] = "frequency"
    p_tx: float = Field(0.5, ge=0, le=1)
    p_rx: float = Field(0.5, ge=0, le=1)
    p_sleep: float = Field(0.0, ge=0, le=1)
    collision: Literal["lowest", "random"] = "lowest"

    @model_validator(mode="after")
    def _check_invariants(self):
        total = self.p_tx + self.p_rx + self.p_sleep
        if self.mode == "timeslot" and abs(total - 1.0) > 1e-12:
            raise ValueError(f"RadioNetworkSpec requires p_tx + p_rx + p_sleep = 1 in timeslot mode, got {total!r}")
        return self

    def to_spec(self, seed: int) -> RadioNetworkSpec:
        fields = self.model_dump()
        if self.mode == "frequency":
            # Role probabilities only matter in timeslot mode.
            fields.update(p_tx=0.5, p_rx=0.5, p_sleep=0.0)
        return RadioNetworkSpec(seed=seed, **fields)


PARAMETER_MODELS: Dict[str, Type[BaseModel]] = {
    "storage": StorageParameters,
    "fountain": FountainParameters,
    "radio": RadioParameters,
}

Parameters = Union[StorageParameters, FountainParameters, RadioParameters]


class ExperimentDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1] = SCHEMA_VERSION
    kind: Literal["storage", "fountain", "radio"]
    parameters: Dict[str, Any]
    sweep: Optional[List[Dict[str, Any]]] = None
    trials: StrictInt = Field(ge=1)
    seed: StrictInt = Field(0, ge=0, le=SEED_MAX)
    output_path: Optional[str] = None
    format: Literal["csv", "json"] = "csv"


@dataclass
class ExperimentConfig:
    kind: str
    parameters: Parameters
    trials: int
    seed: int
    output_path: Optional[str]
    format: str
    points: List[Parameters] = dataclass_field(default_factory=list)
    sweep: Optional[List[Dict[str, Any]]] = None

    def __post_init__(self):
        if not self.points:
            self.points = [self.parameters]

    def to_document(self) -> Dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "parameters": self.parameters.model_dump(),
            "sweep": self.sweep,
            "trials": self.trials,
            "seed": self.seed,
            "output_path": self.output_path,
            "format": self.format,
        }


def _load_defaults() -> Dict[str, Dict[str, Any]]:
    """Load per-kind parameter defaults from the data directory"""
    try:
        with open(os.path.join(DATA_DIR, DEFAULTS_FILE), "r", encoding="utf-8") as f:
            return json.load(f)["parameters"]
    except FileNotFoundError:
        return _get_default_parameters()


def _get_default_parameters() -> Dict[str, Dict[str, Any]]:
    """Default parameters if the defaults file doesn't exist"""
    return {
        "storage": {"c": 5.0, "payload_len": 32},
        "fountain": {"epsilon": 0.3, "delta": 0.05, "degree_one_floor": 0.05, "payload_len": 32},
        "radio": {
            "density": 3.0, "mode": "frequency", "p_tx": 0.5, "p_rx": 0.5, "p_sleep": 0.0, "collision": "lowest",
        },
    }


_RANGE_MESSAGES = {
    "greater_than_equal": ("ge", "must be ≥ {}"),
    "greater_than": ("gt", "must be > {}"),
    "less_than_equal": ("le", "must be ≤ {}"),
    "less_than": ("lt", "must be < {}"),
}


def _describe(error: Dict[str, Any], kind: Optional[str]) -> str:
    error_type = error["type"]
    if error_type in _RANGE_MESSAGES:
        key, template = _RANGE_MESSAGES[error_type]
        return template.format(error.get("ctx", {}).get(key))
    if error_type == "missing":
        return "is required"
    if error_type == "extra_forbidden":
        return f"is not a {kind} parameter" if kind else "is not a recognized field"
    message = error["msg"]
    if message.startswith("Value error, "):
        message = message[len("Value error, "):]
    return message


def _diagnostics(exc: ValidationError, prefix: str = "", kind: Optional[str] = None) -> List[Diagnostic]:
    found = []
    for error in exc.errors():
        parts = ([prefix] if prefix else []) + [str(p) for p in error["loc"]]
        found.append(Diagnostic(".".join(parts) or "<document>", _describe(error, kind)))
    return found


def _validate_parameters(kind: str, raw: Dict[str, Any], prefix: str, defaults: Dict[str, Any]):
    model = PARAMETER_MODELS[kind]
    try:
        return model.model_validate({**defaults, **raw}), []
    except ValidationError as exc:
        return None, _diagnostics(exc, prefix, kind)


def validate(text: str, overrides: Optional[Dict[str, Any]] = None) -> Union[ExperimentConfig, List[Diagnostic]]:
    """Parse and fully validate a config document; returns the config or every diagnostic found"""
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        return [Diagnostic("<document>", f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})")]
    if not isinstance(document, dict):
        return [Diagnostic("<document>", "must be a JSON object")]
    for key, value in (overrides or {}).items():
        if value is not None:
            document[key] = value

    diagnostics: List[Diagnostic] = []
    try:
        parsed = ExperimentDocument.model_validate(document)
    except ValidationError as exc:
        parsed = None
        diagnostics.extend(_diagnostics(exc))

    kind = document.get("kind")
    raw_parameters = document.get("parameters")
    if kind not in KINDS or not isinstance(raw_parameters, dict):
        return diagnostics

    defaults = _load_defaults().get(kind, {})
    parameters, found = _validate_parameters(kind, raw_parameters, "parameters", defaults)
    diagnostics.extend(found)

    points = []
    sweep = document.get("sweep")
    if isinstance(sweep, list):
        for index, override in enumerate(sweep):
            if not isinstance(override, dict):
                continue
            point, found = _validate_parameters(kind, {**raw_parameters, **override}, f"sweep.{index}", defaults)
            diagnostics.extend(found)
            points.append(point)

    if diagnostics:
        return diagnostics
    return ExperimentConfig(
        kind=parsed.kind,
        parameters=parameters,
        trials=parsed.trials,
        seed=parsed.seed,
        output_path=parsed.output_path,
        format=parsed.format,
        points=points,
        sweep=parsed.sweep,
    )


def load_config(path: Union[str, os.PathLike], overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """Read and validate a config file; raises ConfigError listing every diagnostic"""
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    result = validate(text, overrides)
    if isinstance(result, list):
        raise ConfigError(result)
    logger.debug("loaded %s config from %s with %d point(s)", result.kind, path, len(result.points))
    return result
