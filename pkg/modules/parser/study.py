"""
study.py - Study file reader and writer

Study files are YAML documents describing a predictive power analysis:

    schema_version: 1
    alpha: 0.05
    S: 5000
    N: 1000
    hyper_rate: 1.0
    seed: 20260101
    methods: [dp, b, h, by]
    shrinkage: 0.0            # or one value per test
    tests:
      - {id: 1, label: Behavior 1, tail: two-sided, dof: inf,
         observed_p: 0.003, derive_ratio: true}

Each test gives either effect_ratio, or observed_p with derive_ratio: true (the
ratio is then the statistic implied by the p-value). Validation errors carry
the line of the offending YAML node.

Changes:
- Initial implementation with PyYAML and pydantic models
- Errors mapped back to YAML line numbers through composed nodes
- Added dump_study for lossless round trips
"""

from __future__ import annotations

import logging
from typing import List, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from modules.core.correlation import FixedCorrelationSampler
from modules.core.errors import DomainError, SchemaError
from modules.core.mvdist import stat_from_pvalue
from modules.core.types import DegreesOfFreedom, TailType, TestSpec
from modules.engine.power import (
    DEFAULT_ALPHA,
    DEFAULT_METHODS,
    DEFAULT_N,
    DEFAULT_S,
    DEFAULT_SEED,
    PowerStudyConfig,
)
from modules.procedures.dpmtp import DEFAULT_HYPER_RATE
from modules.procedures.mtp import MethodSpec

logger = logging.getLogger("mtppower.parser")

SCHEMA_VERSION = 1


class TestEntry(BaseModel):
    """One test of a study file."""

    model_config = ConfigDict(extra="forbid")

    id: int
    label: Optional[str] = None
    tail: str = "two-sided"
    dof: Union[float, str] = "inf"
    effect_ratio: Optional[float] = None
    observed_p: Optional[float] = None
    derive_ratio: bool = False
    weight: Optional[float] = None
    sample_size: Optional[int] = None

    @field_validator("tail")
    @classmethod
    def _check_tail(cls, value):
        return TailType.parse(value).value

    @field_validator("dof", mode="before")
    @classmethod
    def _check_dof(cls, value):
        dof = DegreesOfFreedom.parse(value)
        return "inf" if dof.is_infinite else dof.value

    @field_validator("observed_p")
    @classmethod
    def _check_p(cls, value):
        if value is not None and not 0.0 <= value <= 1.0:
            raise ValueError(f"observed_p must lie in [0, 1], got {value}")
        return value

    @field_validator("weight")
    @classmethod
    def _check_weight(cls, value):
        if value is not None and value < 0:
            raise ValueError(f"weight must be nonnegative, got {value}")
        return value

    @model_validator(mode="after")
    def _check_ratio_source(self):
        if self.derive_ratio:
            if self.effect_ratio is not None:
                raise ValueError("give either effect_ratio or derive_ratio, not both")
            if self.observed_p is None or self.observed_p <= 0.0:
                raise ValueError("derive_ratio needs an observed_p in (0, 1]")
        elif self.effect_ratio is None:
            raise ValueError("effect_ratio is required unless derive_ratio is true")
        return self

    def to_spec(self) -> TestSpec:
        """Build the TestSpec, deriving the effect ratio from observed_p if asked."""
        dof = DegreesOfFreedom.parse(self.dof)
        ratio = self.effect_ratio
        if self.derive_ratio:
            ratio = float(stat_from_pvalue(self.observed_p, dof, self.tail))
        return TestSpec(
            id=self.id,
            label=self.label if self.label is not None else f"Test {self.id}",
            tail=self.tail,
            dof=dof,
            effect_ratio=ratio,
            weight=self.weight,
            observed_p=self.observed_p,
            sample_size=self.sample_size,
        )


class StudyFile(BaseModel):
    """A complete study file."""

    model_config = ConfigDict(extra="forbid")

    schema_version: int = SCHEMA_VERSION
    alpha: float = DEFAULT_ALPHA
    S: int = DEFAULT_S
    N: int = DEFAULT_N
    hyper_rate: float = DEFAULT_HYPER_RATE
    seed: int = DEFAULT_SEED
    methods: List[str] = Field(default_factory=lambda: list(DEFAULT_METHODS))
    shrinkage: Union[float, List[float]] = 0.0
    shared_dp_draws: bool = False
    per_rank_dp: bool = False
    literal_sigchase: bool = False
    two_pass: bool = False
    tests: List[TestEntry] = Field(min_length=1)

    @field_validator("schema_version")
    @classmethod
    def _check_version(cls, value):
        if value != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {value} (expected {SCHEMA_VERSION})")
        return value

    @field_validator("alpha")
    @classmethod
    def _check_alpha(cls, value):
        if not 0.0 < value < 1.0:
            raise ValueError(f"alpha must lie strictly between 0 and 1, got {value}")
        return value

    @field_validator("S", "N")
    @classmethod
    def _check_counts(cls, value):
        if value < 1:
            raise ValueError(f"must be at least 1, got {value}")
        return value

    @field_validator("methods")
    @classmethod
    def _check_methods(cls, value):
        return [MethodSpec.parse(item).key for item in value]

    @field_validator("tests")
    @classmethod
    def _check_ids(cls, value):
        ids = [t.id for t in value]
        duplicates = sorted({i for i in ids if ids.count(i) > 1})
        if duplicates:
            raise ValueError(f"duplicate test ids {duplicates}")
        return value

    def to_config(self, correlation=None, **overrides) -> PowerStudyConfig:
        """
        Build a PowerStudyConfig, with keyword overrides taking precedence.

        Args:
            correlation (CorrelationSampler or matrix, optional): Fixed correlation
            **overrides: PowerStudyConfig fields to replace (None values ignored)
        """
        if correlation is not None and not hasattr(correlation, "sample_lower"):
            correlation = FixedCorrelationSampler(correlation)
        fields = dict(
            tests=tuple(t.to_spec() for t in self.tests),
            alpha=self.alpha,
            s_iters=self.S,
            n_draws=self.N,
            hyper_rate=self.hyper_rate,
            methods=tuple(self.methods),
            shrinkage=self.shrinkage,
            seed=self.seed,
            shared_dp_draws=self.shared_dp_draws,
            per_rank_dp=self.per_rank_dp,
            literal_sigchase=self.literal_sigchase,
            two_pass=self.two_pass,
            correlation=correlation,
        )
        fields.update({k: v for k, v in overrides.items() if v is not None})
        return PowerStudyConfig(**fields)


def _node_line(node, loc):
    """1-based line of the deepest YAML node matching a pydantic error location."""
    line = node.start_mark.line + 1 if node is not None else None
    for key in loc:
        if isinstance(node, yaml.MappingNode):
            match = next((v for k, v in node.value if k.value == str(key)), None)
            if match is None:
                break
            node = match
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
        else:
            break
        line = node.start_mark.line + 1
    return line


def parse_study(text, source="<study>") -> StudyFile:
    """
    Parse and validate study-file text.

    Args:
        text (str): YAML document
        source (str): Name used in error messages

    Returns:
        StudyFile: The validated study

    Raises:
        SchemaError: On YAML syntax or schema violations, with the line when known
    """
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise SchemaError(f"invalid YAML: {getattr(e, 'problem', e)}",
                          line=mark.line + 1 if mark else None, source=source)
    if not isinstance(data, dict):
        raise SchemaError("study file must be a mapping", line=1, source=source)
    try:
        return StudyFile.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        loc = tuple(first["loc"])
        where = ".".join(str(part) for part in loc) or "study"
        raise SchemaError(f"{where}: {first['msg']}", line=_node_line(root, loc), source=source)
    except DomainError as e:
        raise SchemaError(str(e), source=source)


def load_study(path) -> StudyFile:
    """Read and validate a study file from disk."""
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    logger.debug(f"Loaded study file {path}")
    return parse_study(text, source=str(path))


def dump_study(study: StudyFile) -> str:
    """Serialize a study back to YAML; parse_study(dump_study(s)) == s."""
    data = study.model_dump(exclude_none=True)
    for entry in data["tests"]:
        if not entry.get("derive_ratio"):
            entry.pop("derive_ratio", None)
    return yaml.safe_dump(data, sort_keys=False, allow_unicode=True)
