"""
Problem files (state + observables) and JSON report files.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator

from src.exceptions import MatrixError, ParseError, ProblemValidationError
from src.linalg_core import complex_from_json, matrix_from_dict, matrix_to_dict
from src.quantum_model import DensityState, ObservableTuple

logger = logging.getLogger(__name__)

REPORT_VERSION = "1"

ComplexEntry = Union[Tuple[float, float], float]


class MatrixPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    rows: int
    cols: int
    data: List[ComplexEntry]

    @field_validator("rows", "cols")
    @classmethod
    def _positive(cls, value: int) -> int:
        if value <= 0:
            raise ValueError("must be positive")
        return value


class PureStatePayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    pure: List[ComplexEntry]


class ProblemFile(BaseModel):
    """{"dim": n, "observables": [Matrix...], "state": Matrix | {"pure": [...]} | "maximally_mixed"}"""

    dim: Optional[int] = None
    observables: List[MatrixPayload]
    state: Union[Literal["maximally_mixed"], PureStatePayload, MatrixPayload]


def parse_json(text: str, source: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"Malformed JSON in {source}: {e.msg}", line=e.lineno) from e


def _validation_to_parse_error(e: ValidationError, source: str) -> ParseError:
    first = e.errors()[0]
    field = ".".join(str(part) for part in first.get("loc", ()))
    return ParseError(f"Invalid problem in {source}: {first.get('msg')}", field=field)


def build_problem(problem: ProblemFile) -> Tuple[DensityState, ObservableTuple]:
    """Turn a parsed ProblemFile into a validated state and observable tuple."""
    try:
        matrices = [matrix_from_dict(m.model_dump()) for m in problem.observables]
        if not matrices:
            raise ProblemValidationError("Problem lists no observables")
        observables = ObservableTuple.of(*matrices)
        dim = observables.dimension
        if problem.dim is not None and problem.dim != dim:
            raise ProblemValidationError(
                f"Declared dim {problem.dim} != observable dimension {dim}"
            )

        if problem.state == "maximally_mixed":
            state = DensityState.maximally_mixed(dim)
        elif isinstance(problem.state, PureStatePayload):
            state = DensityState.pure([complex_from_json(z) for z in problem.state.pure])
        else:
            state = DensityState(matrix_from_dict(problem.state.model_dump()))
    except MatrixError as e:
        raise ProblemValidationError(str(e)) from e

    if state.dimension != observables.dimension:
        raise ProblemValidationError(
            f"State dimension {state.dimension} != observable dimension {dim}"
        )
    return state, observables


def load_problem(path: Union[str, Path]) -> Tuple[DensityState, ObservableTuple]:
    """
    Load a problem file.

    Args:
        path: JSON problem file

    Returns:
        Tuple of DensityState and ObservableTuple

    Raises:
        ParseError: malformed JSON or schema violation
        ProblemValidationError: non-Hermitian observable or invalid state
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"Cannot read problem file {path}: {e}") from e
    payload = parse_json(text, str(path))
    try:
        problem = ProblemFile.model_validate(payload)
    except ValidationError as e:
        raise _validation_to_parse_error(e, str(path)) from e
    state, observables = build_problem(problem)
    logger.debug(
        "Loaded %d observables of dimension %d from %s",
        len(observables),
        observables.dimension,
        path,
    )
    return state, observables


def problem_to_dict(state: DensityState, observables: ObservableTuple) -> Dict[str, Any]:
    return {
        "dim": observables.dimension,
        "observables": [matrix_to_dict(x) for x in observables.matrices],
        "state": matrix_to_dict(state.rho),
    }


def problem_from_dict(payload: Dict[str, Any]) -> Tuple[DensityState, ObservableTuple]:
    try:
        problem = ProblemFile.model_validate(payload)
    except ValidationError as e:
        raise _validation_to_parse_error(e, "payload") from e
    return build_problem(problem)


def save_problem(
    path: Union[str, Path], state: DensityState, observables: ObservableTuple
) -> str:
    return _write_json(path, problem_to_dict(state, observables))


def save_report(path: Union[str, Path], report: Dict[str, Any]) -> str:
    """
    Write a report dictionary as JSON with sorted keys.

    Returns:
        Path to the written file
    """
    payload = dict(report)
    payload.setdefault("version", REPORT_VERSION)
    return _write_json(path, payload)


def dumps_report(report: Dict[str, Any]) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=True)


def _write_json(path: Union[str, Path], payload: Dict[str, Any]) -> str:
    file_path = Path(path)
    if file_path.parent != Path(""):
        file_path.parent.mkdir(parents=True, exist_ok=True)
    file_path.write_text(dumps_report(payload) + "\n", encoding="utf-8")
    return str(file_path)
