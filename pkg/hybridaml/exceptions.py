from typing import Any, Optional, Sequence

from typing_extensions import Annotated, Doc


class HybridAMLError(Exception):
    """
    Base class for every error raised by `hybridaml`.

    The CLI maps each family to a process exit code through `exit_code`.
    """

    exit_code: int = 1

    def __init__(
        self,
        message: Annotated[str, Doc("Human readable description.")],
        *,
        stage: Annotated[
            Optional[str],
            Doc(
                """
                Pipeline stage the error escaped from (`generate`, `enrich`,
                `build`, `train`, `evaluate`, `report`). Filled in by the
                experiment runner.
                """
            ),
        ] = None,
    ) -> None:
        super().__init__(message)
        self.message = message
        self.stage = stage

    def __str__(self) -> str:
        if self.stage:
            return f"[{self.stage}] {self.message}"
        return self.message


class ConfigurationError(HybridAMLError):
    exit_code = 2


class CalibrationError(ConfigurationError):
    pass


class DataError(HybridAMLError):
    exit_code = 3


class DatasetIOError(DataError):
    def __init__(self, message: str, *, path: Any) -> None:
        super().__init__(f"{message}: {path}")
        self.path = path


class SchemaError(DataError):
    def __init__(self, message: str, *, column: str) -> None:
        super().__init__(message)
        self.column = column


class IndicatorParseError(DataError):
    def __init__(self, message: str, *, row: int) -> None:
        super().__init__(f"row {row}: {message}")
        self.row = row


class IndicatorValidationError(DataError):
    pass


class DegenerateDataError(DataError):
    def __init__(self, message: str, *, column: Optional[str] = None) -> None:
        super().__init__(message)
        self.column = column


class CoverageError(DataError):
    def __init__(self, missing: Sequence[str]) -> None:
        self.missing = sorted(missing)
        super().__init__(
            "countries without indicator rows: " + ", ".join(self.missing)
        )


class ReferentialIntegrityError(DataError):
    pass


class StratificationError(DataError):
    pass


class RelationLookupError(DataError, KeyError):
    def __str__(self) -> str:
        return HybridAMLError.__str__(self)


class EvaluationError(DataError):
    pass


class MetricInputError(EvaluationError, ValueError):
    pass


class TrainingError(HybridAMLError):
    exit_code = 4

    def __init__(self, message: str, *, epoch: Optional[int] = None) -> None:
        if epoch is not None:
            message = f"epoch {epoch}: {message}"
        super().__init__(message)
        self.epoch = epoch


class NumericError(TrainingError):
    pass


class NumericOverflowError(NumericError):
    def __init__(self, layer: int) -> None:
        super().__init__(f"non-finite activations in layer {layer}")
        self.layer = layer


class InternalConsistencyError(TrainingError):
    pass


class AssertionGateError(HybridAMLError):
    exit_code = 5
