from dataclasses import dataclass, field
from typing import Any, Dict, Optional


class EngineError(Exception):
    """Base class for every error raised by the algebra engine"""


class FieldMismatch(EngineError):
    pass


class DimensionMismatch(EngineError):
    pass


class AxiomViolation(EngineError):
    """Raised by constructors that validate their structure maps eagerly"""

    def __init__(self, message: str, witness: Optional['CheckResult'] = None):
        super().__init__(message)
        self.witness = witness


class CapExceeded(EngineError):
    def __init__(self, message: str, last_dim: int):
        super().__init__(message)
        self.last_dim = last_dim


class StabilizationError(EngineError):
    def __init__(self, message: str, depth: int):
        super().__init__(message)
        self.depth = depth


class PreconditionError(EngineError):
    def __init__(self, message: str, degree: Optional[int] = None):
        super().__init__(message)
        self.degree = degree


class ScenarioError(EngineError):
    def __init__(self, message: str, path: str = '$'):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


@dataclass
class CheckResult:
    """Outcome of an axiom or certificate check: pass, or a violation witness"""
    passed: bool
    axiom: Optional[str] = None
    witness: Dict[str, Any] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed

    @classmethod
    def ok(cls, **details) -> 'CheckResult':
        return cls(True, None, details)

    @classmethod
    def fail(cls, axiom: str, **details) -> 'CheckResult':
        return cls(False, axiom, details)

    def to_dict(self) -> Dict[str, Any]:
        result = {'passed': self.passed, 'witness': self.witness}
        if self.axiom:
            result['axiom'] = self.axiom
        return result
