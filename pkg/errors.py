# errors.py
from __future__ import annotations

from typing import Any, Dict, Optional


class SchurToolError(Exception):
    """
    Base for every error the toolkit raises on purpose.

    code:
        short machine-readable identifier, echoed by the CLI
    exit_status:
        1 for domain errors, 2 for input / schema errors
    details:
        extra JSON-able payload (measured norms, offending points, ...)
    """
    code = "error"
    exit_status = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = dict(details or {})

    def to_payload(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"code": self.code, "message": self.message}
        if self.details:
            payload["details"] = self.details
        return payload


# ---------- input / schema (exit 2) ----------

class InputError(SchurToolError, ValueError):
    code = "invalid_input"
    exit_status = 2


class SchemaError(InputError):
    code = "schema_violation"


class MalformedJSON(InputError):
    code = "malformed_json"


class DimensionMismatch(InputError):
    code = "dimension_mismatch"


# ---------- domain (exit 1) ----------

class EvaluationSingularity(SchurToolError):
    code = "evaluation_singularity"

    def __init__(self, message: str, point: Any = None, rcond: Optional[float] = None):
        details: Dict[str, Any] = {}
        if point is not None:
            details["point"] = point
        if rcond is not None:
            details["rcond"] = rcond
        super().__init__(message, details)
        self.point = point
        self.rcond = rcond


class OutsideDomain(SchurToolError):
    code = "outside_domain"


class NotPositiveSemidefinite(SchurToolError):
    code = "not_psd"


class NotContractive(SchurToolError):
    code = "not_contractive"

    def __init__(self, message: str, norm: float):
        super().__init__(message, {"norm": norm})
        self.norm = norm


class InconsistentData(SchurToolError):
    code = "inconsistent_data"


class CertificateTooWeak(SchurToolError):
    code = "certificate_too_weak"


class NumericalFailure(SchurToolError):
    code = "numerical_failure"


class StageFailure(SchurToolError):
    code = "stage_failure"

    def __init__(self, stage: str, cause: Exception):
        message = f"{stage} failed: {cause}"
        details: Dict[str, Any] = {"stage": stage}
        if isinstance(cause, SchurToolError):
            details["cause"] = cause.to_payload()
        super().__init__(message, details)
        self.stage = stage
        self.cause = cause
        # input problems stay input problems, whatever stage caught them
        self.exit_status = getattr(cause, "exit_status", 1)
