import pytest

from errors import (
    CertificateTooWeak,
    DimensionMismatch,
    EvaluationSingularity,
    InputError,
    NotContractive,
    NumericalFailure,
    OutsideDomain,
    SchemaError,
    SchurToolError,
    StageFailure,
)


@pytest.mark.parametrize(
    "exc, code, status",
    [
        (InputError("x"), "invalid_input", 2),
        (SchemaError("x"), "schema_violation", 2),
        (DimensionMismatch("x"), "dimension_mismatch", 2),
        (OutsideDomain("x"), "outside_domain", 1),
        (CertificateTooWeak("x"), "certificate_too_weak", 1),
    ],
)
def test_codes_and_exit_statuses(exc, code, status):
    assert isinstance(exc, SchurToolError)
    assert exc.code == code
    assert exc.exit_status == status
    assert exc.to_payload() == {"code": code, "message": "x"}


def test_input_errors_are_value_errors():
    assert isinstance(DimensionMismatch("x"), ValueError)
    assert not isinstance(OutsideDomain("x"), ValueError)


def test_payload_details():
    e = EvaluationSingularity("singular", point=[0.5, 0.5], rcond=1e-17)
    assert e.to_payload()["details"] == {"point": [0.5, 0.5], "rcond": 1e-17}
    assert NotContractive("big", 1.5).to_payload()["details"] == {"norm": 1.5}


def test_stage_failure_inherits_exit_status():
    inner = SchemaError("missing key")
    e = StageFailure("decode", inner)
    assert e.exit_status == 2
    assert e.details["stage"] == "decode"
    assert e.details["cause"]["code"] == "schema_violation"
    assert StageFailure("lurking", OutsideDomain("x")).exit_status == 1
    assert StageFailure("other", RuntimeError("boom")).exit_status == 1


def test_numerical_failure_is_a_domain_error():
    e = NumericalFailure("SVD did not converge")
    assert e.exit_status == 1
    assert e.code == "numerical_failure"
