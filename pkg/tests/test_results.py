"""
Test suite for results objects.

@date: 18.10.2026
"""

from typing import assert_never

import numpy as np
import pytest
from invbinom import BernoulliOracle, Err, Ok, Result, SampleCapReached, ibs_trial
from invbinom._results import AbstractResult
from test_errors import BasicError


def fails_on_true(should_fail: bool) -> Result[bool, BasicError]:
    if should_fail:
        return Err(BasicError)
    return Ok(True)


def test_basic_result() -> None:
    """
    Test basic result.
    """
    result = fails_on_true(False)
    assert isinstance(result, AbstractResult)
    # checking __bool__
    assert result

    result = fails_on_true(True)
    assert isinstance(result, AbstractResult)
    assert isinstance(result.error, BasicError)
    assert not result


@pytest.mark.parametrize("successful", [True, False])
def test_result_matching(successful: bool) -> None:
    """
    Ok and Err support structural pattern matching.
    """
    match fails_on_true(not successful):
        case Ok(value):
            assert successful
            assert value is True
        case Err(error):
            assert not successful
            assert isinstance(error, BasicError)
        case _ as x:
            assert_never(x)


def test_result_unwrap() -> None:
    """
    Checks that unwrap() raises an exception when the result is an error
    and returns the value when it is not.
    """
    with pytest.raises(ValueError):
        fails_on_true(True).unwrap()
    assert fails_on_true(False).unwrap() is True


def test_unwrap_or_and_map() -> None:
    assert fails_on_true(True).unwrap_or(False) is False
    assert fails_on_true(False).map(lambda v: not v) == Ok(False)
    failed = fails_on_true(True)
    assert failed.map(lambda v: not v) is failed


def test_inner() -> None:
    """
    `inner` gives the value of an Ok and the error of an Err.
    """
    assert Ok(3).inner == 3
    error = SampleCapReached(0, 10)
    assert Err(error).inner is error


def test_err_wraps_non_errors() -> None:
    assert str(Err("plain text").error) == "plain text"


def test_ibs_trial_truncation_is_an_err() -> None:
    """
    An oracle that never hits makes `ibs_trial` return the truncation
    signal rather than a value.
    """
    never = BernoulliOracle(1e-12, rng=np.random.default_rng(0))
    match ibs_trial(never, max_samples=50, trial=7):
        case Err(SampleCapReached(trial=trial, samples=samples)):
            assert (trial, samples) == (7, 50)
        case other:
            assert False, f"unexpected {other}"
