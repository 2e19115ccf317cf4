"""
Datasets of (stimulus, response) trials and their line-delimited file format.

A dataset file is JSON lines: a header record declaring the model name,
the generating parameters and the seed, followed by one record per trial.
Stimulus and response encodings are model-specific (see each model's codec).
Floats are written with their shortest round-trip representation, so
reading back a written dataset is bit-exact.

@date: 18.10.2026
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Protocol

import numpy as np
import numpy.typing as npt

from ._checks import ContractViolation, DataError
from ._results import Err, Ok, Result

FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Ordered trials of a behavioral experiment.

    Attributes
    ----------
    stimuli: np.ndarray
        One entry per trial (first axis), numeric or object dtype.
    responses: np.ndarray
        One response per trial.
    model: str
        Name of the model that generated the data, if known.
    theta_true: tuple[float, ...] | None
        Generating parameters, if known.
    seed: int | None
        Seed the data were generated with, if known.
    """

    stimuli: npt.NDArray[Any]
    responses: npt.NDArray[Any]
    model: str = ""
    theta_true: tuple[float, ...] | None = None
    seed: int | None = None
    metadata: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if len(self.stimuli) != len(self.responses):
            ContractViolation(
                "Dataset",
                f"{len(self.stimuli)} stimuli for {len(self.responses)} responses",
            ).throw()
        if len(self.responses) < 1:
            ContractViolation("Dataset", "a dataset needs at least one trial").throw()

    def __len__(self) -> int:
        return len(self.responses)

    @property
    def n_trials(self) -> int:
        return len(self.responses)

    def subset(self, indices: npt.ArrayLike) -> Dataset:
        indices = np.asarray(indices)
        return Dataset(
            self.stimuli[indices],
            self.responses[indices],
            self.model,
            self.theta_true,
            self.seed,
        )


class TrialCodec(Protocol):
    """
    Converts a model's stimuli and responses to and from JSON values.
    """

    name: str

    def encode_stimulus(self, stimulus: Any) -> Any: ...

    def decode_stimuli(self, encoded: list[Any]) -> npt.NDArray[Any]: ...

    def encode_response(self, response: Any) -> Any: ...

    def decode_responses(self, encoded: list[Any]) -> npt.NDArray[Any]: ...


def write_dataset(path: str | Path, data: Dataset, codec: TrialCodec) -> None:
    """
    Writes `data` to `path` as JSON lines.
    """
    header = {
        "format": FORMAT_VERSION,
        "model": codec.name,
        "theta_true": None if data.theta_true is None else list(data.theta_true),
        "seed": data.seed,
        "n_trials": data.n_trials,
        **({"metadata": data.metadata} if data.metadata else {}),
    }
    with open(path, "w", encoding="utf-8") as stream:
        stream.write(json.dumps(header) + "\n")
        for stimulus, response in zip(data.stimuli, data.responses):
            record = {
                "stimulus": codec.encode_stimulus(stimulus),
                "response": codec.encode_response(response),
            }
            stream.write(json.dumps(record) + "\n")


def read_header(path: str | Path) -> Result[dict[str, Any], DataError]:
    """
    Reads only the header record of a dataset file.
    """
    try:
        with open(path, encoding="utf-8") as stream:
            header = json.loads(stream.readline())
    except (OSError, json.JSONDecodeError) as exc:
        return Err(DataError(str(path), str(exc)))
    if not isinstance(header, dict) or "model" not in header:
        return Err(DataError(str(path), "missing dataset header"))
    return Ok(header)


def read_dataset(
    path: str | Path, codec_for: Callable[[str], Result[TrialCodec, Any]]
) -> Result[Dataset, DataError]:
    """
    Reads a dataset written by `write_dataset`. `codec_for` resolves the
    model name found in the header into its codec.
    """
    match read_header(path):
        case Err(error):
            return Err(error)
        case Ok(header):
            pass
    match codec_for(header["model"]):
        case Err(error):
            return Err(DataError(str(path), str(error)))
        case Ok(codec):
            pass
    try:
        with open(path, encoding="utf-8") as stream:
            stream.readline()
            records = [json.loads(line) for line in stream if line.strip()]
        stimuli = codec.decode_stimuli([r["stimulus"] for r in records])
        responses = codec.decode_responses([r["response"] for r in records])
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        return Err(DataError(str(path), f"{type(exc).__name__}: {exc}"))
    if header.get("n_trials") not in (None, len(records)):
        return Err(
            DataError(str(path), f"header declares {header['n_trials']} trials, found {len(records)}")
        )
    if not records:
        return Err(DataError(str(path), "no trials"))
    theta = header.get("theta_true")
    return Ok(
        Dataset(
            stimuli,
            responses,
            header["model"],
            None if theta is None else tuple(float(t) for t in theta),
            header.get("seed"),
            header.get("metadata", {}),
        )
    )
