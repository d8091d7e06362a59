"""JSON problem files.

Example::

    {
      "schema_version": 1,
      "source": {
        "alphabet_sizes": [2, 2, 2],
        "outcomes": {"0,0,0": 0.25, "0,1,1": 0.25, "1,0,1": 0.25, "1,1,0": 0.25}
      },
      "channel": {"q": 2, "noise_relay": [1, 0]},
      "simulation": {"m": 6, "trials": 2000, "seed": 1, "mode": "ideal-channel"}
    }

``source`` takes either a flat ``probs`` array (row-major, user 1 slowest)
or a sparse ``outcomes`` map keyed by comma-separated symbol indices.
Missing channel noise pmfs default to noiseless.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .distribution import JointPmf, from_outcomes, validate
from .errors import MwrcError, ProblemFileError
from .rates import ChannelSpec

SCHEMA_VERSION = 1
SIM_KEYS = {"m", "trials", "seed", "mode", "kappa"}


@dataclass
class ProblemFile:
    source: JointPmf
    channel: ChannelSpec
    simulation: dict[str, Any] = field(default_factory=dict)


def _field_error(where: str, exc: Exception) -> ProblemFileError:
    code = exc.code if isinstance(exc, MwrcError) else type(exc).__name__
    return ProblemFileError(f"{code}: {where}: {exc}")


def _require(obj: dict, key: str, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise ProblemFileError(f"MissingField: {where}.{key} is required")
    return obj[key]


def _parse_source(src: Any) -> JointPmf:
    if not isinstance(src, dict):
        raise ProblemFileError("InvalidField: source must be an object")
    sizes = _require(src, "alphabet_sizes", "source")
    if not isinstance(sizes, list) or not all(isinstance(a, int) for a in sizes):
        raise ProblemFileError("InvalidField: source.alphabet_sizes must be a list of integers")
    if ("probs" in src) == ("outcomes" in src):
        raise ProblemFileError("InvalidField: source needs exactly one of probs / outcomes")
    if "probs" in src:
        try:
            return validate(src["probs"], sizes)
        except (MwrcError, TypeError, ValueError) as exc:
            raise _field_error("source.probs", exc) from exc
    raw = src["outcomes"]
    if not isinstance(raw, dict):
        raise ProblemFileError("InvalidField: source.outcomes must be an object")
    outcomes = {}
    for key, p in raw.items():
        try:
            sym = tuple(int(s) for s in key.split(","))
        except ValueError as exc:
            raise _field_error(f"source.outcomes[{key!r}]", exc) from exc
        if sym in outcomes:
            raise ProblemFileError(f"InvalidField: source.outcomes[{key!r}] repeats an outcome")
        outcomes[sym] = float(p)
    try:
        return from_outcomes(outcomes, sizes)
    except MwrcError as exc:
        raise _field_error("source.outcomes", exc) from exc


def _parse_channel(ch: Any, L: int) -> ChannelSpec:
    if not isinstance(ch, dict):
        raise ProblemFileError("InvalidField: channel must be an object")
    q = _require(ch, "q", "channel")
    if not isinstance(q, int):
        raise ProblemFileError("InvalidField: channel.q must be an integer")
    point = [1.0] + [0.0] * (q - 1) if q >= 1 else []
    relay = ch.get("noise_relay", point)
    users = ch.get("noise_users", [point] * L)
    if not isinstance(users, list) or len(users) != L:
        raise ProblemFileError(f"ShapeMismatch: channel.noise_users needs {L} pmfs")
    try:
        return ChannelSpec(q, relay, users)
    except (MwrcError, TypeError, ValueError) as exc:
        raise _field_error("channel", exc) from exc


def parse_problem(data: Any) -> ProblemFile:
    if not isinstance(data, dict):
        raise ProblemFileError("InvalidField: top level must be an object")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ProblemFileError(
            f"UnsupportedSchema: schema_version must be {SCHEMA_VERSION}, got {version!r}"
        )
    pmf = _parse_source(_require(data, "source", "problem"))
    channel = _parse_channel(_require(data, "channel", "problem"), pmf.L)
    sim = data.get("simulation", {})
    if not isinstance(sim, dict) or set(sim) - SIM_KEYS:
        raise ProblemFileError(f"InvalidField: simulation accepts only {sorted(SIM_KEYS)}")
    return ProblemFile(pmf, channel, dict(sim))


def load_problem(path: str | Path) -> ProblemFile:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ProblemFileError(f"Unreadable: {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(
            f"ParseError: {path}: line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    return parse_problem(data)
