"""Parse game-record files and matrix files into Datasets.

Two record formats are supported: CSV with the header
``home,away,outcome[,repeat]`` and a JSON array of objects with the same
keys. Outcome tokens are case-insensitive ``home_win``, ``away_win``, and
``tie``. Matrix files are JSON objects carrying either a bare win matrix
(``{"teams": [...], "a": [[...]]}``, ingested as venueless) or the full
venue split (``{"teams": [...], "a_home": [[...]], "a_away": [[...]],
"t_home": [[...]]}``).
"""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyInputError,
    NegativeCountError,
    ParseError,
    SelfPlayError,
    ShapeError,
)
from .types import CountMatrices, Dataset, venue_free_dataset


class Outcome(enum.Enum):
    HOME_WIN = "home_win"
    AWAY_WIN = "away_win"
    TIE = "tie"


@dataclass(frozen=True)
class GameRecord:
    """One observed game (or ``repeat`` identical games)."""

    home: str
    away: str
    outcome: Outcome
    repeat: int = 1

    def __post_init__(self):
        if not self.home or not self.away:
            raise ParseError("home and away team ids are required")
        if self.home == self.away:
            raise SelfPlayError(f"team {self.home!r} cannot play itself")
        if not isinstance(self.repeat, int) or self.repeat < 1:
            raise ParseError(f"repeat must be a positive integer, got {self.repeat!r}")


def _decode(data: bytes | str) -> str:
    if isinstance(data, bytes):
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not valid UTF-8: {exc}") from exc
    return data


def _parse_outcome(token, where: str) -> Outcome:
    if not isinstance(token, str):
        raise ParseError(f"{where}: outcome must be a string, got {token!r}")
    try:
        return Outcome(token.strip().lower())
    except ValueError:
        raise ParseError(
            f"{where}: unknown outcome {token!r} "
            f"(expected home_win, away_win, or tie)"
        ) from None


def _parse_repeat(value, where: str) -> int:
    if value is None or value == "":
        return 1
    try:
        repeat = int(str(value).strip())
    except (TypeError, ValueError):
        raise ParseError(f"{where}: repeat must be an integer, got {value!r}") from None
    if repeat < 1:
        raise ParseError(f"{where}: repeat must be >= 1, got {repeat}")
    return repeat


def _record(home, away, outcome, repeat, where: str) -> GameRecord:
    if not home or not away:
        raise ParseError(f"{where}: home and away team ids are required")
    if home == away:
        raise SelfPlayError(f"{where}: team {home!r} cannot play itself")
    return GameRecord(
        home=str(home),
        away=str(away),
        outcome=_parse_outcome(outcome, where),
        repeat=_parse_repeat(repeat, where),
    )


def parse_records(data: bytes | str, format: str = "csv") -> list[GameRecord]:
    """Parse game records from CSV or JSON text.

    ``format`` is "csv" or "json". Unknown CSV columns and JSON keys are
    ignored. Errors carry the offending line (CSV, header is line 1) or
    element index (JSON, first element is 1).
    """
    text = _decode(data)
    if format == "csv":
        return _parse_csv(text)
    if format == "json":
        return _parse_json_records(text)
    raise ParseError(f"unknown record format {format!r} (expected csv or json)")


def _parse_csv(text: str) -> list[GameRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise ParseError("line 1: missing CSV header")
    fields = [f.strip().lower() for f in reader.fieldnames]
    for required in ("home", "away", "outcome"):
        if required not in fields:
            raise ParseError(f"line 1: CSV header must include {required!r}")
    records = []
    for lineno, row in enumerate(reader, start=2):
        where = f"line {lineno}"
        clean = {}
        for key, value in row.items():
            if key is None:
                raise ParseError(f"{where}: more cells than header columns")
            clean[key.strip().lower()] = value.strip() if isinstance(value, str) else value
        records.append(
            _record(
                clean.get("home"),
                clean.get("away"),
                clean.get("outcome"),
                clean.get("repeat"),
                where,
            )
        )
    return records


def _parse_json_records(text: str) -> list[GameRecord]:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(payload, list):
        raise ParseError("record JSON must be an array of objects")
    records = []
    for idx, element in enumerate(payload, start=1):
        where = f"element {idx}"
        if not isinstance(element, dict):
            raise ParseError(f"{where}: expected an object")
        records.append(
            _record(
                element.get("home"),
                element.get("away"),
                element.get("outcome"),
                element.get("repeat"),
                where,
            )
        )
    return records


def serialize_records(records: list[GameRecord], format: str = "csv") -> str:
    """Render records back to text; inverse of :func:`parse_records`."""
    if format == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["home", "away", "outcome", "repeat"])
        for r in records:
            writer.writerow([r.home, r.away, r.outcome.value, r.repeat])
        return out.getvalue()
    if format == "json":
        payload = [
            {"home": r.home, "away": r.away, "outcome": r.outcome.value, "repeat": r.repeat}
            for r in records
        ]
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    raise ParseError(f"unknown record format {format!r} (expected csv or json)")


def aggregate(records: list[GameRecord]) -> Dataset:
    """Accumulate records into a venue-aware Dataset.

    Teams are indexed by first appearance (home before away within a
    record). A home win by host h over visitor v increments ``a_home[h][v]``;
    an away win by v at h increments ``a_away[v][h]``; a tie at h increments
    ``t_home[h][v]``.
    """
    if not records:
        raise EmptyInputError("no game records to aggregate")
    index: dict[str, int] = {}
    for r in records:
        for team in (r.home, r.away):
            if team not in index:
                index[team] = len(index)
    t = len(index)
    a_home = np.zeros((t, t))
    a_away = np.zeros((t, t))
    t_home = np.zeros((t, t))
    for r in records:
        h, v = index[r.home], index[r.away]
        if r.outcome is Outcome.HOME_WIN:
            a_home[h, v] += r.repeat
        elif r.outcome is Outcome.AWAY_WIN:
            a_away[v, h] += r.repeat
        else:
            t_home[h, v] += r.repeat
    teams = tuple(sorted(index, key=index.get))
    return Dataset(teams=teams, counts=CountMatrices(a_home, a_away, t_home))


def _integer_matrix(values, name: str, t: int) -> np.ndarray:
    try:
        arr = np.array(values, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{name}: not a numeric matrix ({exc})") from None
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {arr.shape}")
    if arr.shape[0] != t:
        raise ShapeError(f"{name} must be {t}x{t}, got {arr.shape[0]}x{arr.shape[1]}")
    if np.any(arr < 0):
        raise NegativeCountError(f"{name} contains a negative count")
    if not np.all(arr == np.floor(arr)):
        raise ParseError(f"{name} must contain integer counts")
    return arr


def parse_matrix(data: bytes | str) -> Dataset:
    """Parse a matrix-form JSON dataset.

    A bare ``a`` matrix, optionally joined by a symmetric ``ties`` matrix,
    yields a venueless dataset; the full ``a_home``/``a_away``/``t_home``
    triple yields a venue-aware one.
    """
    text = _decode(data)
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ParseError("matrix JSON must be an object")
    teams = payload.get("teams")
    if not isinstance(teams, list) or not all(isinstance(x, str) for x in teams):
        raise ParseError('matrix JSON needs a "teams" array of strings')
    t = len(teams)
    if t < 2:
        raise ShapeError(f"need at least 2 teams, got {t}")
    if len(set(teams)) != t:
        raise ParseError("team identifiers must be unique")

    if "a" in payload:
        a = _integer_matrix(payload["a"], "a", t)
        if np.any(np.diagonal(a) != 0):
            raise ShapeError("a must have a zero diagonal")
        ties = None
        if "ties" in payload:
            ties = _integer_matrix(payload["ties"], "ties", t)
        return venue_free_dataset(tuple(teams), a, ties)

    if all(k in payload for k in ("a_home", "a_away", "t_home")):
        a_home = _integer_matrix(payload["a_home"], "a_home", t)
        a_away = _integer_matrix(payload["a_away"], "a_away", t)
        t_home = _integer_matrix(payload["t_home"], "t_home", t)
        counts = CountMatrices(a_home=a_home, a_away=a_away, t_home=t_home)
        return Dataset(teams=tuple(teams), counts=counts, venueless=False)

    raise ParseError(
        'matrix JSON needs either "a" or all of "a_home", "a_away", "t_home"'
    )
