"""Small bundled datasets, handy for demos and smoke tests."""

from __future__ import annotations

from importlib.resources import as_file, files

from .ingestion import parse_matrix
from .types import Dataset


def _load(name: str) -> Dataset:
    text = files("btrank.data").joinpath(name).read_text(encoding="utf-8")
    return parse_matrix(text)


def load_four_teams() -> Dataset:
    """Four teams, seven decisive games, venue-free.

    The win digraph is not strongly connected (teams 3 and 4 never beat 1
    or 2), while the comparison graph is connected. The smallest dataset on
    which the unperturbed estimate fails to exist but the perturbed one is
    well behaved.
    """
    return _load("four_teams.json")


def load_ten_teams() -> Dataset:
    """Ten teams B1..B10 with a near-total dominance structure.

    Every team beats its successors more often than not, so the intended
    order is B1 through B10; several pairs were never compared, leaving the
    win digraph short of strong connectivity.
    """
    return _load("ten_teams.json")


def load_five_teams() -> Dataset:
    """Five teams, eight decisive games, venue-free.

    B1 and B2 never met, B5 never won a game, and the win digraph is far
    from strongly connected; the comparison graph is connected, so the
    perturbed fit exists.
    """
    return _load("five_teams.json")


def fixture_path(name: str):
    """Context manager yielding a real filesystem path for a bundled file.

    Intended for handing fixtures to the command line interface::

        with fixture_path("four_teams.json") as path:
            run(["check", "--data", str(path)])
    """
    return as_file(files("btrank.data").joinpath(name))
