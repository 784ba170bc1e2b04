"""Rankings and what to do with them.

extract_ranking turns a FitResult into an ordered partition of the teams,
sweep_epsilon refits one model over a grid of perturbation sizes and reports
whether the ranking moved, monotone_ratio_check inspects how adjacent merit
ratios respond to the perturbation size, score_ranking orders by raw win
scores, and select_seeds applies a division-winners-then-wild-cards playoff
seeding rule.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import BtrankError, ConfigError, ExistenceError
from .solver import SolverConfig, fit
from .types import (
    RANK_TOL,
    Array,
    Dataset,
    FitResult,
    MatrixShift,
    ModelSpec,
    Ranking,
)


def _grouped_order(values: Array, tol: float) -> tuple[tuple[int, ...], list[tuple[int, ...]]]:
    """Sort indices by value descending (index ascending on exact ties) and
    split into groups whose values sit within ``tol`` of the group leader."""
    values = np.asarray(values, dtype=float)
    order = tuple(int(i) for i in np.lexsort((np.arange(len(values)), -values)))
    groups: list[tuple[int, ...]] = []
    current: list[int] = []
    anchor = 0.0
    for idx in order:
        if current and abs(values[idx] - anchor) > tol:
            groups.append(tuple(current))
            current = []
        if not current:
            anchor = float(values[idx])
        current.append(idx)
    if current:
        groups.append(tuple(current))
    return order, groups


def extract_ranking(result: FitResult, rank_tol: float = RANK_TOL) -> Ranking:
    """Order the teams of a fit best to worst.

    Tie groups collect teams whose log-merits differ by at most ``rank_tol``,
    which makes the ranking independent of the merit normalization. The fit
    should be a converged one; an unconverged result still produces a
    ranking, of whatever the solver last had.
    """
    order, groups = _grouped_order(result.beta, rank_tol)
    return Ranking(
        teams=result.teams, order=order, groups=tuple(groups), scores=result.scores
    )


def score_ranking(dataset: Dataset) -> Ranking:
    """Rank by raw win scores a_i, equal scores grouped as ties."""
    scores = dataset.scores
    order, groups = _grouped_order(scores, 0.0)
    return Ranking(teams=dataset.teams, order=order, groups=tuple(groups), scores=scores)


def kendall_distance(first: Ranking, second: Ranking) -> int:
    """Number of team pairs the two rankings order oppositely."""
    if first.teams != second.teams:
        raise ConfigError("rankings cover different teams")
    pos_a = {team_idx: k for k, team_idx in enumerate(first.order)}
    pos_b = {team_idx: k for k, team_idx in enumerate(second.order)}
    t = len(first.teams)
    count = 0
    for i in range(t):
        for j in range(i + 1, t):
            if (pos_a[i] - pos_a[j]) * (pos_b[i] - pos_b[j]) < 0:
                count += 1
    return count


@dataclass(frozen=True)
class SweepEntry:
    epsilon: float
    fit: FitResult
    ranking: Ranking


@dataclass(frozen=True)
class SweepResult:
    """One fit per perturbation size, plus a stability verdict.

    ``stable`` is true when every entry produces the identical team order.
    ``kendall_distances[p][q]`` counts the pairs ordered oppositely by
    entries p and q, so a stable sweep has an all-zero matrix.
    """

    entries: tuple[SweepEntry, ...]
    stable: bool
    kendall_distances: tuple[tuple[int, ...], ...]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def epsilons(self) -> tuple[float, ...]:
        return tuple(e.epsilon for e in self.entries)


def _annotated(err: BtrankError, epsilon: float) -> BtrankError:
    message = f"epsilon {epsilon:g}: {err}"
    if isinstance(err, ExistenceError):
        return ExistenceError(message, witness=err.witness)
    return type(err)(message)


def sweep_epsilon(
    model_spec: ModelSpec,
    dataset: Dataset,
    epsilons: Sequence[float],
    config: SolverConfig | None = None,
    jobs: int = 1,
) -> SweepResult:
    """Refit one model across a grid of perturbation sizes.

    The model spec's perturbation scheme is reused with each epsilon in
    turn, so it must be a scheme parameterized by epsilon (a matrix shift is
    refused). Fit errors are re-raised annotated with the offending epsilon.
    ``jobs`` > 1 runs the fits in a thread pool; entries keep grid order
    either way.
    """
    if isinstance(model_spec.perturbation, MatrixShift):
        raise ConfigError("a matrix shift has no epsilon to sweep")
    if len(epsilons) == 0:
        raise ConfigError("empty epsilon grid")

    def one(epsilon: float) -> SweepEntry:
        spec = dataclasses.replace(
            model_spec,
            perturbation=dataclasses.replace(
                model_spec.perturbation, epsilon=float(epsilon)
            ),
        )
        try:
            result = fit(spec, dataset, config)
        except BtrankError as err:
            raise _annotated(err, epsilon) from err
        return SweepEntry(
            epsilon=float(epsilon), fit=result, ranking=extract_ranking(result)
        )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            entries = tuple(pool.map(one, epsilons))
    else:
        entries = tuple(one(e) for e in epsilons)

    orders = [entry.ranking.order for entry in entries]
    stable = all(order == orders[0] for order in orders)
    m = len(entries)
    distances = tuple(
        tuple(
            kendall_distance(entries[p].ranking, entries[q].ranking)
            for q in range(m)
        )
        for p in range(m)
    )
    return SweepResult(entries=entries, stable=stable, kendall_distances=distances)


@dataclass(frozen=True)
class RatioTrend:
    """Merit ratio of one adjacent-in-ranking team pair across the sweep."""

    better: str
    worse: str
    ratios: tuple[float, ...]
    non_increasing: bool


@dataclass(frozen=True)
class MonotoneRatioReport:
    epsilons: tuple[float, ...]
    sweep_stable: bool
    trends: tuple[RatioTrend, ...]
    all_non_increasing: bool


def monotone_ratio_check(sweep: SweepResult) -> MonotoneRatioReport:
    """Report how adjacent merit ratios respond to the perturbation size.

    For each pair of teams adjacent in the smallest-epsilon ranking, the
    ratio of their merits is tracked across the sweep (sorted by epsilon
    ascending) and flagged as non-increasing or not. This is an observed
    regularity, so the outcome is reported rather than enforced.
    """
    entries = sorted(sweep.entries, key=lambda e: e.epsilon)
    base = entries[0].ranking
    slack = 1e-9
    trends = []
    for k in range(len(base.order) - 1):
        i, j = base.order[k], base.order[k + 1]
        ratios = tuple(
            float(e.fit.merits_u[i] / e.fit.merits_u[j]) for e in entries
        )
        ok = all(
            ratios[m + 1] <= ratios[m] * (1.0 + slack) + slack
            for m in range(len(ratios) - 1)
        )
        trends.append(
            RatioTrend(
                better=base.teams[i],
                worse=base.teams[j],
                ratios=ratios,
                non_increasing=ok,
            )
        )
    return MonotoneRatioReport(
        epsilons=tuple(e.epsilon for e in entries),
        sweep_stable=sweep.stable,
        trends=tuple(trends),
        all_non_increasing=all(t.non_increasing for t in trends),
    )


def merit_table(result: FitResult) -> dict[str, float]:
    """Team -> fitted merit, in the result's normalization."""
    return {team: float(u) for team, u in zip(result.teams, result.merits_u)}


def pct_table(dataset: Dataset) -> dict[str, float]:
    """Team -> winning percentage (w + ties/2) / games, 0.0 when no games."""
    totals = dataset.totals
    wins = totals.a.sum(axis=1)
    ties = totals.ties.sum(axis=1)
    games = totals.n.sum(axis=1)
    out = {}
    for k, team in enumerate(dataset.teams):
        out[team] = float((wins[k] + ties[k] / 2.0) / games[k]) if games[k] > 0 else 0.0
    return out


@dataclass(frozen=True)
class SeedEntry:
    seed: int
    team: str
    division: str
    value: float
    division_winner: bool


@dataclass(frozen=True)
class SeedTable:
    """Per-conference playoff seeds, best seed first."""

    conferences: tuple[tuple[str, tuple[SeedEntry, ...]], ...]

    def conference(self, name: str) -> tuple[SeedEntry, ...]:
        for conf, entries in self.conferences:
            if conf == name:
                return entries
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            conf: [
                {
                    "seed": e.seed,
                    "team": e.team,
                    "division": e.division,
                    "value": e.value,
                    "division_winner": e.division_winner,
                }
                for e in entries
            ]
            for conf, entries in self.conferences
        }


SeedValues = Union[Mapping[str, float], FitResult, Ranking]


def _as_value_map(values: SeedValues) -> Mapping[str, float]:
    if isinstance(values, FitResult):
        return merit_table(values)
    if isinstance(values, Ranking):
        # Group index works as an ordinal key; negate so better means larger.
        out: dict[str, float] = {}
        for g, group in enumerate(values.groups):
            for idx in group:
                out[values.teams[idx]] = float(-g)
        return out
    return dict(values)


def select_seeds(
    values: SeedValues,
    divisions: Mapping[str, Sequence[str]],
    conferences: Mapping[str, Sequence[str]],
    seeds_per_conference: int = 6,
    division_winners: int = 4,
) -> SeedTable:
    """Seed each conference: division winners first, then wild cards.

    ``divisions`` maps a division name to its teams, ``conferences`` maps a
    conference name to its division names, and ``values`` supplies the
    comparison key (a fit, a ranking, or any team -> number mapping, larger
    meaning better). Within each conference the best team of each division
    takes the top ``division_winners`` seeds ordered by value, and the best
    remaining teams fill the seeds up to ``seeds_per_conference``. Exact
    value ties break by team name.
    """
    table = _as_value_map(values)
    if division_winners < 1 or seeds_per_conference < division_winners:
        raise ConfigError(
            "need seeds_per_conference >= division_winners >= 1, got "
            f"{seeds_per_conference} and {division_winners}"
        )

    seen_teams: set[str] = set()
    for div, teams in divisions.items():
        if len(teams) == 0:
            raise ConfigError(f"division {div!r} has no teams")
        for team in teams:
            if team in seen_teams:
                raise ConfigError(f"team {team!r} appears in more than one division")
            seen_teams.add(team)
            if team not in table:
                raise ConfigError(f"no comparison value for team {team!r}")

    assigned: set[str] = set()
    for conf, div_names in conferences.items():
        for div in div_names:
            if div not in divisions:
                raise ConfigError(f"conference {conf!r} references unknown division {div!r}")
            if div in assigned:
                raise ConfigError(f"division {div!r} appears in more than one conference")
            assigned.add(div)
    unassigned = set(divisions) - assigned
    if unassigned:
        raise ConfigError(f"divisions not in any conference: {sorted(unassigned)}")

    def sort_key(team: str):
        return (-table[team], team)

    result = []
    for conf, div_names in conferences.items():
        if len(div_names) != division_winners:
            raise ConfigError(
                f"conference {conf!r} has {len(div_names)} divisions but "
                f"{division_winners} division-winner seeds were requested"
            )
        winners = []
        others = []
        for div in div_names:
            teams = sorted(divisions[div], key=sort_key)
            winners.append((teams[0], div))
            others.extend((team, div) for team in teams[1:])
        total = len(winners) + len(others)
        if seeds_per_conference > total:
            raise ConfigError(
                f"conference {conf!r} has {total} teams, too few for "
                f"{seeds_per_conference} seeds"
            )
        winners.sort(key=lambda pair: sort_key(pair[0]))
        others.sort(key=lambda pair: sort_key(pair[0]))
        entries = []
        for seed, (team, div) in enumerate(winners, start=1):
            entries.append(
                SeedEntry(
                    seed=seed,
                    team=team,
                    division=div,
                    value=float(table[team]),
                    division_winner=True,
                )
            )
        wild_cards = others[: seeds_per_conference - division_winners]
        for seed, (team, div) in enumerate(wild_cards, start=division_winners + 1):
            entries.append(
                SeedEntry(
                    seed=seed,
                    team=team,
                    division=div,
                    value=float(table[team]),
                    division_winner=False,
                )
            )
        result.append((conf, tuple(entries)))
    return SeedTable(conferences=tuple(result))
