"""Command line frontend: check, fit, sweep, map, seeds, simulate.

Exit codes, by error family:

* 0  success
* 1  the requested estimate does not exist for the data (connectivity or
     tie preconditions fail; the witness is printed)
* 2  the input could not be parsed or read
* 3  the solver ran out of iterations without converging
* 4  invalid flags or configuration

Tables print floats with 3 decimals; JSON output keeps full precision,
sorts keys, and uses compact separators so identical results render to
identical bytes. ``--out`` accepts ``table``, ``json``, or a path ending in
``.json`` to write the JSON report to a file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .connectivity import check_condition_a, check_condition_b, check_condition_c
from .errors import (
    BtrankError,
    ConfigError,
    DimensionError,
    EmptyInputError,
    ExistenceError,
    NegativeCountError,
    NonConvergenceError,
    NonPositiveEpsilonError,
    NoTiesError,
    ParseError,
    SelfPlayError,
    ShapeError,
    ThetaDomainError,
    VenuelessDataError,
)
from .ingestion import aggregate, parse_matrix, parse_records
from .ranking import (
    extract_ranking,
    merit_table,
    monotone_ratio_check,
    pct_table,
    select_seeds,
    sweep_epsilon,
)
from .simulation import ConsistencyConfig, run_consistency
from .solver import MapPriorSpec, SolverConfig, fit, fit_map_em
from .types import (
    AUTO_EPSILON,
    ConnerGrant,
    Dataset,
    FitResult,
    Improved,
    MatrixShift,
    Model,
    ModelSpec,
    Normalization,
)

EXIT_OK = 0
EXIT_EXISTENCE = 1
EXIT_PARSE = 2
EXIT_NONCONVERGENCE = 3
EXIT_CONFIG = 4

_PARSE_ERRORS = (ParseError, SelfPlayError, ShapeError, NegativeCountError, EmptyInputError)
_EXISTENCE_ERRORS = (ExistenceError, NoTiesError, VenuelessDataError)
_CONFIG_ERRORS = (ConfigError, NonPositiveEpsilonError, ThetaDomainError, DimensionError)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _render_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def _render_table(rows: list[list[str]]) -> str:
    """Align columns on width; rows are lists of already-formatted cells."""
    if not rows:
        return ""
    widths = [0] * max(len(r) for r in rows)
    for row in rows:
        for k, cell in enumerate(row):
            widths[k] = max(widths[k], len(cell))
    lines = []
    for row in rows:
        cells = [cell.ljust(widths[k]) for k, cell in enumerate(row)]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def _emit(args, payload: dict, table: str) -> None:
    out = getattr(args, "out", "table")
    if out == "table":
        sys.stdout.write(table)
        return
    text = _render_json(payload)
    if out == "json":
        sys.stdout.write(text)
        return
    Path(out).write_text(text, encoding="utf-8")


def _out_value(value: str) -> str:
    if value in ("table", "json") or value.endswith(".json"):
        return value
    raise argparse.ArgumentTypeError(
        "expected 'table', 'json', or a path ending in .json"
    )


def _positive_int(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def _int_list(value: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in value.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value!r}")


def _float_list(value: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in value.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {value!r}")


def _default_seed() -> int:
    raw = os.environ.get("BTRANK_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"BTRANK_SEED must be an integer, got {raw!r}")


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_dataset(args) -> Dataset:
    text = _read_text(args.data)
    fmt = args.format
    if fmt is None:
        fmt = _infer_format(args.data, text)
    if fmt == "csv":
        return aggregate(parse_records(text, "csv"))
    if fmt == "records-json":
        return aggregate(parse_records(text, "json"))
    if fmt == "matrix-json":
        return parse_matrix(text)
    raise ConfigError(f"unknown format {fmt!r}")


def _infer_format(path: str, text: str) -> str:
    suffix = Path(path).suffix.lower()
    if suffix == ".csv":
        return "csv"
    if suffix == ".json":
        stripped = text.lstrip()
        if stripped.startswith("["):
            return "records-json"
        return "matrix-json"
    raise ConfigError(
        f"cannot infer format from {path!r}; pass --format "
        "{csv,records-json,matrix-json}"
    )


def _add_data_flags(sub) -> None:
    sub.add_argument("--data", required=True, help="input file")
    sub.add_argument(
        "--format",
        choices=["csv", "records-json", "matrix-json"],
        help="input format (inferred from the file when omitted)",
    )


def _add_out_flag(sub) -> None:
    sub.add_argument(
        "--out",
        type=_out_value,
        default="table",
        help="'table', 'json', or a .json path to write the report to",
    )


def _add_solver_flags(sub) -> None:
    sub.add_argument("--grad-tol", type=float, default=1e-8)
    sub.add_argument("--rel-ll-tol", type=float, default=1e-10)
    sub.add_argument("--max-iters", type=_positive_int, default=10000)
    sub.add_argument("--restarts", type=int, default=0)
    sub.add_argument("--seed", type=int, default=None, help="defaults to $BTRANK_SEED or 0")


def _add_model_flags(sub) -> None:
    sub.add_argument(
        "--model",
        choices=[m.value for m in Model],
        default=Model.BRADLEY_TERRY.value,
    )
    sub.add_argument(
        "--normalization",
        choices=[n.value for n in Normalization],
        default=Normalization.REFERENCE.value,
    )


def _solver_config(args) -> SolverConfig:
    seed = args.seed if args.seed is not None else _default_seed()
    return SolverConfig(
        grad_tol=args.grad_tol,
        rel_ll_tol=args.rel_ll_tol,
        max_iters=args.max_iters,
        restarts=args.restarts,
        seed=seed,
    )


def _perturbation(args):
    raw = args.perturbation
    if raw == "improved" or raw == "conner-grant":
        epsilon = args.epsilon if args.epsilon is not None else AUTO_EPSILON
        if isinstance(epsilon, str) and epsilon != AUTO_EPSILON:
            try:
                epsilon = float(epsilon)
            except ValueError:
                raise ConfigError(f"--epsilon must be a number or 'auto', got {epsilon!r}")
        cls = Improved if raw == "improved" else ConnerGrant
        return cls(epsilon)
    if raw.startswith("matrix:"):
        if args.epsilon is not None:
            raise ConfigError("a matrix shift takes no --epsilon")
        path = raw[len("matrix:") :]
        payload = json.loads(_read_text(path))
        if isinstance(payload, dict) and "a0" in payload:
            payload = payload["a0"]
        if not isinstance(payload, list):
            raise ParseError(f"{path}: expected an a0 matrix (list of rows)")
        return MatrixShift(np.asarray(payload, dtype=float))
    raise ConfigError(
        f"unknown perturbation {raw!r}; expected improved, conner-grant, or matrix:<file>"
    )


def _model_spec(args) -> ModelSpec:
    return ModelSpec(
        model=Model(args.model),
        perturbation=_perturbation(args),
        normalization=Normalization(args.normalization),
    )


def _witness_dict(witness, teams) -> dict | None:
    if witness is None:
        return None
    return {
        "condition": witness.condition,
        "q1": [teams[i] for i in witness.q1],
        "q2": [teams[i] for i in witness.q2],
        "detail": witness.detail,
    }


def cmd_check(args) -> int:
    dataset = _load_dataset(args)
    teams = dataset.teams
    witness_a = check_condition_a(dataset)
    witness_b = check_condition_b(dataset)
    applicable_c = not dataset.venueless
    witness_c = check_condition_c(dataset) if applicable_c else None

    required = []
    if args.require:
        for token in args.require.split(","):
            token = token.strip().lower()
            if token not in ("a", "b", "c"):
                raise ConfigError(f"--require expects letters from a,b,c, got {token!r}")
            required.append(token)
    if "c" in required and not applicable_c:
        raise ConfigError("condition c cannot be required: the data carry no venues")

    verdicts = {
        "a": {"holds": witness_a is None, "witness": _witness_dict(witness_a, teams)},
        "b": {"holds": witness_b is None, "witness": _witness_dict(witness_b, teams)},
        "c": {
            "holds": witness_c is None if applicable_c else None,
            "applicable": applicable_c,
            "witness": _witness_dict(witness_c, teams),
        },
    }
    ok = all(verdicts[name]["holds"] for name in required)
    payload = {"conditions": verdicts, "required": required, "ok": ok}

    rows = [["condition", "verdict", "note"]]
    for name, witness in (("A", witness_a), ("B", witness_b)):
        rows.append(
            [name, "pass" if witness is None else "fail",
             "" if witness is None else witness.describe(teams)]
        )
    if applicable_c:
        rows.append(
            ["C", "pass" if witness_c is None else "fail",
             "" if witness_c is None else witness_c.describe(teams)]
        )
    else:
        rows.append(["C", "n/a", "data carry no venue structure"])
    _emit(args, payload, _render_table(rows))
    return EXIT_OK if ok else EXIT_EXISTENCE


def _fit_payload(result: FitResult, ranking) -> dict:
    return {
        "model": result.model.value,
        "epsilon": result.epsilon,
        "normalization": result.normalization.value,
        "teams": list(result.teams),
        "merits": [float(u) for u in result.merits_u],
        "beta": [float(b) for b in result.beta],
        "theta_hat": result.theta_hat,
        "gamma_hat": result.gamma_hat,
        "log_likelihood": result.log_likelihood,
        "iterations": result.iterations,
        "converged": result.converged,
        "gradient_sup_norm": result.gradient_sup_norm,
        "ranking": list(ranking.team_order()),
        "ranking_description": ranking.describe(),
    }


def _fit_table(result: FitResult, ranking) -> str:
    rows = [["team", "merit", "beta", "score"]]
    for k, team in enumerate(result.teams):
        rows.append(
            [team, _fmt(result.merits_u[k]), _fmt(result.beta[k]), _fmt(result.scores[k])]
        )
    header = [
        f"model            {result.model.value}",
        f"epsilon          {'-' if result.epsilon is None else _fmt(result.epsilon)}",
        f"log-likelihood   {_fmt(result.log_likelihood)}",
        f"iterations       {result.iterations}",
        f"converged        {'yes' if result.converged else 'no'}",
    ]
    if result.theta_hat is not None:
        header.append(f"theta            {_fmt(result.theta_hat)}")
    if result.gamma_hat is not None:
        header.append(f"gamma            {_fmt(result.gamma_hat)}")
    body = _render_table(rows)
    return "\n".join(header) + "\n\n" + body + f"\nranking: {ranking.describe()}\n"


def cmd_fit(args) -> int:
    dataset = _load_dataset(args)
    spec = _model_spec(args)
    result = fit(spec, dataset, _solver_config(args)).ensure_converged()
    ranking = extract_ranking(result)
    _emit(args, _fit_payload(result, ranking), _fit_table(result, ranking))
    return EXIT_OK


def cmd_sweep(args) -> int:
    dataset = _load_dataset(args)
    if args.perturbation.startswith("matrix:"):
        raise ConfigError("a matrix shift has no epsilon to sweep")
    if not args.epsilons:
        raise ConfigError("--epsilons must list at least one value")
    base_epsilon = args.epsilons[0]
    spec = ModelSpec(
        model=Model(args.model),
        perturbation=(
            Improved(base_epsilon)
            if args.perturbation == "improved"
            else ConnerGrant(base_epsilon)
        ),
        normalization=Normalization(args.normalization),
    )
    sweep = sweep_epsilon(
        spec, dataset, args.epsilons, _solver_config(args), jobs=args.jobs
    )
    payload = {
        "model": args.model,
        "perturbation": args.perturbation,
        "epsilons": list(sweep.epsilons),
        "stable": sweep.stable,
        "kendall_distances": [list(row) for row in sweep.kendall_distances],
        "entries": [
            {
                "epsilon": entry.epsilon,
                "merits": [float(u) for u in entry.fit.merits_u],
                "ranking": list(entry.ranking.team_order()),
                "ranking_description": entry.ranking.describe(),
            }
            for entry in sweep.entries
        ],
    }
    rows = [["epsilon", "log-likelihood", "ranking"]]
    for entry in sweep.entries:
        rows.append(
            [_fmt(entry.epsilon), _fmt(entry.fit.log_likelihood), entry.ranking.describe()]
        )
    table = _render_table(rows)
    table += f"\nstable: {'yes' if sweep.stable else 'no'}\n"
    if not sweep.stable:
        table += "pairwise discordant-pair counts:\n"
        table += _render_table(
            [[str(d) for d in row] for row in sweep.kendall_distances]
        )
    if args.ratios:
        report = monotone_ratio_check(sweep)
        payload["ratio_report"] = {
            "sweep_stable": report.sweep_stable,
            "all_non_increasing": report.all_non_increasing,
            "trends": [
                {
                    "better": trend.better,
                    "worse": trend.worse,
                    "ratios": list(trend.ratios),
                    "non_increasing": trend.non_increasing,
                }
                for trend in report.trends
            ],
        }
        table += "\nmerit ratios across the grid (best-to-worst adjacent pairs):\n"
        ratio_rows = [["pair", "ratios", "non-increasing"]]
        for trend in report.trends:
            ratio_rows.append(
                [
                    f"{trend.better}/{trend.worse}",
                    " ".join(_fmt(r) for r in trend.ratios),
                    "yes" if trend.non_increasing else "no",
                ]
            )
        table += _render_table(ratio_rows)
    _emit(args, payload, table)
    return EXIT_OK


def cmd_map(args) -> int:
    dataset = _load_dataset(args)
    prior = MapPriorSpec(shape=args.shape, rate=args.rate)
    result = fit_map_em(
        dataset,
        prior,
        _solver_config(args),
        normalization=Normalization(args.normalization),
    ).ensure_converged()
    ranking = extract_ranking(result)
    payload = _fit_payload(result, ranking)
    payload["prior"] = {
        "shape": args.shape,
        "rate": args.rate if args.rate is not None else args.shape * dataset.num_teams - 1,
    }
    del payload["epsilon"]
    _emit(args, payload, _fit_table(result, ranking))
    return EXIT_OK


def cmd_seeds(args) -> int:
    dataset = _load_dataset(args)
    structure = json.loads(_read_text(args.divisions))
    if not isinstance(structure, dict) or "conferences" not in structure:
        raise ParseError(f'{args.divisions}: expected an object with a "conferences" key')
    conferences_in = structure["conferences"]
    if not isinstance(conferences_in, dict):
        raise ParseError(f'{args.divisions}: "conferences" must map names to divisions')
    divisions: dict[str, list[str]] = {}
    conferences: dict[str, list[str]] = {}
    for conf, divs in conferences_in.items():
        if not isinstance(divs, dict):
            raise ParseError(f"{args.divisions}: conference {conf!r} must map divisions to teams")
        conferences[conf] = []
        for div, teams in divs.items():
            if div in divisions:
                raise ConfigError(
                    f"division name {div!r} is used in more than one conference; "
                    "qualify the names"
                )
            if not isinstance(teams, list):
                raise ParseError(f"{args.divisions}: division {div!r} must list teams")
            divisions[div] = teams
            conferences[conf].append(div)

    if args.key == "pct":
        values = pct_table(dataset)
    else:
        spec = _model_spec(args)
        values = merit_table(fit(spec, dataset, _solver_config(args)).ensure_converged())

    table_result = select_seeds(
        values,
        divisions,
        conferences,
        seeds_per_conference=args.seeds_per_conference,
        division_winners=args.division_winners,
    )
    payload = {"key": args.key, "conferences": table_result.to_dict()}
    rows = [["conference", "seed", "team", "division", "value", "division winner"]]
    for conf, entries in table_result.conferences:
        for e in entries:
            rows.append(
                [conf, str(e.seed), e.team, e.division, _fmt(e.value),
                 "yes" if e.division_winner else "no"]
            )
    _emit(args, payload, _render_table(rows))
    return EXIT_OK


def cmd_simulate(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    config = ConsistencyConfig(
        t_grid=args.t_grid,
        replicas=args.replicas,
        n_per_pair=args.n_per_pair,
        seed=seed,
    )
    report = run_consistency(config, jobs=args.jobs)
    payload = report.to_dict()
    rows = [["t", "epsilon", "median max error", "p90 max error"]]
    for k, t in enumerate(report.t_grid):
        rows.append(
            [str(t), _fmt(report.epsilons[k]), _fmt(report.medians[k]), _fmt(report.p90[k])]
        )
    _emit(args, payload, _render_table(rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="btrank", description="Rank teams from paired comparisons.")
    parser.add_argument("--version", action="version", version=f"btrank {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    check = subs.add_parser("check", help="connectivity diagnostics", description=cmd_check.__doc__)
    _add_data_flags(check)
    _add_out_flag(check)
    check.add_argument(
        "--require",
        help="comma list from a,b,c; exit 1 unless all the listed conditions hold",
    )
    check.set_defaults(handler=cmd_check)

    fit_cmd = subs.add_parser("fit", help="fit one model")
    _add_data_flags(fit_cmd)
    _add_out_flag(fit_cmd)
    _add_model_flags(fit_cmd)
    fit_cmd.add_argument("--epsilon", default=None, help="positive number or 'auto' (default)")
    fit_cmd.add_argument(
        "--perturbation",
        default="improved",
        help="improved (default), conner-grant, or matrix:<json file>",
    )
    _add_solver_flags(fit_cmd)
    fit_cmd.set_defaults(handler=cmd_fit)

    sweep = subs.add_parser("sweep", help="refit across an epsilon grid")
    _add_data_flags(sweep)
    _add_out_flag(sweep)
    _add_model_flags(sweep)
    sweep.add_argument("--epsilons", type=_float_list, required=True)
    sweep.add_argument(
        "--perturbation", default="improved", help="improved (default) or conner-grant"
    )
    sweep.add_argument("--ratios", action="store_true", help="include the merit-ratio trend report")
    sweep.add_argument("--jobs", type=_positive_int, default=1)
    _add_solver_flags(sweep)
    sweep.set_defaults(handler=cmd_sweep)

    map_cmd = subs.add_parser("map", help="posterior mode under Gamma priors")
    _add_data_flags(map_cmd)
    _add_out_flag(map_cmd)
    map_cmd.add_argument("--shape", type=float, required=True)
    map_cmd.add_argument("--rate", type=float, default=None, help="default: shape * teams - 1")
    map_cmd.add_argument(
        "--normalization",
        choices=[n.value for n in Normalization],
        default=Normalization.SIMPLEX.value,
    )
    _add_solver_flags(map_cmd)
    map_cmd.set_defaults(handler=cmd_map)

    seeds = subs.add_parser("seeds", help="playoff seeding from divisions")
    _add_data_flags(seeds)
    _add_out_flag(seeds)
    seeds.add_argument(
        "--divisions",
        required=True,
        help='JSON file: {"conferences": {conf: {division: [teams]}}}',
    )
    seeds.add_argument("--key", choices=["merit", "pct"], default="merit")
    seeds.add_argument("--seeds-per-conference", type=_positive_int, default=6)
    seeds.add_argument("--division-winners", type=_positive_int, default=4)
    _add_model_flags(seeds)
    seeds.add_argument("--epsilon", default=None, help="positive number or 'auto' (default)")
    seeds.add_argument(
        "--perturbation",
        default="improved",
        help="improved (default), conner-grant, or matrix:<json file>",
    )
    _add_solver_flags(seeds)
    seeds.set_defaults(handler=cmd_seeds)

    simulate = subs.add_parser("simulate", help="consistency experiment")
    _add_out_flag(simulate)
    simulate.add_argument("--t-grid", type=_int_list, required=True)
    simulate.add_argument("--replicas", type=_positive_int, default=50)
    simulate.add_argument("--n-per-pair", type=_positive_int, default=4)
    simulate.add_argument("--seed", type=int, default=None)
    simulate.add_argument("--jobs", type=_positive_int, default=1)
    simulate.set_defaults(handler=cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(f"btrank: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help and --version exit directly
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except _PARSE_ERRORS as err:
        print(f"btrank: {err}", file=sys.stderr)
        return EXIT_PARSE
    except _EXISTENCE_ERRORS as err:
        print(f"btrank: {err}", file=sys.stderr)
        return EXIT_EXISTENCE
    except NonConvergenceError as err:
        print(f"btrank: {err}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except _CONFIG_ERRORS as err:
        print(f"btrank: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except json.JSONDecodeError as err:
        print(f"btrank: invalid JSON: {err}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as err:
        print(f"btrank: {err}", file=sys.stderr)
        return EXIT_PARSE


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
