import numpy as np
import pytest

from btrank.errors import ConfigError
from btrank.simulation import (
    ConsistencyConfig,
    expected_counts_dataset,
    max_relative_error,
    run_consistency,
)
from btrank.solver import SolverConfig
from btrank.types import Improved, Model, ModelSpec
from btrank.solver import fit


SMALL = ConsistencyConfig(t_grid=(4, 6), replicas=3, n_per_pair=4, seed=7)


def test_reports_are_reproducible_bit_for_bit():
    first = run_consistency(SMALL)
    second = run_consistency(SMALL)
    assert first.errors == second.errors
    assert first.medians == second.medians
    assert first.epsilons == second.epsilons


def test_threaded_run_matches_serial():
    serial = run_consistency(SMALL, jobs=1)
    threaded = run_consistency(SMALL, jobs=2)
    assert serial.errors == threaded.errors


def test_report_shape_and_serialization():
    report = run_consistency(SMALL)
    assert report.t_grid == (4, 6)
    assert len(report.errors) == 2
    assert all(len(row) == 3 for row in report.errors)
    assert all(e > 0 for row in report.errors for e in row)
    assert len(report.epsilons) == 2
    assert report.epsilons[0] > report.epsilons[1]  # shrinks as t grows
    payload = report.to_dict()
    assert payload["medians"] == list(report.medians)
    assert payload["errors"][1] == list(report.errors[1])
    assert all(m <= p for m, p in zip(report.medians, report.p90))


def test_expected_counts_recover_planted_merits_without_noise():
    # with exact expected counts and a tiny perturbation, the only error
    # left is the perturbation bias, which should be far below the noise
    # floor of a sampled replica
    merits = np.array([1.0, 1.2, 1.5, 1.8, 2.0])
    data = expected_counts_dataset(merits, n_per_pair=8)
    spec = ModelSpec(Model.BRADLEY_TERRY, Improved(1e-6))
    result = fit(spec, data, SolverConfig(rel_ll_tol=1e-14, max_iters=200_000))
    assert max_relative_error(result.merits_u, merits) < 1e-3


def test_expected_counts_validation():
    with pytest.raises(ConfigError):
        expected_counts_dataset([1.0])
    with pytest.raises(ConfigError):
        expected_counts_dataset([1.0, -2.0])
    with pytest.raises(ConfigError):
        expected_counts_dataset([[1.0, 2.0], [3.0, 4.0]])


def test_max_relative_error_is_scale_free():
    planted = np.array([1.0, 2.0, 4.0])
    assert max_relative_error(planted * 17.0, planted) == pytest.approx(0.0)
    off = planted * np.array([1.1, 1.0, 1.0])
    base = max_relative_error(off, planted)
    rescaled = max_relative_error(off * 3.0, planted / 2.0)
    assert base == pytest.approx(rescaled)
    assert base > 0.0


def test_config_validation():
    with pytest.raises(ConfigError):
        ConsistencyConfig(t_grid=())
    with pytest.raises(ConfigError):
        ConsistencyConfig(t_grid=(2,))
    with pytest.raises(ConfigError):
        ConsistencyConfig(t_grid=(4,), replicas=0)
    with pytest.raises(ConfigError):
        ConsistencyConfig(t_grid=(4,), n_per_pair=0)
    with pytest.raises(ConfigError):
        ConsistencyConfig(t_grid=(4,), merit_low=0.0)
    with pytest.raises(ConfigError):
        ConsistencyConfig(t_grid=(4,), merit_low=2.0, merit_high=1.0)


def test_replica_streams_do_not_depend_on_the_grid():
    # a replica's draw is keyed by (seed, t, replica), so adding another t
    # to the grid must not move existing results
    wide = run_consistency(ConsistencyConfig(t_grid=(4, 5), replicas=2, seed=3))
    narrow = run_consistency(ConsistencyConfig(t_grid=(4,), replicas=2, seed=3))
    assert wide.errors[0] == narrow.errors[0]
