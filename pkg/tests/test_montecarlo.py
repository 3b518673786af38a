import json

import numpy as np
import pytest

from lt_analyzer.degree_dist import soliton_ideal, validate
from lt_analyzer.errors import ValidationError
from lt_analyzer.montecarlo import (
    decoded_fraction_profile,
    default_jobs,
    estimate_failure,
    simulate,
    trial_seed,
)
from lt_analyzer.sampler import CodeParameters

K3 = validate([(1, 0.5), (2, 0.5)])
P3 = CodeParameters(3, 3)


def test_trivial_success():
    rep = estimate_failure(validate([(1, 1.0)]), CodeParameters(2, 2), 50, seed=1)
    assert rep.p_hat == 0.0 and rep.ci_degenerate


def test_single_trial():
    rep = estimate_failure(K3, P3, 1, seed=3)
    assert rep.p_hat in (0.0, 1.0) and rep.ci_degenerate


@pytest.mark.slow
def test_worked_example_rate():
    rep = estimate_failure(K3, P3, 100_000, seed=11)
    assert abs(rep.p_hat - 0.40625) <= 0.0047


def test_report_is_deterministic_across_jobs():
    a = estimate_failure(K3, P3, 300, seed=5, jobs=1).to_json()
    b = estimate_failure(K3, P3, 300, seed=5, jobs=3).to_json()
    assert a == b
    obj = json.loads(a)
    assert obj["failures"] <= obj["trials"] and 0 <= obj["p_hat"] <= 1


def test_trial_seeds_independent_of_split():
    s = trial_seed(9, 4)
    assert s.generate_state(2).tolist() == trial_seed(9, 4).generate_state(2).tolist()
    assert s.generate_state(2).tolist() != trial_seed(9, 5).generate_state(2).tolist()


def test_no_degree_one_never_decodes():
    prof = decoded_fraction_profile(validate([(2, 1.0)]), CodeParameters(20, 30), 20, seed=0)
    assert prof.histogram[0] == 20 and prof.mean == 0.0


def test_full_success_top_bin():
    prof = decoded_fraction_profile(validate([(1, 1.0)]), CodeParameters(10, 10), 15, seed=0)
    assert prof.histogram[-1] == 15 and prof.histogram.sum() == 15
    lines = prof.histogram_csv().splitlines()
    assert lines[0] == "bin_lo,bin_hi,count" and len(lines) == 101
    traj = prof.trajectory_csv().splitlines()
    assert traj[0] == "u,mean_X_u" and traj[1] == "10,10.0" and len(traj) == 11


def test_fixed_n_mode_runs():
    rep = estimate_failure(soliton_ideal(30), CodeParameters(30, 40), 50, seed=2, mode="fixed_n")
    assert rep.mode == "fixed_n" and rep.trials == 50


def test_simulate_pair_consistent():
    rep, prof = simulate(soliton_ideal(30), CodeParameters(30, 36), 40, seed=4)
    assert rep.failures == 40 - prof.histogram[-1]
    assert rep.decoded_fraction_mean == prof.mean


def test_errors():
    with pytest.raises(ValidationError):
        estimate_failure(K3, P3, 0, seed=1)
    with pytest.raises(ValidationError):
        estimate_failure(K3, P3, 5, seed=1, mode="other")
    with pytest.raises(ValidationError):
        estimate_failure(validate([(5, 1.0)]), CodeParameters(3, 3), 5, seed=1, mode="fixed_n")


def test_default_jobs_env(monkeypatch):
    monkeypatch.setenv("LT_ANALYZER_JOBS", "3")
    assert default_jobs() == 3
    monkeypatch.delenv("LT_ANALYZER_JOBS")
    assert default_jobs() >= 1
