"""Shared fixtures. The expensive artifacts (training runs, the experiment
report) are session-scoped so the acceptance tests share one computation."""

from __future__ import annotations

import pytest
from hypothesis import settings

from ghal360 import (
    ExperimentConfig,
    MdpConfig,
    ScenarioConfig,
    TrainerConfig,
    evaluate_checkpoints,
    run_experiment,
    solve_value_iteration,
    train,
)

settings.register_profile("suite", deadline=None)
settings.load_profile("suite")

TRAIN_SEEDS = (0, 1, 2, 3, 4)
CURVE_EVAL_SEED = 100


@pytest.fixture(scope="session")
def mdp_cfg():
    return MdpConfig()


@pytest.fixture(scope="session")
def train_scenario():
    return ScenarioConfig.pattern_uniform()


@pytest.fixture(scope="session")
def oracle_table(mdp_cfg):
    return solve_value_iteration(mdp_cfg)


@pytest.fixture(scope="session")
def training_runs(mdp_cfg, train_scenario):
    """Five independent training runs, each with its checkpoint policies."""
    runs = []
    for seed in TRAIN_SEEDS:
        checkpoints: list = []
        result = train(
            TrainerConfig(),
            mdp_cfg,
            train_scenario,
            seed,
            checkpoint_sink=lambda ep, tab, acc=checkpoints: acc.append(
                (ep, tab.policy_array())
            ),
        )
        runs.append((seed, result, checkpoints))
    return runs


@pytest.fixture(scope="session")
def checkpoint_curves(training_runs, mdp_cfg, train_scenario):
    curves = []
    for _seed, _result, checkpoints in training_runs:
        episodes = [ep for ep, _ in checkpoints]
        policies = [p for _, p in checkpoints]
        curves.append(
            evaluate_checkpoints(
                policies,
                episodes,
                mdp_cfg,
                train_scenario,
                CURVE_EVAL_SEED,
                eval_episodes=400,
            )
        )
    return curves


@pytest.fixture(scope="session")
def trained_policy(training_runs):
    return training_runs[0][1].table


@pytest.fixture(scope="session")
def experiment_report(trained_policy):
    return run_experiment(ExperimentConfig(), policy=trained_policy)
