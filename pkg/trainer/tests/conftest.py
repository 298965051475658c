"""Shared trainer fixtures. Training is slow, so runs are session-scoped.

The fixture corpus comes from the governor package's public generator and
is written to disk as a plain CSV - the same exchange format a real corpus
would arrive in.
"""

import pytest

from safegov.corpus import make_fixture_corpus, write_csv
from safegov_trainer import TrainConfig, run_training

# From-scratch desk-scale recipe: the architecture trains from random init
# (no pretrained checkpoint is available offline), so the learning rate is
# a from-scratch one rather than the fine-tuning default.
DESK_LR = 3e-3
DESK_MAX_LEN = 32
DESK_SEED = 42


@pytest.fixture(scope="session")
def fixture_corpus_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "fixture200.csv"
    write_csv(make_fixture_corpus(100, seed=42), path)
    return str(path)


@pytest.fixture(scope="session")
def desk_config(fixture_corpus_path):
    return TrainConfig(
        data_path=fixture_corpus_path,
        learning_rate=DESK_LR,
        epochs=2,
        max_len=DESK_MAX_LEN,
        seed=DESK_SEED,
    )


@pytest.fixture(scope="session")
def desk_run(desk_config):
    """The canonical 2-epoch desk-scale training run."""
    return run_training(desk_config)


@pytest.fixture(scope="session")
def converged_run(fixture_corpus_path):
    """A 5-epoch run that should fully separate the fixture classes."""
    return run_training(
        TrainConfig(
            data_path=fixture_corpus_path,
            learning_rate=DESK_LR,
            epochs=5,
            max_len=DESK_MAX_LEN,
            seed=DESK_SEED,
        )
    )
