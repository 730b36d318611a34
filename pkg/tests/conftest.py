import numpy as np
import pytest

from phoneclass.corpus.inventory import load_inventory
from phoneclass.synthdata import make_corpus


@pytest.fixture(scope="session")
def inventory():
    return load_inventory()


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    """Small deterministic corpus shared by IO-heavy tests: 4 speakers, ~40 s."""
    root = tmp_path_factory.mktemp("tiny_corpus")
    manifest = make_corpus(
        root,
        n_speakers=4,
        utterances_per_speaker=2,
        segments_per_utterance=10,
        seed=7,
        n_unrated_speakers=1,
    )
    return manifest


def make_prediction_arrays(rng: np.random.Generator, n: int, accuracy: float, n_classes: int = 32):
    """True labels uniform over classes, predictions correct with prob accuracy."""
    true = rng.integers(0, n_classes, size=n)
    wrong = (true + 1 + rng.integers(0, n_classes - 1, size=n)) % n_classes
    correct = rng.random(n) < accuracy
    pred = np.where(correct, true, wrong)
    return true.astype(np.int64), pred.astype(np.int64)
