import os
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).parent / "data"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_series(rng, max_len, d=1, min_len=1):
    return rng.normal(size=(int(rng.integers(min_len, max_len + 1)), d))


UCR_ENV = "ELASTICAVG_UCR_DIR"


def _find_split(folder: Path, name: str, split: str):
    for ext in (".txt", ".tsv", ""):
        f = folder / name / f"{name}_{split}{ext}"
        if f.exists():
            return f
    return None


def ucr_dataset(name: str):
    """(train, test, source) for a UCR dataset.

    Looks under $ELASTICAVG_UCR_DIR/<name>/ first, then tests/data/<name>/.
    Returns None when neither location holds both splits.
    """
    from elasticavg.core import load_dataset

    roots = [Path(os.environ[UCR_ENV])] if os.environ.get(UCR_ENV) else []
    roots.append(DATA)
    for root in roots:
        tr, te = _find_split(root, name, "TRAIN"), _find_split(root, name, "TEST")
        if tr and te:
            return load_dataset(tr), load_dataset(te), str(tr.parent)
    return None


def cbf_dataset():
    """UCR CBF when available, otherwise the seeded generator (10 / 300 per class)."""
    found = ucr_dataset("CBF")
    if found is not None:
        return found
    from elasticavg.core import synth_fixtures

    train = synth_fixtures("cbf", n_per_class=10, seed=0)
    test = synth_fixtures("cbf", n_per_class=300, seed=1000)
    return train, test, "generated (seed 0 / 1000)"
