import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from stablerank.model import Dataset

settings.register_profile(
    "default",
    derandomize=True,
    max_examples=50,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

TOY_PAIRS = [
    ("t1", (0.63, 0.71)),
    ("t2", (0.83, 0.65)),
    ("t3", (0.58, 0.78)),
    ("t4", (0.70, 0.68)),
    ("t5", (0.53, 0.82)),
]

SKYLINE_PAIRS = [
    ("t1", (1.00, 0.00)),
    ("t2", (0.99, 0.99)),
    ("t3", (0.98, 0.98)),
    ("t4", (0.97, 0.97)),
    ("t5", (0.00, 1.00)),
]

# All eleven angle regions of the five-item demo dataset over [0, pi/2],
# computed from pairwise exchange angles and confirmed by a dense angle grid.
TOY_BOUNDARIES = [
    0.6202494859828215,  # t1/t3
    0.7378150601204648,  # t1/t5
    0.8760580505981935,  # t3/t4
    0.8818719385800353,  # t4/t5
    0.8960553845713443,  # t3/t5
    1.0552473193359178,  # t2/t5
    1.0912770348023004,  # t2/t3
    1.165904540509814,   # t1/t4
    1.2793395323170298,  # t1/t2
    1.3439974787410105,  # t2/t4
]


@pytest.fixture(scope="session")
def toy() -> Dataset:
    return Dataset.from_pairs(TOY_PAIRS)


@pytest.fixture(scope="session")
def skyline() -> Dataset:
    return Dataset.from_pairs(SKYLINE_PAIRS)


@pytest.fixture(scope="session")
def toy_csv(tmp_path_factory) -> str:
    path = tmp_path_factory.mktemp("data") / "toy.csv"
    lines = ["id,price_score,review_score"]
    lines += [f"{i},{a},{b}" for i, (a, b) in TOY_PAIRS]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)
