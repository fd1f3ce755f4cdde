"""Shared fixtures: bundled presets and a few small hand-built models."""

import pytest

from models.bazykin import BazykinModel
from models.competition import CompetitionModel
from models.prey import CanonicalTwoPreyModel, SymmetricTwoPreyModel, TwoPreyModel
from pipeline.orchestrator import load_scenario
from utils.config_loader import read_scenario_file

CHAOTIC_PREY = dict(
    r1=1.0, K1=1.0, r2=1.0, K2=1.0, q1=10.0, q2=1.0, a1=0.02, a2=0.01,
    c1=0.5, c2=0.5, mu=1.0, m=0.1, alpha12=1.0, alpha21=1.5,
)

INVASION_PREY = dict(
    r1=1.0, K1=6.0, q1=1.5, a1=1.0, c1=1.0, r2=2.0, K2=4.0, q2=1.0, a2=1.0,
    c2=1.0, mu=1.0, m=1.0, alpha12=0.1, alpha21=0.1,
)


@pytest.fixture
def scenario():
    """Load a bundled preset by name."""
    def load(name: str):
        return load_scenario(read_scenario_file(name))
    return load


@pytest.fixture
def chaotic_prey() -> TwoPreyModel:
    return TwoPreyModel(**CHAOTIC_PREY)


@pytest.fixture
def invasion_prey() -> TwoPreyModel:
    return TwoPreyModel(**INVASION_PREY)


@pytest.fixture
def canonical() -> CanonicalTwoPreyModel:
    return CanonicalTwoPreyModel(r1=1.0, r2=3.0, K2=3.0, c1=0.5, m=0.25)


@pytest.fixture
def symmetric() -> SymmetricTwoPreyModel:
    return SymmetricTwoPreyModel(r1=1.0, r2=1.0, c1=2 / 3, m=-4 / 3)


@pytest.fixture
def competition() -> CompetitionModel:
    return CompetitionModel(
        r=3.0,
        growth={"kind": "logistic", "K": 8.0},
        q=[4.0, 2.0],
        c=[1.0, 1.2],
        mu=[3.0, 1.0],
        M=[[1.5, 0.25], [1.0, 2.0]],
    )


@pytest.fixture
def crowded_pair() -> BazykinModel:
    return BazykinModel(r=0.3, K=4.5, q=1.7, a=3.0, c=2.0, mu=0.3, m=0.98)
