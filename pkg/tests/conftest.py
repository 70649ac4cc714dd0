from __future__ import annotations

import random

import pytest

from blindvote import blindsig
from blindvote.election import ElectionConfig, Party

FIXTURE_ELECTION_ID = bytes.fromhex("00112233445566aa")


def make_config_2x3() -> ElectionConfig:
    """The canonical 2-party, 3-candidate fixture used across the suite."""
    return ElectionConfig(
        election_id=FIXTURE_ELECTION_ID,
        title="Fixture Election",
        parties=(
            Party(index=0, name="Alpha", candidates=("Anna", "Arno", "Avi")),
            Party(index=1, name="Beta", candidates=("Ben", "Bea", "Bo")),
        ),
    )


@pytest.fixture
def config2x3() -> ElectionConfig:
    return make_config_2x3()


@pytest.fixture(scope="session")
def key512() -> blindsig.BlindKeyPair:
    """Session key for scenario tests; small enough to keep the suite quick."""
    return blindsig.keygen(512, random.Random(0xB17D))


@pytest.fixture(scope="session")
def key2048() -> blindsig.BlindKeyPair:
    """Production-size key; generated once per session (it is expensive)."""
    return blindsig.keygen(2048, random.Random(0x5EED))
