from importlib import resources

import pytest

from semireg import parse_map
from semireg.regularity import analyze

BUNDLED = ("F0", "F1", "F2", "F3", "example32_f", "example32_g")


def bundled(name):
    return parse_map(resources.files("semireg").joinpath("data", name + ".map").read_text())


@pytest.fixture(scope="session")
def maps():
    return {name: bundled(name) for name in BUNDLED}


@pytest.fixture(scope="session")
def reports(maps):
    return {name: analyze(f) for name, f in maps.items()}
