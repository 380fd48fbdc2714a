import doctest
import importlib

import pytest

MODULES = ["poly_core", "map_parser", "resultants", "regularity", "dynamics", "preimage",
           "measures", "cli"]


@pytest.mark.parametrize("name", MODULES)
def test_docstring_examples(name):
    mod = importlib.import_module(f"semireg.{name}")
    result = doctest.testmod(mod, optionflags=doctest.NORMALIZE_WHITESPACE)
    assert result.failed == 0
