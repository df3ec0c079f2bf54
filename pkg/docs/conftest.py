"""
Adds fixtures to doctests so we can test examples presented in documentation.
"""

import numpy as np
import pytest


@pytest.fixture(autouse=True)
def add_scenario_to_doctest(doctest_namespace, scenario):
    """
    Sets the "config" variable used on example code to be the first bundled
    scenario and "np" to numpy.
    """
    doctest_namespace["config"] = scenario
    doctest_namespace["np"] = np
