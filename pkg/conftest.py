import numpy as np
import pytest

import syncindex
from syncindex.scenario import bundled_scenario


@pytest.fixture(scope="function")
def scenario(request) -> syncindex.scenario.ScenarioConfig:
    """
    This fixture gets indirectly called by pytest_generate_tests.
    """
    if not hasattr(request, "param"):
        # Doctests get example 1.
        number = 1
    else:
        number = request.param
    return bundled_scenario(number)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


EXAMPLES = {"ex1": 1, "ex2": 2, "ex3": 3, "ex4": 4}


_param_cache = {}


def pytest_generate_tests(metafunc):
    """
    Generate parametrization for the "scenario" fixture using the test function name
    to determine which bundled examples to load.
    """
    if "scenario" in metafunc.fixturenames:
        func_name = metafunc.function.__name__.casefold()
        keywords = func_name.split("_")

        numbers = [number for keyword, number in EXAMPLES.items() if keyword in keywords]
        # Without a keyword every example is used.
        if not numbers:
            numbers = list(EXAMPLES.values())

        params = []
        for number in numbers:
            # NOTE: We have to cache our parameters so we can reuse them in order to
            # ensure scoping is correct.
            # https://github.com/pytest-dev/pytest/issues/896
            try:
                param = _param_cache[number]
            except KeyError:
                param = pytest.param(number, id=f"ex{number}")
                _param_cache[number] = param
            params.append(param)
        metafunc.parametrize("scenario", params, indirect=True)
