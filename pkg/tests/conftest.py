import numpy as np
import pytest

from dqengine.grassmann import GeneratorRegistry, GrassmannElement


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_element(rng, reg: GeneratorRegistry, density: float = 0.6) -> GrassmannElement:
    terms = {}
    for m in range(1 << len(reg)):
        if rng.random() < density:
            terms[m] = complex(rng.normal(), rng.normal())
    return GrassmannElement(reg, terms)


def pytest_terminal_summary(terminalreporter):
    """Print the acceptance table (one PASS/FAIL line per criterion) after the run."""
    import sys

    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[number])
