import numpy as np
import pytest

from hypshadow.mapmodel import MapModel, builtin_map


@pytest.fixture(scope="session")
def det2():
    return builtin_map("det2")


@pytest.fixture(scope="session")
def det2p():
    return builtin_map("det2-perturbed")


@pytest.fixture(scope="session")
def cat():
    return builtin_map("cat")


@pytest.fixture(scope="session")
def identity():
    return MapModel(np.eye(2, dtype=int))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def perturbed_horseshoe(det2p):
    from hypshadow.horseshoe import HorseshoeParams, construct_horseshoe

    return construct_horseshoe(det2p, HorseshoeParams(delta=0.3), word_length_cap=3, workers=4)


@pytest.fixture(scope="session")
def det2_census(det2):
    from hypshadow.census import build_census

    return build_census(det2, n_max=8, grid_density=200, workers=4)


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
