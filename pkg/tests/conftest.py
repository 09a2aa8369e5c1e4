import numpy as np
import pytest

from ldmatch import BuildConfig, build_index, build_prefix_sums, generate_random_walk

_acceptance = {}


@pytest.fixture(scope="session")
def walk():
    return generate_random_walk(1024, seed=7)


@pytest.fixture(scope="session")
def walk_ps(walk):
    return build_prefix_sums(walk)


@pytest.fixture(scope="session")
def small_cfg():
    return BuildConfig(omega=32, f=8, l_min=32, l_max=128)


@pytest.fixture(scope="session")
def small_index(walk, small_cfg):
    return build_index(walk, small_cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance" in report.nodeid and name.startswith("test_ac"):
        _acceptance[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance, key=lambda s: int(s.split("_")[1][2:])):
        label = name[len("test_"):]
        terminalreporter.write_line(f"{label}: {_acceptance[name].upper()}")
