import copy

import pytest
from hypothesis import settings

from fadas.core import config_from_dict

settings.register_profile("default", deadline=None)
settings.load_profile("default")

BASE = {
    "N": 4,
    "hyper": {
        "eta_l": 0.1, "eta": 0.01, "beta1": 0.9, "beta2": 0.99, "eps": 1e-8,
        "K": 2, "M": 2, "M_c": 3, "tau_c": 2, "T": 10,
    },
    "algorithm": "FADAS",
    "delay_profile": "MILD",
    "dataset": {"kind": "blobs", "n": 200, "d_in": 5, "C": 2, "class_separation": 4.0, "n_test": 100},
    "model": {"kind": "LOGISTIC"},
    "batch_size": 10,
    "master_seed": 3,
}


def make_cfg(**changes):
    """BASE config with top-level keys replaced and nested dicts merged."""
    data = copy.deepcopy(BASE)
    for key, value in changes.items():
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            data[key] = {**data[key], **value}
        else:
            data[key] = value
    return config_from_dict(data)


@pytest.fixture
def cfg_factory():
    return make_cfg


# --------------------------------------------------------------- acceptance log

_ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): exit criterion")


def pytest_runtest_logreport(report):
    marker = getattr(report, "acceptance", None)
    if marker is None or report.when != "call" and report.outcome != "failed":
        return
    number, title = marker
    previous = _ACCEPTANCE.get(number, (title, "PASS"))[1]
    status = "PASS" if report.outcome == "passed" and previous == "PASS" else "FAIL"
    _ACCEPTANCE[number] = (title, status)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    m = item.get_closest_marker("acceptance")
    if m is not None:
        report.acceptance = tuple(m.args)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status = _ACCEPTANCE[number]
        terminalreporter.write_line(f"[{status}] criterion {number:2d}: {title}")
