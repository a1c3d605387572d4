from pathlib import Path

import pytest

from mwassoc.config import bundled_model, load_config, load_system

FIXTURES = Path(__file__).parent / "fixtures"
KRB_MASSES = (38.9637064864, 86.909180531)


@pytest.fixture(scope="session")
def fixtures():
    return FIXTURES


@pytest.fixture(scope="session")
def krb_config():
    return load_config(bundled_model("krb_like"))


@pytest.fixture(scope="session")
def krb(krb_config):
    return load_system(krb_config)


@pytest.fixture(scope="session")
def rbcs():
    return load_system(load_config(bundled_model("rbcs_like")))


@pytest.fixture(scope="session")
def krb_microwave(krb):
    from mwassoc.scans import microwave_states

    return microwave_states(krb, "a")


# ---------------------------------------------------------------- acceptance report

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    n, title = mark.args
    entry = _CRITERIA.setdefault(n, {"title": title, "ok": True, "tests": []})
    entry["ok"] &= rep.passed
    if rep.when == "call" or rep.failed:
        entry["tests"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        e = _CRITERIA[n]
        status = "PASS" if e["ok"] else "FAIL"
        terminalreporter.write_line(f"{status} criterion {n}: {e['title']} ({len(e['tests'])} checks)")
