import pytest

from perfbayes import REPLICATION_POLICY, SmoothingConfig, fit, load_training_tables


@pytest.fixture(scope="session")
def training_tables():
    return load_training_tables()


@pytest.fixture(scope="session")
def replication_model(training_tables):
    return fit(training_tables, REPLICATION_POLICY, SmoothingConfig(0))


# -- acceptance summary: one PASS/FAIL line per criterion --------------------

_criteria: dict[int, tuple[str, list[str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for number, title in getattr(report, "criterion", ()):
        _criteria.setdefault(number, (title, []))[1].append(report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    report.criterion = [
        (m.args[0], m.args[1]) for m in item.iter_markers("criterion")
    ]


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, outcomes = _criteria[number]
        verdict = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"[{verdict}] criterion {number}: {title} ({len(outcomes)} checks)")
