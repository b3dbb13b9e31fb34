import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pseudophi import pseudodb  # noqa: E402
from pseudophi.fillmask import StubFillMaskServer  # noqa: E402

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def sample_db():
    return pseudodb.load_sample()


@pytest.fixture(scope="session")
def masked_fixture():
    lines = (DATA / "masked_500.txt").read_text(encoding="utf-8").split("\n")[:-1]
    manifest = json.loads((DATA / "masked_500.manifest.json").read_text(encoding="utf-8"))
    return lines, manifest["entries"]


@pytest.fixture
def stub():
    with StubFillMaskServer() as server:
        yield server


# --- acceptance summary: one PASS/FAIL line per criterion ---

_CRITERIA: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or not (rep.when == "call" or rep.failed):
        return
    number, title = mark.args
    ok = rep.passed and rep.when == "call"
    details = [v for k, v in item.user_properties if k == "detail"]
    prev = _CRITERIA.get(number)
    if prev is not None:
        ok = ok and prev[1]
        details = prev[2] + details
    _CRITERIA[number] = (title, ok, details)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok, details = _CRITERIA[number]
        extra = f"  [{'; '.join(details)}]" if details else ""
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {number:2d}  {title}{extra}")
