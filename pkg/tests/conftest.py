import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pnr_scope.profiles import PinholeGeometry, SlitGeometry  # noqa: E402


@pytest.fixture
def slit_geometry():
    """250 um slit, 1550 nm, 23 cm to the detection plane."""
    return SlitGeometry(250e-6, 1550e-9, 0.23)


@pytest.fixture
def pinhole_geometry():
    """75 um pinhole, 1550 nm, 100 mm lens."""
    return PinholeGeometry(75e-6, 1550e-9, 0.1)


_ACCEPTANCE = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when not in ("setup", "call"):
        return
    n, title = mark.args
    if rep.failed or rep.when == "call":
        detail = getattr(item, "acceptance_detail", "")
        _ACCEPTANCE[n] = ("PASS" if rep.passed else "FAIL", title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        status, title, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"[{status}] {n:2d}. {title}" + (f"  ({detail})" if detail else ""))


@pytest.fixture
def report(request):
    """Attach a one-line measured value to the acceptance summary."""
    def note(text):
        request.node.acceptance_detail = text
    return note
