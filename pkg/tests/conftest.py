import re

import pytest

from wild_euler import _pykernels

try:
    from wild_euler import _ckernels
except ImportError:
    _ckernels = None

BACKENDS = [pytest.param(_pykernels, id="python")]
if _ckernels is not None:
    BACKENDS.append(pytest.param(_ckernels, id="cython"))

_CRITERIA = {}


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = re.match(r"test_criterion_(\d+)", item.name)
    if m and item.module.__name__.endswith("test_acceptance"):
        key = int(m.group(1))
        doc = (item.function.__doc__ or "").strip().splitlines()
        title = doc[0] if doc else item.name
        if rep.when == "call" or (rep.when == "setup" and rep.failed):
            _CRITERIA[key] = (rep.passed, title, rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA):
        ok, title, dur = _CRITERIA[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {title}"
                                    f"  ({dur:.2f} s)")
