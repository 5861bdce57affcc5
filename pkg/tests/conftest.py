from contextlib import contextmanager

import pytest

from treebound import _pykernels

_CRITERIA = {}


@contextmanager
def _record(label):
    try:
        yield
    except BaseException:
        _CRITERIA[label] = "FAIL"
        raise
    _CRITERIA[label] = "PASS"


@pytest.fixture
def criterion():
    """Record an acceptance criterion's outcome for the terminal summary."""
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_CRITERIA, key=lambda s: int(s.split(".")[0])):
        terminalreporter.write_line(f"{_CRITERIA[label]}  {label}")


def _backends():
    out = [pytest.param(_pykernels, id="python")]
    try:
        from treebound import _ckernels
    except ImportError:
        out.append(pytest.param(None, id="cython",
                                marks=pytest.mark.skip("extension not built")))
    else:
        out.append(pytest.param(_ckernels, id="cython"))
    return out


@pytest.fixture(params=_backends())
def kern(request):
    return request.param
