import os
from pathlib import Path

import pytest

from ctopsp.gen import tiny_corpus, tiny_instance

CBC = Path("/usr/local/lib/python3.10/dist-packages/pulp/solverdir/cbc/linux/i64/cbc")


def _find_cbc():
    if CBC.exists():
        return str(CBC)
    try:
        import pulp
    except ImportError:
        return None
    p = Path(pulp.__file__).parent / "solverdir" / "cbc" / "linux" / "i64" / "cbc"
    return str(p) if p.exists() else None


@pytest.fixture(scope="session")
def t1():
    return tiny_instance()


@pytest.fixture(scope="session")
def corpus():
    return tiny_corpus()


@pytest.fixture(scope="session")
def cbc_command():
    path = os.environ.get("CTOPSP_CBC") or _find_cbc()
    if not path:
        pytest.skip("no CBC binary available")
    return f"{path} {{in}} printingOptions all solve solu {{out}}"


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "ACCEPTANCE_RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
