import json
import sys
import time

import pytest

from mmkgqa._backend import available_backends
from mmkgqa.embeddings import HashingEmbedder
from mmkgqa.ingestion import build

from oracles import BUNDLE, FIXTURES, FixtureWorld


@pytest.fixture(scope="session")
def bundle_build():
    return build(BUNDLE / "recipes.csv", BUNDLE / "nutrition.csv", BUNDLE / "images.tsv")


@pytest.fixture(scope="session")
def kg(bundle_build):
    return bundle_build.kg


@pytest.fixture(scope="session")
def expected():
    return json.loads((BUNDLE / "expected.json").read_text())


@pytest.fixture(scope="session")
def world():
    return FixtureWorld()


@pytest.fixture(scope="session")
def embedder():
    return HashingEmbedder()


@pytest.fixture(params=sorted(available_backends()))
def backend(request, monkeypatch):
    """Run the test once per importable kernel backend."""
    from mmkgqa import _backend

    impl = available_backends()[request.param]
    for name in ("lcs_length", "cluster_distance_sums", "linkage_extremes", "assign_labels", "greedy_select"):
        monkeypatch.setattr(_backend, name, getattr(impl, name))
    return request.param


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


_SESSION_START = []


def pytest_sessionstart(session):
    _SESSION_START.append(time.perf_counter())


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if not mod or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda l: int(l.split()[2].rstrip(":"))):
        terminalreporter.write_line(line)
    elapsed = time.perf_counter() - _SESSION_START[0]
    terminalreporter.write_line(f"suite wall time {elapsed:.1f} s (budget 60 s)")
