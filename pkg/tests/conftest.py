import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).parent / "data"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def taxonomy():
    from hashtag_dynamics.lexicon.semantics import default_taxonomy
    return default_taxonomy()


@pytest.fixture(scope="session")
def corpus_files(tmp_path_factory):
    """The default four-class synthetic corpus, simulated once through the CLI."""
    from hashtag_dynamics.cli import main
    d = tmp_path_factory.mktemp("corpus")
    files = {k: d / name for k, name in [("tweets", "tweets.jsonl"), ("truth", "truth.json"),
                                         ("graph", "graph.csv"), ("config", "run.cfg")]}
    code = main(["simulate", "--seed", "7", "--out-tweets", str(files["tweets"]),
                 "--out-truth", str(files["truth"]), "--out-graph", str(files["graph"]),
                 "--out-config", str(files["config"])])
    assert code == 0
    return files


def _run(files, out, *extra, config=None):
    from hashtag_dynamics.cli import main
    code = main(["run", "--config", str(config or files["config"]), "--tweets", str(files["tweets"]),
                 "--graph", str(files["graph"]), "--out-dir", str(out), *extra])
    assert code == 0
    return out


@pytest.fixture(scope="session")
def pipeline_runs(corpus_files, tmp_path_factory):
    """Full runs over the shared corpus: twice with seed 7, once with truncated edges."""
    base = tmp_path_factory.mktemp("runs")
    truncated = base / "truncated.cfg"
    truncated.write_text(corpus_files["config"].read_text() + "edges = truncated\n")
    return {
        "first": _run(corpus_files, base / "first", "--seed", "7"),
        "second": _run(corpus_files, base / "second", "--seed", "7"),
        "truncated": _run(corpus_files, base / "truncated", "--seed", "3", config=truncated),
    }


@pytest.fixture(scope="session")
def corpus_run(pipeline_runs):
    return pipeline_runs["first"]


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """``check(number, ok, detail)`` prints a PASS/FAIL line, then asserts."""
    def check(number, ok, detail):
        line = f"acceptance {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
