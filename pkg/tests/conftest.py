from pathlib import Path

import pytest

from tokbench.bpe import load_bpe
from tokbench.corpus import load_corpus
from tokbench.morphology import default_resource

DATA = Path(__file__).resolve().parents[1] / "src" / "tokbench" / "data"
WORKED_SENTENCE = "Çocuklar bahçede oynayacak ve bahçede gülecek"


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def resource():
    return default_resource()


@pytest.fixture(scope="session")
def toy_model():
    return load_bpe(DATA / "toy_bpe_1000.json")


@pytest.fixture(scope="session")
def worked_model():
    return load_bpe(DATA / "worked_example_bpe.json")


@pytest.fixture(scope="session")
def mini_corpus():
    return list(load_corpus(DATA / "mini_corpus.jsonl"))


ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance line, then fail the test if the check did not hold."""

    def check(name: str, ok: bool, detail: str = "") -> None:
        ACCEPTANCE_RESULTS.append((name, bool(ok), detail))
        assert ok, f"{name}: {detail}"

    return check


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
