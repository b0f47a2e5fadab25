import pytest

from singlink.config import RunConfig
from singlink.pipeline import AnalyzePipeline

CORPUS_FILES = ["trefoil", "mirror", "hopf", "iterated", "regular"]


def analyze(corpus, name, epsilon):
    return AnalyzePipeline(corpus / f"{name}.sing", RunConfig(epsilon=epsilon).validate()).start()


@pytest.mark.slow
@pytest.mark.parametrize("name", CORPUS_FILES)
def test_integer_invariants_do_not_depend_on_epsilon(corpus, name):
    coarse = analyze(corpus, name, 1e-2)
    fine = analyze(corpus, name, 5e-3)
    assert coarse.passed and fine.passed
    assert coarse.report.integers() == fine.report.integers()


def test_analyze_logs_a_banner(corpus, caplog):
    caplog.set_level("INFO")
    result = analyze(corpus, "regular", 1e-2)
    assert result.report.integers()["components"][0][3] == 0
    assert "START ANALYZE" in caplog.text
    assert "Analyze complete in:" in caplog.text
