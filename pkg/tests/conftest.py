import pytest

from hfbench.model import (
    BenchmarkManifest,
    ClassificationRecord,
    LandmarkRecord,
    MethodRuns,
    Normalization,
)


def make_records(counts, run_id="r0", task_id="EyeBags", split="test"):
    """Expand ``{group: (tp, fn, tn, fp)}`` into records, one per sample."""
    out = []
    for g, (tp, fn, tn, fp) in counts.items():
        for y, yh, n in ((1, 1, tp), (1, 0, fn), (0, 0, tn), (0, 1, fp)):
            for _ in range(n):
                out.append(ClassificationRecord(f"{g}-{len(out)}", y, yh, g, run_id, task_id, split))
    return out


@pytest.fixture
def sixteen():
    # group0: 3 TP, 1 FN, 3 TN, 1 FP; group1: 1 TP, 3 FN, 2 TN, 2 FP
    return make_records({"g0": (3, 1, 3, 1), "g1": (1, 3, 2, 2)})


@pytest.fixture
def manifest():
    return BenchmarkManifest(
        task_kind="classification",
        baseline_id="base",
        methods=(MethodRuns("base", ("b0.csv", "b1.csv", "b2.csv")), MethodRuns("afn", ("a0.csv", "a1.csv", "a2.csv"))),
        group_labels=("Male", "Female"),
    )


@pytest.fixture
def lmk_manifest():
    return BenchmarkManifest(
        task_kind="landmark",
        baseline_id="base",
        methods=(MethodRuns("base", ("b.jsonl",)), MethodRuns("regda", ("r.jsonl",))),
        group_labels=("light", "dark"),
        normalization=Normalization(kind="fixed", value=10.0),
    )


def point_record(sample_id, group, error, norm=1.0, **kw):
    """K=1 landmark record whose pixel error is exactly ``error``."""
    return LandmarkRecord(sample_id, group, pred=((error, 0.0),), gt=((0.0, 0.0),), norm_override=norm, **kw)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {text}")
