import io
import json
from dataclasses import replace

import pytest

from hfbench.exceptions import EmptyLog, ManifestError, ManifestSyntaxError, MissingColumn
from hfbench.ingest import (
    load_manifest,
    load_manifest_file,
    parse_classification_log,
    parse_landmark_log,
    write_classification_log,
    write_landmark_log,
)
from hfbench.synth import generate_landmark

HEADER = "sample_id,y_true,y_pred,group,run_id,task_id,split\n"


def test_csv_row_maps_fields(manifest):
    recs, report = parse_classification_log(HEADER + "s1,1,1,Male,r0,EyeBags,test\n", manifest)
    (r,) = recs
    assert (r.y_true, r.y_pred, r.group, r.task_id, r.split) == (1, 1, "Male", "EyeBags", "test")
    assert report.records_parsed == 1 and report.records_rejected == 0


def test_header_columns_in_any_order(manifest):
    text = "group,split,task_id,run_id,y_pred,y_true,sample_id\nFemale,val,T,r1,0,1,a\n"
    (r,) = parse_classification_log(text, manifest)[0]
    assert (r.sample_id, r.y_true, r.y_pred, r.group) == ("a", 1, 0, "Female")


def test_jsonl_score_thresholded(manifest):
    line = {"sample_id": "s", "y_true": 0, "score": 0.73, "group": "Male", "run_id": "r", "task_id": "t", "split": "test"}
    (r,) = parse_classification_log(json.dumps(line) + "\n", manifest)[0]
    assert r.y_pred == manifest.positive_label
    assert r.score == 0.73


@pytest.mark.parametrize("score,expected", [(0.5, 1), (0.4999, 0), (0.0, 0), (1.0, 1)])
def test_threshold_ties_go_positive(manifest, score, expected):
    text = "sample_id,y_true,score,group,run_id,task_id,split\n" + f"s,1,{score},Male,r,t,test\n"
    assert parse_classification_log(text, manifest)[0][0].y_pred == expected


def test_threshold_respects_positive_label(manifest):
    m = replace(manifest, positive_label=0)
    text = "sample_id,y_true,score,group,run_id,task_id,split\ns,1,0.9,Male,r,t,test\n"
    assert parse_classification_log(text, m)[0][0].y_pred == 0


def test_unknown_group_rejected_and_reported(manifest):
    text = HEADER + "s1,1,1,Male,r0,T,test\ns2,1,0,Unknown,r0,T,test\n"
    recs, report = parse_classification_log(text, manifest)
    assert len(recs) == 1
    assert report.records_rejected == 1
    assert report.first_errors[0][0] == 3
    assert report.codes() == ["UnknownGroup"]


def test_bad_rows_counted(manifest):
    text = HEADER + "s1,1,1,Male,r0,T,test\ns2,7,1,Male,r0,T,test\ns3,1,1,Male\ns1,0,0,Male,r0,T,test\n\n"
    recs, report = parse_classification_log(text, manifest)
    assert report.records_parsed == 1
    assert report.records_rejected == 3
    assert report.total == 4
    assert report.codes() == ["MalformedLine", "MalformedLine", "DuplicateSample"]


def test_error_list_is_capped(manifest):
    text = HEADER + "s0,1,1,Male,r0,T,test\n" + "".join(f"x{i},1,1,Nope,r0,T,test\n" for i in range(50))
    _, report = parse_classification_log(text, manifest)
    assert report.records_rejected == 50
    assert len(report.first_errors) == 20


def test_missing_column(manifest):
    with pytest.raises(MissingColumn):
        parse_classification_log("sample_id,y_true,group,run_id,task_id,split\ns,1,Male,r,t,test\n", manifest)


def test_empty_log(manifest):
    with pytest.raises(EmptyLog):
        parse_classification_log(HEADER, manifest)
    with pytest.raises(EmptyLog) as err:
        parse_classification_log(HEADER + "s,1,1,Ghost,r,t,test\n", manifest)
    assert err.value.report.records_rejected == 1


def test_classification_round_trip(manifest, sixteen):
    m = replace(manifest, group_labels=("g0", "g1"))
    recs = [replace(r, checkpoint=500) for r in sixteen]
    for fmt in ("csv", "jsonl"):
        back, _ = parse_classification_log(write_classification_log(recs, fmt), m)
        assert back == recs


def test_round_trip_keeps_scores(manifest):
    text = "sample_id,y_true,score,group,run_id,task_id,split\na,1,0.3,Male,r,t,test\nb,0,0.1234567891,Female,r,t,val\n"
    recs, _ = parse_classification_log(text, manifest)
    back, _ = parse_classification_log(write_classification_log(recs), manifest)
    assert back == recs


def test_chunking_does_not_matter(manifest):
    text = HEADER + "".join(f"s{i},1,{i % 2},Male,r0,T,test\n" for i in range(20))
    whole = parse_classification_log(text, manifest)[0]
    chunks = [text[i:i + 7] for i in range(0, len(text), 7)]
    assert parse_classification_log(iter(chunks), manifest)[0] == whole
    assert parse_classification_log(io.StringIO(text), manifest)[0] == whole


def _lmk_line(k_pred, k_gt, group="light", sid="a", **extra):
    d = {"sample_id": sid, "group": group, "pred": [[1.0, 2.0]] * k_pred, "gt": [[1.0, 2.5]] * k_gt,
         "run_id": "r0", "split": "test"}
    d.update(extra)
    return json.dumps(d) + "\n"


def test_landmark_68_points(lmk_manifest):
    (r,), _ = parse_landmark_log(_lmk_line(68, 68), lmk_manifest)
    assert r.k == 68


def test_landmark_pred_gt_mismatch(lmk_manifest):
    text = _lmk_line(68, 68) + _lmk_line(68, 67, sid="b")
    recs, report = parse_landmark_log(text, lmk_manifest)
    assert len(recs) == 1 and report.codes() == ["KMismatch"]


def test_landmark_k_changes_across_file(lmk_manifest):
    text = _lmk_line(68, 68) + _lmk_line(5, 5, sid="b")
    recs, report = parse_landmark_log(text, lmk_manifest)
    assert report.first_errors[0][0] == 2
    assert report.codes() == ["KMismatch"]


def test_landmark_nonfinite_and_unknown_group(lmk_manifest):
    bad = '{"sample_id": "b", "group": "light", "pred": [[NaN, 1]], "gt": [[0, 0]], "run_id": "r0", "split": "test"}\n'
    text = _lmk_line(1, 1) + bad + _lmk_line(1, 1, group="green", sid="c")
    _, report = parse_landmark_log(text, lmk_manifest)
    assert report.codes() == ["NonFiniteCoordinate", "UnknownGroup"]


def test_landmark_round_trip(lmk_manifest):
    recs = generate_landmark({"light": 3, "dark": 2}, 5, {"light": 1.0, "dark": 2.0}, seed=3, norm=12.5)
    back, _ = parse_landmark_log(write_landmark_log(recs), lmk_manifest)
    assert back == recs


MINIMAL = {
    "task_kind": "classification",
    "baseline_id": "b",
    "methods": [{"method_id": "b", "runs": ["b.csv"]}],
    "group_labels": ["Male", "Female"],
}


def test_manifest_defaults():
    m = load_manifest(json.dumps(MINIMAL))
    assert m.score_threshold == 0.5
    assert m.sdr_threshold == 0.08
    assert m.positive_label == 1
    assert m.normalization.indices == (36, 45)


def test_truncated_manifest():
    with pytest.raises(ManifestSyntaxError) as err:
        load_manifest(json.dumps(MINIMAL)[:-10])
    assert err.value.lineno == 1


def test_manifest_validation_runs_on_load():
    with pytest.raises(ManifestError):
        load_manifest(json.dumps({**MINIMAL, "baseline_id": "zzz"}))


def test_manifest_file_resolves_runs(tmp_path):
    (tmp_path / "m.json").write_text(json.dumps(MINIMAL))
    m = load_manifest_file(tmp_path / "m.json")
    assert m.methods[0].runs == (str(tmp_path / "b.csv"),)
