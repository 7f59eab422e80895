import numpy as np
import pytest
from conftest import point_record

from hfbench.exceptions import EmptyGroup, EmptyInput, FairnessError, NonFiniteValue, SingleGroup, ThresholdMismatch, ZeroNormalization
from hfbench.landmark import (
    DEFAULT_SWEEP_GRID,
    compare_landmark,
    decode_heatmaps,
    group_success_profile,
    nme,
    profile_from_nmes,
    sdr,
    threshold_sweep,
)
from hfbench.model import LandmarkRecord, Normalization
from hfbench.relative import PerformancePoint, compare_to_baseline
from hfbench.synth import generate_landmark

FIXED10 = Normalization(kind="fixed", value=10.0)


def test_nme_identity():
    r = LandmarkRecord("a", "g", pred=((1, 2), (3, 4)), gt=((1, 2), (3, 4)))
    assert nme(r, FIXED10) == 0.0


def test_nme_hand_example():
    # per-landmark errors 5 (3-4-5 triangle) and 15
    r = LandmarkRecord("a", "g", pred=((3, 4), (10, 15)), gt=((0, 0), (10, 0)))
    assert nme(r, FIXED10) == pytest.approx(1.0)


def test_nme_error_equals_norm():
    assert nme(point_record("a", "g", 7.0, norm=7.0)) == 1.0


def test_interocular_normalization():
    gt = [(0.0, 0.0)] * 46
    gt[36], gt[45] = (10.0, 50.0), (50.0, 20.0)  # 50 px apart
    pred = [(x + 5, y) for x, y in gt]
    r = LandmarkRecord("a", "g", pred=tuple(pred), gt=tuple(gt))
    assert nme(r) == pytest.approx(0.1)
    with pytest.raises(ZeroNormalization):
        nme(LandmarkRecord("a", "g", pred=tuple(pred), gt=tuple([(1.0, 1.0)] * 46)))


def test_override_wins_and_per_record_requires_it():
    r = point_record("a", "g", 4.0, norm=8.0)
    assert nme(r, FIXED10) == 0.5
    bare = LandmarkRecord("a", "g", pred=((1, 0),), gt=((0, 0),))
    with pytest.raises(ZeroNormalization):
        nme(bare, Normalization(kind="per_record"))


def test_sdr_examples():
    assert sdr([0.0, 0.0], 0.08) == 100.0
    assert sdr([0.05, 0.10, 0.07], 0.08) == pytest.approx(66.67, abs=0.005)
    assert sdr([0.08], 0.08) == 0.0
    with pytest.raises(EmptyInput):
        sdr([], 0.08)


def test_profile_weighted_overall():
    nmes = {"a": [0.01] * 8 + [0.5] * 2, "b": [0.01] * 6 + [0.5] * 4}
    p = profile_from_nmes(nmes, 0.08)
    assert p.per_group_sdr == {"a": 80.0, "b": 60.0}
    assert p.sdr_overall == 70.0
    assert p.ds == 20.0
    assert (p.mgs_group, p.m_gs_group) == ("a", "b")


def test_profile_perfect_predictions():
    recs = generate_landmark({"a": 4, "b": 4}, 68, {"a": 0.0, "b": 0.0}, seed=1)
    p = group_success_profile(recs, 0.08)
    assert (p.mgs, p.m_gs, p.ds) == (100.0, 100.0, 0.0)


def test_profile_errors():
    with pytest.raises(SingleGroup):
        profile_from_nmes({"a": [0.1]}, 0.08)
    with pytest.raises(EmptyGroup):
        profile_from_nmes({"a": [0.1], "b": []}, 0.08)


def _profile(mgs, m_gs, t=0.08):
    return profile_from_nmes(
        {"a": [0.0] * int(round(mgs * 100)) + [1.0] * (10000 - int(round(mgs * 100))),
         "b": [0.0] * int(round(m_gs * 100)) + [1.0] * (10000 - int(round(m_gs * 100)))},
        t,
    )


def test_table_ds():
    p = _profile(97.05, 93.77)
    assert p.ds == pytest.approx(3.28, abs=1e-9)


@pytest.mark.parametrize(
    "method,sigma,ddto",
    [((97.05, 93.77), 0.979, 20.43), ((93.80, 90.99), 0.961, 16.38), ((90.66, 86.17), 0.883, 10.63)],
)
def test_landmark_table_rows(method, sigma, ddto):
    c = compare_landmark(_profile(83.90, 77.93), _profile(*method))
    assert c.sigma_hf == pytest.approx(sigma, abs=0.002)
    assert c.delta_dto == pytest.approx(ddto, abs=0.02)


def test_compare_landmark_self_and_threshold_mismatch():
    b = _profile(83.90, 77.93)
    c = compare_landmark(b, b)
    assert (c.hf, c.sigma_hf, c.delta_dto) == (50.0, 0.5, 0.0)
    with pytest.raises(ThresholdMismatch):
        compare_landmark(b, _profile(83.90, 77.93, t=0.05))


@pytest.fixture
def sweep_records():
    base = generate_landmark({"light": 30, "dark": 30}, 68, {"light": 2.0, "dark": 3.0}, seed=5)
    meth = generate_landmark({"light": 30, "dark": 30}, 68, {"light": 1.8, "dark": 2.0}, seed=6)
    return base, meth


def test_sweep_entry_matches_single_threshold(sweep_records):
    base, meth = sweep_records
    s = threshold_sweep(base, {"m": meth}, DEFAULT_SWEEP_GRID)
    i = DEFAULT_SWEEP_GRID.index(0.08)
    single = compare_landmark(group_success_profile(base, 0.08), group_success_profile(meth, 0.08))
    assert s.results["m"][i] == single


def test_sweep_saturated_and_empty_ends(sweep_records):
    base, meth = sweep_records
    s = threshold_sweep(base, {"m": meth}, (1e-6, 10.0))
    low, high = s.results["m"]
    bl, bh = s.baseline_profiles
    assert (bh.mgs, bh.m_gs) == (100.0, 100.0) == (s.profiles["m"][1].mgs, s.profiles["m"][1].m_gs)
    assert high.delta_gap == bh.ds and high.delta_max == 100 - bh.mgs
    assert high.hf == 50.0
    assert s.profiles["m"][0].per_group_sdr == {"light": 0.0, "dark": 0.0}
    assert low.delta_gap == bl.ds and low.delta_max == -bl.mgs
    assert low.hf == 50.0


def test_sweep_rejects_bad_grid(sweep_records):
    base, meth = sweep_records
    with pytest.raises(FairnessError):
        threshold_sweep(base, meth, (0.05, 0.03))
    with pytest.raises(FairnessError):
        threshold_sweep(base, meth, ())


def test_noisier_group_is_worst():
    recs = generate_landmark({"A": 40, "B": 40}, 68, {"A": 1.0, "B": 3.0}, seed=11)
    norm = Normalization()
    for t in (0.03, 0.05, 0.08):
        p = group_success_profile(recs, t, norm)
        nm = {g: [nme(r, norm) for r in recs if r.group == g] for g in "AB"}
        # independent count of each group's SDR
        a, b = (100 * sum(v < t for v in nm[g]) / len(nm[g]) for g in "AB")
        assert (p.per_group_sdr["A"], p.per_group_sdr["B"]) == (a, b)
        if a != b:
            assert p.m_gs_group == "B"


def _brute_argmax(hm):
    h, w, k = hm.shape
    out = []
    for j in range(k):
        best = None
        for r in range(h):
            for c in range(w):
                if best is None or hm[r, c, j] > hm[best[1], best[0], j]:
                    best = (c, r)
        out.append(best)
    return np.array(out)


def test_decode_single_peak():
    hm = np.zeros((5, 9, 1))
    hm[3, 7, 0] = 1.0
    assert decode_heatmaps(hm).tolist() == [[7, 3]]


def test_decode_uniform_ties_to_origin():
    assert decode_heatmaps(np.ones((4, 4, 2))).tolist() == [[0, 0], [0, 0]]


def test_decode_matches_brute_force():
    rng = np.random.default_rng(0)
    hm = rng.integers(0, 4, size=(7, 5, 3)).astype(float)
    assert decode_heatmaps(hm).tolist() == _brute_argmax(hm).tolist()


def test_decode_rejects_nan():
    hm = np.zeros((2, 2, 1))
    hm[0, 0, 0] = np.nan
    with pytest.raises(NonFiniteValue):
        decode_heatmaps(hm)


def test_decode_two_landmarks():
    hm = np.zeros((6, 6, 2))
    hm[1, 4, 0] = 2.0
    hm[5, 0, 1] = 0.5
    assert decode_heatmaps(hm).tolist() == [[4, 1], [0, 5]]


def test_landmark_comparison_uses_min_max_point():
    b, m = _profile(83.90, 77.93), _profile(97.05, 93.77)
    assert compare_landmark(b, m) == compare_to_baseline(PerformancePoint(b.m_gs, b.mgs), PerformancePoint(m.m_gs, m.mgs))
