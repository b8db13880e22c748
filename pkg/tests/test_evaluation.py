import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wristmatch.config import ConfigError, RunConfig
from wristmatch.evaluation import (CURVE_ORDER, CmcError, ManifestError, ManifestRecord,
                                   ProtocolError, cmc, load_image, load_manifest, make_identity,
                                   plot_cmc, run_experiment, save_image, synth_dataset, validate,
                                   write_manifest)
from wristmatch.evaluation.synth import HEIGHT, WIDTH, render
from wristmatch.pipeline import PipelineError

HEADER = "path,wrist_id,subject_id,set,flip\n"


def write(tmp_path, text, name="m.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_empty_manifest_rejected(tmp_path):
    with pytest.raises(ManifestError, match="empty"):
        load_manifest(write(tmp_path, ""))
    with pytest.raises(ManifestError, match="no records"):
        load_manifest(write(tmp_path, HEADER))


def test_single_gallery_and_probe_is_valid(tmp_path):
    m = load_manifest(write(tmp_path, HEADER + "a.png,w1,s1,gallery,0\nb.png,w1,s1,probe,1\n"))
    assert m.wrist_ids == ("w1",)
    assert len(m.gallery) == 1 and m.probes[0].flip
    assert m.resolve("a.png") == str(tmp_path / "a.png")


def test_probe_only_wrist_named(tmp_path):
    text = HEADER + "a.png,w1,s1,gallery,0\nb.png,w7,s2,probe,0\nc.png,w9,s3,probe,0\n"
    with pytest.raises(ProtocolError, match="w7, w9"):
        load_manifest(write(tmp_path, text))


def test_manifest_format_errors(tmp_path):
    with pytest.raises(ManifestError, match="header"):
        load_manifest(write(tmp_path, "file,id\nx,y\n"))
    with pytest.raises(ManifestError, match="set must be"):
        load_manifest(write(tmp_path, HEADER + "a.png,w1,s1,train,0\n"))
    with pytest.raises(ManifestError, match="flip"):
        load_manifest(write(tmp_path, HEADER + "a.png,w1,s1,gallery,maybe\n"))
    with pytest.raises(ManifestError, match="subjects"):
        load_manifest(write(tmp_path, HEADER + "a.png,w1,s1,gallery,0\nb.png,w1,s2,gallery,0\n"))


def test_manifest_round_trip(tmp_path):
    recs = (ManifestRecord("a.png", "w1", "s1", "gallery", False, "ma.png"),
            ManifestRecord("b.png", "w1", "s1", "probe", True, "mb.png"))
    write_manifest(tmp_path / "m.csv", recs)
    assert load_manifest(tmp_path / "m.csv").records == recs


def test_flip_mirrors_columns(tmp_path):
    img = np.random.default_rng(0).random((6, 9, 3))
    save_image(tmp_path / "x.png", img)
    a, b = load_image(tmp_path / "x.png"), load_image(tmp_path / "x.png", flip=True)
    assert np.array_equal(a[:, ::-1], b)


def test_cmc_all_correct_is_one():
    ids = ("a", "b", "c")
    c = cmc([(ids, "a"), (("b", "a", "c"), "b")])
    assert c.to_list() == [1.0, 1.0, 1.0]


def test_cmc_single_probe_rank_eight():
    ids = tuple("w%d" % i for i in range(12))
    c = cmc([(ids, "w7")])
    assert c.to_list() == [0.0] * 7 + [1.0] * 5


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 20), st.integers(2, 15))
def test_cmc_monotone_and_reaches_one(seed, probes, m):
    rng = np.random.default_rng(seed)
    ids = ["w%d" % i for i in range(m)]
    rows = [(tuple(rng.permutation(ids)), ids[rng.integers(m)]) for _ in range(probes)]
    v = cmc(rows).values
    assert np.all(np.diff(v) >= 0) and np.all((0 <= v) & (v <= 1))
    assert v[-1] == 1.0


def test_cmc_truth_absent():
    with pytest.raises(CmcError, match="zz"):
        cmc([(("a", "b"), "zz")])


def test_synth_difficulty_zero_identical():
    ds = synth_dataset(3, 3, difficulty=0.0, seed=5)
    for i in range(3):
        imgs = ds.images[3 * i:3 * i + 3]
        assert all(np.array_equal(imgs[0], x) for x in imgs[1:])


def test_synth_disjoint_control_points():
    ds = synth_dataset(10, 1, difficulty=0.2, seed=3)
    seen = set()
    for ident in ds.identities:
        keys = {tuple(p) for p in np.round(ident.control_points(), 6)}
        assert not keys & seen
        seen |= keys


def test_synth_deterministic_and_flipped():
    a = synth_dataset(2, 2, difficulty=0.3, seed=11)
    b = synth_dataset(2, 2, difficulty=0.3, seed=11)
    assert all(np.array_equal(x, y) for x, y in zip(a.images, b.images))
    assert [r.flip for r in a.records] == [False, False, True, True]
    assert [r.set for r in a.records] == ["gallery", "probe"] * 2
    # the stored right wrist is the mirrored canonical render
    z = synth_dataset(2, 1, difficulty=0.0, seed=11)
    canon, mask = render(z.identities[1])
    assert np.array_equal(z.images[1], np.clip(canon, 0, 1)[:, ::-1])
    assert np.array_equal(z.masks[1], mask[:, ::-1])
    with pytest.raises(ValueError):
        synth_dataset(1, 2)


def test_synth_band_spans_width():
    _, mask = render(make_identity(0, 0))
    assert mask.all(axis=1).sum() > 0.5 * HEIGHT
    assert not mask[0].any() and not mask[-1].any()


def test_config_validation(tmp_path):
    assert RunConfig().superpixels == 200 and RunConfig().trees == 300
    assert RunConfig().a == 0.2 and RunConfig().pls_k == 5 and RunConfig().tail_fraction == 0.5
    with pytest.raises(ConfigError):
        RunConfig(a=1.0)
    with pytest.raises(ConfigError):
        RunConfig(variants=("ROI#3",))
    with pytest.raises(ConfigError, match="bogus"):
        RunConfig.from_dict({"bogus": 1})
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"trees": 20, "variants": ["ROI#2", "ROI#1"]}))
    c = RunConfig.load(p)
    assert c.trees == 20 and c.variants == ("ROI#1", "ROI#2")


# difficulty-0 galleries repeat images, so PLS runs out of rank early by design
pytestmark = pytest.mark.filterwarnings("ignore:PLS rank exhausted")

SMALL = RunConfig(trees=25, jobs=1, skin_training_images=4)


@pytest.fixture(scope="module")
def resub(tmp_path_factory):
    """Resubstitution run: every gallery image is also a probe."""
    root = tmp_path_factory.mktemp("resub")
    ds = synth_dataset(4, 2, difficulty=0.0, seed=2, gallery_per_id=2)
    ds.write(root)
    recs = list(ds.records) + [ManifestRecord(r.path, r.wrist_id, r.subject_id, "probe", r.flip, "")
                               for r in ds.records]
    man = validate(recs, str(root))
    return man, run_experiment(man, SMALL)


def test_resubstitution_rank_one(resub):
    _, res = resub
    assert set(res.report["rank1"].values()) == {1.0}


def test_report_has_seven_curves(resub):
    _, res = resub
    assert list(res.report["curves"]) == list(CURVE_ORDER)
    for v in res.report["curves"].values():
        assert len(v) == 4 and v[-1] == 1.0
    p = res.report["probes"][0]
    assert set(p["top"]) == set(CURVE_ORDER) and len(p["top"]["WMM"]) == 4
    assert set(p["chosen"]) == {"RS_PLS", "RS_SVM", "WMM"}
    assert p["chosen"]["RS_PLS"] in ("RS_PLS1", "RS_PLS2")


def test_report_deterministic(resub):
    man, res = resub
    again = run_experiment(man, SMALL.replace(jobs=2))
    assert again.report_bytes() == res.report_bytes()


def test_cmc_svg_stable(resub):
    _, res = resub
    a = plot_cmc(res.report["curves"])
    assert a == plot_cmc(res.report["curves"]) and a.startswith(b"<?xml")


def test_stage_tagged_failure(tmp_path):
    ds = synth_dataset(2, 2, difficulty=0.0, seed=1)
    ds.write(tmp_path)
    # an image with no skin at all
    save_image(tmp_path / ds.records[1].path, np.tile([0.1, 0.3, 0.8], (HEIGHT, WIDTH, 1)))
    with pytest.raises(PipelineError) as ei:
        run_experiment(load_manifest(tmp_path / "manifest.csv"), SMALL)
    assert ei.value.stage == "segmentation" and ds.records[1].path in str(ei.value)


def test_missing_skin_source(tmp_path):
    ds = synth_dataset(2, 2, difficulty=0.0, seed=1)
    ds.write(tmp_path)
    man = load_manifest(tmp_path / "manifest.csv")
    bare = validate([ManifestRecord(r.path, r.wrist_id, r.subject_id, r.set, r.flip) for r in man.records],
                    man.root)
    with pytest.raises(PipelineError, match="no skin model"):
        run_experiment(bare, SMALL)
