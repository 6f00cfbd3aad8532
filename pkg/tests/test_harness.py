"""Experiment harness: config loading, run ledger, commands, CLI exit codes.

Pipeline cases run against the bundled demo dataset (two builtin codec
entries over small synthetic frames), so sweep -> score -> bdrate ->
plot executes end to end in a few seconds.  The demo's wAP values and
delta-rate table are deterministic, so those are asserted exactly.
"""

import json
import logging
import math
import shutil

import numpy as np
import pytest

from vcmbench.errors import ConfigError, CurveError, SweepAbortedError
from vcmbench.harness.bdreport import cmd_bdrate, collect_series
from vcmbench.harness.cli import (
    EXIT_ABORTED,
    EXIT_CONFIG,
    EXIT_ERROR,
    EXIT_IO,
    EXIT_OK,
    main,
)
from vcmbench.harness.config import load_config
from vcmbench.harness.ledger import (
    STATUS_FAILED,
    STATUS_OK,
    LedgerRow,
    RunLedger,
    read_completed_rows,
)
from vcmbench.harness.plots import cmd_plot, nice_ticks, render_figure
from vcmbench.harness.score import cmd_score, read_wap_scores
from vcmbench.harness.sweep import (
    LEDGER_FILENAME,
    RD_POINTS_FILENAME,
    cmd_sweep,
    write_rd_points,
)
from vcmbench.image_io import save_image
from vcmbench.images import from_rgb_array
from vcmbench.synthetic import build_demo_experiment, synthetic_image


def make_images(root, count=3, size=16, suffix=".png"):
    image_dir = root / "images"
    image_dir.mkdir(parents=True, exist_ok=True)
    for seed in range(count):
        save_image(synthetic_image(seed, size, size), image_dir / f"img{seed}{suffix}")
    return image_dir


def write_odd_image(image_dir, name="img3.png"):
    """A 15x15 frame the builtin codec must refuse (odd dimensions)."""
    arr = np.arange(15 * 15 * 3, dtype=np.uint32).reshape(15, 15, 3) % 256
    save_image(from_rgb_array(arr.astype(np.uint8)), image_dir / name)


def base_config(**overrides):
    cfg = {
        "dataset": {"image_dir": "images"},
        "codecs": [
            {"name": "alpha", "kind": "builtin_dct", "quality_levels": [30, 60]},
            {"name": "beta", "kind": "builtin_dct", "quality_levels": [45, 75]},
        ],
        "metrics": ["psnr", "ssim"],
        "anchor": "alpha",
        "output_dir": "out",
    }
    cfg.update(overrides)
    return cfg


def write_config(root, cfg, name="config.json"):
    path = root / name
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return path


def small_experiment(tmp_path, **overrides):
    """Three 16x16 images plus a psnr/ssim config; returns the loaded config."""
    make_images(tmp_path)
    return load_config(write_config(tmp_path, base_config(**overrides)))


@pytest.fixture(scope="module")
def demo_config(tmp_path_factory):
    """The bundled demo experiment, swept and scored once for this module."""
    root = tmp_path_factory.mktemp("demo")
    config = load_config(build_demo_experiment(root))
    cmd_sweep(config)
    cmd_score(config)
    return config


class TestLoadConfig:
    def test_happy_path_defaults(self, tmp_path):
        make_images(tmp_path)
        config = load_config(write_config(tmp_path, base_config()))
        assert config.interp == "pchip"
        assert config.rate_unit == "bpp"
        assert config.failure_budget == 0.1
        assert config.workers == 4
        assert config.gt_dir is None
        assert config.predictions_pattern is None

    def test_paths_resolve_against_config_dir(self, tmp_path):
        make_images(tmp_path)
        nested = tmp_path / "configs"
        nested.mkdir()
        cfg = base_config(dataset={"image_dir": "../images"}, output_dir="../out")
        config = load_config(write_config(nested, cfg))
        assert config.image_dir == tmp_path / "images"
        assert config.output_dir == tmp_path / "out"
        assert config.image_dir.is_absolute()

    def test_codec_lookup(self, tmp_path):
        config = small_experiment(tmp_path)
        assert config.codec("beta").quality_levels == (45, 75)
        with pytest.raises(KeyError):
            config.codec("gamma")

    def test_predictions_dir_substitution(self, tmp_path):
        make_images(tmp_path)
        cfg = base_config(
            dataset={"image_dir": "images", "gt_dir": "gt"},
            metrics=["psnr", "wap"],
            predictions_pattern="preds/{codec}/q{q}",
        )
        config = load_config(write_config(tmp_path, cfg))
        assert config.predictions_dir("alpha", 30) == tmp_path / "preds" / "alpha" / "q30"

    def test_external_metric_names(self, tmp_path):
        make_images(tmp_path)
        cfg = base_config(
            metrics=["psnr", "external:vmaf"],
            external_metrics_pattern="ext/{codec}_q{q}_{metric}.csv",
        )
        config = load_config(write_config(tmp_path, cfg))
        assert config.external_metrics == ("vmaf",)

    @pytest.mark.parametrize(
        "mutate, message",
        [
            (lambda c: c.pop("dataset"), "'dataset' must be an object"),
            (lambda c: c["dataset"].pop("image_dir"), "'dataset.image_dir' is required"),
            (lambda c: c.update(codecs=[]), "'codecs' must be a non-empty list"),
            (lambda c: c.pop("codecs"), "'codecs' must be a non-empty list"),
            (
                lambda c: c.update(codecs=c["codecs"] + [dict(c["codecs"][0])]),
                "codec names must be unique",
            ),
            (lambda c: c["codecs"][0].pop("name"), "is missing 'name'"),
            (lambda c: c["codecs"][0].update(kind="zip"), "unknown kind 'zip'"),
            (
                lambda c: c["codecs"][0].update(quality_levels=[30, 60.5]),
                "'quality_levels' must be a list of integers",
            ),
            (
                lambda c: c["codecs"][0].update(quality_levels=[True]),
                "'quality_levels' must be a list of integers",
            ),
            (lambda c: c.update(metrics=[]), "'metrics' must be a non-empty list"),
            (lambda c: c.update(metrics=["psnr", "vmaf"]), "unknown metric 'vmaf'"),
            (lambda c: c.update(metrics=["external:"]), "unknown metric 'external:'"),
            (lambda c: c.update(metrics=["psnr", "psnr"]), "metrics must be unique"),
            (lambda c: c.pop("anchor"), "'anchor' is required"),
            (lambda c: c.update(anchor="gamma"), "does not appear in codecs"),
            (lambda c: c.pop("output_dir"), "'output_dir' is required"),
            (lambda c: c.update(interp="spline"), "interp must be one of"),
            (lambda c: c.update(rate_unit="kbps"), "rate_unit must be one of"),
            (
                lambda c: c.update(failure_budget=1.5),
                "'failure_budget' must be a number in [0, 1]",
            ),
            (
                lambda c: c.update(failure_budget="half"),
                "'failure_budget' must be a number in [0, 1]",
            ),
            (lambda c: c.update(workers=0), "'workers' must be a positive integer"),
            (lambda c: c.update(workers=True), "'workers' must be a positive integer"),
            (
                lambda c: c.update(metrics=["wap"], predictions_pattern="p/{codec}/{q}"),
                "metric 'wap' requires 'dataset.gt_dir'",
            ),
            (
                lambda c: (c["dataset"].update(gt_dir="gt"), c.update(metrics=["wap"]))[0],
                "metric 'wap' requires 'predictions_pattern'",
            ),
            (
                lambda c: c.update(predictions_pattern="p/{codec}"),
                "must contain {q} exactly once",
            ),
            (
                lambda c: c.update(predictions_pattern="p/{codec}/{codec}/{q}"),
                "must contain {codec} exactly once",
            ),
            (
                lambda c: c.update(metrics=["external:vmaf"]),
                "external metrics require 'external_metrics_pattern'",
            ),
            (
                lambda c: c.update(external_metrics_pattern="e/{codec}/{q}.csv"),
                "must contain {metric} exactly once",
            ),
            (
                lambda c: c.update(output_dir="images"),
                "output_dir must be distinct from dataset image_dir",
            ),
        ],
    )
    def test_rejects_bad_config(self, tmp_path, mutate, message):
        cfg = base_config()
        mutate(cfg)
        with pytest.raises(ConfigError) as excinfo:
            load_config(write_config(tmp_path, cfg))
        assert message in str(excinfo.value)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError, match="invalid JSON"):
            load_config(path)

    def test_top_level_must_be_object(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text('["a"]', encoding="utf-8")
        with pytest.raises(ConfigError, match="top-level value must be an object"):
            load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read config"):
            load_config(tmp_path / "nope.json")

    def test_list_images_sorted_and_filtered(self, tmp_path):
        image_dir = make_images(tmp_path, count=3)
        (image_dir / "notes.txt").write_text("skip me", encoding="utf-8")
        config = load_config(write_config(tmp_path, base_config()))
        pairs = config.list_images()
        assert [image_id for image_id, _ in pairs] == ["img0", "img1", "img2"]
        assert all(path.suffix == ".png" for _, path in pairs)

    def test_list_images_missing_dir(self, tmp_path):
        config = load_config(write_config(tmp_path, base_config()))
        with pytest.raises(ConfigError, match="does not exist"):
            config.list_images()

    def test_list_images_empty_dir(self, tmp_path):
        (tmp_path / "images").mkdir()
        config = load_config(write_config(tmp_path, base_config()))
        with pytest.raises(ConfigError, match="contains no images"):
            config.list_images()

    def test_list_images_duplicate_stems(self, tmp_path):
        make_images(tmp_path, count=2)
        make_images(tmp_path, count=1, suffix=".ppm")
        config = load_config(write_config(tmp_path, base_config()))
        with pytest.raises(ConfigError, match="must be unique"):
            config.list_images()


class TestConfigHash:
    def test_stable_across_reloads(self, tmp_path):
        make_images(tmp_path)
        path = write_config(tmp_path, base_config())
        first = load_config(path)
        second = load_config(path)
        assert first.config_hash == second.config_hash
        assert len(first.config_hash) == 64
        assert set(first.config_hash) <= set("0123456789abcdef")

    def test_ignores_tuning_knobs(self, tmp_path):
        make_images(tmp_path)
        baseline = load_config(write_config(tmp_path, base_config()))
        for knob in (
            {"interp": "cubic_poly"},
            {"workers": 1},
            {"failure_budget": 0.5},
            {"output_dir": "elsewhere"},
        ):
            variant = load_config(
                write_config(tmp_path, base_config(**knob), name="variant.json")
            )
            assert variant.config_hash == baseline.config_hash, knob

    @pytest.mark.parametrize(
        "change",
        [
            {"metrics": ["psnr"]},
            {"anchor": "beta"},
            {"rate_unit": "total-bits"},
            {
                "codecs": [
                    {"name": "alpha", "kind": "builtin_dct", "quality_levels": [30, 61]},
                    {"name": "beta", "kind": "builtin_dct", "quality_levels": [45, 75]},
                ]
            },
            {"dataset": {"image_dir": "other_images"}},
        ],
    )
    def test_changes_with_experiment_identity(self, tmp_path, change):
        make_images(tmp_path)
        baseline = load_config(write_config(tmp_path, base_config()))
        variant = load_config(
            write_config(tmp_path, base_config(**change), name="variant.json")
        )
        assert variant.config_hash != baseline.config_hash


def ok_row(codec="alpha", q=30, image_id="img0", psnr=32.0, ssim=0.9, bits=4096):
    return LedgerRow(
        codec=codec,
        q=q,
        image_id=image_id,
        status=STATUS_OK,
        bits=bits,
        pixels=256,
        metrics={"psnr": psnr, "ssim": ssim},
    )


class TestRunLedger:
    def test_new_file_starts_with_header(self, tmp_path):
        path = tmp_path / "ledger.jsonl"
        RunLedger(path, "cafe01")
        lines = path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 1
        header = json.loads(lines[0])
        assert header == {"kind": "header", "schema": 1, "config_hash": "cafe01"}

    def test_append_and_resume(self, tmp_path):
        path = tmp_path / "ledger.jsonl"
        ledger = RunLedger(path, "cafe01")
        ledger.append(ok_row())
        ledger.append(ok_row(q=60, psnr=38.5))
        reopened = RunLedger(path, "cafe01")
        assert len(reopened.rows()) == 2
        row = reopened.get("alpha", 60, "img0")
        assert row is not None
        assert row.status == STATUS_OK
        assert row.metrics == {"psnr": 38.5, "ssim": 0.9}
        assert reopened.get("alpha", 99, "img0") is None

    def test_infinity_round_trips_as_string(self, tmp_path):
        path = tmp_path / "ledger.jsonl"
        ledger = RunLedger(path, "cafe01")
        ledger.append(ok_row(psnr=math.inf))
        assert '"psnr":"inf"' in path.read_text(encoding="utf-8")
        reopened = RunLedger(path, "cafe01")
        assert reopened.get("alpha", 30, "img0").metrics["psnr"] == math.inf

    def test_last_line_wins_per_key(self, tmp_path):
        path = tmp_path / "ledger.jsonl"
        ledger = RunLedger(path, "cafe01")
        ledger.append(
            LedgerRow("alpha", 30, "img0", STATUS_FAILED, error="encoder crashed")
        )
        ledger.append(ok_row())
        reopened = RunLedger(path, "cafe01")
        assert len(reopened.rows()) == 1
        assert reopened.get("alpha", 30, "img0").status == STATUS_OK

    def test_torn_trailing_line_is_dropped(self, tmp_path):
        path = tmp_path / "ledger.jsonl"
        ledger = RunLedger(path, "cafe01")
        ledger.append(ok_row())
        with open(path, "a", encoding="utf-8") as f:
            f.write('{"kind":"row","codec":"alpha","q":60,"image')
        reopened = RunLedger(path, "cafe01")
        assert len(reopened.rows()) == 1
        assert reopened.get("alpha", 60, "img0") is None

    def test_blank_lines_and_foreign_records_ignored(self, tmp_path):
        path = tmp_path / "ledger.jsonl"
        ledger = RunLedger(path, "cafe01")
        ledger.append(ok_row())
        with open(path, "a", encoding="utf-8") as f:
            f.write("\n")
            f.write('{"kind":"comment","text":"hi"}\n')
        reopened = RunLedger(path, "cafe01")
        assert len(reopened.rows()) == 1

    def test_hash_mismatch_starts_fresh(self, tmp_path):
        path = tmp_path / "ledger.jsonl"
        ledger = RunLedger(path, "cafe01")
        ledger.append(ok_row())
        reopened = RunLedger(path, "beef02")
        assert reopened.rows() == []
        lines = path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 1
        assert json.loads(lines[0])["config_hash"] == "beef02"

    def test_rows_sorted_by_key(self, tmp_path):
        ledger = RunLedger(tmp_path / "ledger.jsonl", "cafe01")
        ledger.append(ok_row(codec="beta", q=45))
        ledger.append(ok_row(codec="alpha", q=60))
        ledger.append(ok_row(codec="alpha", q=30))
        keys = [r.key for r in ledger.rows()]
        assert keys == sorted(keys)


class TestReadCompletedRows:
    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="no run ledger at"):
            read_completed_rows(tmp_path / "ledger.jsonl", "cafe01")

    def test_headerless_file(self, tmp_path):
        path = tmp_path / "ledger.jsonl"
        path.write_text(ok_row().to_json() + "\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="unreadable ledger header"):
            read_completed_rows(path, "cafe01")

    def test_unknown_schema(self, tmp_path):
        path = tmp_path / "ledger.jsonl"
        header = {"kind": "header", "schema": 99, "config_hash": "cafe01"}
        path.write_text(json.dumps(header) + "\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="unreadable ledger header"):
            read_completed_rows(path, "cafe01")

    def test_hash_mismatch(self, tmp_path):
        path = tmp_path / "ledger.jsonl"
        RunLedger(path, "cafe01")
        with pytest.raises(ConfigError, match="produced by a different config"):
            read_completed_rows(path, "beef02")

    def test_returns_only_ok_rows_sorted(self, tmp_path):
        path = tmp_path / "ledger.jsonl"
        ledger = RunLedger(path, "cafe01")
        ledger.append(ok_row(codec="beta", q=45))
        ledger.append(LedgerRow("alpha", 60, "img0", STATUS_FAILED, error="boom"))
        ledger.append(ok_row(codec="alpha", q=30))
        rows = read_completed_rows(path, "cafe01")
        assert [r.key for r in rows] == [("alpha", 30, "img0"), ("beta", 45, "img0")]
        assert all(r.status == STATUS_OK for r in rows)


class TestSweep:
    def test_full_grid(self, tmp_path):
        config = small_experiment(tmp_path, workers=2)
        ledger = cmd_sweep(config)
        # 2 codecs x 2 quality levels x 3 images
        assert len(ledger.ok_rows()) == 12
        assert (config.output_dir / LEDGER_FILENAME).is_file()
        lines = (config.output_dir / RD_POINTS_FILENAME).read_text("utf-8").splitlines()
        assert lines[0] == "codec,q,image_id,bits,bpp,psnr,ssim"
        assert len(lines) == 13

    def test_rd_points_values_match_ledger(self, tmp_path):
        config = small_experiment(tmp_path, workers=1)
        ledger = cmd_sweep(config)
        lines = (config.output_dir / RD_POINTS_FILENAME).read_text("utf-8").splitlines()
        first = ledger.ok_rows()[0]
        codec, q, image_id, bits, bpp, psnr_s, ssim_s = lines[1].split(",")
        assert (codec, int(q), image_id) == first.key
        assert int(bits) == first.bits
        assert float(bpp) == first.bits / first.pixels
        assert float(psnr_s) == first.metrics["psnr"]
        assert float(ssim_s) == first.metrics["ssim"]
        assert first.pixels == 256

    def test_resume_skips_completed_items(self, tmp_path):
        config = small_experiment(tmp_path, workers=2)
        cmd_sweep(config)
        before = (config.output_dir / LEDGER_FILENAME).read_text(encoding="utf-8")
        ledger = cmd_sweep(config)
        after = (config.output_dir / LEDGER_FILENAME).read_text(encoding="utf-8")
        assert after == before
        assert len(ledger.ok_rows()) == 12

    def test_resume_retries_failed_items(self, tmp_path):
        config = small_experiment(tmp_path, workers=1)
        ledger = cmd_sweep(config)
        ledger.append(
            LedgerRow("alpha", 30, "img0", STATUS_FAILED, error="simulated crash")
        )
        resumed = cmd_sweep(config)
        assert len(resumed.ok_rows()) == 12
        assert resumed.get("alpha", 30, "img0").status == STATUS_OK

    def test_failures_within_budget_are_recorded(self, tmp_path):
        image_dir = make_images(tmp_path)
        # grid is 16 items; the odd image fails at every (codec, q) (25%)
        write_odd_image(image_dir)
        config = load_config(
            write_config(tmp_path, base_config(workers=1, failure_budget=0.5))
        )
        ledger = cmd_sweep(config)
        failed = [r for r in ledger.rows() if r.status == STATUS_FAILED]
        assert len(ledger.ok_rows()) == 12
        assert len(failed) == 4
        assert all("even dimensions" in r.error for r in failed)
        lines = (config.output_dir / RD_POINTS_FILENAME).read_text("utf-8").splitlines()
        assert len(lines) == 13  # failed items stay out of the csv

    def test_aborts_over_failure_budget(self, tmp_path):
        image_dir = make_images(tmp_path)
        write_odd_image(image_dir)
        config = load_config(
            write_config(tmp_path, base_config(workers=1, failure_budget=0.0))
        )
        with pytest.raises(SweepAbortedError, match="over the 0% budget"):
            cmd_sweep(config)
        assert not (config.output_dir / RD_POINTS_FILENAME).exists()
        # the failure that tripped the budget is still on disk
        text = (config.output_dir / LEDGER_FILENAME).read_text(encoding="utf-8")
        assert '"status":"failed"' in text

    def test_write_rd_points_empty_ledger(self, tmp_path):
        ledger = RunLedger(tmp_path / "ledger.jsonl", "cafe01")
        csv_path = tmp_path / "rd_points.csv"
        write_rd_points(ledger, csv_path)
        assert csv_path.read_text("utf-8") == "codec,q,image_id,bits,bpp,psnr,ssim\n"


class TestScore:
    def test_demo_scores_exact(self, demo_config):
        scores, reference = read_wap_scores(
            demo_config.output_dir / "wap_scores.csv"
        )
        assert reference == 1.0
        assert len(scores) == 8
        # shrink margins 3/2/1/0 map to these wAP plateaus
        assert scores[("codec-a", 25)] == 0.04
        assert scores[("codec-a", 45)] == 0.22
        assert scores[("codec-a", 65)] == 0.64
        assert scores[("codec-a", 85)] == 1.0
        assert scores[("codec-b", 35)] == 0.04
        assert scores[("codec-b", 95)] == 1.0

    def test_wap_csv_shape(self, demo_config):
        lines = (demo_config.output_dir / "wap_scores.csv").read_text("utf-8").splitlines()
        assert lines[0] == "codec,q,wap"
        assert lines[-1] == "uncompressed,,1.000000"
        assert lines[1] == "codec-a,25,0.040000"

    def test_ap_report_files(self, demo_config):
        reports = demo_config.output_dir / "ap_reports"
        names = sorted(p.name for p in reports.iterdir())
        expected = sorted(
            [f"codec-a_q{q}.csv" for q in (25, 45, 65, 85)]
            + [f"codec-b_q{q}.csv" for q in (35, 55, 75, 95)]
            + ["uncompressed.csv"]
        )
        assert names == expected
        text = (reports / "uncompressed.csv").read_text(encoding="utf-8")
        assert text.startswith("class_id,gt_count,ap\n")
        assert text.rstrip().split("\n")[-1].startswith("wAP,,")

    def test_requires_wap_metric(self, tmp_path):
        config = small_experiment(tmp_path)  # psnr/ssim only
        with pytest.raises(ConfigError, match="metric 'wap' is not enabled"):
            cmd_score(config)

    def test_missing_gt_image(self, tmp_path):
        config = load_config(build_demo_experiment(tmp_path, num_images=2))
        (config.gt_dir / "img01.png").unlink()
        with pytest.raises(ConfigError, match="missing ground-truth label image"):
            cmd_score(config)

    def test_missing_uncompressed_dir(self, tmp_path):
        config = load_config(build_demo_experiment(tmp_path, num_images=2))
        shutil.rmtree(config.uncompressed_predictions_dir)
        with pytest.raises(ConfigError, match="does not exist"):
            cmd_score(config)

    def test_missing_prediction_dir_marks_point_absent(self, tmp_path, caplog):
        config = load_config(build_demo_experiment(tmp_path, num_images=2))
        shutil.rmtree(config.predictions_dir("codec-b", 75))
        with caplog.at_level(logging.WARNING, logger="vcmbench.score"):
            results = cmd_score(config)
        assert ("codec-b", 75) not in results
        assert len(results) == 7
        assert "point marked absent" in caplog.text
        scores, _ = read_wap_scores(config.output_dir / "wap_scores.csv")
        assert ("codec-b", 75) not in scores
        assert len(scores) == 7

    def test_no_detections_scores_zero(self, tmp_path):
        config = load_demo_without_manifests(tmp_path)
        results = cmd_score(config)
        assert results[("codec-a", 25)].wap == 0.0

    def test_read_wap_scores_rejects_foreign_header(self, tmp_path):
        path = tmp_path / "wap_scores.csv"
        path.write_text("a,b,c\n", encoding="utf-8")
        with pytest.raises(ValueError, match="expected header 'codec,q,wap'"):
            read_wap_scores(path)


def load_demo_without_manifests(tmp_path):
    """Demo config whose codec-a q25 prediction dir exists but is empty."""
    config = load_config(build_demo_experiment(tmp_path, num_images=2))
    pred_dir = config.predictions_dir("codec-a", 25)
    for manifest in pred_dir.glob("*.txt"):
        manifest.unlink()
    return config


class TestBdReport:
    def test_demo_bd_table_exact(self, demo_config):
        report = cmd_bdrate(demo_config)
        assert report.codec_order == ("codec-b",)
        text = (demo_config.output_dir / "bd_table_codec-a.csv").read_text("utf-8")
        assert text == (
            "codec,psnr,ssim,wap,best_psnr,best_ssim,best_wap\n"
            "codec-b,-0.2,-0.7,19.5,1,1,1\n"
        )

    def test_curves_csv_shape(self, demo_config):
        cmd_bdrate(demo_config)
        for metric in ("psnr", "ssim", "wap"):
            lines = (
                (demo_config.output_dir / f"curves_{metric}.csv")
                .read_text("utf-8")
                .splitlines()
            )
            assert lines[0] == f"codec,q,bpp,{metric}"
            assert lines[-1] == "# complete ledger rows: 64"
            assert len(lines) == 10  # header + 8 points + footer
            a_rows = [l for l in lines if l.startswith("codec-a,")]
            assert [row.split(",")[1] for row in a_rows] == ["25", "45", "65", "85"]
            rates = [float(row.split(",")[2]) for row in a_rows]
            assert rates == sorted(rates)

    def test_both_interp_writes_per_mode_tables(self, demo_config):
        cmd_bdrate(demo_config, both_interp=True)
        out = demo_config.output_dir
        default = (out / "bd_table_codec-a.csv").read_bytes()
        assert (out / "bd_table_codec-a_pchip.csv").read_bytes() == default
        cubic = (out / "bd_table_codec-a_cubic_poly.csv").read_bytes()
        assert cubic.splitlines()[0] == default.splitlines()[0]
        assert cubic.splitlines()[1].startswith(b"codec-b,")

    def test_requires_sweep_first(self, tmp_path):
        config = small_experiment(tmp_path)
        with pytest.raises(ConfigError, match="no run ledger"):
            cmd_bdrate(config)

    def test_requires_score_when_wap_enabled(self, tmp_path):
        config = load_config(build_demo_experiment(tmp_path, num_images=2))
        cmd_sweep(config)
        with pytest.raises(ConfigError, match="no wap_scores.csv"):
            cmd_bdrate(config)

    def test_anchor_only_config_rejected(self, tmp_path):
        make_images(tmp_path)
        cfg = base_config(
            codecs=[
                {"name": "alpha", "kind": "builtin_dct", "quality_levels": [20, 40, 60, 80]}
            ],
            metrics=["psnr"],
        )
        config = load_config(write_config(tmp_path, cfg))
        cmd_sweep(config)
        with pytest.raises(ConfigError, match="nothing to compare"):
            cmd_bdrate(config)

    def test_infinite_psnr_point_dropped(self, tmp_path, caplog):
        config = synthetic_ledger_config(tmp_path, lossless_q=90)
        with caplog.at_level(logging.WARNING, logger="vcmbench.bdreport"):
            bundle = collect_series(config)
        assert "infinite PSNR" in caplog.text
        labels = [p.label for p in bundle.series["psnr"]["alpha"]]
        assert labels == ["10", "30", "50", "70"]  # q=90 dropped
        assert len(bundle.series["psnr"]["beta"]) == 5

    def test_missing_codec_points_is_an_error(self, tmp_path):
        config = synthetic_ledger_config(tmp_path, skip_codec="beta")
        with pytest.raises(CurveError, match=r"\[codec=beta, metric=psnr\]"):
            cmd_bdrate(config)

    def test_external_metric_series(self, tmp_path, caplog):
        config = synthetic_ledger_config(
            tmp_path,
            metrics=["psnr", "external:vmaf"],
            external_metrics_pattern="ext/{codec}_q{q}_{metric}.csv",
        )
        ext_dir = tmp_path / "ext"
        ext_dir.mkdir()
        for codec in ("alpha", "beta"):
            for q in (10, 30, 50, 70, 90):
                if (codec, q) == ("beta", 90):
                    continue  # leave one file missing
                (ext_dir / f"{codec}_q{q}_vmaf.csv").write_text(
                    f"image_id,value\nimg0,{50 + q / 2}\nimg1,{52 + q / 2}\n",
                    encoding="utf-8",
                )
        with caplog.at_level(logging.WARNING, logger="vcmbench.bdreport"):
            bundle = collect_series(config)
        assert "external metric vmaf missing" in caplog.text
        assert len(bundle.series["external:vmaf"]["alpha"]) == 5
        assert len(bundle.series["external:vmaf"]["beta"]) == 4
        # per-point value is the mean over images
        assert bundle.series["external:vmaf"]["alpha"][0].quality == 56.0

        report = cmd_bdrate(config)
        assert report.metrics == ("psnr", "external:vmaf")
        curves = tmp_path / "out" / "curves_external_vmaf.csv"
        assert curves.read_text("utf-8").startswith("codec,q,bpp,external_vmaf\n")

    def test_rate_unit_total_bits(self, tmp_path):
        config = synthetic_ledger_config(tmp_path, rate_unit="total-bits")
        bundle = collect_series(config)
        point = bundle.series["psnr"]["alpha"][0]
        assert point.rate == 1384.0  # mean of per-image bit counts 1320 and 1448
        cmd_bdrate(config)
        lines = (tmp_path / "out" / "curves_psnr.csv").read_text("utf-8").splitlines()
        assert lines[0] == "codec,q,total_bits,psnr"


def synthetic_ledger_config(
    tmp_path,
    lossless_q=None,
    skip_codec=None,
    metrics=("psnr",),
    external_metrics_pattern=None,
    rate_unit="bpp",
):
    """Config plus a hand-written ledger: 2 codecs x 5 q x 2 images.

    Bits grow and psnr rises with q, so curves are clean.  ``lossless_q``
    marks that quality level infinite-psnr for codec alpha only;
    ``skip_codec`` leaves one codec entirely absent from the ledger.
    """
    make_images(tmp_path, count=2)
    cfg = base_config(
        codecs=[
            {"name": "alpha", "kind": "builtin_dct", "quality_levels": [10, 30, 50, 70, 90]},
            {"name": "beta", "kind": "builtin_dct", "quality_levels": [10, 30, 50, 70, 90]},
        ],
        metrics=list(metrics),
        rate_unit=rate_unit,
    )
    if external_metrics_pattern:
        cfg["external_metrics_pattern"] = external_metrics_pattern
    config = load_config(write_config(tmp_path, cfg))
    config.output_dir.mkdir(parents=True, exist_ok=True)
    ledger = RunLedger(config.output_dir / LEDGER_FILENAME, config.config_hash)
    for codec, rate_scale in (("alpha", 1.0), ("beta", 0.8)):
        if codec == skip_codec:
            continue
        for q in (10, 30, 50, 70, 90):
            for i, image_id in enumerate(("img0", "img1")):
                lossless = codec == "alpha" and q == lossless_q
                psnr = math.inf if lossless else 28.0 + 0.1 * q + 0.5 * i
                ledger.append(
                    LedgerRow(
                        codec=codec,
                        q=q,
                        image_id=image_id,
                        status=STATUS_OK,
                        bits=int((1000 + 32 * q) * rate_scale) + 128 * i,
                        pixels=256,
                        metrics={"psnr": psnr, "ssim": 0.9},
                    )
                )
    return config


class TestPlots:
    def test_nice_ticks_round_steps(self):
        assert nice_ticks(0.0, 10.0) == [0.0, 5.0, 10.0]
        assert nice_ticks(28.0, 42.0) == [30.0, 35.0, 40.0]
        assert nice_ticks(3.0, 3.0) == [3.0]
        ticks = nice_ticks(0.13, 9.7)
        assert ticks == sorted(ticks)
        assert all(0.13 <= t <= 9.7 for t in ticks)

    def test_demo_figures(self, demo_config):
        written = cmd_plot(demo_config)
        assert [p.name for p in written] == ["fig_psnr.svg", "fig_ssim.svg", "fig_wap.svg"]
        psnr_svg = (demo_config.output_dir / "fig_psnr.svg").read_text("utf-8")
        assert psnr_svg.startswith('<svg xmlns="http://www.w3.org/2000/svg"')
        assert psnr_svg.endswith("</svg>\n")
        assert psnr_svg.count("<polyline") == 2  # one curve per codec
        assert "psnr (dB)" in psnr_svg
        assert "rate (bpp)" in psnr_svg
        assert "stroke-dasharray" not in psnr_svg
        assert ">codec-a</text>" in psnr_svg and ">codec-b</text>" in psnr_svg

    def test_wap_figure_has_reference_line(self, demo_config):
        cmd_plot(demo_config)
        wap_svg = (demo_config.output_dir / "fig_wap.svg").read_text("utf-8")
        assert wap_svg.count("stroke-dasharray") == 1
        assert ">uncompressed</text>" in wap_svg

    def test_render_deterministic(self, demo_config):
        bundle = collect_series(demo_config)
        first = render_figure("psnr", bundle.series["psnr"], ["codec-a", "codec-b"], "bpp")
        second = render_figure("psnr", bundle.series["psnr"], ["codec-a", "codec-b"], "bpp")
        assert first == second

    def test_empty_series_rejected(self):
        with pytest.raises(ConfigError, match="nothing to plot"):
            render_figure("psnr", {}, ["alpha"], "bpp")

    def test_external_metric_figure_name_and_label(self, tmp_path):
        config = synthetic_ledger_config(
            tmp_path,
            metrics=["psnr", "external:vmaf"],
            external_metrics_pattern="ext/{codec}_q{q}_{metric}.csv",
        )
        ext_dir = tmp_path / "ext"
        ext_dir.mkdir()
        for codec in ("alpha", "beta"):
            for q in (10, 30, 50, 70, 90):
                (ext_dir / f"{codec}_q{q}_vmaf.csv").write_text(
                    f"image_id,value\nimg0,{50 + q / 2}\n", encoding="utf-8"
                )
        written = cmd_plot(config)
        names = [p.name for p in written]
        assert names == ["fig_psnr.svg", "fig_external_vmaf.svg"]
        svg = (config.output_dir / "fig_external_vmaf.svg").read_text("utf-8")
        assert ">vmaf</text>" in svg


class TestCli:
    def test_sweep_then_report_exit_codes(self, tmp_path):
        config_path = build_demo_experiment(tmp_path, num_images=2)
        assert main(["sweep", "--config", str(config_path)]) == EXIT_OK
        assert main(["score", "--config", str(config_path)]) == EXIT_OK
        assert main(["report", "--config", str(config_path)]) == EXIT_OK
        out = tmp_path / "out"
        for name in (
            "ledger.jsonl",
            "rd_points.csv",
            "wap_scores.csv",
            "bd_table_codec-a.csv",
            "curves_wap.csv",
            "fig_psnr.svg",
            "fig_ssim.svg",
            "fig_wap.svg",
            "run.log",
        ):
            assert (out / name).is_file(), name

    def test_both_interp_flag(self, tmp_path):
        config_path = build_demo_experiment(tmp_path, num_images=2)
        assert main(["sweep", "--config", str(config_path)]) == EXIT_OK
        assert main(["score", "--config", str(config_path)]) == EXIT_OK
        assert main(["bdrate", "--config", str(config_path), "--both-interp"]) == EXIT_OK
        assert (tmp_path / "out" / "bd_table_codec-a_pchip.csv").is_file()
        assert (tmp_path / "out" / "bd_table_codec-a_cubic_poly.csv").is_file()

    def test_bad_config_exits_2(self, tmp_path, capsys):
        cfg = base_config()
        cfg.pop("anchor")
        path = write_config(tmp_path, cfg)
        assert main(["sweep", "--config", str(path)]) == EXIT_CONFIG
        assert "config error:" in capsys.readouterr().err

    def test_missing_config_exits_2(self, tmp_path, capsys):
        assert main(["sweep", "--config", str(tmp_path / "nope.json")]) == EXIT_CONFIG
        assert "cannot read config" in capsys.readouterr().err

    def test_late_config_error_exits_2(self, tmp_path):
        # valid config, but bdrate before any sweep
        make_images(tmp_path)
        path = write_config(tmp_path, base_config())
        assert main(["bdrate", "--config", str(path)]) == EXIT_CONFIG

    def test_sweep_abort_exits_3(self, tmp_path):
        image_dir = make_images(tmp_path)
        write_odd_image(image_dir)
        path = write_config(tmp_path, base_config(workers=1, failure_budget=0.0))
        assert main(["sweep", "--config", str(path)]) == EXIT_ABORTED

    def test_unwritable_output_exits_4(self, tmp_path):
        make_images(tmp_path)
        blocker = tmp_path / "blocker"
        blocker.write_text("file, not a directory", encoding="utf-8")
        path = write_config(tmp_path, base_config(output_dir="blocker/out"))
        assert main(["sweep", "--config", str(path)]) == EXIT_IO

    def test_curve_error_exits_1(self, tmp_path):
        # 3 quality levels per codec: too few points for the delta-rate fit
        make_images(tmp_path)
        cfg = base_config(
            codecs=[
                {"name": "alpha", "kind": "builtin_dct", "quality_levels": [20, 50, 80]},
                {"name": "beta", "kind": "builtin_dct", "quality_levels": [20, 50, 80]},
            ],
            metrics=["psnr"],
        )
        path = write_config(tmp_path, cfg)
        assert main(["sweep", "--config", str(path)]) == EXIT_OK
        assert main(["bdrate", "--config", str(path)]) == EXIT_ERROR

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["--version"])
        assert excinfo.value.code == 0
        assert capsys.readouterr().out.startswith("vcmbench ")

    def test_command_required(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main([])
        assert excinfo.value.code == 2

    def test_run_log_written(self, tmp_path):
        config_path = build_demo_experiment(tmp_path, num_images=2)
        assert main(["sweep", "--config", str(config_path)]) == EXIT_OK
        log_text = (tmp_path / "out" / "run.log").read_text(encoding="utf-8")
        assert "sweep complete" in log_text
