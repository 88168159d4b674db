import json

import numpy as np
import pytest

from mammocad.cli import build_config, main, parse_config_file
from mammocad.errors import ConfigError, PipelineStageError
from mammocad.image import GrayImage, read_pgm, write_pgm
from mammocad.phantom import generate_phantom
from mammocad.pipeline import (
    BatchError,
    PipelineConfig,
    features_csv,
    report_json,
    report_to_dict,
    run_batch,
    run_pipeline,
)

REPORT_KEYS = [
    "source",
    "image_size",
    "threshold_used",
    "region_count_pre_gate",
    "region_count_post_gate",
    "detections",
    "timings",
]


@pytest.fixture(scope="module")
def tumor_1024():
    img, truth = generate_phantom("tumor", 1, 1024)
    return img, truth


class TestRunPipeline:
    def test_tumor_phantom_defaults(self, tumor_1024):
        img, _ = tumor_1024
        report = run_pipeline(img, PipelineConfig(output_dir=None), source="tumor.pgm")
        assert report.image_size == [128, 128]
        tumors = [d for d in report.detections if d.label == "tumor"]
        assert len(tumors) == 1
        assert report.region_count_post_gate == len(report.detections)
        assert report.region_count_post_gate <= report.region_count_pre_gate
        for det in report.detections:
            assert 1 <= det.region_id <= report.region_count_pre_gate
            assert det.fit is not None
            assert det.fit.scales == list(range(1, 9))

    def test_blank_phantom_no_detections(self):
        img, _ = generate_phantom("blank", 1, 1024)
        report = run_pipeline(img, PipelineConfig(output_dir=None))
        assert report.detections == []
        assert report.region_count_post_gate == 0

    def test_stage_timings_recorded(self, tumor_1024):
        img, _ = tumor_1024
        report = run_pipeline(img, PipelineConfig(output_dir=None))
        for stage in ("downsample", "negate", "threshold", "segment", "fractal"):
            assert stage in report.timings
            assert report.timings[stage] >= 0.0

    def test_dwt_levels_zero_keeps_size(self):
        img, _ = generate_phantom("blank", 2, 128)
        cfg = PipelineConfig(dwt_levels=0, output_dir=None)
        report = run_pipeline(img, cfg)
        assert report.image_size == [128, 128]
        assert "downsample" not in report.timings

    def test_manual_threshold_recorded(self):
        img = GrayImage(np.full((16, 16), 100, np.uint8))
        cfg = PipelineConfig(dwt_levels=0, threshold=120, output_dir=None)
        report = run_pipeline(img, cfg)
        assert report.threshold_used == 120

    def test_negate_then_downsample_order(self, tumor_1024):
        img, _ = tumor_1024
        cfg = PipelineConfig(dwt_first=False, output_dir=None)
        report = run_pipeline(img, cfg)
        assert report.image_size == [128, 128]

    def test_stage_error_carries_stage_name(self):
        img = GrayImage(np.zeros((100, 100), np.uint8))  # not divisible by 8
        with pytest.raises(PipelineStageError, match="downsample"):
            run_pipeline(img, PipelineConfig(output_dir=None))

    def test_invalid_config_rejected(self):
        img = GrayImage(np.zeros((8, 8), np.uint8))
        with pytest.raises(ConfigError):
            run_pipeline(img, PipelineConfig(d_min=3.0, d_max=2.0, output_dir=None))


class TestArtifacts:
    def test_all_artifacts_emitted(self, tumor_1024, tmp_path):
        img, _ = tumor_1024
        src = tmp_path / "case.pgm"
        write_pgm(img, src)
        cfg = PipelineConfig(
            output_dir=tmp_path / "out",
            emit=("inverted", "mask", "labels", "overlay", "features", "report"),
        )
        report = run_pipeline(read_pgm(src), cfg, source=str(src))
        out = tmp_path / "out"
        for suffix in ("inverted.pgm", "mask.pgm", "labels.pgm", "overlay.pgm", "features.csv", "report.json"):
            assert (out / f"case_{suffix}").exists(), suffix
        inverted = read_pgm(out / "case_inverted.pgm")
        assert (inverted.width, inverted.height) == (128, 128)
        mask_img = read_pgm(out / "case_mask.pgm")
        assert set(np.unique(mask_img.pixels)) <= {0, 255}
        loaded = json.loads((out / "case_report.json").read_text())
        assert loaded == report_to_dict(report)

    def test_report_json_keys(self, tumor_1024):
        img, _ = tumor_1024
        report = run_pipeline(img, PipelineConfig(output_dir=None), source="x.pgm")
        payload = json.loads(report_json(report))
        assert list(payload.keys()) == REPORT_KEYS
        assert payload["source"] == "x.pgm"
        for det in payload["detections"]:
            assert list(det.keys()) == [
                "region_id",
                "features",
                "dimension",
                "label",
                "failed_rules",
                "fit",
            ]
            assert list(det["fit"].keys()) == [
                "scales",
                "areas",
                "dimension",
                "intercept",
                "residual",
            ]

    def test_detections_sorted_by_region_id(self, tumor_1024):
        img, _ = tumor_1024
        cfg = PipelineConfig(output_dir=None, d_min=2.0, d_max=3.0)
        report = run_pipeline(img, cfg)
        ids = [d["region_id"] for d in report_to_dict(report)["detections"]]
        assert ids == sorted(ids)

    def test_features_csv_header_and_rows(self, tumor_1024):
        img, _ = tumor_1024
        report = run_pipeline(img, PipelineConfig(output_dir=None))
        text = features_csv(report)
        lines = text.strip().split("\n")
        assert lines[0] == "id,area,cmp,mwg,mg,var,edv,diff,D,label"
        assert len(lines) == 1 + len(report.detections)
        first = lines[1].split(",")
        assert first[-1] in ("tumor", "normal")
        assert int(first[0]) == report.detections[0].region_id


class TestRunBatch:
    def test_empty(self):
        assert run_batch([], PipelineConfig(output_dir=None)) == []

    def test_error_isolation_preserves_order(self, tmp_path):
        good1 = tmp_path / "a.pgm"
        corrupt = tmp_path / "b.pgm"
        good2 = tmp_path / "c.pgm"
        img, _ = generate_phantom("blank", 1, 128)
        write_pgm(img, good1)
        corrupt.write_bytes(b"P5\n4 4\n255\nxx")  # truncated raster
        write_pgm(img, good2)
        cfg = PipelineConfig(dwt_levels=0, output_dir=None)
        results = run_batch([good1, corrupt, good2], cfg)
        assert len(results) == 3
        assert not isinstance(results[0], BatchError)
        assert isinstance(results[1], BatchError)
        assert not isinstance(results[2], BatchError)
        assert results[1].source == str(corrupt)

    def test_missing_file_is_error_entry(self, tmp_path):
        results = run_batch([tmp_path / "nope.pgm"], PipelineConfig(output_dir=None))
        assert isinstance(results[0], BatchError)


class TestConfigFile:
    def test_parse_values(self, tmp_path):
        cfg_file = tmp_path / "pipeline.cfg"
        cfg_file.write_text(
            "# pipeline settings\n"
            "dwt_levels = 0\n"
            "threshold = 140\n"
            "tau_merge = 12\n"
            "d_min = 2.0  # wide band\n"
            "d_max = 3.0\n"
            "min_area = 20\n"
            "emit = report\n"
            "dwt_first = false\n"
        )
        values = parse_config_file(cfg_file)
        assert values["dwt_levels"] == 0
        assert values["threshold"] == 140
        assert values["tau_merge"] == 12
        assert values["d_min"] == 2.0
        assert values["min_area"] == 20
        assert values["emit"] == ("report",)
        assert values["dwt_first"] is False

    def test_unknown_key(self, tmp_path):
        cfg_file = tmp_path / "bad.cfg"
        cfg_file.write_text("warp_speed = 9\n")
        with pytest.raises(ConfigError):
            parse_config_file(cfg_file)

    def test_bad_value(self, tmp_path):
        cfg_file = tmp_path / "bad.cfg"
        cfg_file.write_text("dwt_levels = three\n")
        with pytest.raises(ConfigError):
            parse_config_file(cfg_file)

    def test_missing_equals(self, tmp_path):
        cfg_file = tmp_path / "bad.cfg"
        cfg_file.write_text("dwt_levels\n")
        with pytest.raises(ConfigError):
            parse_config_file(cfg_file)

    def test_cli_overrides_file(self, tmp_path):
        cfg_file = tmp_path / "pipeline.cfg"
        cfg_file.write_text("tau_merge = 12\nd_min = 2.0\n")
        cfg = build_config(parse_config_file(cfg_file), {"tau_merge": 20})
        assert cfg.tau_merge == 20
        assert cfg.d_min == 2.0
        assert cfg.rule_overrides == {}

    def test_rule_keys_become_overrides(self, tmp_path):
        cfg_file = tmp_path / "pipeline.cfg"
        cfg_file.write_text("min_area = 10\nmin_compactness = 0.2\n")
        cfg = build_config(parse_config_file(cfg_file), {})
        assert cfg.rule_overrides == {"min_area": 10, "min_compactness": 0.2}


class TestCli:
    def test_phantom_then_detect(self, tmp_path, capsys):
        assert (
            main(
                [
                    "phantom",
                    "--kind",
                    "tumor",
                    "--seed",
                    "1",
                    "--size",
                    "1024",
                    "--out",
                    str(tmp_path),
                ]
            )
            == 0
        )
        image_path = tmp_path / "tumor_1.pgm"
        assert image_path.exists()
        assert (tmp_path / "tumor_1_truth.pgm").exists()

        out_dir = tmp_path / "out"
        code = main(["detect", str(image_path), "--out", str(out_dir)])
        captured = capsys.readouterr()
        assert code == 0
        assert "1 tumor" in captured.out
        assert (out_dir / "tumor_1_report.json").exists()
        assert (out_dir / "tumor_1_features.csv").exists()

    def test_detect_flags_override(self, tmp_path):
        img, _ = generate_phantom("blank", 1, 128)
        src = tmp_path / "b.pgm"
        write_pgm(img, src)
        out_dir = tmp_path / "out"
        code = main(
            [
                "detect",
                str(src),
                "--dwt-levels",
                "0",
                "--threshold",
                "250",
                "--emit",
                "report",
                "--out",
                str(out_dir),
            ]
        )
        assert code == 0
        payload = json.loads((out_dir / "b_report.json").read_text())
        assert payload["threshold_used"] == 250
        assert payload["image_size"] == [128, 128]

    def test_per_file_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.pgm"
        bad.write_text("not a pgm")
        code = main(["detect", str(bad), "--out", str(tmp_path / "out")])
        assert code == 1
        assert "ERROR" in capsys.readouterr().err

    def test_config_error_exit_code(self, tmp_path, capsys):
        cfg_file = tmp_path / "bad.cfg"
        cfg_file.write_text("no_such_key = 1\n")
        img, _ = generate_phantom("blank", 1, 128)
        src = tmp_path / "b.pgm"
        write_pgm(img, src)
        code = main(["detect", str(src), "--config", str(cfg_file)])
        assert code == 2

    def test_bad_flag_value_exits_two(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["detect", "x.pgm", "--threshold", "warm"])
        assert err.value.code == 2

    def test_config_file_drives_detection(self, tmp_path):
        img, _ = generate_phantom("tumor", 3, 1024)
        src = tmp_path / "t.pgm"
        write_pgm(img, src)
        cfg_file = tmp_path / "wide.cfg"
        cfg_file.write_text("d_min = 2.0\nd_max = 3.0\nemit = report\n")
        out_dir = tmp_path / "out"
        code = main(
            ["detect", str(src), "--config", str(cfg_file), "--out", str(out_dir)]
        )
        assert code == 0
        payload = json.loads((out_dir / "t_report.json").read_text())
        # The wide band keeps smooth regions the default band would drop.
        assert payload["region_count_post_gate"] >= 1
