"""Smoke tests for the python bindings and the CLI binary.

The compiled module must be importable (ctest sets PYTHONPATH to the build
tree); CLI tests additionally need SPRAYSIM_CLI pointing at the binary.
"""

import json
import math
import os
import subprocess
import sys

import pytest

spraysim = pytest.importorskip("spraysim")

CLI = os.environ.get("SPRAYSIM_CLI")
needs_cli = pytest.mark.skipif(not CLI, reason="SPRAYSIM_CLI not set")


def fast_config():
    cfg = spraysim.default_config()
    cfg.plume.droplet_rate_per_l = 5e4
    cfg.calibration.exposure_s = 5.0
    return cfg


def write_fast_config(path):
    path.write_text(
        json.dumps(
            {
                "plume": {"droplet_rate_per_l": 5e4},
                "calibration": {"exposure_s": 5.0},
            }
        )
    )
    return str(path)


def run_cli(*args, **kwargs):
    return subprocess.run(
        [CLI, *args], capture_output=True, text=True, timeout=300, **kwargs
    )


class TestControlLaws:
    def test_variable_rate_unit_convention(self):
        cfg = spraysim.ControllerConfig()
        f = spraysim.ZoneFeatures()
        f.a_p, f.d_c = 0.8, 1.3
        assert spraysim.variable_rate(f, cfg).duty == pytest.approx(83.2, abs=1e-9)
        f.a_p, f.d_c = 1.0, 1.6
        assert spraysim.variable_rate(f, cfg).duty == 100.0
        f.a_p, f.d_c = 0.5, 0.8
        assert spraysim.variable_rate(f, cfg).duty == 75.0

    def test_on_off_threshold(self):
        cfg = spraysim.ControllerConfig()
        f = spraysim.ZoneFeatures()
        expected = {0.0: 0.0, 0.05: 0.0, 0.10: 0.0, 0.11: 100.0, 0.5: 100.0, 1.0: 100.0}
        for a_p, duty in expected.items():
            f.a_p, f.d_c = a_p, 1.2
            assert spraysim.on_off(f, cfg).duty == duty

    def test_bad_mode_string(self):
        with pytest.raises(ValueError):
            spraysim.control_mode_from_string("bogus")


class TestPerception:
    def test_gate_and_features(self):
        seg = spraysim.SegmentedFrame(8, 4, spraysim.SegClass.Tree)
        depth = spraysim.DepthFrame(8, 4, 1.2)
        for y in range(4):
            depth.set(7, y, 3.0)  # background column, beyond the gate
        feats = spraysim.frame_features(seg, depth, 0.5, 2)
        assert feats[0].a_p == 1.0
        assert feats[0].d_c == pytest.approx(1.2, abs=1e-6)
        assert feats[1].a_p == pytest.approx(0.75)

    def test_mask_roundtrip(self, tmp_path):
        frame = spraysim.SegmentedFrame(6, 3, spraysim.SegClass.Ground)
        frame.set(2, 1, spraysim.SegClass.Fruit)
        path = str(tmp_path / "frame.sm1")
        spraysim.save_mask(frame, path)
        loaded = spraysim.load_mask(path)
        assert loaded.width == 6 and loaded.height == 3
        assert loaded.at(2, 1) == spraysim.SegClass.Fruit
        assert bytes(loaded.classes) == bytes(frame.classes)

    def test_partition(self):
        zones = spraysim.partition_zones(1280, 256)
        assert [z.x0 for z in zones] == [0, 320, 640, 960]


class TestValveAndPlume:
    def test_flow_reference_value(self):
        params = spraysim.ValveParams()
        state = spraysim.PlungerState(1.0, 0.0)
        assert spraysim.nozzle_flow(state, params) == pytest.approx(
            0.6e-5 * math.sqrt(600.0), rel=1e-12
        )

    def test_plume_anchors(self):
        model = spraysim.PlumeModel()
        assert spraysim.plume_reach(75.0, model) == pytest.approx(0.9)
        assert spraysim.plume_reach(100.0, model) == 1.6
        assert spraysim.plume_reach(87.5, model) == pytest.approx(1.25)

    def test_adhesion_checkerboard(self):
        paper = spraysim.WaterSensitivePaper(0, 0.9, 0.0, 0.0, "t", 4, 4)
        paper.stained = [(r + c) % 2 for r in range(4) for c in range(4)]
        assert spraysim.adhesion_rate(paper) == 50.0

    def test_integrate_volume_additivity(self):
        samples = spraysim.integrate_volume(
            [[100.0, 80.0]] * 50, 0.01, spraysim.ValveParams(), spraysim.PwmMode.Averaged
        )
        by_step = samples[-2:]
        assert by_step[0].q_total == pytest.approx(
            by_step[0].q_n + by_step[1].q_n, rel=1e-12
        )


class TestHarness:
    def test_trials_are_reproducible(self):
        cfg = fast_config()
        scenario = spraysim.builtin_naju_default()
        a = spraysim.run_trial(scenario, spraysim.ControlMode.VariableFlow, cfg, 7)
        b = spraysim.run_trial(scenario, spraysim.ControlMode.VariableFlow, cfg, 7)
        assert [p.rp for p in a.papers] == [p.rp for p in b.papers]
        assert a.volume_l == b.volume_l

    def test_mode_ordering_on_small_scenario(self):
        cfg = fast_config()
        spec = spraysim.GeneratorSpec()
        zones = [
            spraysim.ScenarioZone("t1", spraysim.ZoneTag.Target, 4.25),
            spraysim.ScenarioZone("nt1", spraysim.ZoneTag.NoTarget, 8.5 / 3.0),
            spraysim.ScenarioZone("t2", spraysim.ZoneTag.Target, 4.25),
        ]
        scenario = spraysim.generate_scenario(spec, zones, 0.5, 3, "small")
        report = spraysim.compare_controls(scenario, [1], cfg)
        vols = {m.mode: m.volume_l for m in report.modes}
        assert (
            vols[spraysim.ControlMode.VariableFlow]
            < vols[spraysim.ControlMode.OnOff]
            < vols[spraysim.ControlMode.AllOpen]
        )
        assert report.self_consistent()

    def test_scenario_validation_error(self):
        spec = spraysim.GeneratorSpec()
        spec.canopy_density_min = 0.05  # at or below the gate threshold
        with pytest.raises(ValueError):
            spraysim.generate_scenario(
                spec, [spraysim.ScenarioZone("t", spraysim.ZoneTag.Target, 5.0)], 0.5, 1, "bad"
            )


@needs_cli
class TestCli:
    def test_show_config_is_json(self):
        proc = run_cli("show-config")
        assert proc.returncode == 0
        cfg = json.loads(proc.stdout)
        assert cfg["controller"]["k_p"] == 0.8
        assert cfg["controller"]["thres_nozzle"] == 0.1

    def test_bad_mode_exits_1(self, tmp_path):
        proc = run_cli("run", "--mode", "bogus", "--out", str(tmp_path))
        assert proc.returncode == 1
        assert "valid" in proc.stderr

    def test_missing_scenario_exits_2(self, tmp_path):
        proc = run_cli("run", "--scenario", "missing.json", "--out", str(tmp_path))
        assert proc.returncode == 2
        assert "missing.json" in proc.stderr

    def test_bad_calibration_exits_1(self, tmp_path):
        proc = run_cli("calibrate", "pe3", "--out", str(tmp_path))
        assert proc.returncode == 1

    def test_run_writes_artifacts(self, tmp_path):
        cfg = write_fast_config(tmp_path / "cfg.json")
        out = tmp_path / "out"
        proc = run_cli(
            "run", "--scenario", "naju_default", "--mode", "variable",
            "--seed", "7", "--config", cfg, "--out", str(out),
        )
        assert proc.returncode == 0, proc.stderr
        for name in ("trial_summary.csv", "papers.csv", "flow_trace.csv",
                     "effective_config.json"):
            assert (out / name).is_file()
        assert any((out / "rasters").iterdir())

    def test_compare_is_deterministic_across_job_counts(self, tmp_path):
        cfg = write_fast_config(tmp_path / "cfg.json")
        outs = []
        for jobs in ("1", "4"):
            out = tmp_path / f"out_{jobs}"
            proc = run_cli(
                "compare", "--seeds", "1,2", "--config", cfg,
                "--out", str(out), "--jobs", jobs,
            )
            assert proc.returncode == 0, proc.stderr
            outs.append(out)
        for name in ("report.csv", "trials.csv"):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()

    def test_compare_report_has_reduction_baseline(self, tmp_path):
        cfg = write_fast_config(tmp_path / "cfg.json")
        out = tmp_path / "out"
        proc = run_cli("compare", "--seed", "1", "--config", cfg, "--out", str(out))
        assert proc.returncode == 0, proc.stderr
        lines = (out / "report.csv").read_text().strip().splitlines()
        assert lines[0] == "mode,tag,mean,sd,max,min,volume_l,reduction_pct"
        all_rows = [l for l in lines[1:] if l.startswith("all,")]
        assert all(row.endswith(",0.0000") for row in all_rows)

    def test_calibrate_writes_grids(self, tmp_path):
        cfg = write_fast_config(tmp_path / "cfg.json")
        out = tmp_path / "out"
        proc = run_cli("calibrate", "pe2", "--config", cfg, "--out", str(out))
        assert proc.returncode == 0, proc.stderr
        grid = (out / "pe2_grid.csv").read_text().strip().splitlines()
        assert grid[0] == "duty,area_or_distance,mean_rp,sd_rp"
        assert len(grid) == 1 + 6 * 4
        assert (out / "pe2_plot.csv").is_file()
