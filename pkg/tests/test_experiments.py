"""Preset table, run/sweep plumbing, manifests, and the cross-check harness."""

import json
import math

import numpy as np
import pytest

from iplsim.eigensolver import SolverError
from iplsim.experiments import (
    EMIT_KINDS,
    PRESETS,
    RunConfig,
    RunManifest,
    build_hamiltonian,
    execute,
    load_manifest,
    oracle_check,
    preset_config,
    random_instance,
    replay,
    resolve_selection,
    run_config,
    run_preset,
    run_sweep,
    sweep_lf,
)
from iplsim.hamiltonian import CellParams
from iplsim.output import sha256_file
from iplsim.profiles import QUARTER_TURN, ProfileSpec
from iplsim.rng import SplitMix64

PI = math.pi


def small_config(cells=16, eps=0.2, lf=1.0, map_selection="band:0"):
    width = QUARTER_TURN / lf
    profile = ProfileSpec("linear", cells, phi_start=QUARTER_TURN - width / 2,
                          phi_end=QUARTER_TURN + width / 2, lf=lf)
    return RunConfig(params=CellParams(1.0, 2.0, eps), profile=profile,
                     map_selection=map_selection, label="small")


class TestPresetTable:
    """The preset parameters are part of the package contract; pin every one."""

    # name -> (kind, cells, eps, extra profile fields)
    EXPECTED = {
        "fig1": ("linear", 501, 0.2, {"lf": 1.0}),
        "fig2_3": ("linear", 201, 0.2, {"lf": 1.0}),
        "fig4": ("linear", 151, 0.3, {"lf": 0.5}),
        "fig4_inset_sweep": ("linear", 501, 0.2, {"lf": 0.5}),
        "fig5": ("random_onsite", 151, 0.2, {"seed": 11}),
        "fig6": ("random_phase", 151, 0.2,
                 {"seed": 7, "phi_start": PI / 8, "phi_end": 3 * PI / 8}),
        "fig7_8": ("linear", 151, 0.3,
                   {"phi_start": PI / 8, "phi_end": PI / 4}),
        "fig9_10": ("revolutions", 201, 0.3,
                    {"revolutions": 1, "phi_start": PI / 8, "phi_end": 3 * PI / 8}),
        "fig10": ("revolutions", 301, 0.3,
                  {"revolutions": 1, "phi_start": PI / 8, "phi_end": 3 * PI / 8}),
        "fig11_13": ("revolutions", 181, 0.3,
                     {"revolutions": 3, "phi_start": PI / 8, "phi_end": 3 * PI / 8}),
        "fig13": ("revolutions", 901, 0.3,
                  {"revolutions": 3, "phi_start": PI / 8, "phi_end": 3 * PI / 8}),
    }

    def test_exactly_these_presets(self):
        assert set(PRESETS) == set(self.EXPECTED)

    @pytest.mark.parametrize("name", sorted(EXPECTED))
    def test_pinned_parameters(self, name):
        kind, cells, eps, extra = self.EXPECTED[name]
        cfg = PRESETS[name].config
        assert cfg.profile.kind == kind
        assert cfg.profile.cells == cells
        assert cfg.params == CellParams(1.0, 2.0, eps)
        for key, value in extra.items():
            assert getattr(cfg.profile, key) == pytest.approx(value)
        assert cfg.label == name

    def test_linear_presets_centered_on_quarter_turn(self):
        for name in ("fig1", "fig2_3", "fig4", "fig4_inset_sweep"):
            prof = PRESETS[name].config.profile
            mid = (prof.phi_start + prof.phi_end) / 2
            assert mid == pytest.approx(QUARTER_TURN)
            assert prof.phi_end - prof.phi_start == pytest.approx(QUARTER_TURN / prof.lf)

    def test_map_selections(self):
        assert PRESETS["fig5"].config.map_selection == "full"
        assert PRESETS["fig10"].config.map_selection == "lowest:12"
        others = set(PRESETS) - {"fig5", "fig10"}
        assert all(PRESETS[n].config.map_selection == "band:0" for n in others)

    def test_sweep_grid(self):
        grid = PRESETS["fig4_inset_sweep"].sweep_lf_values
        assert grid is not None and len(grid) == 25
        assert grid[0] == pytest.approx(0.5)
        assert grid[-1] == pytest.approx(100.0)
        ratios = np.diff(np.log(np.asarray(grid)))
        assert np.allclose(ratios, ratios[0])  # logarithmic spacing
        assert all(PRESETS[n].sweep_lf_values is None
                   for n in PRESETS if n != "fig4_inset_sweep")

    def test_default_thresholds_everywhere(self):
        defaults = PRESETS["fig1"].config.thresholds
        assert all(PRESETS[n].config.thresholds == defaults for n in PRESETS)

    def test_notes_are_informative(self):
        assert all(len(p.note) > 10 for p in PRESETS.values())


class TestBuildAndRun:
    def test_build_linear(self):
        cfg = small_config(cells=12)
        h = build_hamiltonian(cfg)
        assert h.sites == 24
        assert np.all(h.offdiag != 0.0)

    def test_build_onsite_dispatch(self):
        cfg = RunConfig(params=CellParams(1.0, 2.0, 0.2),
                        profile=ProfileSpec("random_onsite", 10, seed=3))
        h = build_hamiltonian(cfg)
        assert h.sites == 20
        # on-site disorder model: diagonal entries come from {d1, d2} directly
        assert set(np.round(h.diag, 12)) <= {1.0, 2.0}
        assert np.all(h.offdiag == 0.2)

    def test_run_config_consistency(self):
        cfg = small_config(cells=16)
        h, eig, report = run_config(cfg)
        assert eig.values.size == h.sites
        assert report.size == h.sites
        assert len(report.bands.bands) == 2

    def test_run_config_random_onsite_skips_band_warning(self, recwarn):
        cfg = RunConfig(params=CellParams(1.0, 2.0, 0.2),
                        profile=ProfileSpec("random_onsite", 12, seed=5))
        run_config(cfg)
        assert not [w for w in recwarn if "band" in str(w.message)]


@pytest.fixture(scope="module")
def report():
    return run_config(small_config(cells=16))[2]


class TestResolveSelection:
    def test_full(self, report):
        assert resolve_selection("full", report) == range(report.size)

    def test_band(self, report):
        assert resolve_selection("band:0", report) == report.bands.bands[0]
        assert resolve_selection("band:1", report) == report.bands.bands[1]

    def test_band_out_of_range(self, report):
        with pytest.raises(ValueError, match="out of range"):
            resolve_selection("band:2", report)

    def test_lowest(self, report):
        assert resolve_selection("lowest:5", report) == range(5)
        # clamped to the spectrum size
        assert resolve_selection("lowest:999", report) == range(report.size)

    def test_lowest_rejects_nonpositive(self, report):
        with pytest.raises(ValueError):
            resolve_selection("lowest:0", report)

    def test_unknown_selection(self, report):
        with pytest.raises(ValueError, match="unknown map selection"):
            resolve_selection("bands", report)


class TestExecuteAndManifest:
    def test_artifacts_and_checksums(self, tmp_path):
        manifest = execute(small_config(), tmp_path)
        expected = {"spectrum.csv", "states.csv", "map.pgm", "summary.json"}
        assert set(manifest.checksums) == expected
        for name, digest in manifest.checksums.items():
            assert sha256_file(tmp_path / name) == digest
        assert (tmp_path / "manifest.json").exists()
        assert manifest.kind == "run"
        assert manifest.tool.startswith("iplsim ")

    def test_emit_subset(self, tmp_path):
        manifest = execute(small_config(), tmp_path, emit=("json",))
        assert set(manifest.checksums) == {"summary.json"}
        assert not (tmp_path / "states.csv").exists()

    def test_emit_order_normalized(self, tmp_path):
        manifest = execute(small_config(), tmp_path, emit=("json", "csv"))
        assert manifest.emit == ("csv", "json")  # canonical order, not call order

    def test_emit_validation(self, tmp_path):
        with pytest.raises(ValueError, match="unknown emit"):
            execute(small_config(), tmp_path, emit=("csv", "svg"))
        with pytest.raises(ValueError, match="at least one"):
            execute(small_config(), tmp_path, emit=())

    def test_manifest_round_trip(self, tmp_path):
        manifest = execute(small_config(), tmp_path)
        loaded = load_manifest(tmp_path / "manifest.json")
        assert loaded.to_dict() == manifest.to_dict()
        assert loaded.config() == small_config()

    def test_manifest_is_deterministic_json(self, tmp_path):
        execute(small_config(), tmp_path / "a")
        execute(small_config(), tmp_path / "b")
        assert (tmp_path / "a" / "manifest.json").read_bytes() == \
               (tmp_path / "b" / "manifest.json").read_bytes()

    def test_replay_matches(self, tmp_path):
        execute(small_config(), tmp_path / "orig")
        fresh = replay(tmp_path / "orig" / "manifest.json", tmp_path / "redo")
        assert fresh.checksums == load_manifest(tmp_path / "orig" / "manifest.json").checksums

    def test_replay_detects_drift(self, tmp_path):
        execute(small_config(), tmp_path / "orig")
        doc = json.loads((tmp_path / "orig" / "manifest.json").read_text())
        doc["checksums"]["states.csv"] = "0" * 64
        (tmp_path / "orig" / "manifest.json").write_text(json.dumps(doc))
        with pytest.raises(RuntimeError, match="replay drift.*states.csv"):
            replay(tmp_path / "orig" / "manifest.json", tmp_path / "redo")

    def test_replay_skip_verify(self, tmp_path):
        execute(small_config(), tmp_path / "orig")
        doc = json.loads((tmp_path / "orig" / "manifest.json").read_text())
        doc["checksums"]["states.csv"] = "0" * 64
        (tmp_path / "orig" / "manifest.json").write_text(json.dumps(doc))
        replay(tmp_path / "orig" / "manifest.json", tmp_path / "redo", verify=False)


class TestSweep:
    def test_order_and_determinism(self, monkeypatch):
        monkeypatch.setenv("IPL_THREADS", "4")
        lf_values = [2.0, 0.5, 2.0, 8.0]
        points = sweep_lf(lf_values, small_config(cells=16))
        assert [p.lf for p in points] == lf_values
        assert points[0].fraction == points[2].fraction  # same lf, same answer
        assert all(p.error == "" and p.fraction is not None for p in points)

    def test_fraction_rises_with_focusing(self):
        points = sweep_lf([0.5, 50.0], small_config(cells=24))
        assert points[1].fraction > points[0].fraction

    def test_input_validation(self):
        with pytest.raises(ValueError, match="positive"):
            sweep_lf([1.0, -2.0], small_config())
        cfg = RunConfig(params=CellParams(1.0, 2.0, 0.2),
                        profile=ProfileSpec("random_onsite", 10, seed=1))
        with pytest.raises(ValueError, match="linear"):
            sweep_lf([1.0], cfg)

    def test_thread_cap_validation(self, monkeypatch):
        monkeypatch.setenv("IPL_THREADS", "0")
        with pytest.raises(ValueError, match="IPL_THREADS"):
            sweep_lf([1.0], small_config())

    def test_point_failure_becomes_row(self, monkeypatch):
        import iplsim.experiments as exp

        def boom(labels):
            raise RuntimeError("boom")

        monkeypatch.setattr(exp, "delocalized_fraction", boom)
        points = sweep_lf([1.0, 2.0], small_config(cells=8))
        assert [p.fraction for p in points] == [None, None]
        assert all(p.error == "RuntimeError: boom" for p in points)

    def test_run_sweep_manifest(self, tmp_path):
        lf_values = (0.5, 1.0, 4.0)
        manifest = run_sweep(small_config(cells=12), lf_values, tmp_path)
        assert manifest.kind == "sweep"
        assert manifest.lf_values == lf_values
        assert set(manifest.checksums) == {"sweep.csv"}
        assert sha256_file(tmp_path / "sweep.csv") == manifest.checksums["sweep.csv"]
        loaded = load_manifest(tmp_path / "manifest.json")
        assert loaded.lf_values == lf_values

    def test_sweep_replay(self, tmp_path):
        run_sweep(small_config(cells=12), (0.5, 2.0), tmp_path / "orig")
        fresh = replay(tmp_path / "orig" / "manifest.json", tmp_path / "redo")
        assert fresh.kind == "sweep"


class TestPresetConfigOverrides:
    def test_unknown_preset(self):
        with pytest.raises(KeyError, match="fig1"):
            preset_config("fig99")

    def test_no_overrides_returns_table_entry(self):
        assert preset_config("fig1") is PRESETS["fig1"].config

    def test_unknown_override_key(self):
        with pytest.raises(ValueError, match="unknown override"):
            preset_config("fig1", {"coupling": 0.5})

    def test_param_overrides(self):
        cfg = preset_config("fig1", {"eps": 0.35, "d2": 3.0})
        assert cfg.params == CellParams(1.0, 3.0, 0.35)

    def test_sites_maps_to_cells(self):
        cfg = preset_config("fig1", {"sites": 40})
        assert cfg.profile.cells == 20

    def test_sites_must_be_even_and_big_enough(self):
        with pytest.raises(ValueError, match="even"):
            preset_config("fig1", {"sites": 41})
        with pytest.raises(ValueError, match="even"):
            preset_config("fig1", {"sites": 2})

    def test_lf_override_recenters(self):
        cfg = preset_config("fig1", {"lf": 2.0})
        prof = cfg.profile
        assert (prof.phi_start + prof.phi_end) / 2 == pytest.approx(QUARTER_TURN)
        assert prof.phi_end - prof.phi_start == pytest.approx(QUARTER_TURN / 2.0)
        assert prof.lf == 2.0

    def test_lf_override_requires_linear(self):
        with pytest.raises(ValueError, match="linear"):
            preset_config("fig9_10", {"lf": 1.0})

    def test_phi_override_drops_lf(self):
        cfg = preset_config("fig1", {"phi_start": 0.1, "phi_end": 0.7})
        assert cfg.profile.phi_start == 0.1
        assert cfg.profile.phi_end == 0.7
        assert cfg.profile.lf is None  # the focusing label no longer applies

    def test_threshold_overrides(self):
        cfg = preset_config("fig1", {"tau": 1e-4, "nb": 3, "gamma": 10.0})
        assert cfg.thresholds.tau == 1e-4
        assert cfg.thresholds.n_b == 3
        assert cfg.thresholds.gamma == 10.0

    def test_seed_and_map_selection(self):
        cfg = preset_config("fig6", {"seed": 99, "map_selection": "lowest:4"})
        assert cfg.profile.seed == 99
        assert cfg.map_selection == "lowest:4"

    def test_run_preset_needs_out_dir(self):
        with pytest.raises(ValueError, match="output directory"):
            run_preset("fig1")

    def test_run_preset_small(self, tmp_path):
        manifest = run_preset("fig2_3", {"sites": 32}, tmp_path)
        assert manifest.kind == "run"
        assert manifest.profile["cells"] == 16
        assert (tmp_path / "map.pgm").exists()

    def test_run_preset_sweep_dispatch(self, tmp_path):
        manifest = run_preset("fig4_inset_sweep", {"cells": 10}, tmp_path)
        assert manifest.kind == "sweep"
        assert len(manifest.lf_values) == 25
        assert (tmp_path / "sweep.csv").exists()
        assert not (tmp_path / "states.csv").exists()


class TestRandomInstance:
    def test_always_unreduced(self):
        rng = SplitMix64(2024)
        for _ in range(200):
            h = random_instance(rng, max_sites=48)
            assert 4 <= h.sites <= 48
            assert h.sites % 2 == 0
            assert np.all(np.abs(h.offdiag) > 0.0)
            assert np.all(np.isfinite(h.diag))

    def test_reproducible(self):
        a = random_instance(SplitMix64(7), max_sites=32)
        b = random_instance(SplitMix64(7), max_sites=32)
        assert np.array_equal(a.diag, b.diag)
        assert np.array_equal(a.offdiag, b.offdiag)

    def test_kind_restriction(self):
        rng = SplitMix64(5)
        for _ in range(20):
            h = random_instance(rng, max_sites=24, kinds=("linear",))
            assert h.profile.kind == "linear"


class TestOracleCheck:
    def test_small_battery_passes(self):
        result = oracle_check(instances=5, max_sites=32, seed=123)
        assert result.instances == 5
        assert result.max_eigenvalue_dev <= 1e-10
        assert result.max_residual <= 1e-10
        assert result.max_ortho <= 1e-10

    def test_instance_count_validation(self):
        with pytest.raises(ValueError):
            oracle_check(instances=0)

    def test_disagreement_raises(self, monkeypatch):
        import iplsim.eigensolver as es
        import iplsim.experiments as exp

        real = es.dense_oracle

        def skewed(h):
            ora = real(h)
            return type(ora)(values=ora.values + 1e-6, vectors=ora.vectors,
                             residual_bound=ora.residual_bound,
                             ortho_bound=ora.ortho_bound)

        monkeypatch.setattr(es, "dense_oracle", skewed)
        with pytest.raises(SolverError, match="routes differ"):
            exp.oracle_check(instances=1, max_sites=16, seed=1)


def test_emit_kinds_constant():
    assert EMIT_KINDS == ("csv", "pgm", "json")


def test_manifest_from_dict_tolerates_missing_optionals():
    doc = {"kind": "run", "tool": "iplsim 0.1.0", "params": {"d1": 1.0, "d2": 2.0, "eps": 0.2},
           "profile": {"kind": "linear", "cells": 8, "phi_start": 0.3, "phi_end": 1.2},
           "thresholds": {"n_b": 2, "tau": 3e-5, "gamma": 20.0, "delta_rel": 0.05,
                          "amplitude_floor": 1e-8},
           "map_selection": "full", "emit": ["csv"], "checksums": {}}
    manifest = RunManifest.from_dict(doc)
    assert manifest.label is None
    assert manifest.lf_values is None
    assert manifest.config().map_selection == "full"
