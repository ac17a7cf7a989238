import json
import math

import numpy as np
import pytest

from stopgo import builtin_scenarios, front_position, get_scenario, l1_error, make_diagram
from stopgo.harness import (
    execute,
    read_profile_csv,
    replay_manifest,
    run_scenario,
    write_manifest,
    write_profile_csv,
)

LW = make_diagram()


class TestScenarioRegistry:
    def test_shock_problem_data(self):
        sc = get_scenario("riemann-shock")
        assert (sc.left.rho, sc.right.rho) == (0.3, 0.99)
        assert sc.left.q == sc.right.q == 0.0
        assert sc.n_cells == 1000 and sc.cfl == 1.0

    def test_rarefaction_problem_data(self):
        sc = get_scenario("riemann-rarefaction")
        assert (sc.left.rho, sc.right.rho) == (0.99, 0.0)

    def test_transonic_bvp_data(self):
        sc = get_scenario("bvp-layers")
        assert sc.g2_left == 0.75
        assert sc.g1_right == 0.8
        assert (sc.left.rho, sc.right.rho) == (0.2, 0.9)

    def test_cluster_sweeps(self):
        sc = get_scenario("cluster")
        assert sc.h_values == (1.0, 0.5, 0.1)
        assert sc.t_end == 0.2
        assert get_scenario("cluster-linear").left.q == 0.3

    def test_epsilon_sweep_values(self):
        assert get_scenario("eps-sweep-shock").eps_values == (0.5, 0.1, 0.01, 0.001)

    def test_unknown_name(self):
        with pytest.raises(KeyError, match="unknown scenario"):
            get_scenario("nope")

    def test_registry_is_self_contained(self):
        for sc in builtin_scenarios():
            assert sc.left is not None and sc.right is not None
            grid = sc.initial_grid(_params(), LW, n_cells=16)
            assert grid.n_cells == 16


def _params():
    from stopgo import ModelParams
    return ModelParams(H=1.0, epsilon=0.1)


class TestMetrics:
    def test_error_vanishes_on_the_reference_itself(self):
        x = np.linspace(0.0, 1.0, 101)[:-1] + 0.005
        ref = lambda xs, t: np.sin(xs)
        assert l1_error(x, np.sin(x), ref, 0.3) == 0.0

    def test_constant_offset_over_unit_domain(self):
        n = 200
        x = (np.arange(n) + 0.5) / n
        ref = lambda xs, t: np.zeros_like(xs)
        assert l1_error(x, np.full(n, 0.125), ref, 0.0) == pytest.approx(0.125, abs=1e-12)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            l1_error(np.arange(4) / 4.0, np.zeros(3), lambda x, t: x, 0.0)

    def test_front_of_exact_step(self):
        n = 1000
        x = (np.arange(n) + 0.5) / n
        rho = np.where(x < 0.384, 0.3, 0.99)
        assert front_position(x, rho, 0.645) == pytest.approx(0.384, abs=1.0 / n)

    def test_front_of_linear_ramp(self):
        x = np.linspace(0.0, 1.0, 11)
        assert front_position(x, x, 0.5) == pytest.approx(0.5, abs=1e-12)

    def test_flat_profile_has_no_front(self):
        with pytest.raises(ValueError, match="crosses"):
            front_position(np.linspace(0, 1, 5), np.full(5, 0.3), 0.5)

    def test_multiple_crossings_rejected(self):
        x = np.linspace(0, 1, 101)
        with pytest.raises(ValueError, match="crosses"):
            front_position(x, np.sin(6 * x), 0.1)


class TestEmission:
    def test_csv_round_trip_is_bit_exact_at_printed_precision(self, tmp_path):
        rng = np.random.default_rng(2)
        x = np.sort(rng.uniform(0, 1, 40))
        rho = rng.uniform(0, 1, 40)
        q = rng.uniform(0, 1, 40)
        z = rng.uniform(0, 30, 40)
        path = write_profile_csv(tmp_path / "p.csv", x, rho, q, z)
        cols = read_profile_csv(path)
        for name, vals in (("x", x), ("rho", rho), ("q", q), ("z", z)):
            printed = np.asarray([float("%.12g" % v) for v in vals])
            np.testing.assert_array_equal(cols[name], printed)

    def test_scalar_profiles_have_no_z_column(self, tmp_path):
        path = write_profile_csv(tmp_path / "p.csv", [0.5], [0.2], [0.16])
        assert path.read_text().splitlines()[0] == "x,rho,q"

    def test_kinetic_profile_header_and_line_endings(self, tmp_path):
        path = write_profile_csv(tmp_path / "p.csv", [0.5], [0.2], [0.16], [0.2])
        raw = path.read_bytes()
        assert raw.startswith(b"x,rho,q,z\n")
        assert b"\r" not in raw

    def test_manifest_replay_reproduces_profiles_bit_identically(self, tmp_path):
        rep = execute(get_scenario("riemann-shock"), "relaxed", 1.0, 0.0,
                      n_cells=64, t_end=0.1)
        manifest = write_manifest(tmp_path / "run.manifest.json", rep)
        doc = json.loads(manifest.read_text())
        assert set(doc) >= {"scenario", "scheme", "H", "epsilon", "cells",
                            "cfl", "t_end", "bc", "seed", "outputs"}
        again = replay_manifest(manifest)
        np.testing.assert_array_equal(again.rho, rep.rho)
        np.testing.assert_array_equal(again.q, rep.q)

    def test_manifest_serializes_infinite_epsilon(self, tmp_path):
        rep = execute(get_scenario("cluster"), "relaxation", 1.0, math.inf,
                      n_cells=32, t_end=0.02)
        manifest = write_manifest(tmp_path / "c.manifest.json", rep)
        again = replay_manifest(manifest)
        np.testing.assert_array_equal(again.rho, rep.rho)


class TestRunScenario:
    def test_sweep_produces_one_report_per_combination(self):
        reports = run_scenario("eps-sweep-shock", n_cells=40, t_end=0.05)
        assert len(reports) == 4
        assert [r.epsilon for r in reports] == [0.5, 0.1, 0.01, 0.001]
        for r in reports:
            assert r.l1 is not None and r.l1 >= 0.0
            assert r.n_steps > 0

    def test_overrides_collapse_the_sweep(self):
        reports = run_scenario("eps-sweep-shock", epsilon=0.1, n_cells=40, t_end=0.05)
        assert len(reports) == 1

    def test_lookahead_sweep_runs(self):
        reports = run_scenario("H-sweep-shock", n_cells=40, t_end=0.05)
        assert [r.H for r in reports] == [1.0, 1.5, 2.0, 5.0]

    def test_every_builtin_scenario_runs_small(self):
        for sc in builtin_scenarios():
            reports = run_scenario(sc.name, n_cells=24, t_end=min(sc.t_end, 0.03))
            assert reports
