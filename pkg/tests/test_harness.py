import csv
import io
import math
import os

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import SIGMA0, SIGMA1
from ternary_sense.detector import Rule, build_regions, confusion_row
from ternary_sense.errors import InvalidParameterError
from ternary_sense.harness import (
    THREADS_ENV,
    ExperimentSpec,
    ResultTable,
    atomic_write,
    binomial_z,
    block_sizes,
    figure_spec,
    reference_scene,
    run,
    run_cooperative,
    run_single_sensor,
    run_two_step_comparison,
    sigma2_grid,
    simulate_counts,
)
from ternary_sense.model import SceneConfig


def small_single(**kw):
    scene = reference_scene()
    args = dict(axis="sigma2_sq", grid=[1.2e-5, 1.5e-5], trials=3000, master_seed=5)
    args.update(kw)
    return ExperimentSpec(scene, **args)


def test_spec_validation():
    with pytest.raises(InvalidParameterError):
        small_single(trials=0)
    with pytest.raises(InvalidParameterError):
        small_single(grid=[])
    with pytest.raises(InvalidParameterError):
        small_single(grid=[0.5e-5])
    with pytest.raises(InvalidParameterError):
        small_single(axis="power")
    with pytest.raises(InvalidParameterError):
        small_single(axis="alpha_beta", grid=[0.45])
    with pytest.raises(InvalidParameterError):
        small_single(axis="n_samples", grid=[10.5])
    with pytest.raises(InvalidParameterError):
        small_single(rules=("MAGIC",))
    with pytest.raises(InvalidParameterError):
        small_single(sampler="uniform")
    with pytest.raises(InvalidParameterError):
        small_single(alpha_f=0.9)
    with pytest.raises(InvalidParameterError):
        small_single(master_seed=-1)


def test_spec_round_trip_and_hash():
    spec = small_single()
    back = ExperimentSpec.from_dict(spec.to_dict())
    assert back == spec and back.spec_hash() == spec.spec_hash()
    assert small_single(master_seed=6).spec_hash() != spec.spec_hash()
    joint = ExperimentSpec(reference_scene(k=5), ("n_samples", "k_sensors"), [(100, 2), (200, 3)], alpha_f=0.9, beta_f=0.9)
    assert joint.point(1).n == 200 and joint.point(1).k == 3
    assert ExperimentSpec.from_dict(joint.to_dict()) == joint


@given(points=st.integers(1, 60), exclude=st.floats(0.0, 0.2))
def test_sigma2_grid_avoids_excluded_band(points, exclude):
    grid = sigma2_grid(SIGMA0, SIGMA1, points=points, exclude=exclude)
    assert len(grid) == points
    assert all(1.05 * SIGMA0 < g < 2 * SIGMA1 for g in grid)
    assert all(abs(g - SIGMA1) >= exclude * SIGMA1 for g in grid)
    assert grid == sorted(grid)


def test_block_sizes_cover_trials():
    for trials, vals in [(1, 300), (10**6, 300), (12345, 6000), (7, 1 << 23)]:
        sizes = block_sizes(trials, vals)
        assert sum(sizes) == trials and min(sizes) >= 1


def test_binomial_z():
    assert binomial_z(50, 100, 0.5) == 0.0
    assert binomial_z(60, 100, 0.5) == pytest.approx(2.0)
    # one stray count against p = 0 is one floored standard deviation
    assert binomial_z(1, 100, 0.0) == pytest.approx(1.0)


def test_simulated_counts_do_not_depend_on_worker_count(monkeypatch):
    R = build_regions(Rule.GLRT, 300, SIGMA0, SIGMA1, 0.8, 0.8)
    classify = [lambda y: np.asarray(y > R.edges[0], dtype=np.int64)]
    results = []
    for workers in ("1", "4"):
        monkeypatch.setenv(THREADS_ENV, workers)
        results.append(simulate_counts(9, 0, 1, SIGMA1, 300, 1, 40_000, "gaussian", classify))
    np.testing.assert_array_equal(results[0], results[1])
    monkeypatch.setenv(THREADS_ENV, "zero")
    with pytest.raises(InvalidParameterError):
        simulate_counts(9, 0, 1, SIGMA1, 300, 1, 10, "gaussian", classify)


def test_single_sensor_table_shape_and_selfcheck():
    tab = run_single_sensor(small_single())
    assert len(tab.rows) == 2
    for r in ("glrt", "rao", "upper"):
        assert set(tab.column(f"{r}_status")) == {"OK"}
        assert np.all(tab.column(f"{r}_maxz") <= 4.0)
        assert np.all(tab.column(f"{r}_h0h0") == pytest.approx(0.8, abs=1e-12))
    assert tab.column("upper_case").tolist() == ["LOW", "HIGH"]
    assert np.all(tab.column("upper_h2h2") >= tab.column("glrt_h2h2"))
    assert tab.metadata["runner"] == "single_sensor"


def test_single_sensor_overlap_and_infeasible_rows():
    spec = small_single(axis="alpha_beta", grid=[0.8, 0.99], rules=("GLRT", "ASYMPTOTIC"))
    tab = run_single_sensor(spec)
    assert tab.column("glrt_status").tolist() == ["OK", "INFEASIBLE"]
    assert tab.column("glrt_h2h2")[1] == 0.0
    assert tab.column("asymptotic_status").tolist() == ["OK", "OVERLAP"]
    assert math.isnan(tab.column("asymptotic_h2h2")[1])
    tab2 = run_single_sensor(small_single(axis="alpha_beta", grid=[0.95], rules=("RAO",)))
    assert tab2.column("rao_status").tolist() == ["OVERLAP"]


def test_single_sensor_rejects_global_constraints():
    spec = small_single(alpha_f=0.9, beta_f=0.9)
    with pytest.raises(InvalidParameterError):
        run_single_sensor(spec)


def test_cooperative_k1_reduces_to_single_sensor():
    scene = reference_scene(k=1)
    spec = ExperimentSpec(
        scene, "sigma2_sq", [1.5012e-5], rules=("GLRT",), alpha=0.85, beta=0.85, alpha_f=0.84, beta_f=0.84,
        trials=2000, sampler="chi2",
    )
    tab = run_cooperative(spec)
    R = build_regions(Rule.GLRT, 300, scene.sigma0_sq, scene.sigma1_sq, 0.85, 0.85)
    row = confusion_row(R, 1.5012e-5, 300)
    assert tab.column("glrt_global_h2h2")[0] == pytest.approx(row.p2, abs=1e-14)
    assert tab.column("glrt_single_h2h2")[0] == pytest.approx(row.p2, abs=1e-14)
    assert tab.column("glrt_s2_size")[0] == 1


def test_cooperative_infeasible_row_is_zeroed():
    spec = ExperimentSpec(
        reference_scene(k=2), "sigma2_sq", [1.5e-5], rules=("GLRT",), alpha=0.85, beta=0.85, alpha_f=0.999,
        beta_f=0.9, trials=100,
    )
    tab = run_cooperative(spec)
    assert tab.column("glrt_status").tolist() == ["INFEASIBLE"]
    assert tab.column("glrt_global_h2h2")[0] == 0.0


def test_cooperative_requires_global_constraints():
    with pytest.raises(InvalidParameterError):
        run_cooperative(small_single(rules=("GLRT",)))
    spec = ExperimentSpec(reference_scene(k=3), "sigma2_sq", [1.5e-5], rules=("UPPER",), alpha_f=0.9, beta_f=0.9)
    with pytest.raises(InvalidParameterError):
        run_cooperative(spec)


def test_cooperative_gaussian_and_chi2_samplers_agree_with_analytic():
    for sampler in ("gaussian", "chi2"):
        spec = ExperimentSpec(
            reference_scene(k=4), "sigma2_sq", [1.5012e-5], rules=("GLRT", "RAO"), alpha=0.85, beta=0.85,
            alpha_f=0.9, beta_f=0.9, trials=4000, sampler=sampler, master_seed=3,
        )
        tab = run_cooperative(spec)
        assert set(tab.column("glrt_status")) == {"OK"} and set(tab.column("rao_status")) == {"OK"}


def test_two_step_comparison_defaults_and_chain():
    name, spec = figure_spec(9)
    assert name == "two_step_comparison"
    assert (spec.scene.sigma1_sq, spec.scene.sigma2_sq, spec.scene.n_sensors) == (1.2e-5, 1.4e-5, 5)
    tab = run_two_step_comparison(spec)
    orc, opt, alg = (tab.column(f"{m}_h2h2") for m in ("oracle49", "opt51", "alg1"))
    assert np.all(orc >= opt - 1e-12) and np.all(opt >= alg - 1e-12)
    assert np.all(tab.column("opt51_s2_size") >= tab.column("alg1_s2_size"))
    # past the feasibility edge every method scores zero
    assert orc[-1] == opt[-1] == alg[-1] == 0.0
    assert set(tab.column("opt51_budget_exhausted")) == {0.0}


def test_two_step_comparison_rejects_large_k():
    spec = ExperimentSpec(
        SceneConfig(1e-5, 1.2e-5, 1.4e-5, 300, 6), "alpha_beta_f", [0.9], rules=("GLRT",), methods=("ALG1",)
    )
    with pytest.raises(Exception):
        run_two_step_comparison(spec)


def test_figure_presets_are_valid():
    for fig in (3, 4, 5, 6, 7, 8, 9):
        name, spec = figure_spec(fig, trials=10, seed=1)
        assert spec.trials == 10 and spec.master_seed == 1
        assert name in ("single_sensor", "cooperative", "two_step_comparison")
    with pytest.raises(InvalidParameterError):
        figure_spec(2)
    with pytest.raises(InvalidParameterError):
        run("nope", figure_spec(3)[1])


def test_sample_scaling_preset():
    # more samples help both two-sided rules at -3 dB misuse power
    tab = run_single_sensor(figure_spec(5, trials=500)[1])
    n = tab.column("n_samples")
    for r in ("glrt", "rao"):
        p = tab.column(f"{r}_h2h2")
        assert p[n == 600][0] > p[n == 300][0]


def test_joint_sample_sensor_preset_increases_with_k():
    tab = run_cooperative(figure_spec(8, trials=200)[1])
    n, k, p = tab.column("n_samples"), tab.column("k_sensors"), tab.column("glrt_global_h2h2")
    for value in np.unique(n):
        sel = n == value
        order = np.argsort(k[sel])
        assert np.all(np.diff(p[sel][order]) >= -1e-12)


def test_result_table_csv_format(tmp_path):
    tab = ResultTable(
        ["name", "x_h2h2", "count", "flag", "note"],
        [["a", 1 / 3, 7, True, 'quote "me", please'], ["b", -0.0, 0, False, None]],
        {"runner": "demo", "seed": "1"},
    )
    text = tab.to_csv()
    assert text.startswith("# runner=demo\n# seed=1\nname,x_h2h2,count,flag,note\n")
    assert "\r" not in text
    assert "a,0.333333333333,7,1,\"quote \"\"me\"\", please\"\n" in text
    assert "b,0,0,0,\n" in text
    rows = list(csv.reader(io.StringIO("".join(l + "\n" for l in text.splitlines() if not l.startswith("#")))))
    assert rows[1][4] == 'quote "me", please'
    out = tmp_path / "t.csv"
    tab.write_csv(str(out))
    assert out.read_bytes() == text.encode()


def test_result_table_invariants():
    with pytest.raises(InvalidParameterError):
        ResultTable(["a_h0h0"], [[1.5]])
    with pytest.raises(InvalidParameterError):
        ResultTable(["a", "b"], [[1.0]])
    with pytest.raises(InvalidParameterError):
        ResultTable(["a", "a"], [])
    ResultTable(["a_h0h0_mc"], [[None], [0.5]])


def test_atomic_write_leaves_no_partial_file(tmp_path):
    target = tmp_path / "out.csv"
    target.write_text("old")

    class Boom:
        def __str__(self):
            raise RuntimeError("boom")

    with pytest.raises(TypeError):
        atomic_write(str(target), Boom())
    assert target.read_text() == "old"
    assert os.listdir(tmp_path) == ["out.csv"]


def test_tables_are_deterministic_across_worker_counts(monkeypatch):
    spec = small_single(trials=20_000)
    texts = []
    for workers in ("1", "3"):
        monkeypatch.setenv(THREADS_ENV, workers)
        texts.append(run_single_sensor(spec).to_csv())
    assert texts[0] == texts[1]
