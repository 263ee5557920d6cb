"""Batch runner: sessions, bundles, manifests, reruns and sweeps."""

import json
from pathlib import Path

import numpy as np
import pytest

from kidlearn.config import ConfigError
from kidlearn.experiment import (CONDITIONS, ExperimentConfig,
                                 ExperimentError, population_rng,
                                 report_from_traces, rerun_from_manifest,
                                 run_experiment, run_session,
                                 session_streams, set_config_value, sweep)
from kidlearn.learners import PopulationSpec, sample_population
from kidlearn.money import default_catalog


def small_config(**kwargs):
    base = dict(conditions=("predef", "zpdes"), steps=25, seed=7,
                population=PopulationSpec(size=4),
                chronograph_times=(1, 8, 20))
    base.update(kwargs)
    return ExperimentConfig(**base)


def one_profile(seed=7):
    catalog = default_catalog()
    return sample_population(PopulationSpec(size=1), population_rng(seed),
                             tuple(i.id for i in catalog.items))[0]


def test_config_validation():
    assert small_config().validate() == []
    assert any("unknown condition" in p for p in
               small_config(conditions=("zpdes", "alien")).validate())
    assert any("repeat" in p for p in
               small_config(conditions=("zpdes", "zpdes")).validate())
    assert any("steps" in p for p in small_config(steps=0).validate())


def test_config_round_trip():
    cfg = small_config(zpd_overrides={"zpd_window": 6}, dump_weights=True)
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_config_from_dict_rejects_garbage():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"steps": "many"})


def test_config_from_dict_rejects_misspelled_keys():
    # A typo must not fall back to defaults and run something else.
    with pytest.raises(ConfigError, match="unknown config keys: step"):
        ExperimentConfig.from_dict({"step": 10})
    with pytest.raises(ConfigError, match="unknown bandit keys: gama"):
        ExperimentConfig.from_dict({"bandit": {"gama": 0.1}})
    with pytest.raises(ConfigError, match="unknown population keys"):
        ExperimentConfig.from_dict({"population": {"sizes": 3}})
    with pytest.raises(ConfigError, match="must be an object"):
        ExperimentConfig.from_dict({"bandit": 0.1})


def test_session_streams_are_stable_and_distinct():
    a = session_streams(3, 5)
    b = session_streams(3, 5)
    assert len(a) == 4
    for ra, rb in zip(a, b):
        assert ra.random() == rb.random()
    c = session_streams(3, 6)
    assert a[0].random() != c[0].random()


def test_run_session_trace_shape():
    res = run_session("zpdes", one_profile(), 30, seed=7, learner_id=0)
    assert len(res.trace) == 30
    assert res.trace.condition == "zpdes"
    assert [r.t for r in res.trace.rows] == list(range(1, 31))
    for r in res.trace.rows:
        assert r.outcome in (0, 1)
        assert r.choice == -1            # no object choice offered
    assert res.weight_log is None


def test_run_session_rejects_unknown_condition():
    with pytest.raises(ExperimentError):
        run_session("alien", one_profile(), 5, seed=0, learner_id=0)


def test_choice_conditions_record_the_picked_side():
    res = run_session("zco", one_profile(), 30, seed=7, learner_id=0)
    assert all(r.choice in (0, 1) for r in res.trace.rows)
    res = run_session("pco", one_profile(), 12, seed=7, learner_id=0)
    assert all(r.choice in (0, 1) for r in res.trace.rows)
    assert all(r.step_label for r in res.trace.rows)   # predef labels kept


def test_predef_session_walks_the_ladder_in_order():
    profile = one_profile()
    profile.competence = {t: 9.0 for t in profile.competence}
    profile.max_competence = {t: 9.0 for t in profile.competence}
    profile.guess, profile.slip = 0.0, 0.0
    res = run_session("predef", profile, 12, seed=7, learner_id=0)
    labels = [r.step_label for r in res.trace.rows]
    assert labels[:4] == [labels[0]] * 4      # four attempts to open the gate
    assert len(set(labels)) == 3              # advanced twice in 12 steps


def test_same_seed_same_trace_different_seed_different_dice():
    a = run_session("zpdes", one_profile(), 40, seed=7, learner_id=0)
    b = run_session("zpdes", one_profile(), 40, seed=7, learner_id=0)
    assert a.trace.rows == b.trace.rows
    c = run_session("zpdes", one_profile(9), 40, seed=9, learner_id=0)
    assert a.trace.rows != c.trace.rows


def test_weight_log_collection():
    res = run_session("zpdes", one_profile(), 10, seed=7, learner_id=0,
                      collect_weights=True)
    assert len(res.weight_log) == 10
    snap = res.weight_log[0]
    assert "types/exercise_type" in snap
    assert set(snap["types/exercise_type"]["M"]) == {"w", "active"}


def test_run_experiment_bundle(tmp_path):
    out = tmp_path / "run"
    manifest = run_experiment(small_config(), out)

    assert (out / "manifest.json").is_file()
    assert (out / "profiles.csv").is_file()
    assert (out / "scores.csv").is_file()
    assert (out / "pvalues.csv").is_file()
    assert (out / "chronograph.csv").is_file()
    for cond in ("predef", "zpdes"):
        found = sorted((out / "traces" / cond).glob("learner_*.csv"))
        assert len(found) == 4
    # manifest digests cover every artifact except itself
    on_disk = {str(p.relative_to(out))
               for p in out.rglob("*") if p.is_file()}
    assert set(manifest["files"]) == on_disk - {"manifest.json"}
    assert manifest["config"]["seed"] == 7


def test_run_experiment_rejects_bad_config(tmp_path):
    with pytest.raises(ExperimentError):
        run_experiment(small_config(steps=0), tmp_path / "x")
    with pytest.raises(ExperimentError):
        run_experiment(small_config(
            zpd_overrides={"upgrade_boost": 0.2}), tmp_path / "y")


def test_rerun_from_manifest_is_byte_identical(tmp_path):
    first = tmp_path / "first"
    second = tmp_path / "second"
    run_experiment(small_config(), first)
    rerun_from_manifest(first / "manifest.json", second)
    files_a = sorted(p.relative_to(first) for p in first.rglob("*")
                     if p.is_file())
    files_b = sorted(p.relative_to(second) for p in second.rglob("*")
                     if p.is_file())
    assert files_a == files_b
    for rel in files_a:
        assert (first / rel).read_bytes() == (second / rel).read_bytes(), rel


def test_rerun_needs_a_manifest(tmp_path):
    stray = tmp_path / "notes.json"
    stray.write_text("{}")
    with pytest.raises(ExperimentError):
        rerun_from_manifest(stray, tmp_path / "out")


def test_report_from_traces_recomputes_aggregates(tmp_path):
    out = tmp_path / "run"
    run_experiment(small_config(), out)
    report = tmp_path / "report"
    files = report_from_traces(out / "traces", report,
                               chronograph_times=(1, 8, 20))
    assert {f.name for f in files} == {"scores.csv", "pvalues.csv",
                                       "chronograph.csv"}
    # recomputation from the CSVs alone agrees with the original run
    assert (report / "scores.csv").read_bytes() == \
        (out / "scores.csv").read_bytes()
    with pytest.raises(ExperimentError):
        report_from_traces(tmp_path / "missing", report)


def test_set_config_value_parses_leaves():
    data = {}
    set_config_value(data, "bandit.gamma", "0.3")
    set_config_value(data, "steps", "50")
    set_config_value(data, "conditions", '["zpdes"]')
    assert data == {"bandit": {"gamma": 0.3}, "steps": 50,
                    "conditions": ["zpdes"]}
    with pytest.raises(ConfigError):
        set_config_value({"bandit": 3}, "bandit.gamma", "0.1")


def test_sweep_runs_one_directory_per_value(tmp_path):
    cfg = small_config(conditions=("zpdes",), steps=10,
                       population=PopulationSpec(size=2))
    runs = sweep(cfg, "bandit.gamma", [0.1, 0.5], tmp_path)
    assert [r["value"] for r in runs] == [0.1, 0.5]
    assert (tmp_path / "bandit_gamma__0.1" / "manifest.json").is_file()
    assert (tmp_path / "bandit_gamma__0.5" / "manifest.json").is_file()
    assert (tmp_path / "sweep_summary.csv").is_file()
    gammas = [json.loads((tmp_path / d / "manifest.json").read_text())
              ["config"]["bandit"]["gamma"]
              for d in ("bandit_gamma__0.1", "bandit_gamma__0.5")]
    assert gammas == [0.1, 0.5]


def test_conditions_share_the_cohort_and_the_dice(tmp_path):
    # same learner, same seed: the zpdes and zco weight logs agree exactly
    a = run_session("zpdes", one_profile(), 50, seed=3, learner_id=2,
                    collect_weights=True)
    b = run_session("zco", one_profile(), 50, seed=3, learner_id=2,
                    collect_weights=True)
    assert a.weight_log == b.weight_log
    assert [r.outcome for r in a.trace.rows] == \
        [r.outcome for r in b.trace.rows]
