"""Batch simulation: cohorts of simulated learners under four conditions.

Conditions pair a sequencer with or without an object choice:

    predef  fixed ladder, imposed objects
    pco     fixed ladder, learner picks one of two object sets
    zpdes   adaptive sequencer, imposed objects
    zco     adaptive sequencer, learner picks the objects

Randomness is carved into four independent streams per learner (policy,
content, choice, response), all derived from the master seed and the
learner index but not from the condition. Conditions therefore share
dice: the same learner meets the same random world everywhere, which
pins down that the object choice influences nothing but the objects, and
makes between-condition comparisons paired. Reruns from a manifest are
byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bandit import BanditConfig, BanditError
from .config import ConfigError, read_json, zpd_rules_from_dict, \
    zpd_rules_to_dict
from .learners import (LearnerProfile, PopulationSpec, choose_object, learn,
                       likes, respond, sample_population)
from .metrics import (SessionTrace, StepRow, chronograph, cohort_scores,
                      pvalue_rows, read_trace, summary_rows, write_trace)
from .money import (activity_view, apply_choice, default_catalog,
                    generate_content, greedy_solution, load_kidlearn_space,
                    load_predef_sequence, offer_choice, verify_answer,
                    build_predef_policy)
from .predef import PredefPolicy
from .space import validate_space
from .zpdes import ZpdesPolicy

log = logging.getLogger(__name__)

CONDITIONS = ("predef", "pco", "zpdes", "zco")
CHOICE_CONDITIONS = frozenset({"pco", "zco"})
ADAPTIVE_CONDITIONS = frozenset({"zpdes", "zco"})

# Fixed tags keeping the seed streams of different purposes apart.
_POPULATION_TAG = 101
_SESSION_TAG = 11


class ExperimentError(Exception):
    pass


@dataclass
class ExperimentConfig:
    conditions: tuple[str, ...] = CONDITIONS
    steps: int = 100
    seed: int = 0
    population: PopulationSpec = field(default_factory=PopulationSpec)
    bandit: BanditConfig = field(default_factory=BanditConfig)
    space_path: str | None = None
    predef_path: str | None = None
    zpd_overrides: dict = field(default_factory=dict)
    chronograph_times: tuple[int, ...] = (1, 8, 20, 50)
    dump_weights: bool = False

    def validate(self) -> list[str]:
        problems = []
        for c in self.conditions:
            if c not in CONDITIONS:
                problems.append(f"unknown condition {c!r}")
        if len(set(self.conditions)) != len(self.conditions):
            problems.append("conditions repeat")
        if not self.conditions:
            problems.append("no conditions selected")
        if self.steps < 1:
            problems.append("steps must be positive")
        if self.population.size < 1:
            problems.append("population size must be positive")
        problems.extend(self.population.validate())
        return problems

    def to_dict(self) -> dict:
        return {
            "conditions": list(self.conditions),
            "steps": self.steps,
            "seed": self.seed,
            "population": self.population.to_dict(),
            "bandit": {"gamma": self.bandit.gamma, "beta": self.bandit.beta,
                       "eta": self.bandit.eta},
            "space_path": self.space_path,
            "predef_path": self.predef_path,
            "zpd_overrides": dict(self.zpd_overrides),
            "chronograph_times": list(self.chronograph_times),
            "dump_weights": self.dump_weights,
        }

    _KNOWN = frozenset((
        "conditions", "steps", "seed", "population", "bandit", "space_path",
        "predef_path", "zpd_overrides", "chronograph_times", "dump_weights"))
    _KNOWN_BANDIT = frozenset(("gamma", "beta", "eta"))
    _KNOWN_POPULATION = frozenset((
        "size", "liked_items", "competence_range", "learning_rate_range",
        "guess_range", "slip_range", "steepness_range", "zpd_band_range",
        "carry_penalty_range", "affinity_range", "ceiling_ranges"))

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        # A misspelled key would otherwise fall back to its default and
        # run a different experiment than the one asked for.
        for label, part, known in (
                ("config", data, cls._KNOWN),
                ("bandit", data.get("bandit", {}), cls._KNOWN_BANDIT),
                ("population", data.get("population", {}),
                 cls._KNOWN_POPULATION)):
            if not isinstance(part, dict):
                raise ConfigError(f"{label} section must be an object")
            unknown = sorted(set(part) - known)
            if unknown:
                raise ConfigError(
                    f"unknown {label} keys: {', '.join(unknown)}")
        try:
            bandit = data.get("bandit", {})
            return cls(
                conditions=tuple(data.get("conditions", CONDITIONS)),
                steps=int(data.get("steps", 100)),
                seed=int(data.get("seed", 0)),
                population=PopulationSpec.from_dict(
                    data.get("population", {})),
                bandit=BanditConfig(
                    gamma=float(bandit.get("gamma", 0.1)),
                    beta=float(bandit.get("beta", 0.8)),
                    eta=float(bandit.get("eta", 0.2))),
                space_path=data.get("space_path"),
                predef_path=data.get("predef_path"),
                zpd_overrides=dict(data.get("zpd_overrides", {})),
                chronograph_times=tuple(
                    int(t) for t in data.get("chronograph_times",
                                             (1, 8, 20, 50))),
                dump_weights=bool(data.get("dump_weights", False)),
            )
        except (TypeError, ValueError, BanditError) as exc:
            raise ConfigError(f"malformed experiment config: {exc}") from exc


def session_streams(seed: int, learner_id: int):
    """Policy, content, choice and response generators for one learner."""
    root = np.random.SeedSequence([seed, _SESSION_TAG, learner_id])
    return tuple(np.random.default_rng(s) for s in root.spawn(4))


def population_rng(seed: int):
    return np.random.default_rng(np.random.SeedSequence(
        [seed, _POPULATION_TAG]))


def _wrong_submission(target: int, wallet) -> tuple[int, ...]:
    # One coin over target: always wrong, always wallet-legal.
    return greedy_solution(target, wallet) + (min(wallet),)


@dataclass
class SessionResult:
    trace: SessionTrace
    profile_after: LearnerProfile
    weight_log: list[dict] | None = None


def run_session(condition: str, profile: LearnerProfile, steps: int,
                seed: int, learner_id: int, *, space=None, rules=None,
                bandit: BanditConfig | None = None, sequence=None,
                catalog=None, collect_weights: bool = False) -> SessionResult:
    """One learner against one sequencer for a fixed number of exercises.

    The three-trial flow is exercised end to end: a correct learner
    submits the greedy composition, a failing one burns all trials on a
    wrong one, and the exercise outcome is what the grader returns, not
    the simulator's coin flip read back directly.
    """
    if condition not in CONDITIONS:
        raise ExperimentError(f"unknown condition {condition!r}")
    if space is None or rules is None:
        space, rules = load_kidlearn_space()
    cat = catalog if catalog is not None else default_catalog()
    policy_rng, content_rng, choice_rng, response_rng = session_streams(
        seed, learner_id)

    if condition in ADAPTIVE_CONDITIONS:
        policy = ZpdesPolicy(space, rules, bandit or BanditConfig(),
                             rng=policy_rng)
    else:
        policy = build_predef_policy(space, sequence)

    learner = profile.copy()
    offer = condition in CHOICE_CONDITIONS
    trace = SessionTrace(condition, learner_id)
    weight_log: list[dict] | None = [] if collect_weights else None

    for t in range(1, steps + 1):
        activity = policy.propose()
        content = generate_content(activity, content_rng, cat)
        choice_idx = -1
        liked = False
        if offer:
            choice = offer_choice(content, choice_rng, cat)
            choice_idx = choose_object(learner, choice, choice_rng)
            content = apply_choice(content, choice, choice_idx)
            liked = likes(learner, content.objects)
        view = content.view
        outcome = respond(learner, view, response_rng, liked)

        if outcome:
            result = verify_answer(
                content, greedy_solution(content.target_cents,
                                         content.wallet), 0)
        else:
            wrong = _wrong_submission(content.target_cents, content.wallet)
            for trial in range(content.trials):
                result = verify_answer(content, wrong, trial)
        graded = 1 if result.correct else 0

        learn(learner, view, graded)
        label = ""
        if isinstance(policy, PredefPolicy):
            label = policy.current_step.label
        policy.record(activity, graded)
        trace.rows.append(StepRow(
            t=t, exercise_type=view.exercise_type, level=view.level,
            carried=view.carried, presentation=view.presentation,
            shape=view.shape, outcome=graded, choice=choice_idx,
            step_label=label))
        if collect_weights:
            weight_log.append(policy.weights.snapshot()
                              if hasattr(policy, "weights") else {})
    return SessionResult(trace, learner, weight_log)


def _dump_json(data, path: Path) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True,
                               ensure_ascii=False) + "\n", encoding="utf-8")


def _write_csv(path: Path, fieldnames: list[str], rows: list[dict]) -> None:
    import csv
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=fieldnames)
        w.writeheader()
        for r in rows:
            w.writerow(r)


def aggregate_outputs(traces: dict[str, list[SessionTrace]], out: Path,
                      chronograph_times) -> list[Path]:
    """Write the score curves, pairwise tests and chronograph tables."""
    cohorts = {c: cohort_scores(trs) for c, trs in traces.items()}
    files = []

    scores = out / "scores.csv"
    _write_csv(scores, ["condition", "score", "t", "mean", "sem"],
               summary_rows(cohorts))
    files.append(scores)

    if len(traces) > 1:
        pvals = out / "pvalues.csv"
        _write_csv(pvals, ["condition_a", "condition_b", "score", "t", "p",
                           "degenerate"], pvalue_rows(cohorts))
        files.append(pvals)

    chrono_rows = []
    for condition, trs in traces.items():
        for tr in trs:
            for t in chronograph_times:
                if t > len(tr):
                    continue
                for cell, (state, rate) in chronograph(tr, t).items():
                    chrono_rows.append({
                        "condition": condition, "learner": tr.learner_id,
                        "t": t, "cell": cell, "state": state,
                        "rate": rate})
    chrono = out / "chronograph.csv"
    _write_csv(chrono, ["condition", "learner", "t", "cell", "state",
                        "rate"], chrono_rows)
    files.append(chrono)
    return files


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def run_experiment(config: ExperimentConfig, out_dir: str | Path) -> dict:
    """Run every condition over one shared cohort and write the bundle.

    Produces per-learner trace CSVs, the cohort profile table, score and
    p-value curves, chronograph tables and a manifest with the resolved
    configuration and a digest of every written file. Rerunning from the
    manifest reproduces all bytes.
    """
    problems = config.validate()
    if problems:
        raise ExperimentError("; ".join(problems))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    space, rules = load_kidlearn_space(config.space_path)
    bad = validate_space(space).violations + rules.validate(space)
    if bad:
        raise ExperimentError("; ".join(bad))
    if config.zpd_overrides:
        merged = zpd_rules_to_dict(rules)
        merged.update(config.zpd_overrides)
        rules = zpd_rules_from_dict(merged)
        bad = rules.validate(space)
        if bad:
            raise ExperimentError("; ".join(bad))
    sequence = load_predef_sequence(config.predef_path)
    catalog = default_catalog()

    cohort = sample_population(config.population, population_rng(config.seed),
                               tuple(i.id for i in catalog.items))

    traces: dict[str, list[SessionTrace]] = {}
    written: list[Path] = []
    for condition in config.conditions:
        cond_dir = out / "traces" / condition
        cond_dir.mkdir(parents=True, exist_ok=True)
        traces[condition] = []
        for learner_id, profile in enumerate(cohort):
            result = run_session(
                condition, profile, config.steps, config.seed, learner_id,
                space=space, rules=rules, bandit=config.bandit,
                sequence=sequence, catalog=catalog,
                collect_weights=config.dump_weights)
            traces[condition].append(result.trace)
            path = cond_dir / f"learner_{learner_id:03d}.csv"
            write_trace(result.trace, path)
            written.append(path)
            if config.dump_weights and result.weight_log is not None:
                wpath = cond_dir / f"weights_{learner_id:03d}.jsonl"
                with open(wpath, "w", encoding="utf-8") as fh:
                    for snap in result.weight_log:
                        fh.write(json.dumps(snap, sort_keys=True) + "\n")
                written.append(wpath)

    profile_rows = []
    for learner_id, p in enumerate(cohort):
        row = {"learner": learner_id, "guess": p.guess, "slip": p.slip,
               "steepness": p.steepness, "zpd_band": p.zpd_band,
               "carry_penalty": p.carry_penalty}
        for t, c in p.competence.items():
            row[f"competence_{t}"] = c
        for t, c in p.max_competence.items():
            row[f"ceiling_{t}"] = c
        for t, c in p.learning_rate.items():
            row[f"rate_{t}"] = c
        profile_rows.append(row)
    profiles = out / "profiles.csv"
    _write_csv(profiles, list(profile_rows[0].keys()), profile_rows)
    written.append(profiles)

    written.extend(aggregate_outputs(traces, out, config.chronograph_times))

    manifest = {
        "package_version": __version__,
        "config": config.to_dict(),
        "seed_scheme": {
            "population": [config.seed, _POPULATION_TAG],
            "session": [config.seed, _SESSION_TAG, "learner_id"],
            "streams": ["policy", "content", "choice", "response"],
        },
        "files": {str(p.relative_to(out)): _sha256(p) for p in
                  sorted(written)},
    }
    _dump_json(manifest, out / "manifest.json")
    return manifest


def rerun_from_manifest(manifest_path: str | Path,
                        out_dir: str | Path) -> dict:
    data = read_json(manifest_path)
    if "config" not in data:
        raise ExperimentError(f"{manifest_path} is not a run manifest")
    return run_experiment(ExperimentConfig.from_dict(data["config"]), out_dir)


def report_from_traces(traces_dir: str | Path, out_dir: str | Path,
                       chronograph_times=(1, 8, 20, 50)) -> list[Path]:
    """Recompute every aggregate from trace CSVs alone."""
    root = Path(traces_dir)
    if not root.is_dir():
        raise ExperimentError(f"no such directory: {root}")
    traces: dict[str, list[SessionTrace]] = {}
    for cond_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        found = sorted(cond_dir.glob("learner_*.csv"))
        if not found:
            continue
        traces[cond_dir.name] = [
            read_trace(p, cond_dir.name, int(p.stem.split("_")[1]))
            for p in found]
    if not traces:
        raise ExperimentError(f"no traces under {root}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return aggregate_outputs(traces, out, chronograph_times)


def set_config_value(config_dict: dict, dotted: str, value):
    """Assign into a nested config dict by dotted path, parsing numbers."""
    parts = dotted.split(".")
    node = config_dict
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"{dotted}: {part} is not a section")
    leaf = parts[-1]
    try:
        parsed = json.loads(value) if isinstance(value, str) else value
    except json.JSONDecodeError:
        parsed = value
    node[leaf] = parsed
    return config_dict


def sweep(config: ExperimentConfig, param: str, values, out_dir: str | Path
          ) -> list[dict]:
    """Run the experiment once per value of one dotted config key."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    runs = []
    for value in values:
        payload = set_config_value(config.to_dict(), param, value)
        variant = ExperimentConfig.from_dict(payload)
        slug = str(value).replace("/", "_")
        run_dir = out / f"{param.replace('.', '_')}__{slug}"
        manifest = run_experiment(variant, run_dir)
        runs.append({"param": param, "value": value,
                     "out_dir": str(run_dir), "manifest": manifest})

    summary = []
    for run in runs:
        scores = Path(run["out_dir"]) / "scores.csv"
        import csv
        with open(scores, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.DictReader(fh) if r["score"] == "reached"]
        last_t = max(int(r["t"]) for r in rows)
        for r in rows:
            if int(r["t"]) == last_t:
                summary.append({"param": run["param"], "value": run["value"],
                                "condition": r["condition"],
                                "final_mean_reached": r["mean"],
                                "sem": r["sem"]})
    _write_csv(out / "sweep_summary.csv",
               ["param", "value", "condition", "final_mean_reached", "sem"],
               summary)
    return runs
