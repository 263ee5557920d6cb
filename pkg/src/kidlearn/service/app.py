"""FastAPI service: live tutoring sessions plus batch experiment runs.

Sessions hold a sequencer and the pending exercise server-side; clients
fetch the next exercise, optionally pick between two object sets, and
submit denomination lists until the exercise is solved or the trials run
out. Batch endpoints wrap the experiment runner so the command line can
stay a thin client.
"""

from __future__ import annotations

import threading
import uuid

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..bandit import BanditConfig, BanditError
from ..config import validate_space_config, zpd_rules_from_dict, \
    zpd_rules_to_dict
from ..experiment import (CHOICE_CONDITIONS, CONDITIONS, ADAPTIVE_CONDITIONS,
                          ExperimentConfig, ExperimentError,
                          report_from_traces, run_experiment, sweep)
from ..config import ConfigError
from ..metrics import SessionTrace, StepRow, score_series
from ..money import (ContentError, apply_choice, default_catalog,
                     format_price, generate_content, load_kidlearn_space,
                     offer_choice, verify_answer, build_predef_policy)
from ..predef import PredefPolicy
from ..space import SpaceError
from ..zpdes import ZpdError, ZpdesPolicy
from . import models


class _LiveSession:
    def __init__(self, sid: str, condition: str, seed: int,
                 budget: int | None, bandit: BanditConfig,
                 zpd_overrides: dict):
        self.id = sid
        self.condition = condition
        self.budget = budget
        self.lock = threading.Lock()
        space, rules = load_kidlearn_space()
        if zpd_overrides:
            merged = zpd_rules_to_dict(rules)
            merged.update(zpd_overrides)
            rules = zpd_rules_from_dict(merged)
        root = np.random.SeedSequence([seed, 77])
        policy_rng, self.content_rng, self.choice_rng = (
            np.random.default_rng(s) for s in root.spawn(3))
        if condition in ADAPTIVE_CONDITIONS:
            self.policy = ZpdesPolicy(space, rules, bandit, rng=policy_rng)
        else:
            self.policy = build_predef_policy(space)
        self.t = 0
        self.trace = SessionTrace(condition, -1)
        self.activity = None
        self.content = None
        self.choice = None
        self.choice_idx = -1
        self.trials_used = 0
        self.awaiting: str | None = None

    @property
    def done(self) -> bool:
        return self.budget is not None and self.t >= self.budget \
            and self.awaiting is None


def _objects_out(objects, presentation: str) -> list[models.ObjectOut]:
    return [models.ObjectOut(
        id=o.id, name=o.name, price_cents=o.price_cents,
        price_display=format_price(o.price_cents, presentation))
        for o in objects]


def _content_out(session: _LiveSession) -> models.ContentOut:
    c = session.content
    v = c.view
    return models.ContentOut(
        role=c.role, exercise_type=v.exercise_type, level=v.level,
        carried_numbers=v.carried, price_presentation=v.presentation,
        money_shape=v.shape,
        objects=_objects_out(c.objects, v.presentation),
        paid_cents=c.paid_cents,
        paid_display=None if c.paid_cents is None else format_price(
            c.paid_cents, v.presentation),
        wallet=list(c.wallet),
        trials_left=c.trials - session.trials_used)


def create_app() -> FastAPI:
    app = FastAPI(title="kidlearn", version=__version__)
    sessions: dict[str, _LiveSession] = {}
    catalog = default_catalog()

    def _session(sid: str) -> _LiveSession:
        try:
            return sessions[sid]
        except KeyError:
            raise HTTPException(404, f"no session {sid}")

    @app.get("/health", response_model=models.HealthResponse)
    def health():
        return models.HealthResponse(status="ok", version=__version__)

    @app.post("/validate", response_model=models.ValidateResponse)
    def validate(req: models.ValidateRequest):
        data = req.config
        if "groups" in data:
            problems = validate_space_config(data)
        else:
            try:
                problems = ExperimentConfig.from_dict(data).validate()
            except (ConfigError, Exception) as exc:  # noqa: BLE001
                problems = [str(exc)]
        return models.ValidateResponse(valid=not problems, problems=problems)

    @app.post("/sessions", response_model=models.SessionInfo, status_code=201)
    def create_session(req: models.SessionCreate):
        if req.condition not in CONDITIONS:
            raise HTTPException(422, f"unknown condition {req.condition!r}")
        sid = uuid.uuid4().hex[:12]
        try:
            bandit = BanditConfig(**req.bandit) if req.bandit \
                else BanditConfig()
            sessions[sid] = _LiveSession(sid, req.condition, req.seed,
                                         req.steps_budget, bandit,
                                         req.zpd_overrides)
        except (ZpdError, ConfigError, BanditError, TypeError) as exc:
            raise HTTPException(400, str(exc))
        return models.SessionInfo(session_id=sid, condition=req.condition,
                                  t=0)

    @app.get("/sessions/{sid}/next", response_model=models.NextResponse)
    def next_exercise(sid: str):
        s = _session(sid)
        with s.lock:
            if s.done:
                return models.NextResponse(session_id=sid, t=s.t,
                                           awaiting="none", done=True)
            if s.awaiting is None:
                s.activity = s.policy.propose()
                s.content = generate_content(s.activity, s.content_rng,
                                             catalog)
                s.trials_used = 0
                s.choice_idx = -1
                if s.condition in CHOICE_CONDITIONS:
                    s.choice = offer_choice(s.content, s.choice_rng, catalog)
                    s.awaiting = "choice"
                else:
                    s.choice = None
                    s.awaiting = "answer"
            if s.awaiting == "choice":
                pres = s.content.view.presentation
                return models.NextResponse(
                    session_id=sid, t=s.t + 1, awaiting="choice",
                    choice=models.ChoiceOut(options=[
                        _objects_out(opt, pres)
                        for opt in s.choice.options]))
            return models.NextResponse(session_id=sid, t=s.t + 1,
                                       awaiting="answer",
                                       content=_content_out(s))

    @app.post("/sessions/{sid}/choice", response_model=models.NextResponse)
    def pick_objects(sid: str, req: models.ChoiceRequest):
        s = _session(sid)
        with s.lock:
            if s.awaiting != "choice":
                raise HTTPException(409, "no pending object choice")
            if req.option not in (0, 1):
                raise HTTPException(422, "option must be 0 or 1")
            s.content = apply_choice(s.content, s.choice, req.option)
            s.choice_idx = req.option
            s.awaiting = "answer"
            return models.NextResponse(session_id=sid, t=s.t + 1,
                                       awaiting="answer",
                                       content=_content_out(s))

    @app.post("/sessions/{sid}/answer", response_model=models.AnswerResponse)
    def answer(sid: str, req: models.AnswerRequest):
        s = _session(sid)
        with s.lock:
            if s.awaiting != "answer":
                raise HTTPException(409, "no exercise awaiting an answer")
            try:
                result = verify_answer(s.content, req.denominations,
                                       s.trials_used)
            except ContentError as exc:
                raise HTTPException(422, str(exc))
            s.trials_used = result.trials_used
            outcome = None
            if result.exercise_over:
                outcome = 1 if result.correct else 0
                s.t += 1
                v = s.content.view
                label = s.policy.current_step.label \
                    if isinstance(s.policy, PredefPolicy) else ""
                s.policy.record(s.activity, outcome)
                s.trace.rows.append(StepRow(
                    t=s.t, exercise_type=v.exercise_type, level=v.level,
                    carried=v.carried, presentation=v.presentation,
                    shape=v.shape, outcome=outcome, choice=s.choice_idx,
                    step_label=label))
                s.awaiting = None
            return models.AnswerResponse(
                correct=result.correct, trials_left=result.trials_left,
                exercise_over=result.exercise_over, outcome=outcome,
                solution=list(result.solution) if result.solution else None)

    @app.get("/sessions/{sid}/trace", response_model=models.TraceResponse)
    def trace(sid: str):
        s = _session(sid)
        rows = [models.TraceRow(
            t=r.t, exercise_type=r.exercise_type, level=r.level,
            carried_numbers=r.carried, price_presentation=r.presentation,
            money_shape=r.shape, outcome=r.outcome, choice=r.choice,
            step_label=r.step_label) for r in s.trace.rows]
        return models.TraceResponse(session_id=sid, condition=s.condition,
                                    rows=rows)

    @app.get("/sessions/{sid}/scores", response_model=models.ScoresResponse)
    def scores(sid: str):
        s = _session(sid)
        if not s.trace.rows:
            return models.ScoresResponse(session_id=sid, t=[], reached=[],
                                         success=[])
        reached, success = score_series(s.trace)
        return models.ScoresResponse(
            session_id=sid, t=[r.t for r in s.trace.rows],
            reached=[float(x) for x in reached],
            success=[float(x) for x in success])

    @app.delete("/sessions/{sid}", status_code=204)
    def close_session(sid: str):
        _session(sid)
        del sessions[sid]

    @app.post("/experiments", response_model=models.ExperimentResponse)
    def experiment(req: models.ExperimentRequest):
        try:
            config = ExperimentConfig.from_dict(req.config)
            if req.seed is not None:
                config.seed = req.seed
            problems = config.validate()
            if problems:
                raise HTTPException(400, "; ".join(problems))
            manifest = run_experiment(config, req.out_dir)
        except HTTPException:
            raise
        except (ConfigError, ExperimentError, ZpdError, SpaceError) as exc:
            raise HTTPException(400, str(exc))
        return models.ExperimentResponse(out_dir=req.out_dir,
                                         manifest=manifest)

    @app.post("/experiments/sweep", response_model=models.SweepResponse)
    def run_sweep(req: models.SweepRequest):
        try:
            config = ExperimentConfig.from_dict(req.config)
            runs = sweep(config, req.param, req.values, req.out_dir)
        except (ConfigError, ExperimentError, ZpdError, SpaceError) as exc:
            raise HTTPException(400, str(exc))
        return models.SweepResponse(out_dir=req.out_dir, runs=[
            models.SweepRunOut(param=r["param"], value=str(r["value"]),
                               out_dir=r["out_dir"]) for r in runs])

    @app.post("/reports", response_model=models.ReportResponse)
    def report(req: models.ReportRequest):
        try:
            files = report_from_traces(req.traces_dir, req.out_dir)
        except ExperimentError as exc:
            raise HTTPException(400, str(exc))
        return models.ReportResponse(files=[str(f) for f in files])

    return app


app = create_app()
