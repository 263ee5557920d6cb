"""ZPDES: curriculum sequencing by empirical learning progress.

The policy keeps, per parameter value, a short window of the outcomes of
the activities that used it. The reward of a value is the recent half of
its window minus the older half, so a value whose success rate is rising
earns a positive reward while both a mastered value (all successes) and
an out-of-reach value (all failures) earn exactly zero.

On top of the bandit sits the zone of proximal development: the subset of
values the sampler is allowed to draw. Rules expand it along ordered
ladders when the learner is globally succeeding, retire values the
learner has mastered, hold values back until their prerequisites are met,
and, when a prerequisite blocks an expansion, boost the weights that lead
the learner toward that prerequisite.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field

from .bandit import (BanditConfig, ExpertWeights, ParamKey,
                     StochasticActivitySpace, ValueKey)
from .space import Activity, ActivitySpace

log = logging.getLogger(__name__)


class ZpdError(Exception):
    pass


class HistoryBook:
    """Per-value outcome windows of fixed length."""

    def __init__(self, window: int):
        if window < 2 or window % 2 != 0:
            raise ZpdError(f"outcome window must be even and >= 2, "
                           f"got {window}")
        self.window = window
        self._hist: dict[ValueKey, deque] = {}

    def push(self, key: ValueKey, outcome: int) -> None:
        h = self._hist.get(key)
        if h is None:
            h = deque(maxlen=self.window)
            self._hist[key] = h
        h.append(outcome)

    def outcomes(self, key: ValueKey) -> tuple[int, ...]:
        h = self._hist.get(key)
        return tuple(h) if h else ()

    def full(self, key: ValueKey) -> bool:
        h = self._hist.get(key)
        return h is not None and len(h) == self.window

    def rate(self, key: ValueKey) -> float:
        """Success rate over the stored outcomes (0 when empty)."""
        h = self._hist.get(key)
        if not h:
            return 0.0
        return sum(h) / len(h)

    def learning_progress(self, key: ValueKey) -> float:
        """Recent-half mean minus older-half mean, 0 until the window fills."""
        h = self._hist.get(key)
        if h is None or len(h) < self.window:
            return 0.0
        half = self.window // 2
        seq = list(h)
        return sum(seq[half:]) / half - sum(seq[:half]) / half


def compute_reward(activity: Activity, histories: HistoryBook
                   ) -> dict[str, float]:
    """Raw reward per instantiated group of an answered activity.

    A group's reward is the mean learning progress of the values it
    selected. Most groups here have one parameter, where this reduces to
    that value's own progress. Call after pushing the new outcome.
    """
    rewards: dict[str, float] = {}
    for inst in activity.instantiations:
        lps = [histories.learning_progress((inst.group_id, pid, vid))
               for pid, vid in inst.selections.items()]
        rewards[inst.group_id] = sum(lps) / len(lps)
    return rewards


@dataclass(frozen=True)
class Requirement:
    value: ValueKey
    threshold: float


@dataclass
class ZpdRules:
    """Expert-authored regulation of the zone of proximal development.

    lambda_zpd      global success rate at or above which ladders expand
    lambda_deact    per-value success rate above which a value retires
    zpd_window      outcomes feeding the global success rate
    history_window  per-value outcome window (even; also the reward window)
    upgrade_boost   weight multiplier applied toward blocking prerequisites
                    (1.0 turns the mechanism off)
    requirements    value -> prerequisites that must be mastered first
    initial_active  ordered parameter -> ladder prefix active at start
    no_deactivation ordered parameters exempt from retirement
    """
    lambda_zpd: float = 0.75
    lambda_deact: float = 0.9
    zpd_window: int = 4
    history_window: int = 4
    upgrade_boost: float = 1.5
    requirements: dict[ValueKey, tuple[Requirement, ...]] = field(
        default_factory=dict)
    initial_active: dict[ParamKey, tuple[str, ...]] = field(
        default_factory=dict)
    no_deactivation: frozenset[ParamKey] = frozenset()

    def validate(self, space: ActivitySpace) -> list[str]:
        problems: list[str] = []
        if not 0.0 <= self.lambda_zpd <= 1.0:
            problems.append("lambda_zpd must lie in [0, 1]")
        if not 0.0 <= self.lambda_deact <= 1.0:
            problems.append("lambda_deact must lie in [0, 1]")
        if self.zpd_window < 1:
            problems.append("zpd_window must be positive")
        if self.history_window < 2 or self.history_window % 2 != 0:
            problems.append("history_window must be even and >= 2")
        if self.upgrade_boost < 1.0:
            problems.append("upgrade_boost must be >= 1")

        params = {(g.id, p.id): p for g, p in space.iter_parameters()}

        def check_value(key: ValueKey, where: str) -> None:
            gid, pid, vid = key
            p = params.get((gid, pid))
            if p is None:
                problems.append(f"{where}: unknown parameter {gid}/{pid}")
            elif vid not in p.value_ids():
                problems.append(f"{where}: unknown value {gid}/{pid}/{vid}")

        for pkey, prefix in self.initial_active.items():
            p = params.get(pkey)
            if p is None:
                problems.append(f"initial_active: unknown parameter {pkey}")
                continue
            if not prefix:
                problems.append(f"initial_active for {pkey} is empty")
            elif p.ordered_progression:
                if tuple(prefix) != p.value_ids()[:len(prefix)]:
                    problems.append(
                        f"initial_active for {pkey} must be a ladder prefix")
            elif set(prefix) != set(p.value_ids()):
                problems.append(
                    f"{pkey} has no ladder, all its values stay active")

        for target, reqs in self.requirements.items():
            check_value(target, "requirement target")
            p = params.get(target[:2])
            if p is not None and not p.ordered_progression:
                problems.append(
                    f"requirement on {target} is dead, the parameter has "
                    "no ladder")
            for r in reqs:
                check_value(r.value, f"prerequisite of {target}")
                if not 0.0 <= r.threshold <= 1.0:
                    problems.append(
                        f"threshold for {target} must lie in [0, 1]")
                if r.value == target:
                    problems.append(f"{target} requires itself")

        for pkey in self.no_deactivation:
            if pkey not in params:
                problems.append(f"no_deactivation: unknown parameter {pkey}")
        return problems


@dataclass
class ZpdState:
    """Mutable progression bookkeeping next to the expert weights.

    frontier counts how many ladder values have ever been activated per
    ordered parameter; activation order along a ladder is therefore
    monotone even after earlier values retire. recent holds the outcomes
    feeding the global success rate.
    """
    frontier: dict[ParamKey, int]
    recent: deque
    deactivated: set[ValueKey] = field(default_factory=set)

    @property
    def zpd_rate(self) -> float:
        if not self.recent:
            return 0.0
        return sum(self.recent) / len(self.recent)


@dataclass
class ZpdUpdate:
    activated: list[ValueKey] = field(default_factory=list)
    deactivated: list[ValueKey] = field(default_factory=list)
    boosted: list[ValueKey] = field(default_factory=list)


def initial_weights(space: ActivitySpace, rules: ZpdRules) -> ExpertWeights:
    """Experts at session start: the initial ZPD shares weight uniformly.

    Ordered parameters start from their configured ladder prefix (first
    value only when unconfigured). Parameters without a ladder keep all
    values active for good: they are variants, not difficulty steps.
    """
    active: dict[ParamKey, list[str]] = {}
    for g, p in space.iter_parameters():
        key = (g.id, p.id)
        if p.ordered_progression:
            prefix = rules.initial_active.get(key, (p.values[0].id,))
            active[key] = list(prefix)
        else:
            active[key] = list(p.value_ids())
    return ExpertWeights.uniform(space, active)


def initial_state(space: ActivitySpace, rules: ZpdRules) -> ZpdState:
    frontier: dict[ParamKey, int] = {}
    for g, p in space.iter_parameters():
        if p.ordered_progression:
            key = (g.id, p.id)
            prefix = rules.initial_active.get(key, (p.values[0].id,))
            frontier[key] = len(prefix)
    return ZpdState(frontier=frontier, recent=deque(maxlen=rules.zpd_window))


def _requirement_ok(req: Requirement, histories: HistoryBook) -> bool:
    # Mastery means a full window at or above the threshold; a thin
    # history is not evidence either way, so it does not satisfy.
    return histories.full(req.value) and histories.rate(req.value) >= req.threshold


def _unlockers(space: ActivitySpace) -> dict[str, list[ValueKey]]:
    """group id -> values whose selection unlocks it."""
    out: dict[str, list[ValueKey]] = {g.id: [] for g in space.groups}
    for g, p in space.iter_parameters():
        for v in p.values:
            if v.dependent_group is not None:
                out[v.dependent_group].append((g.id, p.id, v.id))
    return out


def _boost_toward(prereq: ValueKey, space: ActivitySpace,
                  weights: ExpertWeights, rules: ZpdRules,
                  unlockers: dict[str, list[ValueKey]],
                  update: ZpdUpdate) -> None:
    """Raise the weights that route the learner toward a prerequisite.

    Within the prerequisite's own ladder every active value up to and
    including it is boosted, then the unlock chain back to the primary
    group gets the same treatment so the exercise family that exposes the
    prerequisite is proposed more often.
    """
    gid, pid, vid = prereq
    param = space.group(gid).parameter(pid)
    key = (gid, pid)
    limit = param.index_of(vid) if param.ordered_progression else None
    for i, v in enumerate(param.values):
        if limit is not None and i > limit:
            break
        if limit is None and v.id != vid:
            continue
        if weights.is_active(key, v.id):
            weights.scale_weight(key, v.id, rules.upgrade_boost)
            update.boosted.append((gid, pid, v.id))

    seen_groups = {gid}
    frontier = [gid]
    while frontier:
        current = frontier.pop()
        for ugid, upid, uvid in unlockers.get(current, ()):
            ukey = (ugid, upid)
            if weights.is_active(ukey, uvid):
                weights.scale_weight(ukey, uvid, rules.upgrade_boost)
                update.boosted.append((ugid, upid, uvid))
            if ugid not in seen_groups:
                seen_groups.add(ugid)
                frontier.append(ugid)


def update_zpd(state: ZpdState, rules: ZpdRules, histories: HistoryBook,
               weights: ExpertWeights, space: ActivitySpace) -> ZpdUpdate:
    """Apply the ZPD rules once, after an answered activity.

    Expansion fires on a full recent window with success rate at or above
    lambda_zpd and tries to activate the next never-activated ladder value
    of every ordered parameter, one value each. A candidate whose
    prerequisites are unmet stays out; instead the weights leading to the
    blocking prerequisites are boosted. Retirement then drops any active
    ladder value mastered beyond lambda_deact on a full window, always
    keeping at least one value per parameter.
    """
    update = ZpdUpdate()
    unlockers = None

    expand = (len(state.recent) == rules.zpd_window
              and state.zpd_rate >= rules.lambda_zpd)
    if expand:
        for g, p in space.iter_parameters():
            if not p.ordered_progression:
                continue
            key = (g.id, p.id)
            pos = state.frontier[key]
            if pos >= len(p.values):
                continue
            candidate = p.values[pos]
            cand_key = (g.id, p.id, candidate.id)
            blocking = [r for r in rules.requirements.get(cand_key, ())
                        if not _requirement_ok(r, histories)]
            if not blocking:
                floor = min(weights.weight(key, vid)
                            for vid in weights.active_ids(key, p))
                weights.activate(key, candidate.id, floor)
                state.frontier[key] = pos + 1
                update.activated.append(cand_key)
            elif rules.upgrade_boost > 1.0:
                if unlockers is None:
                    unlockers = _unlockers(space)
                for r in blocking:
                    _boost_toward(r.value, space, weights, rules, unlockers,
                                  update)

    for g, p in space.iter_parameters():
        if not p.ordered_progression:
            continue
        key = (g.id, p.id)
        if key in rules.no_deactivation:
            continue
        for vid in weights.active_ids(key, p):
            if weights.active_count(key) <= 1:
                break
            vkey = (g.id, p.id, vid)
            if histories.full(vkey) and histories.rate(vkey) > rules.lambda_deact:
                weights.deactivate(key, vid)
                state.deactivated.add(vkey)
                update.deactivated.append(vkey)

    return update


@dataclass
class StepReport:
    t: int
    activity: Activity
    outcome: int
    rewards: dict[str, float]
    zpd: ZpdUpdate


class ZpdesPolicy:
    """Session-scoped sequencer: propose an activity, record its outcome."""

    def __init__(self, space: ActivitySpace, rules: ZpdRules | None = None,
                 config: BanditConfig | None = None, rng=None):
        self.space = space
        self.rules = rules if rules is not None else ZpdRules()
        problems = self.rules.validate(space)
        if problems:
            raise ZpdError("; ".join(problems))
        self.sas = StochasticActivitySpace(
            space, initial_weights(space, self.rules),
            config if config is not None else BanditConfig())
        self.state = initial_state(space, self.rules)
        self.histories = HistoryBook(self.rules.history_window)
        self.rng = rng
        self.t = 0

    @property
    def weights(self) -> ExpertWeights:
        return self.sas.weights

    def propose(self) -> Activity:
        return self.sas.gen_activity(self.rng)

    def record(self, activity: Activity, outcome: int) -> StepReport:
        self.t += 1
        for gid, pid, vid in activity.selected():
            self.histories.push((gid, pid, vid), outcome)
        self.state.recent.append(outcome)
        rewards = compute_reward(activity, self.histories)
        self.sas.update_weights(activity, rewards)
        zpd = update_zpd(self.state, self.rules, self.histories,
                         self.weights, self.space)
        return StepReport(self.t, activity, outcome, rewards, zpd)

    def step(self, answer) -> StepReport:
        """One full loop turn: ``answer(activity) -> 0 or 1``."""
        activity = self.propose()
        return self.record(activity, int(answer(activity)))

    def available_activity_count(self) -> int:
        """Distinct activities the current ZPD can produce.

        Counts over the groups reachable through active unlocking values
        only; a group behind a retired value contributes nothing.
        """
        reachable: list[str] = [self.space.primary_group]
        seen = {self.space.primary_group}
        total = 1
        i = 0
        while i < len(reachable):
            g = self.space.group(reachable[i])
            i += 1
            for p in g.parameters:
                key = (g.id, p.id)
                active = self.weights.active_ids(key, p)
                total *= len(active)
                for vid in active:
                    dep = p.value(vid).dependent_group
                    if dep is not None and dep not in seen:
                        seen.add(dep)
                        reachable.append(dep)
        return total
