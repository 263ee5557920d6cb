"""Simulated learners for driving the sequencers at desk scale.

This model is deliberately small and is not calibrated against real
children. A learner has one competence value per exercise family; the
chance of answering an exercise correctly follows a guess-and-slip
logistic in the gap between competence and the exercise level, with a
fixed handicap when the exercise forces a carry. Competence only grows
on a success that happened near the learner's current level, which is
what makes sequencing matter: hammering exercises far above or below the
learner teaches nothing.

Object preferences exist so that conditions offering a choice between
objects have something to act on. They steer the choice only; success
probability ignores the object unless an engagement bonus is explicitly
switched on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .money import ActivityView, EXERCISE_TYPES, LADDER_TOP, ObjectChoice


class LearnerError(Exception):
    pass


def _sigmoid(x: float) -> float:
    if x >= 0:
        z = math.exp(-min(x, 60.0))
        return 1.0 / (1.0 + z)
    z = math.exp(max(x, -60.0))
    return z / (1.0 + z)


@dataclass
class LearnerProfile:
    competence: dict[str, float]
    learning_rate: dict[str, float]
    max_competence: dict[str, float]
    guess: float = 0.1
    slip: float = 0.05
    steepness: float = 3.0
    zpd_band: float = 1.0
    carry_penalty: float = 0.5
    object_affinity: dict[str, float] = field(default_factory=dict)
    # Off by default: when positive, a liked object raises the effective
    # competence inside the response model. Exploratory knob only.
    engagement_bonus: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.guess < 1.0 or not 0.0 <= self.slip < 1.0:
            raise LearnerError("guess and slip must lie in [0, 1)")
        if self.guess + self.slip >= 1.0:
            raise LearnerError("guess + slip must stay below 1")
        for t in EXERCISE_TYPES:
            if t not in self.competence:
                raise LearnerError(f"no competence for family {t}")
            if self.competence[t] > self.max_competence.get(t, math.inf):
                raise LearnerError(f"competence for {t} above its ceiling")

    def copy(self) -> "LearnerProfile":
        return replace(self, competence=dict(self.competence),
                       learning_rate=dict(self.learning_rate),
                       max_competence=dict(self.max_competence),
                       object_affinity=dict(self.object_affinity))


def success_probability(profile: LearnerProfile, view: ActivityView,
                        liked: bool = False) -> float:
    """Chance of solving the exercise, before any dice are rolled."""
    gap = profile.competence[view.exercise_type] - view.level + 0.5
    if view.carried == "with":
        gap -= profile.carry_penalty
    if liked and profile.engagement_bonus > 0.0:
        gap += profile.engagement_bonus
    base = _sigmoid(profile.steepness * gap)
    return profile.guess + (1.0 - profile.guess - profile.slip) * base


def respond(profile: LearnerProfile, view: ActivityView, rng,
            liked: bool = False) -> int:
    return 1 if rng.random() < success_probability(profile, view, liked) else 0


def learn(profile: LearnerProfile, view: ActivityView, outcome: int) -> None:
    """Competence update after one exercise.

    Growth requires a success within zpd_band of the current competence,
    and saturates at the per-family ceiling.
    """
    if not outcome:
        return
    t = view.exercise_type
    c = profile.competence[t]
    if abs(view.level - c) > profile.zpd_band:
        return
    profile.competence[t] = min(c + profile.learning_rate[t],
                                profile.max_competence[t])


def choose_object(profile: LearnerProfile, choice: ObjectChoice, rng) -> int:
    """Pick a display position, softmax over summed object affinities.

    Without preferences both options score zero and the pick is a fair
    coin.
    """
    scores = [sum(profile.object_affinity.get(o.id, 0.0) for o in option)
              for option in choice.options]
    m = max(scores)
    exps = [math.exp(s - m) for s in scores]
    p_first = exps[0] / (exps[0] + exps[1])
    return 0 if rng.random() < p_first else 1


def likes(profile: LearnerProfile, objects) -> bool:
    return any(profile.object_affinity.get(o.id, 0.0) > 0.0 for o in objects)


@dataclass
class PopulationSpec:
    """Uniform ranges the cohort is drawn from.

    Competence ceilings are drawn per family, so a learner can be strong
    with customer exercises and weak with change, which is exactly the
    kind of profile a fixed linear curriculum serves poorly.
    """
    size: int = 60
    competence_range: tuple[float, float] = (0.3, 1.2)
    learning_rate_range: tuple[float, float] = (0.2, 0.45)
    ceiling_ranges: dict[str, tuple[float, float]] = field(
        default_factory=lambda: {
            t: (1.5, LADDER_TOP[t] + 0.5) for t in EXERCISE_TYPES})
    guess_range: tuple[float, float] = (0.05, 0.15)
    slip_range: tuple[float, float] = (0.02, 0.08)
    steepness_range: tuple[float, float] = (2.5, 3.5)
    zpd_band_range: tuple[float, float] = (0.8, 1.5)
    carry_penalty_range: tuple[float, float] = (0.3, 0.7)
    # Each learner likes this many catalog items, with these strengths.
    liked_items: int = 3
    affinity_range: tuple[float, float] = (0.5, 2.0)

    def validate(self) -> list[str]:
        problems = []
        if self.size < 0:
            problems.append("population size must be nonnegative")
        for name in ("competence_range", "learning_rate_range", "guess_range",
                     "slip_range", "steepness_range", "zpd_band_range",
                     "carry_penalty_range", "affinity_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                problems.append(f"{name} is inverted")
        for t in EXERCISE_TYPES:
            if t not in self.ceiling_ranges:
                problems.append(f"no ceiling range for family {t}")
        if self.liked_items < 0:
            problems.append("liked_items must be nonnegative")
        return problems

    def to_dict(self) -> dict:
        return {
            "size": self.size,
            "competence_range": list(self.competence_range),
            "learning_rate_range": list(self.learning_rate_range),
            "ceiling_ranges": {t: list(r)
                               for t, r in self.ceiling_ranges.items()},
            "guess_range": list(self.guess_range),
            "slip_range": list(self.slip_range),
            "steepness_range": list(self.steepness_range),
            "zpd_band_range": list(self.zpd_band_range),
            "carry_penalty_range": list(self.carry_penalty_range),
            "liked_items": self.liked_items,
            "affinity_range": list(self.affinity_range),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PopulationSpec":
        spec = cls()
        out = {}
        for name in ("size", "liked_items"):
            out[name] = int(data.get(name, getattr(spec, name)))
        for name in ("competence_range", "learning_rate_range", "guess_range",
                     "slip_range", "steepness_range", "zpd_band_range",
                     "carry_penalty_range", "affinity_range"):
            lo, hi = data.get(name, getattr(spec, name))
            out[name] = (float(lo), float(hi))
        ceilings = data.get("ceiling_ranges")
        if ceilings is not None:
            out["ceiling_ranges"] = {t: (float(lo), float(hi))
                                     for t, (lo, hi) in ceilings.items()}
        return cls(**out)


def _draw(rng, bounds: tuple[float, float]) -> float:
    lo, hi = bounds
    return lo if lo == hi else lo + (hi - lo) * rng.random()


def sample_population(spec: PopulationSpec, rng,
                      catalog_ids: tuple[str, ...] = ()
                      ) -> list[LearnerProfile]:
    problems = spec.validate()
    if problems:
        raise LearnerError("; ".join(problems))
    cohort = []
    for _ in range(spec.size):
        competence = {t: _draw(rng, spec.competence_range)
                      for t in EXERCISE_TYPES}
        ceilings = {t: max(_draw(rng, spec.ceiling_ranges[t]), competence[t])
                    for t in EXERCISE_TYPES}
        affinity: dict[str, float] = {}
        if catalog_ids and spec.liked_items:
            picks = rng.choice(len(catalog_ids),
                               size=min(spec.liked_items, len(catalog_ids)),
                               replace=False)
            for idx in picks:
                affinity[catalog_ids[int(idx)]] = _draw(rng,
                                                        spec.affinity_range)
        cohort.append(LearnerProfile(
            competence=competence,
            learning_rate={t: _draw(rng, spec.learning_rate_range)
                           for t in EXERCISE_TYPES},
            max_competence=ceilings,
            guess=_draw(rng, spec.guess_range),
            slip=_draw(rng, spec.slip_range),
            steepness=_draw(rng, spec.steepness_range),
            zpd_band=_draw(rng, spec.zpd_band_range),
            carry_penalty=_draw(rng, spec.carry_penalty_range),
            object_affinity=affinity,
        ))
    return cohort
