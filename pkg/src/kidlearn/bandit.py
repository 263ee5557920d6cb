"""Multi-armed bandit over an activity space.

Each parameter of each group carries one expert: a weight per value plus
an active flag. Sampling a value mixes the normalized weights of the
active values with a uniform exploration term,

    p(v) = (1 - gamma) * w(v) / sum_active(w) + gamma / n_active,

and an answered activity feeds back through a multiplicative update,

    w(v) <- beta * w(v) + eta * max(r, 0),

applied to every value the activity selected. Rewards below zero are
clamped at update time so a regressing window cannot drive weights
negative; callers still see the raw reward.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .space import Activity, ActivitySpace, Parameter, assemble_activity

log = logging.getLogger(__name__)

ParamKey = tuple[str, str]          # (group id, parameter id)
ValueKey = tuple[str, str, str]     # (group id, parameter id, value id)


class BanditError(Exception):
    pass


@dataclass(frozen=True)
class BanditConfig:
    """Sampling and update constants.

    gamma is the exploration rate, beta the decay and eta the gain of the
    weight update. The exploration distribution itself is fixed: uniform
    over the currently active values.
    """
    gamma: float = 0.1
    beta: float = 0.8
    eta: float = 0.2

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise BanditError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not 0.0 <= self.beta <= 1.0:
            raise BanditError(f"beta must lie in [0, 1], got {self.beta}")
        if self.eta < 0.0:
            raise BanditError(f"eta must be nonnegative, got {self.eta}")


class ExpertWeights:
    """Weights and active flags for every value of a space.

    Active sets are what the sampler normalizes over; the curriculum
    policy mutates them as the learner progresses. Weights of inactive
    values are kept (a later activation may overwrite them anyway).
    """

    def __init__(self, space: ActivitySpace):
        self.space = space
        self._weights: dict[ParamKey, dict[str, float]] = {}
        self._active: dict[ParamKey, set[str]] = {}
        for g, p in space.iter_parameters():
            key = (g.id, p.id)
            self._weights[key] = {v.id: 0.0 for v in p.values}
            self._active[key] = set()

    @classmethod
    def uniform(cls, space: ActivitySpace,
                active: dict[ParamKey, list[str]] | None = None
                ) -> "ExpertWeights":
        """All listed values active with equal weight summing to 1.

        With ``active`` omitted every value of every parameter starts
        active. Listed values must exist; empty lists are rejected.
        """
        w = cls(space)
        for g, p in space.iter_parameters():
            key = (g.id, p.id)
            ids = p.value_ids()
            chosen = list(ids) if active is None else list(active.get(key, ids))
            if not chosen:
                raise BanditError(f"parameter {key} would start with no "
                                  "active values")
            for vid in chosen:
                if vid not in w._weights[key]:
                    raise BanditError(f"unknown value {vid!r} for {key}")
                w._active[key].add(vid)
                w._weights[key][vid] = 1.0 / len(chosen)
        return w

    def weight(self, key: ParamKey, value_id: str) -> float:
        return self._weights[key][value_id]

    def set_weight(self, key: ParamKey, value_id: str, w: float) -> None:
        self._weights[key][value_id] = w

    def scale_weight(self, key: ParamKey, value_id: str, factor: float) -> None:
        self._weights[key][value_id] *= factor

    def is_active(self, key: ParamKey, value_id: str) -> bool:
        return value_id in self._active[key]

    def activate(self, key: ParamKey, value_id: str, w: float) -> None:
        if value_id not in self._weights[key]:
            raise BanditError(f"unknown value {value_id!r} for {key}")
        self._active[key].add(value_id)
        self._weights[key][value_id] = w

    def deactivate(self, key: ParamKey, value_id: str) -> None:
        self._active[key].discard(value_id)

    def active_ids(self, key: ParamKey, param: Parameter) -> list[str]:
        """Active value ids in declaration order (the sampling order)."""
        act = self._active[key]
        return [v.id for v in param.values if v.id in act]

    def active_count(self, key: ParamKey) -> int:
        return len(self._active[key])

    def snapshot(self) -> dict:
        """JSON-friendly copy of all weights and active flags."""
        out: dict = {}
        for (gid, pid), weights in self._weights.items():
            out[f"{gid}/{pid}"] = {
                vid: {"w": w, "active": vid in self._active[(gid, pid)]}
                for vid, w in weights.items()
            }
        return out


def value_probabilities(param: Parameter, key: ParamKey,
                        weights: ExpertWeights,
                        config: BanditConfig) -> dict[str, float]:
    """Exact sampling distribution over the active values of one parameter.

    When every active weight is zero the normalized term is undefined, so
    the sampler falls back to the uniform exploration term alone. That
    situation is logged once per call site because it usually means the
    update starved a parameter.
    """
    active = weights.active_ids(key, param)
    if not active:
        raise BanditError(f"parameter {key} has no active values to sample")
    raw = [weights.weight(key, vid) for vid in active]
    total = sum(raw)
    n = len(active)
    if total <= 0.0:
        log.warning("all active weights of %s are zero, sampling uniformly",
                    key)
        return {vid: 1.0 / n for vid in active}
    g = config.gamma
    return {vid: (w / total) * (1.0 - g) + g / n
            for vid, w in zip(active, raw)}


def sample_value(param: Parameter, key: ParamKey, weights: ExpertWeights,
                 config: BanditConfig, rng) -> str:
    """Draw one value id according to ``value_probabilities``."""
    probs = value_probabilities(param, key, weights, config)
    u = rng.random()
    acc = 0.0
    last = None
    for vid, p in probs.items():
        acc += p
        last = vid
        if u < acc:
            return vid
    # Floating point can leave acc fractionally below 1.
    return last


@dataclass
class StochasticActivitySpace:
    """An activity space paired with its expert weights."""
    space: ActivitySpace
    weights: ExpertWeights
    config: BanditConfig

    def gen_activity(self, rng) -> Activity:
        """Sample a full activity, one independent draw per parameter."""
        def pick(group, param):
            return sample_value(param, (group.id, param.id), self.weights,
                                self.config, rng)
        return assemble_activity(self.space, pick)

    def update_weights(self, activity: Activity,
                       rewards: dict[str, float]) -> None:
        """Apply the multiplicative update for one answered activity.

        ``rewards`` maps group id to that instantiation's reward. Every
        instantiated group must have one; a missing entry is a hard error
        rather than a silent skip.
        """
        cfg = self.config
        for inst in activity.instantiations:
            if inst.group_id not in rewards:
                raise BanditError(
                    f"no reward supplied for group {inst.group_id!r}")
            r = max(rewards[inst.group_id], 0.0)
            for pid, vid in inst.selections.items():
                key = (inst.group_id, pid)
                w = self.weights.weight(key, vid)
                self.weights.set_weight(key, vid, cfg.beta * w + cfg.eta * r)
