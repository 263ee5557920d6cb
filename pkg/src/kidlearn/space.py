"""Hierarchical activity spaces.

An activity space is a set of parameter groups. Each group holds one or
more parameters, each parameter an ordered list of values. A value may
unlock a further group, so instantiating the primary group can pull in
dependent groups recursively. One fully instantiated set of groups is an
activity: the tuple of (group, parameter, value) selections handed to the
content generator.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field


class SpaceError(Exception):
    """Raised for structurally invalid spaces or illegal selections."""


@dataclass(frozen=True)
class ParameterValue:
    id: str
    label: str = ""
    dependent_group: str | None = None


@dataclass(frozen=True)
class Parameter:
    id: str
    values: tuple[ParameterValue, ...]
    # Ordered parameters form a difficulty ladder; value order is the
    # progression order. Unordered parameters are plain variants.
    ordered_progression: bool = False

    def value_ids(self) -> tuple[str, ...]:
        return tuple(v.id for v in self.values)

    def value(self, value_id: str) -> ParameterValue:
        for v in self.values:
            if v.id == value_id:
                return v
        raise SpaceError(f"parameter {self.id!r} has no value {value_id!r}")

    def index_of(self, value_id: str) -> int:
        for i, v in enumerate(self.values):
            if v.id == value_id:
                return i
        raise SpaceError(f"parameter {self.id!r} has no value {value_id!r}")


@dataclass(frozen=True)
class ParameterGroup:
    id: str
    parameters: tuple[Parameter, ...]
    # A group may be declared unused so validation does not insist on a
    # path from the primary group (authoring convenience).
    unused: bool = False

    def parameter(self, param_id: str) -> Parameter:
        for p in self.parameters:
            if p.id == param_id:
                return p
        raise SpaceError(f"group {self.id!r} has no parameter {param_id!r}")


@dataclass(frozen=True)
class ActivitySpace:
    groups: tuple[ParameterGroup, ...]
    primary_group: str

    def group(self, group_id: str) -> ParameterGroup:
        for g in self.groups:
            if g.id == group_id:
                return g
        raise SpaceError(f"no group {group_id!r}")

    def iter_parameters(self):
        for g in self.groups:
            for p in g.parameters:
                yield g, p


@dataclass
class GroupInstantiation:
    group_id: str
    # parameter id -> selected value id, in declaration order
    selections: dict[str, str]


@dataclass
class Activity:
    instantiations: tuple[GroupInstantiation, ...]

    def selected(self):
        """Yield (group_id, parameter_id, value_id) for every selection."""
        for inst in self.instantiations:
            for pid, vid in inst.selections.items():
                yield inst.group_id, pid, vid

    def value_of(self, group_id: str, param_id: str) -> str | None:
        for inst in self.instantiations:
            if inst.group_id == group_id:
                return inst.selections.get(param_id)
        return None


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_space(space: ActivitySpace) -> ValidationReport:
    """Check structural invariants without raising.

    Covers id uniqueness, non-emptiness, dangling unlock references,
    reachability from the primary group and absence of unlock cycles.
    """
    report = ValidationReport()
    seen_groups: set[str] = set()
    for g in space.groups:
        if g.id in seen_groups:
            report.violations.append(f"duplicate group id {g.id!r}")
        seen_groups.add(g.id)
        if not g.parameters:
            report.violations.append(f"group {g.id!r} has no parameters")
        seen_params: set[str] = set()
        for p in g.parameters:
            if p.id in seen_params:
                report.violations.append(
                    f"duplicate parameter id {p.id!r} in group {g.id!r}")
            seen_params.add(p.id)
            if not p.values:
                report.violations.append(
                    f"parameter {g.id}/{p.id} has no values")
            seen_values: set[str] = set()
            for v in p.values:
                if v.id in seen_values:
                    report.violations.append(
                        f"duplicate value id {v.id!r} in {g.id}/{p.id}")
                seen_values.add(v.id)
                if v.dependent_group is not None and v.dependent_group not in {
                        grp.id for grp in space.groups}:
                    report.violations.append(
                        f"value {g.id}/{p.id}/{v.id} unlocks unknown group "
                        f"{v.dependent_group!r}")

    if space.primary_group not in seen_groups:
        report.violations.append(
            f"primary group {space.primary_group!r} does not exist")
        return report

    # Unlock edges: group -> groups its values can pull in.
    edges: dict[str, set[str]] = {g.id: set() for g in space.groups}
    for g in space.groups:
        for p in g.parameters:
            for v in p.values:
                if v.dependent_group is not None and v.dependent_group in edges:
                    edges[g.id].add(v.dependent_group)

    # Reachability from the primary group.
    reachable = {space.primary_group}
    frontier = [space.primary_group]
    while frontier:
        gid = frontier.pop()
        for nxt in edges[gid]:
            if nxt not in reachable:
                reachable.add(nxt)
                frontier.append(nxt)
    for g in space.groups:
        if g.id not in reachable and not g.unused:
            report.violations.append(
                f"group {g.id!r} is unreachable from {space.primary_group!r} "
                "and not declared unused")

    # Cycle detection over the unlock graph.
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {gid: WHITE for gid in edges}

    def visit(gid: str) -> bool:
        color[gid] = GRAY
        for nxt in edges[gid]:
            if color[nxt] == GRAY:
                return True
            if color[nxt] == WHITE and visit(nxt):
                return True
        color[gid] = BLACK
        return False

    for gid in edges:
        if color[gid] == WHITE and visit(gid):
            report.violations.append("unlock graph contains a cycle")
            break

    return report


def assemble_activity(space: ActivitySpace, selector) -> Activity:
    """Instantiate the primary group and every group it unlocks.

    ``selector(group, parameter) -> value id`` supplies one value per
    parameter. Groups unlocked by selected values are queued in selection
    order; each group is instantiated at most once. The unlock graph is
    validated to be acyclic, so this terminates after at most one pass
    over the groups.
    """
    queue: deque[str] = deque([space.primary_group])
    done: set[str] = {space.primary_group}
    instantiations: list[GroupInstantiation] = []
    while queue:
        group = space.group(queue.popleft())
        selections: dict[str, str] = {}
        for param in group.parameters:
            vid = selector(group, param)
            value = param.value(vid)  # raises SpaceError when illegal
            selections[param.id] = vid
            dep = value.dependent_group
            if dep is not None and dep not in done:
                done.add(dep)
                queue.append(dep)
        instantiations.append(GroupInstantiation(group.id, selections))
    return Activity(tuple(instantiations))


def space_to_dict(space: ActivitySpace) -> dict:
    return {
        "primary_group": space.primary_group,
        "groups": [
            {
                "id": g.id,
                **({"unused": True} if g.unused else {}),
                "parameters": [
                    {
                        "id": p.id,
                        "ordered_progression": p.ordered_progression,
                        "values": [
                            {
                                "id": v.id,
                                **({"label": v.label} if v.label else {}),
                                **({"dependent_group": v.dependent_group}
                                   if v.dependent_group else {}),
                            }
                            for v in p.values
                        ],
                    }
                    for p in g.parameters
                ],
            }
            for g in space.groups
        ],
    }


def space_from_dict(data: dict) -> ActivitySpace:
    try:
        groups = tuple(
            ParameterGroup(
                id=g["id"],
                unused=bool(g.get("unused", False)),
                parameters=tuple(
                    Parameter(
                        id=p["id"],
                        ordered_progression=bool(
                            p.get("ordered_progression", False)),
                        values=tuple(
                            ParameterValue(
                                id=str(v["id"]),
                                label=v.get("label", ""),
                                dependent_group=v.get("dependent_group"),
                            )
                            for v in p["values"]
                        ),
                    )
                    for p in g["parameters"]
                ),
            )
            for g in data["groups"]
        )
        primary = data["primary_group"]
    except (KeyError, TypeError) as exc:
        raise SpaceError(f"malformed space definition: {exc}") from exc
    return ActivitySpace(groups=groups, primary_group=primary)
