"""Structure checks for activity spaces: validation, assembly, round trips."""

import pytest

from kidlearn.space import (Activity, ActivitySpace, Parameter,
                            ParameterGroup, ParameterValue, SpaceError,
                            assemble_activity, space_from_dict,
                            space_to_dict, validate_space)


def tiny_space(**kwargs):
    groups = (
        ParameterGroup("root", (
            Parameter("kind", (
                ParameterValue("a", dependent_group="detail"),
                ParameterValue("b"),
            ), ordered_progression=True),
        )),
        ParameterGroup("detail", (
            Parameter("level", (
                ParameterValue("1"), ParameterValue("2"),
            ), ordered_progression=True),
        )),
    )
    return ActivitySpace(groups=groups, primary_group="root", **kwargs)


def test_valid_space_has_no_violations():
    assert validate_space(tiny_space()).ok


def test_duplicate_ids_reported():
    space = ActivitySpace(groups=(
        ParameterGroup("g", (Parameter("p", (ParameterValue("v"),)),)),
        ParameterGroup("g", (Parameter("p", (ParameterValue("v"),)),)),
    ), primary_group="g")
    report = validate_space(space)
    assert any("duplicate group" in v for v in report.violations)


def test_dangling_unlock_reported():
    space = ActivitySpace(groups=(
        ParameterGroup("g", (Parameter("p", (
            ParameterValue("v", dependent_group="ghost"),)),)),
    ), primary_group="g")
    report = validate_space(space)
    assert any("unknown group" in v for v in report.violations)


def test_unreachable_group_needs_unused_flag():
    space = ActivitySpace(groups=(
        ParameterGroup("g", (Parameter("p", (ParameterValue("v"),)),)),
        ParameterGroup("island", (Parameter("p", (ParameterValue("v"),)),)),
    ), primary_group="g")
    assert any("unreachable" in v for v in validate_space(space).violations)

    flagged = ActivitySpace(groups=(
        space.groups[0],
        ParameterGroup("island", space.groups[1].parameters, unused=True),
    ), primary_group="g")
    assert validate_space(flagged).ok


def test_unlock_cycle_detected():
    space = ActivitySpace(groups=(
        ParameterGroup("g1", (Parameter("p", (
            ParameterValue("v", dependent_group="g2"),)),)),
        ParameterGroup("g2", (Parameter("p", (
            ParameterValue("v", dependent_group="g1"),)),)),
    ), primary_group="g1")
    assert any("cycle" in v for v in validate_space(space).violations)


def test_missing_primary_group():
    space = ActivitySpace(groups=(
        ParameterGroup("g", (Parameter("p", (ParameterValue("v"),)),)),
    ), primary_group="nope")
    assert any("does not exist" in v for v in validate_space(space).violations)


def test_assemble_pulls_in_dependent_group():
    space = tiny_space()
    act = assemble_activity(space, lambda g, p: g.parameters[0].values[0].id)
    assert [inst.group_id for inst in act.instantiations] == ["root", "detail"]
    assert act.value_of("root", "kind") == "a"
    assert act.value_of("detail", "level") == "1"


def test_assemble_skips_unselected_branch():
    space = tiny_space()
    act = assemble_activity(space, lambda g, p: "b" if p.id == "kind" else "1")
    assert [inst.group_id for inst in act.instantiations] == ["root"]
    assert act.value_of("detail", "level") is None


def test_assemble_rejects_illegal_value():
    with pytest.raises(SpaceError):
        assemble_activity(tiny_space(), lambda g, p: "nonsense")


def test_selected_yields_every_choice():
    act = Activity(instantiations=tuple())
    assert list(act.selected()) == []
    space = tiny_space()
    act = assemble_activity(space, lambda g, p: g.parameters[0].values[0].id)
    assert set(act.selected()) == {("root", "kind", "a"),
                                   ("detail", "level", "1")}


def test_dict_round_trip():
    space = tiny_space()
    again = space_from_dict(space_to_dict(space))
    assert again == space


def test_from_dict_rejects_malformed():
    with pytest.raises(SpaceError):
        space_from_dict({"groups": [{"id": "g"}]})  # parameters missing


def test_parameter_lookup_errors():
    space = tiny_space()
    with pytest.raises(SpaceError):
        space.group("missing")
    param = space.group("root").parameter("kind")
    with pytest.raises(SpaceError):
        param.index_of("zzz")
    assert param.index_of("b") == 1
