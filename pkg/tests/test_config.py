"""JSON config parsing: keys, rules, space documents."""

import json

import pytest

from kidlearn.config import (ConfigError, load_space_config, parse_param_key,
                             parse_value_key, read_json, validate_space_config,
                             zpd_rules_from_dict, zpd_rules_to_dict)
from kidlearn.money import load_kidlearn_space
from kidlearn.zpdes import Requirement, ZpdRules


def test_key_parsing():
    assert parse_param_key("types/exercise_type") == ("types",
                                                      "exercise_type")
    assert parse_value_key("levels_m/level/3") == ("levels_m", "level", "3")
    for bad in ("types", "a/b/c/d", "a//b", ""):
        with pytest.raises(ConfigError):
            parse_param_key(bad)
    with pytest.raises(ConfigError):
        parse_value_key("a/b")


def test_rules_round_trip():
    rules = ZpdRules(
        lambda_zpd=0.7, zpd_window=6,
        requirements={("g", "p", "2"): (Requirement(("g", "p", "1"), 0.8),)},
        initial_active={("g", "p"): ("1",)},
        no_deactivation=frozenset({("g", "q")}),
    )
    assert zpd_rules_from_dict(zpd_rules_to_dict(rules)) == rules


def test_rules_defaults_from_empty_dict():
    rules = zpd_rules_from_dict({})
    assert rules == ZpdRules()


def test_rules_from_dict_rejects_garbage():
    with pytest.raises(ConfigError):
        zpd_rules_from_dict({"zpd_window": "wide"})
    with pytest.raises(ConfigError):
        zpd_rules_from_dict({"requirements": {"a/b/c": [{"value": "x/y"}]}})


def test_rules_from_dict_rejects_misspelled_keys():
    with pytest.raises(ConfigError, match="unknown zpd keys: lambda_zdp"):
        zpd_rules_from_dict({"lambda_zdp": 0.8})
    with pytest.raises(ConfigError, match="must be an object"):
        zpd_rules_from_dict([0.8])


def test_packaged_space_document_is_clean():
    space, rules = load_kidlearn_space()
    assert rules.validate(space) == []


def test_validate_space_config_reports_instead_of_raising():
    assert validate_space_config({"nonsense": True})
    doc = {
        "primary_group": "g",
        "groups": [{"id": "g", "parameters": [
            {"id": "p", "ordered_progression": True,
             "values": [{"id": "1"}, {"id": "2"}]}]}],
        "zpd": {"upgrade_boost": 0.1},
    }
    assert any("upgrade_boost" in v for v in validate_space_config(doc))
    doc["zpd"]["upgrade_boost"] = 1.5
    assert validate_space_config(doc) == []
    space, rules = load_space_config(doc)
    assert space.primary_group == "g"
    assert rules.upgrade_boost == 1.5


def test_read_json_errors(tmp_path):
    with pytest.raises(ConfigError):
        read_json(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(ConfigError):
        read_json(bad)
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"a": 1}))
    assert read_json(good) == {"a": 1}
