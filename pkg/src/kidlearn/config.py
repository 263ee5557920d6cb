"""Loading and validation of structured configuration.

Space definitions, ZPD rules and experiment settings travel as JSON.
Parameters are addressed as "group/param" and values as
"group/param/value" so rules files stay readable next to the space they
regulate.
"""

from __future__ import annotations

import json
from pathlib import Path

from .space import ActivitySpace, space_from_dict, validate_space
from .zpdes import Requirement, ZpdRules


class ConfigError(Exception):
    pass


def parse_param_key(text: str) -> tuple[str, str]:
    parts = text.split("/")
    if len(parts) != 2 or not all(parts):
        raise ConfigError(f"expected group/param, got {text!r}")
    return parts[0], parts[1]


def parse_value_key(text: str) -> tuple[str, str, str]:
    parts = text.split("/")
    if len(parts) != 3 or not all(parts):
        raise ConfigError(f"expected group/param/value, got {text!r}")
    return parts[0], parts[1], parts[2]


_KNOWN_ZPD_KEYS = frozenset((
    "lambda_zpd", "lambda_deact", "zpd_window", "history_window",
    "upgrade_boost", "requirements", "initial_active", "no_deactivation"))


def zpd_rules_from_dict(data: dict) -> ZpdRules:
    if not isinstance(data, dict):
        raise ConfigError("zpd section must be an object")
    # Silently defaulting a misspelled threshold would change sequencing
    # behavior without a trace.
    unknown = sorted(set(data) - _KNOWN_ZPD_KEYS)
    if unknown:
        raise ConfigError(f"unknown zpd keys: {', '.join(unknown)}")
    try:
        requirements = {
            parse_value_key(target): tuple(
                Requirement(value=parse_value_key(r["value"]),
                            threshold=float(r["threshold"]))
                for r in reqs)
            for target, reqs in data.get("requirements", {}).items()
        }
        initial_active = {
            parse_param_key(k): tuple(str(v) for v in values)
            for k, values in data.get("initial_active", {}).items()
        }
        no_deactivation = frozenset(
            parse_param_key(k) for k in data.get("no_deactivation", []))
        return ZpdRules(
            lambda_zpd=float(data.get("lambda_zpd", 0.75)),
            lambda_deact=float(data.get("lambda_deact", 0.9)),
            zpd_window=int(data.get("zpd_window", 4)),
            history_window=int(data.get("history_window", 4)),
            upgrade_boost=float(data.get("upgrade_boost", 1.5)),
            requirements=requirements,
            initial_active=initial_active,
            no_deactivation=no_deactivation,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed zpd rules: {exc}") from exc


def zpd_rules_to_dict(rules: ZpdRules) -> dict:
    return {
        "lambda_zpd": rules.lambda_zpd,
        "lambda_deact": rules.lambda_deact,
        "zpd_window": rules.zpd_window,
        "history_window": rules.history_window,
        "upgrade_boost": rules.upgrade_boost,
        "initial_active": {
            f"{g}/{p}": list(v) for (g, p), v in rules.initial_active.items()
        },
        "no_deactivation": sorted(f"{g}/{p}"
                                  for g, p in rules.no_deactivation),
        "requirements": {
            f"{g}/{p}/{v}": [
                {"value": "/".join(r.value), "threshold": r.threshold}
                for r in reqs
            ]
            for (g, p, v), reqs in rules.requirements.items()
        },
    }


def load_space_config(data: dict) -> tuple[ActivitySpace, ZpdRules]:
    """Build a space plus its rules from one JSON document.

    A missing zpd section falls back to the rule defaults, which give a
    plain first-value-active ladder policy.
    """
    space = space_from_dict(data)
    rules = zpd_rules_from_dict(data.get("zpd", {}))
    return space, rules


def validate_space_config(data: dict) -> list[str]:
    """Violations of a space document, empty when it is usable."""
    try:
        space, rules = load_space_config(data)
    except Exception as exc:
        return [str(exc)]
    problems = list(validate_space(space).violations)
    problems.extend(rules.validate(space))
    return problems


def read_json(path: str | Path) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"no such file: {p}")
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p} is not valid JSON: {exc}") from exc
