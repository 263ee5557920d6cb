"""Command line: a thin client over the tutoring service.

Every subcommand speaks HTTP to the FastAPI app. Without --server the
app is mounted in-process, so batch runs need no running daemon and stay
deterministic; with --server the same requests go to a remote instance.

Exit codes: 0 success, 1 validation failure, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import ConfigError, read_json


def _client(server: str | None):
    if server:
        import httpx
        return httpx.Client(base_url=server, timeout=None)
    from fastapi.testclient import TestClient
    from .service.app import create_app
    return TestClient(create_app())


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _post(client, path: str, payload: dict):
    response = client.post(path, json=payload)
    if response.status_code >= 500:
        raise RuntimeError(response.json().get("detail", response.text))
    return response


def cmd_validate(args) -> int:
    try:
        config = read_json(args.config)
    except ConfigError as exc:
        return _fail(str(exc), 1)
    with _client(args.server) as client:
        body = _post(client, "/validate", {"config": config}).json()
    if body["valid"]:
        print(f"{args.config}: valid")
        return 0
    for problem in body["problems"]:
        print(f"{args.config}: {problem}", file=sys.stderr)
    return 1


def cmd_run(args) -> int:
    try:
        config = read_json(args.config)
    except ConfigError as exc:
        return _fail(str(exc), 1)
    payload = {"config": config, "out_dir": args.out}
    if args.seed is not None:
        payload["seed"] = args.seed
    if args.dump_weights:
        payload["config"]["dump_weights"] = True
    with _client(args.server) as client:
        response = _post(client, "/experiments", payload)
        if response.status_code == 400:
            return _fail(response.json()["detail"], 1)
        body = response.json()
    manifest = body["manifest"]
    n_files = len(manifest["files"])
    print(f"run complete: {body['out_dir']} ({n_files} files)")
    print(f"conditions: {', '.join(manifest['config']['conditions'])}, "
          f"steps: {manifest['config']['steps']}, "
          f"cohort: {manifest['config']['population']['size']}, "
          f"seed: {manifest['config']['seed']}")
    return 0


def cmd_report(args) -> int:
    payload = {"traces_dir": args.traces, "out_dir": args.out}
    with _client(args.server) as client:
        response = _post(client, "/reports", payload)
        if response.status_code == 400:
            return _fail(response.json()["detail"], 1)
        body = response.json()
    for f in body["files"]:
        print(f)
    return 0


def cmd_sweep(args) -> int:
    try:
        config = read_json(args.config)
    except ConfigError as exc:
        return _fail(str(exc), 1)
    values = args.values.split(",")
    payload = {"config": config, "param": args.param, "values": values,
               "out_dir": args.out}
    with _client(args.server) as client:
        response = _post(client, "/experiments/sweep", payload)
        if response.status_code == 400:
            return _fail(response.json()["detail"], 1)
        body = response.json()
    for run in body["runs"]:
        print(f"{run['param']} = {run['value']}: {run['out_dir']}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn
    uvicorn.run("kidlearn.service.app:app", host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kidlearn",
        description="Curriculum sequencing for the money game")
    parser.add_argument("--server", default=None,
                        help="Base URL of a running service; defaults to an "
                             "in-process app")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="Run a batch experiment from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None,
                   help="Override the config's master seed")
    p.add_argument("--out", required=True, help="Output directory")
    p.add_argument("--dump-weights", action="store_true",
                   help="Write per-step expert weight snapshots")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="Check a space or experiment config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("report", help="Recompute aggregates from traces")
    p.add_argument("--traces", required=True,
                   help="Directory holding per-condition trace folders")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("sweep", help="Run once per value of one config key")
    p.add_argument("--config", required=True)
    p.add_argument("--param", required=True,
                   help="Dotted config key, e.g. bandit.gamma")
    p.add_argument("--values", required=True,
                   help="Comma-separated values")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("serve", help="Run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail(str(exc), 1)
    except Exception as exc:  # noqa: BLE001
        return _fail(str(exc), 2)


if __name__ == "__main__":
    sys.exit(main())
