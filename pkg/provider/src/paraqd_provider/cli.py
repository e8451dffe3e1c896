"""Entry point: paraqd-provider serve [--mode http|stdio] [--mock] ...

Mock mode serves the deterministic canned transforms and needs nothing
installed beyond this package; real mode loads hub checkpoints on first
use and answers 503 until they are ready (or forever, if they can't load).
"""
import argparse
import json
import sys

from .service import DEFAULT_TIMEOUT_S, TransformService
from .transforms import MockBackend


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="paraqd-provider")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("serve", help="serve the transform API")
    s.add_argument("--mode", choices=("http", "stdio"), default="http")
    s.add_argument("--mock", action="store_true",
                   help="use canned deterministic transforms, no models")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8080)
    s.add_argument("--timeout-s", type=float, default=DEFAULT_TIMEOUT_S,
                   help="per-request budget before a 503")
    s.add_argument("--models", default=None,
                   help="JSON map of op -> checkpoint overrides")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.mock:
        backend = MockBackend()
    else:
        from .models import RealBackend
        overrides = json.loads(args.models) if args.models else None
        backend = RealBackend(model_ids=overrides)
    service = TransformService(backend, timeout_s=args.timeout_s)
    if args.mode == "stdio":
        from .stdio_server import serve_stdio
        return serve_stdio(service)
    from .http_server import run_http
    run_http(service, args.host, args.port)
    return 0


if __name__ == "__main__":
    sys.exit(main())
