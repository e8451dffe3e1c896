"""Line-delimited JSON over stdin/stdout.

One request object per line in, one response object per line out, flushed
immediately so a pipe-driving client never blocks. Errors are reported as
{"error", "message", "status"} lines and the loop keeps going; only EOF
ends the session. The "health" pseudo-op answers without validation so
clients can probe a fresh subprocess.
"""
import json
import sys

from .service import ServiceError, TransformService


def serve_stdio(service: TransformService, stdin=None, stdout=None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            payload = json.loads(line)
        except ValueError:
            _emit(stdout, {"error": "malformed-request",
                           "message": "line is not valid JSON",
                           "status": 400})
            continue
        if isinstance(payload, dict) and payload.get("op") == "health":
            _emit(stdout, service.health())
            continue
        try:
            _emit(stdout, service.handle(payload))
        except ServiceError as exc:
            body = exc.payload()
            body["status"] = exc.status
            _emit(stdout, body)
    return 0


def _emit(stdout, obj: dict):
    stdout.write(json.dumps(obj) + "\n")
    stdout.flush()
