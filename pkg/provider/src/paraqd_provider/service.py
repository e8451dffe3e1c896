"""Transport-independent request handling.

Both servers funnel into TransformService.handle: validate the request,
run the backend under the configured per-request timeout, wrap the result
in the wire response. Failures carry an HTTP-style status (400 for a bad
request, 503 when a model cannot answer) that the stdio server simply
embeds in its error line.
"""
import time
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout

from .transforms import OPS

DEFAULT_TIMEOUT_S = 60.0


class ServiceError(Exception):
    def __init__(self, status: int, error: str, message: str):
        super().__init__(message)
        self.status = status
        self.error = error
        self.message = message

    def payload(self) -> dict:
        return {"error": self.error, "message": self.message}


class BackendUnavailable(Exception):
    """Raised by a backend when its model can't be loaded or run."""


def validate_request(payload) -> tuple[str, str, dict]:
    if not isinstance(payload, dict):
        raise ServiceError(400, "malformed-request", "body must be an object")
    op = payload.get("op")
    if op not in OPS:
        raise ServiceError(400, "malformed-request",
                           f"op must be one of {', '.join(OPS)}")
    text = payload.get("text")
    if not isinstance(text, str) or not text.strip():
        raise ServiceError(400, "malformed-request",
                           "text must be a non-empty string")
    params = payload.get("params")
    if params is None:
        params = {}
    if not isinstance(params, dict):
        raise ServiceError(400, "malformed-request", "params must be a map")
    return op, text, params


class TransformService:
    def __init__(self, backend, timeout_s: float = DEFAULT_TIMEOUT_S):
        self.backend = backend
        self.timeout_s = timeout_s
        # requests are serial per connection; the pool only exists so a
        # stuck model call can be abandoned at the deadline
        self._pool = ThreadPoolExecutor(max_workers=4)

    def health(self) -> dict:
        return {"ok": True, "ops": list(OPS)}

    def handle(self, payload) -> dict:
        op, text, params = validate_request(payload)
        started = time.perf_counter()
        future = self._pool.submit(self.backend.transform, op, text, params)
        try:
            outputs, model_id = future.result(timeout=self.timeout_s)
        except FutureTimeout:
            raise ServiceError(503, "timeout",
                               f"{op} exceeded {self.timeout_s:.1f}s") \
                from None
        except BackendUnavailable as exc:
            raise ServiceError(503, "model-unavailable", str(exc)) from None
        if not outputs:
            raise ServiceError(503, "model-unavailable",
                               f"{op} produced no outputs")
        return {"outputs": list(outputs), "model_id": model_id,
                "latency_ms": (time.perf_counter() - started) * 1000.0}
