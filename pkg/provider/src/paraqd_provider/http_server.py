"""FastAPI transport.

POST /v1/transform takes {"op", "text", "params"} and returns
{"outputs", "model_id", "latency_ms"}. The body is parsed by hand so a
syntactically broken request gets the same 400 shape as a semantically
broken one, rather than FastAPI's 422.
"""
import json

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .service import ServiceError, TransformService


def build_app(service: TransformService) -> FastAPI:
    app = FastAPI(title="paraqd-provider", docs_url=None, redoc_url=None)

    @app.exception_handler(ServiceError)
    async def _service_error(_req: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status, content=exc.payload())

    @app.get("/v1/health")
    async def health():
        return service.health()

    @app.post("/v1/transform")
    async def transform(request: Request):
        raw = await request.body()
        try:
            payload = json.loads(raw)
        except (ValueError, UnicodeDecodeError):
            raise ServiceError(400, "malformed-request",
                               "body is not valid JSON") from None
        return service.handle(payload)

    return app


def run_http(service: TransformService, host: str, port: int):
    import uvicorn
    uvicorn.run(build_app(service), host=host, port=port, log_level="warning")
