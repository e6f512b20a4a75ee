import logging
import time
import traceback
import uuid

from fastapi import Request
from fastapi.responses import JSONResponse

from app.config import settings
from app.exceptions import BaseAppException

logger = logging.getLogger(__name__)

_HEADERS_TO_LOG = ['content-type', 'user-agent', 'accept', 'x-forwarded-for', 'host', 'referer']


def extract_request_id(request: Request) -> str:
    """Request ID from the incoming headers, or a fresh one."""
    state_id = getattr(request.state, "request_id", None)
    if state_id:
        return state_id
    for header in ('X-Request-ID', 'X-Cloud-Trace-Context'):
        value = request.headers.get(header)
        if value is not None:
            return value
    return 'SM-' + str(uuid.uuid4())


def get_client_ip(request: Request) -> str:
    """Extract client IP from various headers."""
    client_ip = request.headers.get("x-forwarded-for")
    if client_ip:
        return client_ip.split(",")[0].strip()
    return request.client.host if request.client else "unknown"


def get_loggable_headers(request: Request) -> str:
    headers = [f"{name}: '{request.headers[name]}'" for name in _HEADERS_TO_LOG if request.headers.get(name)]
    return " | ".join(headers) if headers else "No relevant headers"


def truncate(text: str) -> str:
    limit = settings.LOG_TEXT_TRUNCATE_LENGTH
    return text if len(text) <= limit else text[:limit] + '...'


def error_response(request_id: str, exc: BaseAppException) -> JSONResponse:
    """
    Serialize an application exception into the common error body.

    Returns:
        JSONResponse with error, status_code, request_id, exit_code and details
    """
    return JSONResponse(
        status_code=exc.status_code,
        content={
            "error": exc.message,
            "status_code": exc.status_code,
            "request_id": request_id,
            "exit_code": exc.exit_code,
            "details": exc.details,
        },
    )


async def logging_middleware(request: Request, call_next):
    """Log every request with its ID, client, duration and status."""
    request_id = extract_request_id(request)
    request.state.request_id = request_id
    started = time.perf_counter()

    logger.info(f"[REQUEST] {request.method} {request.url.path} | "
                f"Request ID: {request_id} | "
                f"Client IP: {get_client_ip(request)} | "
                f"Headers: {get_loggable_headers(request)}")

    if settings.ENABLE_DETAILED_LOGGING:
        try:
            body = await request.body()
            text = body.decode("utf-8").replace("\n", " ") if body else "<empty>"
            logger.info(f"[REQUEST BODY] {request_id} | {truncate(text)}")
        except Exception as e:
            logger.warning(f"[REQUEST BODY] {request_id} | Error reading body: {e}")

    try:
        response = await call_next(request)
    except Exception as e:
        elapsed = time.perf_counter() - started
        logger.error(f"[ERROR] {request_id} | Unhandled {type(e).__name__} after {elapsed:.3f}s: {e}")
        if settings.SHOW_DETAILED_ERRORS:
            logger.error(traceback.format_exc())
        content = {"error": "Internal server error", "status_code": 500, "request_id": request_id}
        if settings.SHOW_DETAILED_ERRORS:
            content["details"] = {"exception": type(e).__name__, "message": str(e)}
        return JSONResponse(status_code=500, content=content)

    elapsed = time.perf_counter() - started
    response.headers["X-Request-ID"] = request_id
    level = logging.WARNING if response.status_code >= 400 else logging.INFO
    logger.log(level, f"[RESPONSE] {request.method} {request.url.path} | "
                      f"Request ID: {request_id} | Status: {response.status_code} | "
                      f"Duration: {elapsed:.3f}s")
    return response
