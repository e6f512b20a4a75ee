import logging

from fastapi import Request
from slowapi import Limiter
from slowapi.errors import RateLimitExceeded
from slowapi.util import get_remote_address

from app.config import settings
from app.exceptions import RateLimitError
from app.logging_middleware import error_response, extract_request_id

logger = logging.getLogger(__name__)


class CustomLimiter(Limiter):
    """Rate limiter for the compute-heavy endpoints, with a trusted-IP whitelist."""

    def __init__(self):
        super().__init__(key_func=get_remote_address)
        self.trusted_ips = set(settings.TRUSTED_IPS)

    def is_trusted_ip(self, request: Request) -> bool:
        """Check if the request IP is in the trusted list."""
        client_ip = get_remote_address(request)
        if client_ip in self.trusted_ips:
            logger.debug(f"Trusted IP {client_ip} bypassing rate limit")
            return True
        return False

    def _check_request_limit(self, request, *args, **kwargs):
        """Skip the limit check for trusted IPs."""
        if self.is_trusted_ip(request):
            return
        return super()._check_request_limit(request, *args, **kwargs)


limiter = CustomLimiter()


def get_rate_limit_decorator():
    """
    Get the rate limit decorator with configured limits.

    Returns:
        Decorator for endpoints that enumerate, realize or trace
    """
    return limiter.limit(f"{settings.RATE_LIMIT_REQUESTS}/{settings.RATE_LIMIT_WINDOW}second")


async def handle_rate_limit_exceeded(request: Request, exc: RateLimitExceeded):
    """
    Turn slowapi's exception into the application's error body.

    Returns:
        JSONResponse with status 429
    """
    client_ip = get_remote_address(request)
    logger.warning(f"Rate limit exceeded for IP: {client_ip}")
    error = RateLimitError(
        details={"limit": str(exc.detail), "window": settings.RATE_LIMIT_WINDOW}
    )
    return error_response(extract_request_id(request), error)
