"""
Server entry point: ``python -m app.main``.
"""
import logging
import signal
import sys

import uvicorn

from app.api import app
from app.config import settings

logger = logging.getLogger(__name__)


def _shutdown(signum, frame):
    logger.info(f"Received signal {signum}, stopping {settings.APP_NAME}")
    sys.exit(0)


def serve() -> None:
    """Run the classification API under uvicorn with the configured host, port and workers."""
    signal.signal(signal.SIGINT, _shutdown)
    signal.signal(signal.SIGTERM, _shutdown)
    # uvicorn needs an import string to start more than one worker
    target = "app.main:app" if settings.SERVER_WORKERS > 1 else app
    logger.info(f"Serving {settings.APP_NAME} {settings.APP_VERSION} on {settings.HOST}:{settings.PORT} "
                f"with {settings.SERVER_WORKERS} worker(s)")
    uvicorn.run(
        target,
        host=settings.HOST,
        port=settings.PORT,
        workers=settings.SERVER_WORKERS,
        log_level=settings.LOG_LEVEL.lower(),
        access_log=False,
        timeout_graceful_shutdown=30,
    )


if __name__ == "__main__":
    serve()
