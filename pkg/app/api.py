import logging
from contextlib import asynccontextmanager
from fractions import Fraction
from typing import Optional, Union

import numpy as np
from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from slowapi.errors import RateLimitExceeded

from app.config import get_config_for_logging, settings
from app.exceptions import BaseAppException, ValidationError
from app.logging_middleware import error_response, extract_request_id, logging_middleware
from app.models import (
    ApplyRequest,
    ClassListing,
    ClassReport,
    EquivalenceRequest,
    ExistenceVerdict,
    FeasibilityReport,
    FoldCheckRequest,
    GermEquivalence,
    GermPairRequest,
    GermRequest,
    GermSource,
    RealizationReport,
    RealizationRequest,
    RecognitionOptions,
)
from app.rate_limiter import get_rate_limit_decorator, handle_rate_limit_exceeded, limiter
from app.services import ClassificationService

# Configure logging
logging.basicConfig(
    level=getattr(logging, settings.LOG_LEVEL),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

# Global service instance
classification_service: Optional[ClassificationService] = None


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Manage application lifespan with proper startup and shutdown."""
    global classification_service

    logger.info(f"Starting {settings.APP_NAME}...")
    logger.debug(f"Configuration: {get_config_for_logging()}")
    classification_service = ClassificationService()
    logger.info(f"Classification service initialized (precision {settings.PRECISION_BITS} bits, "
                f"enumeration limit {settings.ENUMERATION_NODE_LIMIT})")

    yield

    logger.info(f"{settings.APP_NAME} shutdown complete")


app = FastAPI(
    title=settings.APP_NAME,
    description=settings.APP_DESCRIPTION,
    version=settings.APP_VERSION,
    lifespan=lifespan
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.CORS_ALLOW_ORIGINS,
    allow_methods=settings.CORS_ALLOW_METHODS,
    allow_headers=settings.CORS_ALLOW_HEADERS,
)

app.state.limiter = limiter
app.add_exception_handler(RateLimitExceeded, handle_rate_limit_exceeded)

heavy = get_rate_limit_decorator()


def get_service() -> ClassificationService:
    global classification_service
    if classification_service is None:
        classification_service = ClassificationService()
    return classification_service


def _degree_value(degree: Fraction) -> Union[int, str]:
    return degree.numerator if degree.denominator == 1 else str(degree)


@app.middleware("http")
async def logging_middleware_wrapper(request: Request, call_next):
    """Wrapper for the logging middleware from logging_middleware module."""
    return await logging_middleware(request, call_next)


@app.exception_handler(BaseAppException)
async def application_exception_handler(request: Request, exc: BaseAppException):
    request_id = extract_request_id(request)
    log = logger.error if exc.status_code >= 500 else logger.warning
    log(f"Application exception ({type(exc).__name__}): {exc.message} | Request ID: {request_id}")
    return error_response(request_id, exc)


@app.exception_handler(RequestValidationError)
async def request_validation_handler(request: Request, exc: RequestValidationError):
    request_id = extract_request_id(request)
    messages = [f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}" for error in exc.errors()]
    logger.warning(f"Validation error: {messages} | Request ID: {request_id}")
    return error_response(request_id, ValidationError("Validation error", details={"errors": messages}))


# Tuples

@app.get("/tuples/{word}/canonical", tags=["tuples"])
def canonical(word: str):
    """Canonical representative of the class of a tuple."""
    return {"tuple": word, "canonical": get_service().canonical(word)}


@app.get("/tuples/{word}/orbit", tags=["tuples"])
def orbit(word: str):
    images = get_service().orbit(word)
    return {"tuple": word, "size": len(images), "orbit": images}


@app.get("/tuples/{word}/hash", tags=["tuples"])
def hash_tuple(word: str):
    return {"tuple": word, "hash": get_service().hash(word)}


@app.get("/tuples/{word}/star", tags=["tuples"])
def star(word: str):
    """Indexed (starred) form of a tuple."""
    return {"tuple": word, "starred": get_service().star(word)}


@app.post("/tuples/apply", tags=["tuples"])
def apply_permutation(request: ApplyRequest):
    result = get_service().apply(request.tuple.word, request.shift, request.reversed)
    return {"tuple": request.tuple, "shift": request.shift, "reversed": request.reversed, "result": result}


@app.post("/tuples/equivalent", tags=["tuples"])
def equivalent(request: EquivalenceRequest):
    service = get_service()
    return {
        "first": request.first,
        "second": request.second,
        "equivalent": service.equivalent(request.first.word, request.second.word),
    }


# Hash tuples

@app.get("/hash/{text}/unhash", tags=["hash"])
def unhash(text: str):
    return {"hash": text, "tuple": get_service().unhash(text)}


@app.get("/hash/{text}/feasibility", response_model=FeasibilityReport, tags=["hash"])
def feasibility(text: str, m: Optional[int] = Query(None, ge=0, description="Declared m; defaults to the sum")):
    return get_service().feasibility(text, m)


@app.get("/hash/{text}/type", tags=["hash"])
def type_of(text: str):
    n, m = get_service().type_of(text)
    return {"hash": text, "n": n, "m": m}


@app.get("/hash/{text}/degree", tags=["hash"])
def degree(text: str):
    """Absolute degree; a fraction for infeasible tuples."""
    return {"hash": text, "abs_deg": _degree_value(get_service().degree(text))}


@app.get("/hash/{text}/cusp-parity", tags=["hash"])
def cusp_parity(text: str):
    return {"hash": text, "cusp_parity": get_service().cusp_parity(text)}


# Types

@app.get("/types/{n}/{m}/exists", response_model=ExistenceVerdict, tags=["types"])
def exists(n: int, m: int):
    return get_service().exists(n, m)


@app.get("/types/{n}/{m}/classes", response_model=ClassListing, tags=["types"])
@heavy
def classes(request: Request, n: int, m: int, force: bool = False):
    """All classes of type (n,m), sorted lexicographically."""
    return get_service().enumerate(n, m, force=force)


@app.get("/types/{n}/{m}/count", tags=["types"])
@heavy
def count(request: Request, n: int, m: int, force: bool = False):
    listing = get_service().enumerate(n, m, force=force)
    return {"n": n, "m": m, "count": listing.count}


@app.get("/types/2/{m}/closed-form", tags=["types"])
def count_type2(m: int):
    """Number of classes of type (2,m) without enumerating."""
    return {"n": 2, "m": m, "count": get_service().count_type2(m)}


@app.get("/table", tags=["types"])
@heavy
def table(request: Request, n_max: int = Query(12, ge=2), m_max: int = Query(16, ge=0), force: bool = False):
    rows = get_service().table(n_max, m_max, force=force)
    return {"n_max": n_max, "m_max": m_max, "rows": rows}


# Realization

@app.post("/realize", response_model=RealizationReport, tags=["realization"])
@heavy
def realize(request: Request, body: RealizationRequest):
    """Build the circle map of a class and verify it."""
    return get_service().realize(body.hash.text, body.samples)


# Germs

@app.post("/germs/jacobian", tags=["germs"])
def jacobian(request: GermSource):
    return {"f1": request.f1, "f2": request.f2, "jacobian": get_service().jacobian(request.f1, request.f2)}


@app.post("/germs/fold-check", tags=["germs"])
def fold_check(request: FoldCheckRequest):
    fold = get_service().fold_check(request.f1, request.f2, request.x, request.y)
    return {"f1": request.f1, "f2": request.f2, "point": [request.x, request.y], "fold": fold}


@app.post("/germs/trace", tags=["germs"])
@heavy
def trace(request: Request, body: GermSource, eps: float = Query(..., gt=0), precision: Optional[int] = Query(None, ge=53)):
    """Vertices of the level curve |g| = eps, as float64 pairs."""
    curve, angles = get_service().trace(body.f1, body.f2, eps, precision)
    points = np.asarray(curve.points, dtype=object).astype(np.float64)
    return {"epsilon": curve.epsilon, "closed": curve.closed, "length": curve.length,
            "points": points.tolist(), "angles": angles}


@app.post("/germs/recognize", response_model=ClassReport, tags=["germs"])
@heavy
def recognize(request: Request, body: GermRequest):
    return get_service().recognize(body.f1, body.f2, body.eps0, body.precision, body.seed)


@app.post("/germs/starred", tags=["germs"])
@heavy
def starred(request: Request, body: GermRequest):
    result = get_service().starred(body.f1, body.f2, body.eps0, body.precision, body.seed)
    return {"f1": body.f1, "f2": body.f2, "starred": result}


@app.post("/germs/equivalent", response_model=GermEquivalence, tags=["germs"])
@heavy
def germ_equivalent(request: Request, body: GermPairRequest):
    return get_service().germ_equiv(
        (body.first.f1, body.first.f2), (body.second.f1, body.second.f2),
        body.eps0, body.precision, body.seed,
    )


# Normal forms

@app.get("/catalog", tags=["catalog"])
def catalog():
    return {"forms": list(get_service().catalog().values())}


@app.post("/catalog/{name}/check", tags=["catalog"])
@heavy
def catalog_check(request: Request, name: str, options: Optional[RecognitionOptions] = None):
    options = options or RecognitionOptions()
    return get_service().catalog_check(name, options.eps0, options.precision, options.seed)


@app.get("/health", tags=["health"])
async def health_check():
    """Health check endpoint."""
    return {"status": "healthy", "service": settings.APP_NAME, "version": settings.APP_VERSION}


@app.get("/", tags=["root"])
async def root():
    """Root endpoint with API information."""
    return {
        "message": f"Welcome to {settings.APP_NAME}",
        "version": settings.APP_VERSION,
        "docs": "/docs",
        "health": "/health"
    }
