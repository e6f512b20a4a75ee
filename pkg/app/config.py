from typing import List, Dict, Any
from pydantic_settings import BaseSettings
from pydantic import Field


class Settings(BaseSettings):
    """Application settings using Pydantic BaseSettings."""

    # Enumeration
    ENUMERATION_NODE_LIMIT: int = Field(
        default=10**9,
        description="Refuse (n,m) whose composition count C(m+n-1,n-1) exceeds this unless forced"
    )
    ENUMERATION_WORKERS: int = Field(default=1, description="Worker processes for enumeration (partitioned by x_1)")

    # Realization
    REALIZATION_SAMPLES: int = Field(default=4096, description="Default sample count for realized circle maps")
    REALIZATION_SAMPLES_PER_POINT: int = Field(
        default=64,
        description="Minimum samples per marked point; a realization needs at least this times (m+n) samples"
    )
    QUADRATURE_TOLERANCE: float = Field(default=1e-12, description="Absolute tolerance for the bump-function quadrature")

    # Extraction tolerances
    EXTREMUM_TOLERANCE: float = Field(default=1e-10, description="Golden-section refinement tolerance for extrema")
    SINGULAR_VALUE_TOLERANCE: float = Field(default=1e-6, description="Minimum separation (rad) of singular values")
    MORSE_TOLERANCE: float = Field(default=1e-13, description="Second-difference floor below which an extremum is non-Morse")
    REFERENCE_ANGLE_ATTEMPTS: int = Field(default=8, description="Re-picks of the reference angle for regular-type maps")

    # Recognition / level-curve tracing
    EPSILON_START: float = Field(default=2.0**-4, description="First epsilon of the stabilization schedule")
    EPSILON_FACTOR: float = Field(default=0.5, description="Schedule contraction factor")
    EPSILON_MAX_STEPS: int = Field(default=40, description="Maximum epsilon values tried")
    STABILIZATION_RUNS: int = Field(default=2, description="Consecutive equivalent tuples required")
    STRICT_STABILIZATION: bool = Field(default=True, description="Raise when the schedule does not stabilize")
    DOMAIN_RADIUS: float = Field(default=1.0, description="Source-plane radius the level curve must stay inside")
    COMPONENT_RADIUS_FACTOR: float = Field(
        default=2.0,
        description="Other level-set components are searched within this multiple of the traced loop radius"
    )
    START_RAYS: int = Field(default=16, description="Rays k*2pi/START_RAYS searched for a starting point")
    TURNING_ANGLE_CAP: float = Field(default=0.05, description="Maximum tangent turn (rad) per tracing step")
    VALUE_ANGLE_CAP: float = Field(default=0.05, description="Maximum change of arg f (rad) per tracing step")
    INITIAL_STEP_RATIO: float = Field(default=1e-2, description="First step as a fraction of the start point norm")
    MIN_STEP_RATIO: float = Field(default=1e-10, description="Step floor as a fraction of the start point norm")
    MAX_STEP_RATIO: float = Field(default=1e-1, description="Step ceiling as a fraction of the current point norm")
    MAX_TRACE_STEPS: int = Field(default=200000, description="Hard cap on tracing steps per curve")
    MIN_CLOSURE_STEPS: int = Field(default=10, description="Steps before closure detection is armed")
    CORRECTOR_TOLERANCE: float = Field(default=1e-10, description="Relative residual | |f(p)| - eps | / eps after correction")
    CORRECTOR_MAX_ITERATIONS: int = Field(default=30, description="Newton iterations per corrector call")
    FOLD_TOLERANCE: float = Field(default=1e-8, description="Relative fold criterion threshold")
    PRECISION_BITS: int = Field(default=64, description="53 = float64, 64 = extended (longdouble), >64 = mpmath")
    RANDOM_SEED: int = Field(default=0, description="Seed for reference-angle re-picks")

    # Logging Configuration
    LOG_LEVEL: str = Field(default="INFO", description="Logging level for the API server")
    CLI_LOG_LEVEL: str = Field(default="WARNING", description="Logging level for the command-line tool (stderr)")
    ENABLE_DETAILED_LOGGING: bool = Field(default=False, description="Log request bodies in the HTTP middleware")
    LOG_TEXT_TRUNCATE_LENGTH: int = Field(default=500, description="Maximum length of logged text before truncating with '...'")
    SHOW_DETAILED_ERRORS: bool = Field(default=False, description="Include exception details in API error bodies")

    # Rate Limiting (compute-heavy endpoints)
    RATE_LIMIT_REQUESTS: int = Field(default=10, description="Number of heavy requests allowed per time window")
    RATE_LIMIT_WINDOW: int = Field(default=60, description="Time window in seconds for rate limiting")
    TRUSTED_IPS: List[str] = Field(default=[], description="List of trusted IP addresses to bypass rate limiting")

    # CORS Configuration
    CORS_ALLOW_ORIGINS: List[str] = Field(default=["*"], description="List of allowed origins for CORS")
    CORS_ALLOW_METHODS: List[str] = Field(default=["GET", "POST"], description="List of allowed HTTP methods for CORS")
    CORS_ALLOW_HEADERS: List[str] = Field(default=["*"], description="List of allowed headers for CORS")

    # Server
    HOST: str = Field(default="0.0.0.0", description="Bind address for the API server")
    PORT: int = Field(default=8080, description="Port for the API server")
    SERVER_WORKERS: int = Field(default=1, description="uvicorn worker processes")

    # Application Metadata
    APP_NAME: str = Field(default="Stable Map Classifier", description="Application name")
    APP_DESCRIPTION: str = Field(
        default="Topological classification of stable circle maps and plane-to-plane map germs",
        description="Application description displayed in API docs"
    )
    APP_VERSION: str = Field(default="1.0.0", description="Application version number")

    class Config:
        env_file = ".env"
        case_sensitive = True


# Global settings instance
settings = Settings()


def get_config_for_logging() -> Dict[str, Any]:
    """
    Get a snapshot of the configuration for the startup log line.

    Returns:
        dict: All settings fields with their current values
    """
    return settings.model_dump()
