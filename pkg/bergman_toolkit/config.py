"""
Bergman Toolkit - Configuration
Environment-driven settings and logging setup shared by every module
"""

import logging
import os
import sys

import structlog
from dotenv import load_dotenv

load_dotenv()


def _env_bool(name: str, default: bool) -> bool:
    value = os.getenv(name)
    if value is None:
        return default
    return value.strip().lower() in ("1", "true", "yes", "on")


class Config:
    """Toolkit settings, read once from the environment (and an optional .env file)"""

    def __init__(self):
        # Logging
        self.LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()
        self.LOG_JSON = _env_bool("LOG_JSON", False)

        # Runner
        self.DEFAULT_SEED = int(os.getenv("DEFAULT_SEED", 20240101))
        self.DEFAULT_WORKERS = int(os.getenv("DEFAULT_WORKERS", 1))
        self.REPORT_SCHEMA_VERSION = os.getenv("REPORT_SCHEMA_VERSION", "1.0")

        # Float comparisons
        self.FLOAT_RTOL = float(os.getenv("FLOAT_RTOL", 1e-9))
        self.FLOAT_COEFF_TOL = float(os.getenv("FLOAT_COEFF_TOL", 1e-12))

        # Operators
        self.GRAM_PIVOT_TOL = float(os.getenv("GRAM_PIVOT_TOL", 1e-10))

        # Covering
        self.INTERSECT_TOL = float(os.getenv("INTERSECT_TOL", 1e-10))
        self.INTERSECT_MAX_ITER = int(os.getenv("INTERSECT_MAX_ITER", 500))

        # Quadrature (one-variable |pf| integrals)
        self.QUAD_TOL = float(os.getenv("QUAD_TOL", 1e-8))
        self.QUAD_DOUBLING_TOL = float(os.getenv("QUAD_DOUBLING_TOL", 1e-10))
        self.QUAD_NODES = int(os.getenv("QUAD_NODES", 2048))

        # Random polynomial model
        self.COEFF_DENOMINATOR_BITS = int(os.getenv("COEFF_DENOMINATOR_BITS", 24))

        # Cap on the empirical Prop 2.2 constant used for pass flags
        self.CNM_CAP = float(os.getenv("CNM_CAP", 64.0))


config = Config()


def configure_logging(level: str = None) -> None:
    """
    Route structlog through stdlib logging on stderr

    Args:
        level (str): Overrides config.LOG_LEVEL when given
    """
    level = (level or config.LOG_LEVEL).upper()
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
        force=True,
    )
    renderer = (
        structlog.processors.JSONRenderer(sort_keys=True)
        if config.LOG_JSON
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_log_level,
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            renderer,
        ],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )
