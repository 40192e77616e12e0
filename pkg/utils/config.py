import os

from dotenv import load_dotenv


# Load environment variables from a .env file if present
load_dotenv()


# Public configuration values
TABS_LOG_LEVEL = os.getenv("TABS_LOG_LEVEL", "INFO")
TABS_THREADS = os.getenv("TABS_THREADS", "1")
TABS_OUTPUT_DIR = os.getenv("TABS_OUTPUT_DIR", "output")
TABS_SAMPLES = os.getenv("TABS_SAMPLES", "2000")
TABS_RUN_ACCEPTANCE = os.getenv("TABS_RUN_ACCEPTANCE", "0")


def require(value: str, name: str) -> str:
    if not value:
        raise RuntimeError(f"Missing required environment variable: {name}")
    return value


def _positive_int(value: str, name: str) -> int:
    try:
        parsed = int(require(value, name))
    except ValueError:
        raise RuntimeError(f"Environment variable {name} must be an integer, got {value!r}")
    if parsed < 1:
        raise RuntimeError(f"Environment variable {name} must be >= 1, got {parsed}")
    return parsed


def default_threads() -> int:
    return _positive_int(TABS_THREADS, "TABS_THREADS")


def default_samples() -> int:
    return _positive_int(TABS_SAMPLES, "TABS_SAMPLES")


def acceptance_enabled() -> bool:
    return TABS_RUN_ACCEPTANCE.strip().lower() in ("1", "true", "yes")
