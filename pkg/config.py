import logging
import os
import sys
from dataclasses import dataclass, replace

from dotenv import load_dotenv


DEFAULT_CAP = 1_000_000
DEFAULT_PSD_TOLERANCE = 1e-9
DEFAULT_STRICT_TOLERANCE = 1e-12

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


@dataclass(frozen=True)
class Settings:
    cap: int = DEFAULT_CAP
    threads: int = 1
    psd_tolerance: float = DEFAULT_PSD_TOLERANCE
    strict_tolerance: float = DEFAULT_STRICT_TOLERANCE
    log_level: str = "INFO"
    debug: bool = False
    host: str | None = None

    def override(self, **changes) -> "Settings":
        """Returns a copy with every non-None keyword applied"""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def load_settings() -> Settings:
    """
    Builds the process settings from the environment

    Loads a .env file if one is present, then reads the CUTOFFLAB_*
    variables; anything unset keeps its default

    Returns:
        Settings: The effective settings for this process.
    """
    load_dotenv()
    cap = os.getenv("CUTOFFLAB_CAP")
    threads = os.getenv("CUTOFFLAB_THREADS")
    return Settings(
        cap=int(cap) if cap else DEFAULT_CAP,
        threads=int(threads) if threads else 1,
        log_level=os.getenv("CUTOFFLAB_LOG_LEVEL", "INFO").upper(),
        # Only the exact string "True" enables debug mode
        debug=True if os.getenv("CUTOFFLAB_DEBUG") == "True" else False,
        host=os.getenv("CUTOFFLAB_HOST"),
    )


def init_logging(level: str = "INFO") -> None:
    """Installs a single stream handler on the root logger"""
    root = logging.getLogger()
    # Replace an earlier handler so output follows the current sys.stderr
    for old in [h for h in root.handlers if getattr(h, "_cutofflab", False)]:
        root.removeHandler(old)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler._cutofflab = True
    root.addHandler(handler)
    root.setLevel(level)


def init_app(app, settings: Settings | None = None):
    # Store the effective settings where the routes can reach them
    settings = settings or load_settings()
    app.config["CUTOFFLAB"] = settings
    app.json.sort_keys = False

    init_logging(settings.log_level)
    app.logger.info("cutofflab API initialized with enumeration cap %d", settings.cap)
