"""Logger namespace for meshplug. The library only attaches a NullHandler; applications configure output."""
import logging
import sys

NAMESPACE = "meshplug"
LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"
logging.getLogger(NAMESPACE).addHandler(logging.NullHandler())


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(f"{NAMESPACE}.{name}")


def configure_stderr_logging(level: str = "WARNING") -> logging.Logger:
    """
    Route meshplug records to the current sys.stderr at `level`; stdout stays free for JSON output.

    Repeated calls reuse one handler and only update its stream and level.
    """
    root = logging.getLogger(NAMESPACE)
    handler = next((h for h in root.handlers if getattr(h, "_meshplug_stderr", False)), None)
    if handler is None:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._meshplug_stderr = True
        root.addHandler(handler)
    else:
        handler.setStream(sys.stderr)
    root.setLevel(getattr(logging, level.upper()))
    return root
