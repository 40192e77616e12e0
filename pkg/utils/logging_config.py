import sys
import logging
from datetime import datetime, timezone
from typing import Dict, Any, Optional


_COUNTERS = (
    'profiles_designed',
    'tangency_solves',
    'grid_points',
    'intensity_evaluations',
    'beam_switches',
    'errors',
)


class MetricsCollector:
    """Run counters of one simulation session"""

    def __init__(self):
        self.counters: Dict[str, int] = dict.fromkeys(_COUNTERS, 0)
        self.started = datetime.now(timezone.utc)
        self.logger = logging.getLogger('tabs.metrics')

    def increment(self, counter: str, value: int = 1):
        """Add to a known counter; unknown names are ignored"""
        if counter not in self.counters:
            return
        self.counters[counter] += value
        self.logger.debug(f"Counter {counter} += {value} -> {self.counters[counter]}")

    def get_metrics(self) -> Dict[str, Any]:
        """Counters, session start and elapsed wall time"""
        elapsed = datetime.now(timezone.utc) - self.started
        return {**self.counters, 'start_time': self.started, 'elapsed_seconds': elapsed.total_seconds()}

    def log_metrics(self):
        """Log the counters of the current run"""
        self.logger.info("Run counters", extra={'metrics': self.get_metrics()})

    def reset_counters(self):
        """Zero every counter; the session start is kept"""
        self.counters = dict.fromkeys(_COUNTERS, 0)


# Global metrics collector instance
metrics = MetricsCollector()


def setup_logging(level: str = 'INFO', log_file: Optional[str] = None):
    """
    Setup structured logging configuration

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR)
        log_file: Optional path of an additional log file
    """
    handlers = [logging.StreamHandler(sys.stdout)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )

    for logger_name in ('tabs', 'tabs.metrics', 'tabs.cli'):
        logging.getLogger(logger_name).setLevel(getattr(logging, level.upper()))

    # Reduce noise from external libraries
    logging.getLogger('joblib').setLevel(logging.WARNING)

    logging.getLogger('tabs').debug("Structured logging initialized")


# LogRecord attributes that ``extra`` may not overwrite
_RESERVED = frozenset(logging.makeLogRecord({}).__dict__) | {'message', 'asctime'}


class ContextLogger:
    """Logger carrying key/value context into every record"""

    def __init__(self, name: str, context: Dict[str, Any] = None):
        self.logger = logging.getLogger(name)
        self.context = dict(context or {})

    def bind(self, **context) -> 'ContextLogger':
        """Same logger with additional context"""
        return ContextLogger(self.logger.name, {**self.context, **context})

    def _log_with_context(self, level: int, message: str, **kwargs):
        if not self.logger.isEnabledFor(level):
            return
        extra = {}
        for key, value in {**self.context, **kwargs}.items():
            extra[f'ctx_{key}' if key in _RESERVED else key] = value
        self.logger.log(level, message, extra=extra)

    def debug(self, message: str, **kwargs):
        self._log_with_context(logging.DEBUG, message, **kwargs)

    def info(self, message: str, **kwargs):
        self._log_with_context(logging.INFO, message, **kwargs)

    def warning(self, message: str, **kwargs):
        self._log_with_context(logging.WARNING, message, **kwargs)

    def error(self, message: str, **kwargs):
        self._log_with_context(logging.ERROR, message, **kwargs)
        metrics.increment('errors')


def get_logger(name: str, context: Dict[str, Any] = None) -> ContextLogger:
    """Get a context logger instance"""
    return ContextLogger(name, context)


def log_design_completed(method: str, num_elements: int, samples: int, **details):
    """Log a finished phase design"""
    logger = get_logger('tabs.design')
    logger.info(f"Phase profile designed with method: {method}",
                method=method, num_elements=num_elements, samples=samples, **details)
    metrics.increment('profiles_designed')


def log_grid_evaluated(nx: int, nz: int, threads: int, elapsed: float):
    """Log a finished field grid evaluation"""
    logger = get_logger('tabs.nearfield')
    logger.info(f"Field grid evaluated: {nx}x{nz} points",
                nx=nx, nz=nz, threads=threads, elapsed=elapsed)
    metrics.increment('grid_points', nx * nz)


def log_beam_switch(z: float, intensity_before: float, intensity_after: float):
    """Log a tracking re-focus event"""
    logger = get_logger('tabs.tracking')
    logger.debug(f"Beam switched at z={z:.6g}",
                 z=z, intensity_before=intensity_before, intensity_after=intensity_after)
    metrics.increment('beam_switches')


def log_error(module: str, error: Exception, context: Dict[str, Any] = None):
    """Log errors with context"""
    logger = get_logger(f'tabs.{module}')
    error_context = {
        'error_type': type(error).__name__,
        'error_message': str(error),
        **(context or {})
    }
    logger.error(f"Error in {module}: {error}", **error_context)
