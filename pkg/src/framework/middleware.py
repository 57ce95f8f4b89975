import datetime
import logging
import os
import socket
import sys
import time
import traceback
import uuid
from typing import Any, Callable, Mapping

# Configure logger
middleware_logger = logging.getLogger("middleware")
middleware_logger.setLevel(logging.INFO)

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


def configure_logging(level: str = "INFO", testing: bool = False) -> None:
    """
    Attach handlers to the root and middleware loggers.

    A stderr stream handler is always installed. Outside of tests the
    OpenTelemetry `LoggingHandler` is added too, so command events are exported
    when the CLI runs under `opentelemetry-instrument`.

    Args:
        level (str): Root logging level name.
        testing (bool): If True, OpenTelemetry is not imported.
    """
    root = logging.getLogger()
    root.setLevel(level)

    if not any(getattr(h, "_dentfit", False) for h in root.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._dentfit = True
        root.addHandler(handler)

    if not testing and not middleware_logger.handlers:
        from opentelemetry.sdk._logs import LoggingHandler
        middleware_logger.addHandler(LoggingHandler())


def _loggable(args: Mapping[str, Any]) -> dict:
    """Keep argument values that serialize cleanly into a log record."""
    result = {}
    for key, value in args.items():
        if callable(value):
            continue
        if isinstance(value, (str, int, float, bool)) or value is None:
            result[key] = value
        else:
            result[key] = str(value)
    return result


class CommandLoggingMiddleware:
    """
    Middleware for command logging and transaction tracking.

    Every CLI command is dispatched through this class, which:
    - Assigns a unique transaction ID to the invocation.
    - Logs structured `Request` and `Response` events around the command.
    - Logs an `Unhandled Exception` event with the stack trace and re-raises.

    Logging fields include:
        - level: log severity (INFO/ERROR)
        - event: "Request", "Response" or "Unhandled Exception"
        - service: always "dentfit"
        - command: sub-command name (synth, fit, compare, srm, render)
        - arguments: parsed command-line arguments (request only)
        - hostname: host running the command
        - pid: process id
        - transaction_id: UUID assigned to this invocation
        - duration_seconds: command run time (response only)
        - exit_code: integer returned by the command (response only)
        - exception: exception string (error cases)
        - stack_trace: traceback string (error cases)

    Example log for a fit:
        {
            "level": "INFO",
            "event": "Request",
            "service": "dentfit",
            "command": "fit",
            "arguments": {"input": "scan.xyz", "mode": "full7", "seed": 0},
            "timestamp": "2025-08-12T22:18:30.123Z",
            "hostname": "inspection-bay-3",
            "pid": 4711,
            "transaction_id": "f1a2c3d4-5678-90ab-cdef-1234567890ab"
        }
    """

    def dispatch(self, command: str, args: Mapping[str, Any], call_next: Callable[[], int]) -> int:
        transaction_id = str(uuid.uuid4())
        start_time = time.time()

        middleware_logger.info({
            "level": "INFO",
            "event": "Request",
            "service": "dentfit",
            "command": command,
            "arguments": _loggable(args),
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "hostname": socket.gethostname(),
            "pid": os.getpid(),
            "transaction_id": transaction_id,
        })

        try:
            exit_code = call_next()
        except Exception as e:
            stack_trace = traceback.format_exc()
            middleware_logger.error({
                "level": "ERROR",
                "event": "Unhandled Exception",
                "service": "dentfit",
                "command": command,
                "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
                "exception": str(e),
                "stack_trace": stack_trace,
                "transaction_id": transaction_id,
            })
            raise e

        duration = time.time() - start_time
        middleware_logger.info({
            "level": "INFO",
            "event": "Response",
            "service": "dentfit",
            "command": command,
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "duration_seconds": round(duration, 4),
            "exit_code": exit_code,
            "transaction_id": transaction_id,
        })

        return exit_code
