"""Structured logging for experiment handlers.

Handlers log through a Powertools `Logger`; library modules use plain
`logging.getLogger(__name__)` loggers under the `vpgen` package, which are
routed through the handler's JSON formatter while a handler runs.
"""

import logging

from aibs_informatics_core.utils.logging import get_all_handlers
from aws_lambda_powertools.logging import Logger

from vpgen.common.base import HandlerMixins

SERVICE_NAME = "vpgen"
LIBRARY_LOGGER = "vpgen"


def get_service_logger(service: str | None = None) -> Logger:
    """Powertools logger of a service, `vpgen` by default."""
    return Logger(service=service or SERVICE_NAME)


def route_library_logs(source: Logger, target: str | logging.Logger = LIBRARY_LOGGER):
    """Attach the handler of `source` to a standard library logger, at most once.

    The target level is lowered to the source level when it is stricter, so
    library records reach the structured output.
    """
    if isinstance(target, str):
        target = logging.getLogger(target)
    target.setLevel(min(source.log_level, target.getEffectiveLevel()))
    handler = source.registered_handler
    if handler not in get_all_handlers(target):
        target.addHandler(handler)


class LoggingMixins(HandlerMixins):
    """Lazily created Powertools logger named after the handler class."""

    @property
    def log(self) -> Logger:
        try:
            return self._log
        except AttributeError:
            self._log = get_service_logger(self.service_name())
        return self._log

    @log.setter
    def log(self, value: Logger):
        self._log = value

    def route_library_logs(self):
        route_library_logs(self.log)
