import logging
from collections.abc import Callable
from dataclasses import dataclass
from typing import Generic, TypeAlias, TypeVar, get_args, get_origin

from aibs_informatics_core.models.base import ModelProtocol
from aibs_informatics_core.utils.json import JSON

from vpgen.common.logging import LoggingMixins, get_service_logger

ExperimentEvent: TypeAlias = JSON
ExperimentHandlerType = Callable[[ExperimentEvent], JSON | None]

logger = logging.getLogger(__name__)

REQUEST = TypeVar("REQUEST", bound=ModelProtocol)
RESPONSE = TypeVar("RESPONSE", bound=ModelProtocol)


@dataclass
class ExperimentHandler(LoggingMixins, Generic[REQUEST, RESPONSE]):
    """Base class for strongly-typed experiment handlers.

    Inherit from ExperimentHandler to create a handler that expects a REQUEST
    object and returns a RESPONSE object following the `ModelProtocol`.

    Example:
        ```python
        class CountRequest(PydanticBaseModel):
            count: int

        class CountResponse(PydanticBaseModel):
            count: int

        class CountHandler(ExperimentHandler[CountRequest, CountResponse]):
            def handle(self, request: CountRequest) -> CountResponse:
                return CountResponse(count=request.count + 1)

        handler = CountHandler.get_handler()
        handler({"count": 1})  # {"count": 2}
        ```
    """

    def handle(self, request: REQUEST) -> RESPONSE | None:
        raise NotImplementedError("Please implement `handle` method")

    @classmethod
    def _generic_arg(cls, index: int) -> type:
        for klass in cls.__mro__:
            for base in getattr(klass, "__orig_bases__", ()):
                origin = get_origin(base)
                if not (isinstance(origin, type) and issubclass(origin, ExperimentHandler)):
                    continue
                args = get_args(base)
                if len(args) > index and not isinstance(args[index], TypeVar):
                    return args[index]
        raise TypeError(f"{cls.__name__} does not bind request and response types")

    @classmethod
    def get_request_cls(cls) -> type[REQUEST]:
        return cls._generic_arg(0)

    @classmethod
    def get_response_cls(cls) -> type[RESPONSE]:
        return cls._generic_arg(1)

    @classmethod
    def deserialize_request(cls, event: ExperimentEvent) -> REQUEST:
        if not isinstance(event, dict):
            raise ValueError(f"Unable to parse event - events must be Dict type, got {event!r}")
        return cls.get_request_cls().from_dict(event)

    @classmethod
    def serialize_response(cls, response: RESPONSE) -> JSON:
        return response.to_dict()

    @classmethod
    def get_handler(cls, *args, **kwargs) -> ExperimentHandlerType:
        """Create a JSON-in, JSON-out callable for this handler class.

        The callable instantiates the handler, deserializes the event, invokes
        `handle` and serializes the response.
        """
        service_logger = get_service_logger(cls.service_name())

        def handler(event: ExperimentEvent) -> JSON | None:
            experiment_handler = cls(*args, **kwargs)  # type: ignore[call-arg]
            experiment_handler.log = service_logger
            experiment_handler.route_library_logs()

            experiment_handler.log.info(f"Deserializing event for {cls.handler_name()}")
            request = experiment_handler.deserialize_request(event)

            experiment_handler.log.info("Event successfully deserialized. Calling handler...")
            response = experiment_handler.handle(request=request)
            if response is None:
                experiment_handler.log.info("Handler returned no response")
                return None
            experiment_handler.log.info("Handler completed. Serializing response")
            return experiment_handler.serialize_response(response)

        handler._handler_class = cls  # type: ignore[attr-defined]
        return handler

    def __repr__(self) -> str:
        return (
            f"{self.__class__.__name__}("
            f"request: {self.get_request_cls()}, "
            f"response: {self.get_response_cls()})"
        )
