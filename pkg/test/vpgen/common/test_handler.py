from aibs_informatics_core.models.base import PydanticBaseModel

from test.base import BaseTest
from vpgen.common.handler import ExperimentHandler


class CounterRequest(PydanticBaseModel):
    count: int


class CounterResponse(PydanticBaseModel):
    count: int


class CounterHandler(ExperimentHandler[CounterRequest, CounterResponse]):
    def handle(self, request: CounterRequest) -> CounterResponse:
        self.log.info(f"Hey look the count is {request.count}")
        return CounterResponse(count=request.count + 1)


class SilentCounterHandler(ExperimentHandler[CounterRequest, CounterResponse]):
    def handle(self, request: CounterRequest) -> None:
        self.log.info(f"Not answering {request.count}")


class SubclassedCounterHandler(CounterHandler):
    pass


class ExperimentHandlerTests(BaseTest):
    def test__handle__method_is_not_implemented(self):
        with self.assertRaises(NotImplementedError):
            ExperimentHandler().handle({})

    def test__get_request_cls__unbound_handler_raises(self):
        with self.assertRaises(TypeError):
            ExperimentHandler.get_request_cls()


class CounterHandlerTests(BaseTest):
    def test__get_handler__round_trips_json(self):
        handler = CounterHandler.get_handler()
        self.assertEqual(handler({"count": 1}), {"count": 2})

    def test__get_handler__records_handler_class(self):
        handler = CounterHandler.get_handler()
        self.assertIs(handler._handler_class, CounterHandler)  # type: ignore[attr-defined]

    def test__get_handler__no_response_returns_none(self):
        handler = SilentCounterHandler.get_handler()
        self.assertIsNone(handler({"count": 3}))

    def test__get_handler__non_dict_event_raises(self):
        handler = CounterHandler.get_handler()
        with self.assertRaises(ValueError):
            handler([1, 2])

    def test__generic_types__resolve_through_subclasses(self):
        self.assertIs(SubclassedCounterHandler.get_request_cls(), CounterRequest)
        self.assertIs(SubclassedCounterHandler.get_response_cls(), CounterResponse)

    def test__repr__names_types(self):
        text = repr(CounterHandler())
        self.assertIn("CounterHandler", text)
        self.assertIn("CounterRequest", text)

    def test__output_dir__unset_raises(self):
        with self.assertRaises(ValueError):
            CounterHandler().output_dir

    def test__output_dir__setter_creates_directory(self):
        handler = CounterHandler()
        target = self.tmp_path() / "nested" / "out"
        handler.output_dir = str(target)
        self.assertTrue(target.is_dir())
        self.assertEqual(handler.output_dir, target)
