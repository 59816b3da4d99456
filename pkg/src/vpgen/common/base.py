from pathlib import Path

OUTPUT_DIR_ATTR = "_output_dir"


class HandlerMixins:
    """Mixin class providing common handler utilities.

    Provides the output directory of the current invocation and the
    handler/service name used to label its logs.
    """

    @property
    def output_dir(self) -> Path:
        """Get the artifact directory for the current invocation.

        Raises:
            ValueError: If the output directory has not been set.
        """
        if not hasattr(self, OUTPUT_DIR_ATTR):
            raise ValueError(f"{self.__class__.__name__} has no output directory set")
        return getattr(self, OUTPUT_DIR_ATTR)

    @output_dir.setter
    def output_dir(self, value: Path | str):
        path = Path(value)
        path.mkdir(parents=True, exist_ok=True)
        setattr(self, OUTPUT_DIR_ATTR, path)

    @classmethod
    def handler_name(cls) -> str:
        return cls.__name__

    @classmethod
    def service_name(cls) -> str:
        return cls.__name__
