import argparse
import json
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from aibs_informatics_core.utils.os_operations import get_env_var

from vpgen._version import __version__
from vpgen.common.handler import ExperimentHandler
from vpgen.common.logging import get_service_logger
from vpgen.common.models import Manifest, config_sha256
from vpgen.handlers.checks import PoissonCheckHandler, ScaleCheckHandler
from vpgen.handlers.experiments import LimitHandler, RunHandler, StabilityHandler, SweepHandler
from vpgen.handlers.model import (
    ConfigError,
    ExperimentConfig,
    ExperimentRequest,
    ExperimentResponse,
    load_config,
    parse_config,
    save_config,
)
from vpgen.handlers.report import ReportHandler

logger = get_service_logger(__name__)

VPGEN_OUT_KEY = "VPGEN_OUT"
CONFIG_FILENAME = "config.json"
REPORT = "report"

HANDLERS: dict[str, type[ExperimentHandler]] = {
    "run": RunHandler,
    "sweep": SweepHandler,
    "stability": StabilityHandler,
    "limit": LimitHandler,
    "poisson-check": PoissonCheckHandler,
    "scale-check": ScaleCheckHandler,
    REPORT: ReportHandler,
}
SCALE_FLAGS = ("family", "p", "variant", "exponent", "a")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vpgen", description="Vlasov-Poisson experiments with mollified singular data"
    )
    parser.add_argument("command", choices=list(HANDLERS), help="experiment to run")
    parser.add_argument("--config", required=False, help="path of the JSON experiment config")
    parser.add_argument(
        "--out",
        required=False,
        default=None,
        help=f"output directory; the {VPGEN_OUT_KEY} env variable takes precedence",
    )
    parser.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    scale = parser.add_argument_group("scale-check")
    scale.add_argument("--family", default=None)
    scale.add_argument("--p", type=float, default=None)
    scale.add_argument("--variant", type=int, default=None)
    scale.add_argument("--exponent", type=float, default=None)
    scale.add_argument("--a", type=float, default=None)
    return parser


def resolve_config(parsed: argparse.Namespace, output_dir: Path | None) -> ExperimentConfig:
    """Materialize the config of a command from its file and the overriding flags.

    ``report`` falls back to the config.json of its output directory and keeps
    the kind it finds; every other command sets the kind to itself.

    Raises:
        ConfigError: If no config can be found or the result fails the schema.
    """
    command = parsed.command
    payload: dict[str, Any]
    if parsed.config:
        payload = load_config(parsed.config).model_dump(mode="json")
    elif command == REPORT and output_dir and (output_dir / CONFIG_FILENAME).is_file():
        payload = load_config(output_dir / CONFIG_FILENAME).model_dump(mode="json")
    elif command == "scale-check":
        payload = {"kind": command}
    else:
        raise ConfigError(f"--config is required for {command}")
    if command != REPORT:
        payload["kind"] = command
    if parsed.seed is not None:
        payload["seed"] = parsed.seed
    flags = {
        name: getattr(parsed, name) for name in SCALE_FLAGS if getattr(parsed, name) is not None
    }
    if flags:
        payload["scale_check"] = {**payload.get("scale_check", {}), **flags}
    return parse_config(payload)


def handle_cli(args: Sequence[str] | None = None) -> int:
    """Run one experiment subcommand and write its artifacts and manifest.

    Args:
        args: Optional sequence of command line arguments. If None, uses sys.argv.

    Returns:
        0 on success (including sweeps with failed widths, listed in the
        manifest), 2 for configuration errors, 1 for other failures.

    Example:
        ```python
        handle_cli(["sweep", "--config", "configs/cold_ball.json", "--out", "out/cold"])
        ```
    """
    parsed = build_parser().parse_args(args=args)
    out = get_env_var(VPGEN_OUT_KEY) or parsed.out
    try:
        config = resolve_config(parsed, Path(out) if out else None)
    except ConfigError as e:
        logger.error(str(e))
        print(f"vpgen: {e}", file=sys.stderr)
        return 2
    if parsed.threads < 1:
        print(f"vpgen: --threads must be at least 1, got {parsed.threads}", file=sys.stderr)
        return 2

    output_dir = Path(out or config.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    serialized = config.model_dump(mode="json")
    manifest = Manifest(config_sha256=config_sha256(serialized), version=__version__)
    if parsed.command != REPORT:
        save_config(config, output_dir / CONFIG_FILENAME)

    logger.info(f"Running {parsed.command} into {output_dir}")
    handler = HANDLERS[parsed.command].get_handler()
    request = ExperimentRequest(config=config, output_dir=str(output_dir), threads=parsed.threads)
    try:
        response_json = handler(request.to_dict())
    except (OSError, ValueError) as e:
        logger.exception(f"{parsed.command} failed")
        print(f"vpgen: {e}", file=sys.stderr)
        return 1
    response = ExperimentResponse.from_dict(response_json or {"output_dir": str(output_dir)})
    manifest.finish(response.failures).write(output_dir)
    if response.failures:
        logger.warning(f"{len(response.failures)} failure(s) recorded in the manifest")

    print(json.dumps(response.summary, indent=2, sort_keys=True, default=str))
    logger.info("Experiment complete.")
    return 0


if __name__ == "__main__":
    sys.exit(handle_cli())
