# Python standard library imports
import argparse
import json
import logging
import sys
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence

# Application imports
from app.config.run_config_parser import parse_config
from app.error_handling.exception_handler_manager import ExceptionHandlerManager
from app.error_handling.exceptions.usage_exception import UsageException
from app.models.config.run_config import RunConfig
from app.service.experiment_service import ExperimentService

SUCCESS_EXIT_CODE = 0
COMMANDS = ("pretrain", "continual", "eval", "router-report", "tau-sweep", "param-count", "export-tasks")


class CliArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageException instead of exiting."""

    def error(self, message: str):
        raise UsageException(message, self.format_usage())


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def _parse_int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}") from e


def _flag_options(annotation: Any) -> Dict[str, Any]:
    if annotation is bool:
        return {"type": _parse_bool, "metavar": "BOOL"}
    if annotation in (int, float):
        return {"type": annotation}
    if annotation in (List[int], Optional[List[int]]):
        return {"type": _parse_int_list, "metavar": "N,N,..."}
    if isinstance(annotation, type) and issubclass(annotation, Enum):
        return {"type": str, "choices": [member.value for member in annotation]}
    return {"type": str}


def add_config_flags(parser: argparse.ArgumentParser) -> None:
    """One --flag per RunConfig field, defaulting to None so unset flags never override the file."""
    parser.add_argument("--config", dest="config_path", default=None, help="JSON config file")
    group = parser.add_argument_group("run configuration")
    for name, field in RunConfig.model_fields.items():
        group.add_argument(
            "--" + name.replace("_", "-"), dest=name, default=None, help=field.description,
            **_flag_options(field.annotation)
        )


def config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {name: getattr(args, name, None) for name in RunConfig.model_fields}
    return parse_config(args.config_path, overrides)


def cli_controller(experiment_service: ExperimentService) -> CliArgumentParser:
    parser = CliArgumentParser(prog="pmoe", description="Progressive mixture of LoRA experts, desk scale")
    subparsers = parser.add_subparsers(dest="command", parser_class=CliArgumentParser)
    subparsers.required = True
    logger = logging.getLogger(__name__)

    def command(name: str, help_text: str) -> Callable:
        def register(handler: Callable[[argparse.Namespace], Dict[str, Any]]) -> Callable:
            sub = subparsers.add_parser(name, help=help_text)
            add_config_flags(sub)
            sub.set_defaults(handler=handler)
            handler.parser = sub
            return handler
        return register

    @command("pretrain", "pretrain the frozen base on the general corpus")
    def pretrain(args: argparse.Namespace) -> Dict[str, Any]:
        config = config_from_args(args)
        result = experiment_service.pretrain(config, corpus_path=args.corpus)
        return {"checkpoint": result["checkpoint"], "general_scores": result["general_scores"]}
    pretrain.parser.add_argument("--corpus", default=None, help="token-id corpus file instead of the generated one")

    @command("continual", "train adapters over the task stream")
    def continual(args: argparse.Namespace) -> Dict[str, Any]:
        config = config_from_args(args)
        summary = experiment_service.continual(config)
        logger.info("Run directory: %s", config.output_dir)
        return {"run_dir": config.output_dir, "final": summary.final.model_dump() if summary.final else None}

    @command("eval", "score a checkpoint on the task and/or general suites")
    def evaluate(args: argparse.Namespace) -> Dict[str, Any]:
        return experiment_service.evaluate(config_from_args(args), args.checkpoint, args.suite)
    evaluate.parser.add_argument("--checkpoint", required=True, help="checkpoint file")
    evaluate.parser.add_argument("--suite", choices=("tasks", "general", "all"), default="all")

    @command("router-report", "allocation matrix, entropies and token dumps of a PMoE checkpoint")
    def router_report(args: argparse.Namespace) -> Dict[str, Any]:
        report = experiment_service.router_report(config_from_args(args), args.checkpoint, args.dump_count)
        return report.model_dump(exclude={"token_dumps"})
    router_report.parser.add_argument("--checkpoint", required=True, help="stage checkpoint file")
    router_report.parser.add_argument("--dump-count", type=int, default=1, help="token dumps per task")

    @command("tau-sweep", "one PMoE run per tau on a shared base, plus sweep.csv")
    def tau_sweep(args: argparse.Namespace) -> Dict[str, Any]:
        rows = experiment_service.tau_sweep(config_from_args(args))
        return {"rows": [row.model_dump() for row in rows]}

    @command("param-count", "trainable adapter parameters for pmoe and lora-seq")
    def param_count(args: argparse.Namespace) -> Dict[str, Any]:
        config = config_from_args(args)
        return {"rows": experiment_service.param_count(config, args.ranks or [config.rank])}
    param_count.parser.add_argument("--ranks", type=_parse_int_list, default=None, metavar="N,N,...")

    @command("export-tasks", "write the train/test splits as text files")
    def export_tasks(args: argparse.Namespace) -> Dict[str, Any]:
        return {"files": experiment_service.export_tasks(config_from_args(args))}

    return parser


def cli_main(argv: Optional[Sequence[str]] = None, services: Optional[Dict[str, Any]] = None) -> int:
    """
    Run one subcommand and return the process exit code: 0 on success, 2 for
    usage and configuration errors, 1 for any other failure.
    """
    if services is None:
        # app.app builds the services and imports this package's dependencies
        from app.app import init_app
        services = init_app()
    handler: ExceptionHandlerManager = services['exception_handler_manager']
    argv = list(sys.argv[1:] if argv is None else argv)
    command_name = next((a for a in argv if a in COMMANDS), None)

    try:
        args = cli_controller(services['experiment']).parse_args(argv)
        result = args.handler(args)
    except SystemExit as e:
        # --help
        return int(e.code or 0)
    except Exception as e:
        response = handler.handle(command_name, e)
        print(response.model_dump_json(), file=sys.stderr)
        return response.exit_code

    print(json.dumps({"status": "success", "command": args.command, "data": result}, default=str))
    return SUCCESS_EXIT_CODE
