import sys
from typing import Optional, Sequence

from app.cli.context import CommandContext
from app.cli.router import parse_args
from app.config.logging import get_logger, setup_logging
from app.core.dependencies import get_settings
from app.core.middleware import run_command


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point of the `qss` command; returns the process exit code"""
    args = parse_args(argv)
    settings = get_settings()
    setup_logging(settings.debug, settings.log_dir)

    logger = get_logger(__name__)
    logger.info(f"{settings.app_name} v{settings.app_version}: {args.command}")

    return run_command(lambda: args.handler(CommandContext.from_args(args, settings), args))


if __name__ == "__main__":
    sys.exit(main())
