"""
Logging setup for the command line and the API server
"""

import logging
import sys
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler

PLAIN_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def configure_logging(level: str = "INFO", rich_output: Optional[bool] = None) -> None:
    """Root logger to stderr; rich console when attached to a terminal"""
    if rich_output is None:
        rich_output = sys.stderr.isatty()

    if rich_output:
        handler = RichHandler(console=Console(stderr=True), show_path=False, rich_tracebacks=False)
        logging.basicConfig(level=level.upper(), format="%(message)s", datefmt="[%X]",
                            handlers=[handler], force=True)
    else:
        logging.basicConfig(level=level.upper(), format=PLAIN_FORMAT, stream=sys.stderr, force=True)

    # matplotlib is chatty at DEBUG
    logging.getLogger("matplotlib").setLevel(max(logging.INFO, logging.getLogger().level))
