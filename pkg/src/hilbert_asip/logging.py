"""Configure application logging."""

import logging
from pathlib import Path


def initialize_logs(log_level: int = logging.DEBUG, log_file: Path | None = None) -> None:
    """Configure logging for application-level uses.

    Library modules only emit records; handlers are attached here, once, by the CLI.
    Numerical warnings raised through ``warnings`` (e.g. overflow in a rate formula)
    are routed to the same log.

    :param log_level: app log level to set
    :param log_file: log destination, ``hilbert_asip.log`` in the working directory
        by default
    """
    logging.basicConfig(
        filename=log_file or f"{__package__}.log",
        format="[%(asctime)s] - %(name)s - %(levelname)s : %(message)s",
    )
    logging.captureWarnings(True)
    for name in (__package__, "py.warnings"):
        logging.getLogger(name).setLevel(log_level)
