"""Provide helpful functions for managing experiment output storage.

Runs are stored as ``<output dir>/<command>_<model>_<seed>/``, each holding a
``manifest.json`` plus the files the command wrote.
"""

import logging
import os
from pathlib import Path

_logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
OUTPUT_DIR_ENV = "HILBERT_ASIP_DIR"
_XDG_SUBDIR = "hilbert_asip"


def _xdg_output_dir() -> Path:
    """Resolve the output location from XDG data variables.

    ``XDG_DATA_HOME`` wins; otherwise the first entry of the colon-separated
    ``XDG_DATA_DIRS`` that isn't already a file; otherwise ``~/.local/share/``.
    """
    xdg_data_home = os.environ.get("XDG_DATA_HOME")
    if xdg_data_home:
        return Path(xdg_data_home) / _XDG_SUBDIR
    for directory in filter(None, os.environ.get("XDG_DATA_DIRS", "").split(":")):
        candidate = Path(directory) / _XDG_SUBDIR
        if not candidate.is_file():
            return candidate
    return Path.home() / ".local" / "share" / _XDG_SUBDIR


def get_output_dir() -> Path:
    """Get base hilbert-asip output storage location, creating it if needed.

    ``$HILBERT_ASIP_DIR`` is used as given; otherwise the location follows the
    `XDG Base Directory Specification <https://specifications.freedesktop.org/basedir-spec/basedir-spec-latest.html>`_.

    :return: path to base output directory
    """
    override = os.environ.get(OUTPUT_DIR_ENV)
    base_dir = Path(override) if override else _xdg_output_dir()
    base_dir.mkdir(exist_ok=True, parents=True)
    return base_dir


def get_run_dir(command: str, model: str, seed: int, output_dir: Path | None = None) -> Path:
    """Get the directory for one run; reruns with the same seed overwrite it.

    :param command: CLI command writing the run, e.g. ``"verify"``
    :param model: model name
    :param seed: experiment seed
    :param output_dir: base location, defaulting to :py:func:`get_output_dir`
    :return: run directory path, not yet created
    """
    base_dir = output_dir if output_dir is not None else get_output_dir()
    return base_dir / f"{command}_{model}_{seed}"


def get_latest_run_dir(directory: Path) -> Path:
    """Get the most recently written run directory.

    A run directory is any immediate subdirectory holding a run manifest.

    :param directory: location to check (presumably, the base output directory)
    :return: Path to the run directory whose manifest was modified last
    :raise FileNotFoundError: if no run directory is available
    """
    _logger.debug("Looking for run manifests under %s...", directory)
    manifests = list(directory.glob(f"*/{MANIFEST_NAME}"))
    if not manifests:
        msg = f"Unable to find a run directory in {directory.absolute()}"
        raise FileNotFoundError(msg)
    latest = max(manifests, key=lambda m: (m.stat().st_mtime_ns, m.parent.name))
    _logger.debug("Returning %s as most recent run directory.", latest.parent)
    return latest.parent
