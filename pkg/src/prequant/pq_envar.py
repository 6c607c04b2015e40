#!/usr/bin/env python3

import logging
import os
import os.path as os_path

OUTPUT_DIR_ENVAR = "PREQUANT_OUTPUT_DIR"
DEFAULT_OUTPUT_ROOT = "prequant_output"


def get_dir_frm_env(envar: str) -> str | None:
    directory = os.getenv(envar, "")
    return directory if os_path.isdir(directory) else None


def get_output_root(envar: str = OUTPUT_DIR_ENVAR) -> str:
    """
    Default output root for scenario runs. A set but not yet existing directory
    is accepted as well, it gets created when the first report is written.
    """
    if (directory := get_dir_frm_env(envar)) is not None:
        return directory
    if directory := os.getenv(envar, ""):
        logging.debug(f"{envar} points to {directory}, which does not exist yet")
        return directory
    return DEFAULT_OUTPUT_ROOT
