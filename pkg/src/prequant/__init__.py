#!/usr/bin/env python

import sys
from pathlib import Path

from prequant.pq_about import __version__

PKG_DIR: Path = Path(__file__).parent.absolute()

DATA_DIR: Path = PKG_DIR / "pq_data"
EXAMPLE_CONFIG_PATH: Path = DATA_DIR / "example.conf"

sys.path.insert(0, str(PKG_DIR))

__all__ = ["__version__"]
