#!/usr/bin/env python3

import sys

IS_WINDOWS = sys.platform == "win32"
