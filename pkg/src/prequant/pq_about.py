#!/usr/bin/env python3

__title__ = "PreQuant"
__version__ = "0.1.0"
__author__ = "PreQuant contributors"
__license__ = "GNU GPLv3"
__year__ = "2026"
