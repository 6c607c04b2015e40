#!/usr/bin/env python3

from prequant.pq_main_cli import main_cli

if __name__ == "__main__":
    main_cli()
