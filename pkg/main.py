#!/usr/bin/env python3
"""
gpfactor - Main Entry Point

Usage:
    python main.py analyze graph.json
    python main.py hecke-growth graph.json --max-len 10 --table
    python main.py fock-verify graph.json --depth 3 --trials 200 --seed 7
    python main.py isocheck first.json second.json

Reports are written to stdout; logs and summaries go to stderr.
"""

import logging
import sys
from typing import Optional


def setup_logging(log_level: str = "WARNING", log_file: Optional[str] = None):
    """Setup logging configuration; stdout stays reserved for reports."""
    level = getattr(logging, log_level.upper(), None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.StreamHandler(sys.stderr),
            *([logging.FileHandler(log_file)] if log_file else [])
        ],
        force=True,
    )


def main():
    """Main entry point."""
    from cli import cli
    cli(prog_name="gpfactor")


if __name__ == "__main__":
    main()
