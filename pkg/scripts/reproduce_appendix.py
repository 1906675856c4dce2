#!/usr/bin/env python3
"""Standalone: run reproduce-appendix with the default configuration (extra args are passed through)."""
import sys, os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.cli import main

if __name__ == "__main__":
    sys.exit(main(["reproduce-appendix", *sys.argv[1:]]))
