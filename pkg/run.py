#!/usr/bin/env python3
"""
VSK Kriging - Entry Point

Run this file to use the ``vskgp`` command line without installing the package,
e.g. ``python run.py run jump_fixed``.
"""

if __name__ == "__main__":
    import sys

    from src.main import main
    sys.exit(main())
