"""
main.py

Command line entry point when running from a source checkout (`python src/main/main.py check 3,2 --lang min`).
Equivalent to `python -m fdqe` with src/main on the path.
"""

import sys

from fdqe.cli import run


if __name__ == "__main__":
    sys.exit(run(sys.argv[1:]))
