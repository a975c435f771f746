"""
Allows `python -m fdqe`.
"""

import sys

from fdqe.cli import run

sys.exit(run(sys.argv[1:]))
