"""Module entry point: ``python -m poisson_nav``."""

import sys

from .cli import main

sys.exit(main())
