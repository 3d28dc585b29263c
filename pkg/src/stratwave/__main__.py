"""Allow ``python -m stratwave``."""

import sys

from stratwave.cli import main

sys.exit(main())
