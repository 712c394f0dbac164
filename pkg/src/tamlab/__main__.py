"""Allow ``python -m tamlab``."""
import sys

from tamlab.cli import main

sys.exit(main())
