"""Allow ``python -m maslovcount``."""

from .cli import main

raise SystemExit(main())
