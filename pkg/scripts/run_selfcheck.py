#!/usr/bin/env python3
"""Quick numerical self-check: sampler exactness, d = 2 gap oracle, projectors."""

import sys

from eigencollide.cli import main

if __name__ == "__main__":
    sys.exit(main(["selfcheck"] + sys.argv[1:]))
