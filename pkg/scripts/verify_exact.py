#!/usr/bin/env python3
"""Run the two exact (zero-sampling-error) verification gates.

Equivalent to:
    additive-scm check-nonid
    additive-scm verify-lemmas --trials 50 --k 2
    additive-scm verify-lemmas --trials 50 --k 3
"""

import sys

from additive_scm.cli import main

rc = main(["check-nonid"])
rc |= main(["verify-lemmas", "--trials", "50", "--k", "2"])
rc |= main(["verify-lemmas", "--trials", "50", "--k", "3"])
sys.exit(rc)
