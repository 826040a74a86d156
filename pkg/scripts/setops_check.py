#!/usr/bin/env python3
"""Fuzz the bboxset algebra against the point-set oracle."""
import sys

from stencilrt.cli import main

sys.exit(main(["setops-check", "--all-dims", "--dims", "3", "--cases", "500"] + sys.argv[1:]))
