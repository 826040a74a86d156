#!/usr/bin/env python3
"""Tuner convergence statistics on the synthetic cost surface."""
import sys

from stencilrt.cli import main

sys.exit(main(["tune-sim", "--out", "tune_sim.csv"] + sys.argv[1:]))
