#!/usr/bin/env python3
"""Tuned 64^3 Laplacian demo: serial vs static split vs autotuned."""
import sys

from stencilrt.cli import main

sys.exit(main(["stencil-bench", "--threads", "2", "--out", "stencil_bench.csv"] + sys.argv[1:]))
