"""Check the closed forms against solvers that never use them.

The brute-force search maximizes the summed surplus directly, and the
best-response dynamics let each CP react in turn until nobody moves.
"""

import sys

from cpinvest.oracle import run_verification

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
results = run_verification(seed, n_markets=100)
for r in results:
    print(r.line())
sys.exit(0 if all(r.passed for r in results) else 1)
