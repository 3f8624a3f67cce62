"""Revenue concentration: ra_n = 2 n^-delta.

As delta grows the revenue piles onto CP 1 and the centralized public
investment falls. Strong private efficiency (b=2) substitutes private for
public spending. Pass an output path to save a plot (needs matplotlib).
"""

import sys

from cpinvest import experiments as ex

table = ex.SweepTable("delta")
for spec in ex.default_delta_specs():
    table = table.extend(ex.run_delta_sweep(spec))

for t in ex.assert_trends(table):
    print(t.line())

print()
print("delta   " + "  ".join(f"{ex.format_b(b):>13}" for b in ex.N2_B_CONFIGS))
for d in ex.DEFAULT_DELTAS[::4]:
    row = [next(r for r in table.select(b) if r.delta_or_psi1 == d).Q_c for b in ex.N2_B_CONFIGS]
    print(f"{d:5.1f}   " + "  ".join(f"{q:13.6f}" for q in row))

if len(sys.argv) > 1:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    for ax, configs in zip(axes, (ex.N2_B_CONFIGS, ex.N5_B_CONFIGS)):
        for b in configs:
            rows = table.select(b)
            ax.plot([r.delta_or_psi1 for r in rows], [r.Q_c for r in rows], label=f"b={ex.format_b(b)}")
        ax.set_xlabel("delta")
        ax.set_title(f"N={len(configs[0])}")
        ax.legend()
    axes[0].set_ylabel("centralized Q")
    fig.tight_layout()
    fig.savefig(sys.argv[1])
    print(f"saved {sys.argv[1]}")
