"""Two CPs with ra = (psi1, psi2): where does the equilibrium break down?

Prints a map of eta for b=[1,1]. Cells marked '  inf' are markets where no CP
finds public investment worthwhile on its own, which happens exactly when
max(psi_n - b_n^2/2) <= 1.
"""

import math

from cpinvest import experiments as ex

axis = ex.psi_axis(0.5, 5.0)
table = ex.run_psi_sweep(ex.PsiSweepSpec(axis, axis, (1.0, 1.0)))
cells = {(r.delta_or_psi1, r.psi2): r for r in table.rows}

print("eta for b=[1,1]; rows psi2, columns psi1")
print("psi2 \\ psi1 " + "".join(f"{p:6.1f}" for p in axis))
for p2 in reversed(axis):
    line = "".join("   inf" if math.isinf(cells[p1, p2].eta) else f"{cells[p1, p2].eta:6.2f}" for p1 in axis)
    print(f"{p2:11.1f} {line}")

print()
for t in ex.assert_trends(table):
    print(t.line())
print(ex.gamma_n_nondecreasing_in_psi1(table).line())
print("(gamma_n can dip along a row while CP 2 is the contributor: Q_n stays put as CP 1 adds private investment)")
