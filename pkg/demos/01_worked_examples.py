"""Three small markets that show the two regimes side by side.

A single CP has nobody to free-ride on, so the centralized and equilibrium
answers coincide. Two identical CPs each want someone else to pay for the
shared capacity, and the equilibrium invests a third of the optimum. Two weak
CPs invest nothing publicly in equilibrium although the optimum is positive.
"""

from cpinvest import compare, market_from_products

CASES = {
    "one CP, ra=4, b=1": ([4], [1]),
    "two identical CPs, ra=3, b=1": ([3, 3], [1, 1]),
    "two weak CPs, ra=1, b=1": ([1, 1], [1, 1]),
}

for title, (ra, b) in CASES.items():
    rep = compare(market_from_products(ra, b))
    c, n = rep.centralized, rep.nash
    print(title)
    print(f"  centralized: Q={c.Q_star:.6g}  P={c.P_star:.6g}  U={c.total_utility:.6g}  gamma={rep.gamma_c:.6g}")
    print(f"  equilibrium: Q={n.Q_star:.6g}  P={n.P_star:.6g}  U={n.total_utility:.6g}  gamma={rep.gamma_n:.6g}")
    print(f"  eta={rep.eta:.6g}  Gamma={rep.capital_gamma:.6g}")
    print()
