"""Sweep the perturbation size and watch what it does to the answer.

The merit values themselves depend on epsilon, and strongly so. The
bundled four-team example keeps the same ranking across three orders of
magnitude under the met-pairs scheme, while the blanket scheme (epsilon
added to every pair, met or not) flips two teams between 0.1 and 0.5 on
the same data. The sweep tools make both effects visible in a few lines.
"""

import btrank

data = btrank.datasets.load_four_teams()

print("Met-pairs scheme:")
spec = btrank.ModelSpec(btrank.Model.BRADLEY_TERRY, btrank.Improved(0.1))
sweep = btrank.sweep_epsilon(spec, data, epsilons=(0.001, 0.01, 0.1, 0.5, 1.0, 2.0))
for entry in sweep:
    merits = "  ".join(f"{u:7.4f}" for u in entry.fit.merits_u)
    print(f"  eps={entry.epsilon:<6g} merits: {merits}   {entry.ranking.describe()}")
print(f"  same ranking at every epsilon: {sweep.stable}")

report = btrank.monotone_ratio_check(sweep)
print(f"  adjacent merit ratios shrink toward 1 as eps grows: {report.all_non_increasing}")

print("\nBlanket scheme on the same data:")
blanket = btrank.ModelSpec(btrank.Model.BRADLEY_TERRY, btrank.ConnerGrant(0.1))
sweep = btrank.sweep_epsilon(blanket, data, epsilons=(0.1, 0.5))
for entry in sweep:
    merits = "  ".join(f"{u:7.4f}" for u in entry.fit.merits_u)
    print(f"  eps={entry.epsilon:<6g} merits: {merits}   {entry.ranking.describe()}")
print(f"  same ranking at every epsilon: {sweep.stable}")
print(f"  pairs ordered oppositely by the two fits: {sweep.kendall_distances[0][1]}")
