"""Why the plain fit can refuse, and what the perturbed fit does about it.

Two mini leagues never play each other, so there is no basis for ranking
one league against the other and the maximum likelihood estimate does not
exist. The connectivity check names the offending partition instead of
letting the optimizer wander off to infinity. Once at least one cross
game exists, the plain estimate is still undefined whenever some team has
never lost, but the perturbed fit handles that case gracefully.
"""

import numpy as np

import btrank

teams = ("Ash", "Birch", "Cedar", "Dew", "Elm", "Fir")

# Ash/Birch/Cedar play each other, Dew/Elm/Fir play each other. No overlap.
wins = np.zeros((6, 6))
wins[0, 1] = 2
wins[1, 2] = 1
wins[2, 0] = 1
wins[3, 4] = 2
wins[4, 5] = 1
wins[5, 3] = 3

data = btrank.venue_free_dataset(teams, wins)
spec = btrank.ModelSpec(btrank.Model.BRADLEY_TERRY, btrank.Improved(0.3))

print("Two leagues, no cross games:")
try:
    btrank.fit(spec, data)
except btrank.ExistenceError as err:
    print(f"  refused: {err}")
    witness = err.witness
    print(f"  witness checks out: {btrank.witness_is_valid(data, witness)}")

# One cross game connects the meeting graph, but Ash is still unbeaten
# against the other league, so the unperturbed estimate would push Ash's
# merit to infinity. The perturbation keeps it finite.
wins[0, 3] = 1
data = btrank.venue_free_dataset(teams, wins)

print("\nAfter a single cross game (Ash beats Dew):")
witness = btrank.check_condition_a(data)
print(f"  win digraph strongly connected: {witness is None}")
if witness is not None:
    print(f"  so the plain estimate still does not exist: {witness.describe(teams)}")

result = btrank.fit(spec, data)
print(f"\n  perturbed fit converged in {result.iterations} iterations")
for team, merit in zip(result.teams, result.merits_u):
    print(f"    {team:<6} {merit:8.4f}")
print(f"  ranking: {btrank.extract_ranking(result).describe()}")
