"""Connectivity diagnostics for paired-comparison data.

Three graphs are read off a dataset:

* the win digraph, with an edge i -> j whenever i has beaten j (``a_ij > 0``);
* the comparison graph, undirected, with an edge whenever the pair has met
  (``n_ij > 0``);
* the hosting digraph, with an edge i -> j whenever i has hosted j
  (``n_host[i][j] > 0``).

Condition A asks for strong connectivity of the win digraph, Condition B for
connectivity of the comparison graph, and Condition C for the two-directional
hosting property: every split of the teams must have some first-set team
hosting a second-set team and some first-set team visiting one. Condition C
holds exactly when the hosting digraph is strongly connected (for every
proper vertex subset, strong connectivity means an edge leaves it and an edge
enters it, which are precisely the two hosting directions), so all three
checks reduce to component computations instead of a scan over all 2^t - 2
splits. The checks return None on success and a PartitionWitness on failure.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import VenuelessDataError
from .types import Array, Dataset, PartitionWitness


def _source_component(adjacency: np.ndarray) -> np.ndarray:
    """Vertices of a source SCC (no incoming edges from other components).

    Among all source components, the one containing the smallest vertex
    index is returned, which makes witnesses deterministic.
    """
    n_comp, labels = connected_components(
        adjacency, directed=True, connection="strong"
    )
    if n_comp == 1:
        return np.arange(adjacency.shape[0])
    rows, cols = np.nonzero(adjacency)
    has_incoming = np.zeros(n_comp, dtype=bool)
    cross = labels[rows] != labels[cols]
    has_incoming[labels[cols[cross]]] = True
    best = None
    for comp in range(n_comp):
        if has_incoming[comp]:
            continue
        members = np.flatnonzero(labels == comp)
        if best is None or members[0] < best[0]:
            best = members
    return best


def strong_connectivity_witness(
    weights: Array, condition: str, detail: str
) -> PartitionWitness | None:
    """None if the digraph with edges ``weights > 0`` is strongly connected,
    else a witness split (q1 = a source component, so q2 sends no edges into
    q1)."""
    adjacency = np.asarray(weights) > 0
    t = adjacency.shape[0]
    q1 = _source_component(adjacency)
    if len(q1) == t:
        return None
    in_q1 = np.zeros(t, dtype=bool)
    in_q1[q1] = True
    q2 = np.flatnonzero(~in_q1)
    return PartitionWitness(condition=condition, q1=tuple(q1), q2=tuple(q2), detail=detail)


def check_condition_a(dataset: Dataset) -> PartitionWitness | None:
    """Strong connectivity of the win digraph.

    On failure the witness has q1 = a set nobody outside it has beaten.
    """
    return strong_connectivity_witness(
        dataset.totals.a,
        condition="A",
        detail="no team in the second set has beaten any team in the first set",
    )


def check_condition_b(dataset: Dataset) -> PartitionWitness | None:
    """Connectivity of the undirected comparison graph.

    On failure the witness has q1 = the connected component containing the
    lowest team index, q2 = everyone else; the two sets share no games.
    """
    adjacency = dataset.totals.n > 0
    n_comp, labels = connected_components(adjacency, directed=False)
    if n_comp == 1:
        return None
    q1 = np.flatnonzero(labels == labels[0])
    q2 = np.flatnonzero(labels != labels[0])
    return PartitionWitness(
        condition="B",
        q1=tuple(q1),
        q2=tuple(q2),
        detail="no games at all between the two sets",
    )


def check_condition_c(dataset: Dataset) -> PartitionWitness | None:
    """Strong connectivity of the hosting digraph (venue data required).

    On failure, q1 is a set of teams that never visit the rest: no team in
    q2 has ever hosted a team in q1.
    """
    if dataset.venueless:
        raise VenuelessDataError(
            "condition C needs home/away structure and this dataset has none"
        )
    return strong_connectivity_witness(
        dataset.totals.n_host,
        condition="C",
        detail="no team in the second set has ever hosted a team in the first set",
    )


def condition_c_by_enumeration(dataset: Dataset) -> bool:
    """Decide Condition C by scanning every split; exponential, for
    cross-checking the component-based reduction on small t."""
    if dataset.venueless:
        raise VenuelessDataError(
            "condition C needs home/away structure and this dataset has none"
        )
    n_host = dataset.totals.n_host
    t = dataset.num_teams
    for mask in range(1, 2**t - 1):
        q1 = [i for i in range(t) if mask >> i & 1]
        q2 = [i for i in range(t) if not mask >> i & 1]
        hosts = n_host[np.ix_(q1, q2)].sum() > 0
        visits = n_host[np.ix_(q2, q1)].sum() > 0
        if not (hosts and visits):
            return False
    return True


def witness_is_valid(dataset: Dataset, witness: PartitionWitness) -> bool:
    """Re-evaluate a witness against the data: does it really violate the
    condition it names?"""
    q1 = np.array(witness.q1)
    q2 = np.array(witness.q2)
    if set(witness.q1) | set(witness.q2) != set(range(dataset.num_teams)):
        return False
    totals = dataset.totals
    if witness.condition == "A":
        return totals.a[np.ix_(q2, q1)].sum() == 0
    if witness.condition == "B":
        return totals.n[np.ix_(q1, q2)].sum() == 0
    if witness.condition == "C":
        hosts = totals.n_host[np.ix_(q1, q2)].sum() > 0
        visits = totals.n_host[np.ix_(q2, q1)].sum() > 0
        return not (hosts and visits)
    return False
