"""Receiver-position-invariant pairwise consistency test and clique selection.

For two signals attributed to different satellites, the almanac baseline
between the satellites, the pseudorange difference, and the dot product of
the measured arrival directions pin the first satellite's range through a
quadratic whose positive root must land in the physical range window and
whose constant coefficient must be negative. Mutually consistent pairs form
an undirected graph; a greedy satellite-unique clique is taken as the
legitimate set.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .constants import RANGE_MAX, RANGE_MIN
from .geometry import direction_unit

_PARALLEL_TOL = 1e-6  # two satellites are never co-directional from Earth


@dataclass(frozen=True)
class RangeBounds:
    lower: float = RANGE_MIN
    upper: float = RANGE_MAX

    def __post_init__(self):
        if not 0 < self.lower < self.upper:
            raise ValueError("bounds must satisfy 0 < lower < upper")


@dataclass
class PlausibilityGraph:
    candidates: list
    directed: np.ndarray      # (n, n) 0/1, entry [i, j] = p(i, j)
    adjacency: np.ndarray     # (n, n) bool, symmetric
    pair_range: np.ndarray    # (n, n) rho estimates (nan where undefined)
    pair_coeff: np.ndarray    # (n, n) quadratic constant c

    @property
    def size(self):
        return len(self.candidates)

    def degrees(self):
        return self.adjacency.sum(axis=1)


def pairwise_range(cand_a, cand_b, sat_positions):
    """Range estimate for cand_a's satellite using cand_b as reference.

    Returns (rho_estimate, coefficient); the estimate is nan when the
    directions are near-parallel or the discriminant is negative (both
    implausible by definition).
    """
    if cand_a.prn == cand_b.prn:
        raise ValueError("pairwise test needs two different satellites")
    v_a = direction_unit(cand_a.elevation, cand_a.azimuth)
    v_b = direction_unit(cand_b.elevation, cand_b.azimuth)
    baseline = sat_positions[cand_a.prn] - sat_positions[cand_b.prn]
    range_diff = cand_a.pseudorange - cand_b.pseudorange
    spread = 1.0 - float(v_a @ v_b)
    a = 2.0 * spread
    b = -2.0 * range_diff * spread
    c = range_diff**2 - float(baseline @ baseline)
    if abs(spread) < _PARALLEL_TOL:
        return np.nan, c
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return np.nan, c
    return (-b + np.sqrt(disc)) / (2.0 * a), c


def plausibility(rho_estimate, coefficient, bounds=RangeBounds()):
    """1 iff the range estimate is physical and the constant is negative."""
    ok = (
        np.isfinite(rho_estimate)
        and bounds.lower <= rho_estimate <= bounds.upper
        and coefficient < 0.0
    )
    return 1 if ok else 0


def build_graph(candidates, sat_positions, bounds=RangeBounds()) -> PlausibilityGraph:
    """Directed plausibility matrix and its symmetrized adjacency.

    Pairs sharing a satellite index are assigned 0 (uniqueness is enforced at
    the clique step); the diagonal is unused.
    """
    n = len(candidates)
    directed = np.zeros((n, n), dtype=np.uint8)
    pair_range = np.full((n, n), np.nan)
    pair_coeff = np.full((n, n), np.nan)
    for i in range(n):
        for j in range(n):
            if i == j or candidates[i].prn == candidates[j].prn:
                continue
            rho, coeff = pairwise_range(candidates[i], candidates[j], sat_positions)
            pair_range[i, j] = rho
            pair_coeff[i, j] = coeff
            directed[i, j] = plausibility(rho, coeff, bounds)
    adjacency = (directed * directed.T).astype(bool)
    return PlausibilityGraph(
        candidates=list(candidates),
        directed=directed,
        adjacency=adjacency,
        pair_range=pair_range,
        pair_coeff=pair_coeff,
    )


def greedy_clique(graph: PlausibilityGraph, rng=None):
    """Greedy satellite-unique clique; returns indices into graph.candidates.

    Seeds with a maximum-degree vertex, then repeatedly adds the
    highest-degree vertex adjacent to every member whose satellite is not yet
    represented. Degree ties are broken uniformly at random.
    """
    if graph.size == 0:
        return []
    rng = rng or np.random.default_rng(0)
    degrees = graph.degrees()

    def pick(indices):
        best = max(degrees[i] for i in indices)
        tied = [i for i in indices if degrees[i] == best]
        return tied[0] if len(tied) == 1 else int(rng.choice(tied))

    clique = [pick(range(graph.size))]
    used_prns = {graph.candidates[clique[0]].prn}
    while True:
        eligible = [
            i
            for i in range(graph.size)
            if i not in clique
            and graph.candidates[i].prn not in used_prns
            and all(graph.adjacency[i, j] for j in clique)
        ]
        if not eligible:
            return clique
        chosen = pick(eligible)
        clique.append(chosen)
        used_prns.add(graph.candidates[chosen].prn)


def dump_graph_csv(graph: PlausibilityGraph, path):
    """Adjacency and per-pair quadratic data as CSV rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "prn_i", "prn_j", "edge", "range_est_m", "coeff"])
        for i in range(graph.size):
            for j in range(graph.size):
                if i == j:
                    continue
                writer.writerow(
                    [
                        i,
                        j,
                        graph.candidates[i].prn,
                        graph.candidates[j].prn,
                        int(graph.adjacency[i, j]),
                        repr(float(graph.pair_range[i, j])),
                        repr(float(graph.pair_coeff[i, j])),
                    ]
                )
