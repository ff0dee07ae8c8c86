"""Universal-controllability test for electron-driven spin systems.

A system driven only through the electron spin (S_x matrix elements) is
universally controllable when two conditions hold:

* strong regularity: all eigenvalues distinct, and the transition
  frequencies of all control-coupled level pairs (nonzero S_x matrix
  element) distinct, so every driven transition is individually
  addressable. Pairs the control cannot drive are exempt: their
  degeneracies are structural for more than one nucleus (nuclear level
  spacings add independently per manifold) and harmless, since driving at
  such a frequency still only rotates the coupled pair.
* connectivity: the graph on energy levels with an edge wherever S_x has a
  nonzero matrix element is connected.

Both are decided numerically with explicit tolerances and returned with the
violating pairs, so a failed verdict explains itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spinsys import (
    DEGENERACY_TOL_MHZ,
    EigenStructure,
    SpinSystem,
    system_eigensystem,
    transition_table,
)

# Eigenbasis S_x elements below this fraction of the largest element are
# treated as numerical zeros, not graph edges.
EDGE_THRESHOLD_REL = 1e-8


@dataclass(frozen=True)
class ControlGraph:
    """Level-connectivity graph of the electron drive operator."""

    nodes: tuple[int, ...]
    edges: frozenset[tuple[int, int]]
    weights: dict[tuple[int, int], float] = field(compare=False, hash=False, default_factory=dict)
    threshold: float = 0.0

    def is_connected(self) -> bool:
        """Union-find over the edges."""
        parent = {n: n for n in self.nodes}

        def find(a: int) -> int:
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for j, k in self.edges:
            parent[find(j)] = find(k)
        roots = {find(n) for n in self.nodes}
        return len(roots) <= 1

    def components(self) -> list[tuple[int, ...]]:
        parent = {n: n for n in self.nodes}

        def find(a: int) -> int:
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for j, k in self.edges:
            parent[find(j)] = find(k)
        groups: dict[int, list[int]] = {}
        for n in self.nodes:
            groups.setdefault(find(n), []).append(n)
        return [tuple(sorted(g)) for g in sorted(groups.values())]


@dataclass(frozen=True)
class UniversalityVerdict:
    strongly_regular: bool
    connected: bool
    violations: tuple[str, ...]

    @property
    def universal(self) -> bool:
        return self.strongly_regular and self.connected


def check_strong_regularity(eigs: EigenStructure,
                            tol_mhz: float = DEGENERACY_TOL_MHZ,
                            threshold_rel: float = EDGE_THRESHOLD_REL
                            ) -> tuple[bool, list[str]]:
    """True iff all eigenvalues are pairwise distinct and the transition
    frequencies of the control-coupled pairs are pairwise distinct, each to
    within ``tol_mhz``. Violations are returned as readable strings naming
    the offending level pairs.
    """
    violations: list[str] = []
    energies = eigs.level_energies_mhz
    dim = eigs.dim
    for j in range(dim):
        for k in range(j + 1, dim):
            if abs(energies[j] - energies[k]) < tol_mhz:
                violations.append(
                    f"degenerate eigenvalues: levels {j + 1} and {k + 1} "
                    f"differ by {abs(energies[j] - energies[k]):.3e} MHz"
                )
    rows = transition_table(eigs)
    max_elem = max((r[3] for r in rows), default=0.0)
    cutoff = threshold_rel * max_elem
    pairs = [(j, k, freq) for j, k, freq, elem in rows if elem > cutoff]
    for a in range(len(pairs)):
        for b in range(a + 1, len(pairs)):
            ja, ka, fa = pairs[a]
            jb, kb, fb = pairs[b]
            if abs(fa - fb) < tol_mhz:
                violations.append(
                    f"degenerate driven transitions: ({ja},{ka}) and "
                    f"({jb},{kb}) both near {fa:.6g} MHz"
                )
    return (not violations), violations


def build_control_graph(eigs: EigenStructure,
                        threshold_rel: float = EDGE_THRESHOLD_REL) -> ControlGraph:
    """Graph with an edge (j, k) wherever |<k|S_x|j>| exceeds
    ``threshold_rel`` times the largest matrix element.
    """
    rows = transition_table(eigs)
    max_elem = max((r[3] for r in rows), default=0.0)
    cutoff = threshold_rel * max_elem
    edges = {}
    for j, k, _freq, elem in rows:
        if elem > cutoff:
            edges[(j, k)] = elem
    return ControlGraph(
        nodes=tuple(range(1, eigs.dim + 1)),
        edges=frozenset(edges),
        weights=edges,
        threshold=cutoff,
    )


def is_universal(sys: SpinSystem,
                 tol_mhz: float = DEGENERACY_TOL_MHZ,
                 threshold_rel: float = EDGE_THRESHOLD_REL) -> UniversalityVerdict:
    """Combined verdict for a spin system under electron-only drive."""
    eigs = system_eigensystem(sys)
    regular, violations = check_strong_regularity(eigs, tol_mhz, threshold_rel)
    graph = build_control_graph(eigs, threshold_rel)
    connected = graph.is_connected()
    if not connected:
        comps = ", ".join(str(c) for c in graph.components())
        violations = violations + [f"disconnected control graph: components {comps}"]
    return UniversalityVerdict(
        strongly_regular=regular,
        connected=connected,
        violations=tuple(violations),
    )


def graph_edge_list(graph: ControlGraph, name: str = "control") -> str:
    """DOT-format rendering of the control graph (plain-text edge list)."""
    lines = [f"graph {name} {{"]
    for n in graph.nodes:
        lines.append(f"  {n};")
    for j, k in sorted(graph.edges):
        lines.append(f"  {j} -- {k};")
    lines.append("}")
    return "\n".join(lines) + "\n"
