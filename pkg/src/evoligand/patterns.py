"""Substructure patterns and matching for medicinal-chemistry filters.

Patterns are small labeled graphs with per-node element/aromaticity
predicates and per-edge order predicates, matched by backtracking subgraph
embedding (injective, non-induced: only pattern edges constrain the target).
The default alert set covers common reactive or unstable motifs expressible
over {C, N, O, F, S}; it stands in for published filter catalogs without
claiming to reproduce them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import yaml

from .molgraph import Bond, MolecularGraph


@dataclass(frozen=True)
class NodePred:
    """Predicate over one atom: element membership, aromaticity, hydrogens."""

    elements: Optional[tuple[str, ...]] = None
    aromatic: Optional[bool] = None
    min_h: int = 0

    def ok(self, g: MolecularGraph, i: int) -> bool:
        atom = g.atoms[i]
        if self.elements is not None and atom.element not in self.elements:
            return False
        if self.aromatic is not None and atom.aromatic != self.aromatic:
            return False
        return atom.implicit_h >= self.min_h


@dataclass(frozen=True)
class EdgePred:
    """Predicate over one bond.

    aromatic=True matches only aromatic bonds; aromatic=False only plain
    bonds. With aromatic=None, listing ``orders`` restricts to plain bonds of
    those orders, while leaving both unset matches any bond.
    """

    orders: Optional[tuple[int, ...]] = None
    aromatic: Optional[bool] = None

    def ok(self, bond: Bond) -> bool:
        if bond.aromatic:
            return self.aromatic is True or (
                self.aromatic is None and self.orders is None
            )
        if self.aromatic is True:
            return False
        return self.orders is None or bond.order in self.orders


@dataclass(frozen=True)
class SubstructurePattern:
    name: str
    nodes: tuple[NodePred, ...]
    edges: tuple[tuple[int, int, EdgePred], ...]

    def __post_init__(self):
        n = len(self.nodes)
        if n == 0:
            raise ValueError("pattern needs at least one node")
        adj = {i: set() for i in range(n)}
        for i, j, _ in self.edges:
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise ValueError(f"pattern {self.name}: bad edge ({i},{j})")
            adj[i].add(j)
            adj[j].add(i)
        seen = {0}
        stack = [0]
        while stack:
            for j in adj[stack.pop()]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        if len(seen) != n:
            raise ValueError(f"pattern {self.name}: not connected")

    def adjacency(self) -> list[list[tuple[int, EdgePred]]]:
        adj: list[list[tuple[int, EdgePred]]] = [[] for _ in self.nodes]
        for i, j, pred in self.edges:
            adj[i].append((j, pred))
            adj[j].append((i, pred))
        return adj

    def required_elements(self) -> dict[str, int]:
        """Minimum element multiset implied by single-element node predicates."""
        req: dict[str, int] = {}
        for node in self.nodes:
            if node.elements is not None and len(node.elements) == 1:
                e = node.elements[0]
                req[e] = req.get(e, 0) + 1
        return req


_ADJ_CACHE: dict[int, tuple] = {}


def _pattern_tables(pattern: SubstructurePattern):
    key = id(pattern)
    cached = _ADJ_CACHE.get(key)
    if cached is None:
        cached = (pattern.adjacency(), pattern.required_elements())
        _ADJ_CACHE[key] = cached
    return cached


def matches(g: MolecularGraph, pattern: SubstructurePattern) -> bool:
    """True iff the pattern embeds into the graph (subgraph isomorphism)."""
    n = len(pattern.nodes)
    if g.n_atoms < n:
        return False
    pat_adj, required = _pattern_tables(pattern)
    counts = g.element_counts()
    for element, need in required.items():
        if counts.get(element, 0) < need:
            return False

    # visit order: BFS from node 0 so every later node anchors to a mapped one
    order = [0]
    anchor: dict[int, tuple[int, EdgePred]] = {}
    seen = {0}
    qi = 0
    while qi < len(order):
        cur = order[qi]
        qi += 1
        for j, pred in pat_adj[cur]:
            if j not in seen:
                seen.add(j)
                anchor[j] = (cur, pred)
                order.append(j)

    assign: dict[int, int] = {}
    used: set[int] = set()

    def extend(t: int) -> bool:
        if t == n:
            return True
        pn = order[t]
        node_pred = pattern.nodes[pn]
        if t == 0:
            candidates = range(g.n_atoms)
        else:
            a_node, a_pred = anchor[pn]
            candidates = [
                j for j, b in g.neighbors(assign[a_node]) if a_pred.ok(b)
            ]
        for cand in candidates:
            if cand in used or not node_pred.ok(g, cand):
                continue
            ok = True
            for q, pred in pat_adj[pn]:
                if q in assign:
                    bond = g.bond_between(cand, assign[q])
                    if bond is None or not pred.ok(bond):
                        ok = False
                        break
            if not ok:
                continue
            assign[pn] = cand
            used.add(cand)
            if extend(t + 1):
                return True
            del assign[pn]
            used.discard(cand)
        return False

    return extend(0)


# ---------------------------------------------------------------------------
# default alert set
# ---------------------------------------------------------------------------


def _node(elements=None, aromatic=None, min_h=0) -> NodePred:
    elems = tuple(elements) if elements is not None else None
    return NodePred(elements=elems, aromatic=aromatic, min_h=min_h)


def _edge(i, j, orders=None, aromatic=None):
    ords = tuple(orders) if orders is not None else None
    return (i, j, EdgePred(orders=ords, aromatic=aromatic))


def _chain_pattern(name: str, length: int) -> SubstructurePattern:
    nodes = tuple(_node(["C"], aromatic=False) for _ in range(length))
    edges = tuple(_edge(k, k + 1, orders=[1], aromatic=False) for k in range(length - 1))
    return SubstructurePattern(name, nodes, edges)


DEFAULT_ALERTS: tuple[SubstructurePattern, ...] = (
    SubstructurePattern(
        "nitro_aromatic",
        (_node(["C"], aromatic=True), _node(["N"]), _node(["O"])),
        (_edge(0, 1, orders=[1]), _edge(1, 2, orders=[2])),
    ),
    SubstructurePattern(
        "peroxide",
        (_node(["O"]), _node(["O"])),
        (_edge(0, 1, orders=[1], aromatic=False),),
    ),
    SubstructurePattern(
        "acyl_fluoride",
        (_node(["C"]), _node(["O"]), _node(["F"])),
        (_edge(0, 1, orders=[2]), _edge(0, 2, orders=[1])),
    ),
    SubstructurePattern(
        "michael_acceptor",
        (
            _node(["C"], aromatic=False),
            _node(["C"], aromatic=False),
            _node(["C"], aromatic=False),
            _node(["O"]),
        ),
        (_edge(0, 1, orders=[2]), _edge(1, 2, orders=[1]), _edge(2, 3, orders=[2])),
    ),
    SubstructurePattern(
        "aldehyde",
        (_node(["C"], min_h=1), _node(["O"])),
        (_edge(0, 1, orders=[2]),),
    ),
    _chain_pattern("long_aliphatic_chain", 8),
    SubstructurePattern(
        "azo",
        (_node(["N"]), _node(["N"])),
        (_edge(0, 1, orders=[2], aromatic=False),),
    ),
    SubstructurePattern(
        "nitrogen_fluoride",
        (_node(["N"]), _node(["F"])),
        (_edge(0, 1),),
    ),
    SubstructurePattern(
        "oxygen_fluoride",
        (_node(["O"]), _node(["F"])),
        (_edge(0, 1),),
    ),
    SubstructurePattern(
        "thiocarbonyl",
        (_node(["C"]), _node(["S"])),
        (_edge(0, 1, orders=[2], aromatic=False),),
    ),
    SubstructurePattern(
        "disulfide",
        (_node(["S"]), _node(["S"])),
        (_edge(0, 1),),
    ),
    SubstructurePattern(
        "strained_hetero_ring",
        (_node(["C"]), _node(["C"]), _node(["N", "O"])),
        (_edge(0, 1, orders=[1]), _edge(1, 2, orders=[1]), _edge(2, 0, orders=[1])),
    ),
    SubstructurePattern(
        "cumulated_diene",
        (_node(["C"]), _node(["C"]), _node(["C"])),
        (_edge(0, 1, orders=[2]), _edge(1, 2, orders=[2])),
    ),
)


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------


def load_patterns(path: str | Path) -> tuple[SubstructurePattern, ...]:
    """Load a pattern list from YAML.

    Each entry: {name, nodes: [{elements, aromatic, min_h}],
    edges: [[i, j, {orders, aromatic}]]}.
    """
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    patterns = []
    for entry in raw:
        nodes = tuple(
            NodePred(
                elements=tuple(nd["elements"]) if nd.get("elements") else None,
                aromatic=nd.get("aromatic"),
                min_h=int(nd.get("min_h", 0)),
            )
            for nd in entry["nodes"]
        )
        edges = []
        for i, j, ed in entry.get("edges", []):
            edges.append(
                (
                    int(i),
                    int(j),
                    EdgePred(
                        orders=tuple(ed["orders"]) if ed.get("orders") else None,
                        aromatic=ed.get("aromatic"),
                    ),
                )
            )
        patterns.append(SubstructurePattern(entry["name"], nodes, tuple(edges)))
    return tuple(patterns)
