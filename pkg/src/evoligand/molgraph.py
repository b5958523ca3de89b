"""Molecular graphs: valence validation, canonical keys, ring perception.

The graph model is deliberately small: atoms carry an element symbol, an
aromatic flag and an implicit hydrogen count; bonds carry an integer order
(1-3) or an aromatic flag. Aromatic bonds are accounted with an effective
order of 1.5, and exact valence checks resolve aromatic systems through a
Kekule assignment search (each aromatic bond fixed to single or double).

Canonical keys are produced by iterative neighborhood refinement with
individualization on ties, followed by a deterministic DFS emission in
SMILES-compatible syntax. The key is self-consistent (isomorphic graphs map
to identical strings); equality with any external toolkit's canonical SMILES
is not promised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

# Standard atomic masses (Da) for the supported element set.
ATOMIC_MASS = {
    "H": 1.008,
    "C": 12.011,
    "N": 14.007,
    "O": 15.999,
    "F": 18.998,
    "S": 32.06,
}

# Maximum standard valence per element.
VALENCE = {
    "C": 4,
    "N": 3,
    "O": 2,
    "F": 1,
    "S": 6,
}

# Hydrogen filling targets the smallest standard valence that fits the bond
# sum (sulfur: 2, then 4, then 6); VALENCE stays the hard upper limit.
FILL_VALENCES = {
    "C": (4,),
    "N": (3,),
    "O": (2,),
    "F": (1,),
    "S": (2, 4, 6),
}


def fill_hydrogen_count(element: str, bond_total: float) -> int:
    """Implicit hydrogens completing ``element`` to its smallest fitting valence."""
    need = int(math.ceil(bond_total))
    for v in FILL_VALENCES[element]:
        if v >= need:
            return v - need
    return max(0, VALENCE[element] - need)

# Elements that may carry an aromatic flag.
AROMATIC_ELEMENTS = frozenset({"C", "N", "O", "S"})

_BOND_CHAR = {1: "", 2: "=", 3: "#"}


class InvalidGraphError(ValueError):
    """Raised when an operation requires a valid graph and gets one that is not."""


@dataclass(frozen=True)
class Atom:
    element: str
    aromatic: bool = False
    implicit_h: int = 0


@dataclass(frozen=True)
class Bond:
    a: int
    b: int
    order: int = 1
    aromatic: bool = False

    @property
    def effective_order(self) -> float:
        return 1.5 if self.aromatic else float(self.order)

    def other(self, idx: int) -> int:
        return self.b if idx == self.a else self.a


@dataclass
class ValidityReport:
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


class MolecularGraph:
    """Immutable molecular graph. Use :meth:`from_parts` for hand construction."""

    def __init__(self, atoms: Sequence[Atom], bonds: Sequence[Bond]):
        self.atoms: tuple[Atom, ...] = tuple(atoms)
        n = len(self.atoms)
        for b in bonds:
            if not (0 <= b.a < n and 0 <= b.b < n):
                raise ValueError(f"bond ({b.a},{b.b}) references missing atom")
        self.bonds: tuple[Bond, ...] = tuple(bonds)
        adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for k, b in enumerate(self.bonds):
            if b.a != b.b:
                adj[b.a].append((b.b, k))
                adj[b.b].append((b.a, k))
        self._adj = adj
        self._bond_index: dict[tuple[int, int], int] = {}
        for k, b in enumerate(self.bonds):
            self._bond_index.setdefault(_pair(b.a, b.b), k)
        self._ring_bonds: Optional[frozenset[int]] = None
        self._order_sums: Optional[list[float]] = None
        self._element_counts: Optional[dict[str, int]] = None
        self._atom_tokens: Optional[list[str]] = None

    # -- construction -----------------------------------------------------

    @classmethod
    def from_parts(
        cls,
        atoms: Iterable[tuple[str, bool]],
        bonds: Iterable[tuple],
        implicit_h: Optional[Sequence[int]] = None,
    ) -> "MolecularGraph":
        """Build a graph from (element, aromatic) pairs and bond tuples.

        Bond tuples are (i, j, order) with order 1-3, or (i, j, "ar") for an
        aromatic bond. When ``implicit_h`` is omitted, hydrogens are filled to
        each element's standard valence, resolving aromatic systems through a
        Kekule assignment when one exists.
        """
        atom_list = []
        for element, aromatic in atoms:
            if element not in VALENCE:
                raise ValueError(f"unsupported element {element!r}")
            atom_list.append(Atom(element=element, aromatic=aromatic, implicit_h=0))
        bond_list = []
        for i, j, order in bonds:
            if order == "ar":
                bond_list.append(Bond(i, j, order=1, aromatic=True))
            else:
                bond_list.append(Bond(i, j, order=int(order)))
        g = cls(atom_list, bond_list)
        if implicit_h is None:
            hs = _fill_hydrogens(g)
        else:
            hs = list(implicit_h)
            if len(hs) != len(atom_list):
                raise ValueError("implicit_h length mismatch")
        atom_list = [
            Atom(a.element, a.aromatic, int(h)) for a, h in zip(g.atoms, hs)
        ]
        return cls(atom_list, bond_list)

    # -- basic accessors ---------------------------------------------------

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @property
    def n_bonds(self) -> int:
        return len(self.bonds)

    def neighbors(self, i: int) -> list[tuple[int, Bond]]:
        return [(j, self.bonds[k]) for j, k in self._adj[i]]

    def degree(self, i: int) -> int:
        return len(self._adj[i])

    def bond_between(self, i: int, j: int) -> Optional[Bond]:
        k = self._bond_index.get(_pair(i, j))
        return self.bonds[k] if k is not None else None

    def bond_order_sum(self, i: int) -> float:
        """Sum of effective bond orders at atom i (aromatic bonds count 1.5)."""
        if self._order_sums is None:
            sums = [0.0] * self.n_atoms
            for b in self.bonds:
                if b.a != b.b:
                    eff = b.effective_order
                    sums[b.a] += eff
                    sums[b.b] += eff
            self._order_sums = sums
        return self._order_sums[i]

    def element_counts(self) -> dict[str, int]:
        if self._element_counts is None:
            counts: dict[str, int] = {}
            for a in self.atoms:
                counts[a.element] = counts.get(a.element, 0) + 1
            self._element_counts = counts
        return self._element_counts

    def heavy_degree(self, i: int) -> int:
        return len(self._adj[i])

    # -- ring perception ---------------------------------------------------

    def ring_bond_indices(self) -> frozenset[int]:
        """Indices of bonds that lie on at least one cycle (non-bridges)."""
        if self._ring_bonds is None:
            bridges = _find_bridges(self.n_atoms, self._adj)
            self._ring_bonds = frozenset(
                k for k in range(self.n_bonds) if k not in bridges
            )
        return self._ring_bonds

    def in_ring_atom(self, i: int) -> bool:
        ring = self.ring_bond_indices()
        return any(k in ring for _, k in self._adj[i])

    def in_ring_bond(self, k: int) -> bool:
        return k in self.ring_bond_indices()

    def ring_count(self) -> int:
        """Cycle rank of the whole graph (independent rings)."""
        return self.n_bonds - self.n_atoms + len(self.components())

    def components(self) -> list[list[int]]:
        seen = [False] * self.n_atoms
        comps = []
        for start in range(self.n_atoms):
            if seen[start]:
                continue
            stack, comp = [start], []
            seen[start] = True
            while stack:
                i = stack.pop()
                comp.append(i)
                for j, _ in self._adj[i]:
                    if not seen[j]:
                        seen[j] = True
                        stack.append(j)
            comps.append(comp)
        return comps

    def smallest_ring_sizes(self) -> list[int]:
        """Size of the shortest cycle through each chord of a spanning forest.

        Approximates the ring-size census well enough for macrocycle and ring
        complexity heuristics; it is not a full SSSR computation.
        """
        tree = _spanning_forest(self.n_atoms, self._adj)
        sizes = []
        for k, b in enumerate(self.bonds):
            if k in tree or b.a == b.b:
                continue
            path = _shortest_path_excluding(self._adj, b.a, b.b, k)
            if path is not None:
                sizes.append(len(path))
        return sizes

    def aromatic_ring_count(self) -> int:
        """Cycle rank of the subgraph induced by aromatic bonds."""
        arom_bonds = [b for b in self.bonds if b.aromatic]
        if not arom_bonds:
            return 0
        atoms = {b.a for b in arom_bonds} | {b.b for b in arom_bonds}
        n_comp = _count_components(atoms, arom_bonds)
        return len(arom_bonds) - len(atoms) + n_comp


def _pair(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i <= j else (j, i)


# ---------------------------------------------------------------------------
# hydrogen filling and Kekule search
# ---------------------------------------------------------------------------


def _fill_hydrogens(g: MolecularGraph) -> list[int]:
    assignment = kekule_assignment(g)
    hs = []
    for i, atom in enumerate(g.atoms):
        total = _atom_total_order(g, i, assignment)
        hs.append(fill_hydrogen_count(atom.element, total))
    return hs


def _atom_total_order(g, i, assignment) -> float:
    total = 0.0
    for _, k in g._adj[i]:
        b = g.bonds[k]
        if b.aromatic:
            if assignment is not None and k in assignment:
                total += assignment[k]
            else:
                total += 1.5
        else:
            total += b.order
    return total


def kekule_assignment(
    g: MolecularGraph, h_counts: Optional[Sequence[int]] = None
) -> Optional[dict[int, int]]:
    """Search for an order assignment (1 or 2) over the aromatic bonds.

    A valid assignment gives every aromatic carbon exactly one aromatic double
    bond, every other aromatic atom at most one, and keeps every atom within
    its maximum valence (counting ``h_counts`` when provided). Returns the
    bond-index -> order mapping, or None when no assignment exists.
    """
    arom = [k for k, b in enumerate(g.bonds) if b.aromatic]
    if not arom:
        return {}
    base = {}
    for i in range(g.n_atoms):
        total = sum(
            g.bonds[k].order for _, k in g._adj[i] if not g.bonds[k].aromatic
        )
        if h_counts is not None:
            total += h_counts[i]
        base[i] = total

    # split aromatic bonds into connected components and solve independently
    comps: list[list[int]] = []
    atom_comp: dict[int, int] = {}
    for k in arom:
        b = g.bonds[k]
        ca = atom_comp.get(b.a)
        cb = atom_comp.get(b.b)
        if ca is None and cb is None:
            cid = len(comps)
            comps.append([])
            atom_comp[b.a] = atom_comp[b.b] = cid
        elif ca is None:
            cid = cb
            atom_comp[b.a] = cid
        elif cb is None:
            cid = ca
            atom_comp[b.b] = cid
        elif ca != cb:
            # merge components (rare; relabel the smaller one)
            cid = ca
            for atom, c in list(atom_comp.items()):
                if c == cb:
                    atom_comp[atom] = ca
            comps[ca].extend(comps[cb])
            comps[cb] = []
        else:
            cid = ca
        comps[cid].append(k)

    result: dict[int, int] = {}
    for bond_ids in comps:
        if not bond_ids:
            continue
        sub = _kekule_component(g, bond_ids, base)
        if sub is None:
            return None
        result.update(sub)
    return result


def _kekule_component(g, bond_ids, base) -> Optional[dict[int, int]]:
    atoms = sorted({g.bonds[k].a for k in bond_ids} | {g.bonds[k].b for k in bond_ids})
    arom_deg = {i: 0 for i in atoms}
    for k in bond_ids:
        arom_deg[g.bonds[k].a] += 1
        arom_deg[g.bonds[k].b] += 1
    double_used = {i: False for i in atoms}
    assigned_single = {i: 0 for i in atoms}
    order = sorted(bond_ids)
    result: dict[int, int] = {}
    budget = [200000]  # backtracking node cap; components here are tiny cycles

    def atom_ok_final(i) -> bool:
        atom = g.atoms[i]
        total = base[i] + assigned_single[i] + (2 if double_used[i] else 0)
        if total > VALENCE[atom.element]:
            return False
        if atom.element == "C" and not double_used[i]:
            return False
        return True

    def remaining(i) -> int:
        return arom_deg[i]

    def try_assign(pos: int) -> bool:
        budget[0] -= 1
        if budget[0] <= 0:
            return False
        if pos == len(order):
            return all(atom_ok_final(i) for i in atoms)
        k = order[pos]
        b = g.bonds[k]
        for val in (2, 1):
            if val == 2 and (double_used[b.a] or double_used[b.b]):
                continue
            # apply
            arom_deg[b.a] -= 1
            arom_deg[b.b] -= 1
            if val == 2:
                double_used[b.a] = double_used[b.b] = True
            else:
                assigned_single[b.a] += 1
                assigned_single[b.b] += 1
            feasible = True
            for i in (b.a, b.b):
                atom = g.atoms[i]
                total = base[i] + assigned_single[i] + (2 if double_used[i] else 0)
                if remaining(i) == 0:
                    if not atom_ok_final(i):
                        feasible = False
                elif total + remaining(i) > VALENCE[atom.element]:
                    # lower bound: every undecided aromatic bond adds >= 1
                    feasible = False
            if feasible:
                result[k] = val
                if try_assign(pos + 1):
                    return True
                del result[k]
            # undo
            arom_deg[b.a] += 1
            arom_deg[b.b] += 1
            if val == 2:
                double_used[b.a] = double_used[b.b] = False
            else:
                assigned_single[b.a] -= 1
                assigned_single[b.b] -= 1
        return False

    if try_assign(0):
        return dict(result)
    return None


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def validate(g: MolecularGraph) -> ValidityReport:
    """Check valences, aromatic consistency and structural sanity.

    The report lists every violation found; an empty report means the graph
    is valid. This checker is independent of how the graph was produced, so
    it can serve as the oracle for the decoder's validity guarantee.
    """
    violations: list[str] = []
    seen_pairs: set[tuple[int, int]] = set()
    for k, b in enumerate(g.bonds):
        if b.a == b.b:
            violations.append(f"bond {k}: self-loop on atom {b.a}")
            continue
        p = _pair(b.a, b.b)
        if p in seen_pairs:
            violations.append(f"bond {k}: duplicate bond between {p[0]} and {p[1]}")
        seen_pairs.add(p)
        if not b.aromatic and b.order not in (1, 2, 3):
            violations.append(f"bond {k}: unsupported order {b.order}")

    for i, atom in enumerate(g.atoms):
        if atom.element not in VALENCE:
            violations.append(f"atom {i}: unsupported element {atom.element!r}")
        if atom.implicit_h < 0:
            violations.append(f"atom {i}: negative implicit hydrogen count")
        if atom.aromatic and atom.element not in AROMATIC_ELEMENTS:
            violations.append(f"atom {i}: element {atom.element} cannot be aromatic")
    if violations:
        return ValidityReport(violations)

    # aromatic bonds must join aromatic atoms and lie on aromatic cycles
    arom_bond_ids = [k for k, b in enumerate(g.bonds) if b.aromatic]
    for k in arom_bond_ids:
        b = g.bonds[k]
        if not (g.atoms[b.a].aromatic and g.atoms[b.b].aromatic):
            violations.append(
                f"bond {k}: aromatic bond joins non-aromatic atom"
            )
    arom_adj: list[list[tuple[int, int]]] = [[] for _ in range(g.n_atoms)]
    for k in arom_bond_ids:
        b = g.bonds[k]
        arom_adj[b.a].append((b.b, k))
        arom_adj[b.b].append((b.a, k))
    if arom_bond_ids:
        bridges = _find_bridges(g.n_atoms, arom_adj)
        for k in arom_bond_ids:
            if k in bridges:
                b = g.bonds[k]
                violations.append(
                    f"bond {k}: aromatic bond {b.a}-{b.b} not on an aromatic cycle"
                )
    for i, atom in enumerate(g.atoms):
        if atom.aromatic and len(arom_adj[i]) < 2:
            violations.append(f"atom {i}: aromatic atom lacks an aromatic cycle")
    if violations:
        return ValidityReport(violations)

    # valence: plain part first, then aromatic systems via Kekule search
    h_counts = [a.implicit_h for a in g.atoms]
    for i, atom in enumerate(g.atoms):
        plain = sum(
            g.bonds[k].order for _, k in g._adj[i] if not g.bonds[k].aromatic
        )
        arom_min = len(arom_adj[i])  # every aromatic bond contributes >= 1
        if plain + arom_min + atom.implicit_h > VALENCE[atom.element]:
            violations.append(
                f"atom {i}: valence exceeded "
                f"({plain + arom_min + atom.implicit_h} > {VALENCE[atom.element]})"
            )
    if violations:
        return ValidityReport(violations)

    if arom_bond_ids and kekule_assignment(g, h_counts) is None:
        violations.append(
            "aromatic system admits no Kekule assignment within valence limits"
        )
    return ValidityReport(violations)


# ---------------------------------------------------------------------------
# graph algorithms
# ---------------------------------------------------------------------------


def _find_bridges(n: int, adj: Sequence[Sequence[tuple[int, int]]]) -> set[int]:
    """Bond indices that are bridges (iterative Tarjan lowlink)."""
    disc = [-1] * n
    low = [0] * n
    bridges: set[int] = set()
    timer = 0
    for start in range(n):
        if disc[start] != -1:
            continue
        disc[start] = low[start] = timer
        timer += 1
        stack: list[list[int]] = [[start, -1, 0]]  # node, parent bond, next ptr
        while stack:
            frame = stack[-1]
            i, pb, ptr = frame
            if ptr < len(adj[i]):
                frame[2] += 1
                j, k = adj[i][ptr]
                if k == pb:
                    continue
                if disc[j] == -1:
                    disc[j] = low[j] = timer
                    timer += 1
                    stack.append([j, k, 0])
                else:
                    low[i] = min(low[i], disc[j])
            else:
                stack.pop()
                if stack:
                    p = stack[-1][0]
                    low[p] = min(low[p], low[i])
                    if low[i] > disc[p]:
                        bridges.add(pb)
    return bridges


def _spanning_forest(n: int, adj) -> set[int]:
    seen = [False] * n
    tree: set[int] = set()
    for start in range(n):
        if seen[start]:
            continue
        seen[start] = True
        stack = [start]
        while stack:
            i = stack.pop()
            for j, k in adj[i]:
                if not seen[j]:
                    seen[j] = True
                    tree.add(k)
                    stack.append(j)
    return tree


def _shortest_path_excluding(adj, src: int, dst: int, skip_bond: int):
    """BFS path from src to dst avoiding one bond; returns atom list or None."""
    from collections import deque

    prev = {src: None}
    q = deque([src])
    while q:
        i = q.popleft()
        if i == dst:
            path = [i]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return path[::-1]
        for j, k in adj[i]:
            if k == skip_bond or j in prev:
                continue
            prev[j] = i
            q.append(j)
    return None


def _count_components(atoms: set[int], bonds: Sequence[Bond]) -> int:
    parent = {i: i for i in atoms}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for b in bonds:
        ra, rb = find(b.a), find(b.b)
        if ra != rb:
            parent[ra] = rb
    return len({find(i) for i in atoms})


# ---------------------------------------------------------------------------
# canonical form
# ---------------------------------------------------------------------------


def canonical_form(g: MolecularGraph, check: bool = True) -> str:
    """Deterministic, relabeling-invariant string key in SMILES syntax.

    With ``check=True`` (default) the graph is validated first and an
    :class:`InvalidGraphError` is raised on violations. Decoder outputs are
    valid by construction, so hot paths may pass ``check=False``.
    """
    if check:
        report = validate(g)
        if not report.ok:
            raise InvalidGraphError("; ".join(report.violations))
    if g.n_atoms == 0:
        return ""
    parts = []
    for comp in g.components():
        parts.append(_canonical_component(g, comp))
    return ".".join(sorted(parts))


_ORDER_KEY = {1.0: 0, 1.5: 1, 2.0: 2, 3.0: 3}


def _canonical_component(g: MolecularGraph, comp: list[int]) -> str:
    n = len(comp)
    g2l = {a: li for li, a in enumerate(comp)}
    # local adjacency: (bond order key, local neighbor, global bond index)
    ladj: list[list[tuple[float, int, int]]] = [[] for _ in range(n)]
    for li, a in enumerate(comp):
        for j, k in g._adj[a]:
            ladj[li].append((g.bonds[k].effective_order, g2l[j], k))
    # neighbor lists with bond orders pre-encoded as small ints
    enc_nbrs: list[list[tuple[int, int]]] = [
        [(_ORDER_KEY[o], j) for o, j, _ in ladj[li]] for li in range(n)
    ]

    init_keys = [
        (
            g.atoms[a].element,
            g.atoms[a].aromatic,
            g.atoms[a].implicit_h,
            len(ladj[li]),
            tuple(sorted(o for o, _, _ in ladj[li])),
        )
        for li, a in enumerate(comp)
    ]
    rank = {v: r for r, v in enumerate(sorted(set(init_keys)))}
    codes = [rank[key] for key in init_keys]

    def refine(codes: list[int]) -> list[int]:
        n_classes = len(set(codes))
        while True:
            keys = [
                (codes[i], tuple(sorted(codes[j] * 4 + ok for ok, j in enc_nbrs[i])))
                for i in range(n)
            ]
            rank = {v: r for r, v in enumerate(sorted(set(keys)))}
            codes = [rank[key] for key in keys]
            new_n = len(set(codes))
            if new_n == n_classes:
                return codes
            n_classes = new_n

    def search(codes: list[int]) -> str:
        by_code: dict[int, list[int]] = {}
        for i, c in enumerate(codes):
            by_code.setdefault(c, []).append(i)
        tied = None
        for c in sorted(by_code):
            if len(by_code[c]) > 1:
                tied = by_code[c]
                break
        if tied is None:
            return _emit(g, comp, ladj, codes)
        best = None
        marker = n + 1
        for atom in tied:
            trial = list(codes)
            trial[atom] = marker
            s = search(refine(trial))
            if best is None or s < best:
                best = s
        return best

    return search(refine(codes))


def _expected_h(g: MolecularGraph, i: int) -> int:
    return fill_hydrogen_count(g.atoms[i].element, g.bond_order_sum(i))


def _atom_token(g: MolecularGraph, i: int) -> str:
    if g._atom_tokens is None:
        g._atom_tokens = [None] * g.n_atoms  # type: ignore[list-item]
    cached = g._atom_tokens[i]
    if cached is not None:
        return cached
    atom = g.atoms[i]
    sym = atom.element.lower() if atom.aromatic else atom.element
    if atom.implicit_h == _expected_h(g, i):
        token = sym
    elif atom.implicit_h == 0:
        token = f"[{sym}]"
    elif atom.implicit_h == 1:
        token = f"[{sym}H]"
    else:
        token = f"[{sym}H{atom.implicit_h}]"
    g._atom_tokens[i] = token
    return token


def _bond_token(g: MolecularGraph, b: Bond) -> str:
    if b.aromatic:
        return ""
    if b.order == 1 and g.atoms[b.a].aromatic and g.atoms[b.b].aromatic:
        return "-"  # explicit single between aromatic atoms (biphenyl case)
    return _BOND_CHAR[b.order]


def _ring_digit(n: int) -> str:
    return str(n) if n < 10 else f"%{n:02d}"


def _emit(
    g: MolecularGraph,
    comp: list[int],
    ladj: list[list[tuple[float, int, int]]],
    codes: list[int],
) -> str:
    n = len(comp)
    root = codes.index(min(codes))
    order_of = [
        sorted(((codes[j], j, k) for _, j, k in ladj[i]))
        for i in range(n)
    ]
    visited = [False] * n
    children: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    closures: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    closure_bonds: set[int] = set()
    counter = 0

    # iterative DFS; the parent bond marks the tree edge back up
    visited[root] = True
    walk_stack: list[list] = [[root, -1, 0]]
    while walk_stack:
        frame = walk_stack[-1]
        i, pb, ptr = frame
        if ptr < len(order_of[i]):
            frame[2] += 1
            _, j, k = order_of[i][ptr]
            if k == pb:
                continue
            if visited[j]:
                if k not in closure_bonds:
                    closure_bonds.add(k)
                    counter += 1
                    closures[j].append((counter, k))
                    closures[i].append((counter, k))
            else:
                visited[j] = True
                children[i].append((j, k))
                walk_stack.append([j, k, 0])
        else:
            walk_stack.pop()

    # build the string bottom-up over the finished DFS tree
    fragments: list[Optional[str]] = [None] * n
    build_stack: list[tuple[int, bool]] = [(root, False)]
    while build_stack:
        i, expanded = build_stack.pop()
        if not expanded:
            build_stack.append((i, True))
            for j, _ in children[i]:
                build_stack.append((j, False))
        else:
            out = [_atom_token(g, comp[i])]
            for num, k in closures[i]:
                out.append(_bond_token(g, g.bonds[k]) + _ring_digit(num))
            kids = children[i]
            for idx, (j, k) in enumerate(kids):
                frag = _bond_token(g, g.bonds[k]) + fragments[j]
                if idx < len(kids) - 1:
                    out.append("(" + frag + ")")
                else:
                    out.append(frag)
            fragments[i] = "".join(out)
    return fragments[root]
