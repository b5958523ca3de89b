"""SELFIES-style molecular string grammar: alphabet, parsing and decoding.

The dialect follows first-generation SELFIES token spellings ([C], [=N],
[Branch1_1], [Ring2], ...) restricted to the element set {C, N, O, F, S},
extended with a composed [Benzene] symbol that derives a whole aromatic
six-ring in one step. Every symbol string decodes to a valence-valid
molecular graph: bond orders are capped by the remaining capacity of the
derivation state, overrunning branch or ring payloads are truncated at the
end of the string, and symbols that are meaningless in the current state are
skipped.

Aromatic atom symbols ([c], [n], [o], [s]) record aromatic intent. After
derivation, five- and six-membered cycles of intent atoms are promoted to
aromatic rings when an alternating Kekule matching exists and the Hueckel
electron count (2 per ring double bond, 2 per lone-pair donor) is 4n+2.
Intent atoms left outside any promoted ring demote to their plain element,
so decoding remains total.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np
import yaml

from .molgraph import (
    AROMATIC_ELEMENTS,
    VALENCE,
    Atom,
    Bond,
    MolecularGraph,
    fill_hydrogen_count,
)

MAX_TOKENS = 80

_BOND_PREFIX = {1: "", 2: "=", 3: "#"}
_PREFIX_BOND = {"": 1, "=": 2, "#": 3}

# Remaining bond capacity of an atom while it is being derived. Aromatic
# carbon reserves one unit for the ring double bond it must carry if its ring
# is promoted; aromatic O/S act as lone-pair donors and keep two slots.
_DERIVE_CAPACITY = {
    ("C", False): 4,
    ("N", False): 3,
    ("O", False): 2,
    ("F", False): 1,
    ("S", False): 6,
    ("C", True): 3,
    ("N", True): 3,
    ("O", True): 2,
    ("S", True): 2,
}



class SelfiesParseError(ValueError):
    """Unknown or malformed token in a symbol string."""


@dataclass(frozen=True)
class SelfiesSymbol:
    """One grammar symbol: an atom, branch, ring marker or composed benzene."""

    kind: str  # "atom" | "branch" | "ring" | "benzene"
    element: str = ""
    bond_order: int = 1
    aromatic: bool = False
    length_class: int = 0
    payload_class: int = 0

    @staticmethod
    def atom(element: str, bond_order: int = 1, aromatic: bool = False) -> "SelfiesSymbol":
        if element not in VALENCE:
            raise ValueError(f"unsupported element {element!r}")
        if not 1 <= bond_order <= 3:
            raise ValueError("bond-order prefix must be 1..3")
        if aromatic and (element not in AROMATIC_ELEMENTS or bond_order != 1):
            raise ValueError("aromatic atom symbols take a single-bond prefix")
        return SelfiesSymbol("atom", element=element, bond_order=bond_order, aromatic=aromatic)

    @staticmethod
    def branch(length_class: int, payload_class: int) -> "SelfiesSymbol":
        if not (1 <= length_class <= 3 and 1 <= payload_class <= 3):
            raise ValueError("branch classes must be 1..3")
        return SelfiesSymbol("branch", length_class=length_class, payload_class=payload_class)

    @staticmethod
    def ring(length_class: int) -> "SelfiesSymbol":
        if not 1 <= length_class <= 3:
            raise ValueError("ring class must be 1..3")
        return SelfiesSymbol("ring", length_class=length_class)

    @staticmethod
    def benzene() -> "SelfiesSymbol":
        return SelfiesSymbol("benzene")

    @property
    def token(self) -> str:
        if self.kind == "atom":
            sym = self.element.lower() if self.aromatic else self.element
            return f"[{_BOND_PREFIX[self.bond_order]}{sym}]"
        if self.kind == "branch":
            return f"[Branch{self.length_class}_{self.payload_class}]"
        if self.kind == "ring":
            return f"[Ring{self.length_class}]"
        return "[Benzene]"

    def __str__(self) -> str:
        return self.token


def _build_token_table() -> dict[str, SelfiesSymbol]:
    table: dict[str, SelfiesSymbol] = {}
    max_prefix = {"C": 3, "N": 3, "O": 2, "F": 1, "S": 3}
    for element, top in max_prefix.items():
        for order in range(1, top + 1):
            s = SelfiesSymbol.atom(element, order)
            table[s.token] = s
    for element in sorted(AROMATIC_ELEMENTS):
        s = SelfiesSymbol.atom(element, 1, aromatic=True)
        table[s.token] = s
    for lc in (1, 2, 3):
        table[SelfiesSymbol.ring(lc).token] = SelfiesSymbol.ring(lc)
        for pc in (1, 2, 3):
            s = SelfiesSymbol.branch(lc, pc)
            table[s.token] = s
    table["[Benzene]"] = SelfiesSymbol.benzene()
    return table


TOKEN_TABLE = _build_token_table()

# Base-16 digit values used by branch-length and ring-reach payloads. The
# assignment makes [Ring1][Branch1_1] after six ring atoms close a six-ring,
# matching the spellings this dialect is meant to stay compatible with.
INDEX_CODEBOOK = {
    "[C]": 0,
    "[Ring1]": 1,
    "[Ring2]": 2,
    "[Ring3]": 3,
    "[Branch1_1]": 4,
    "[Branch1_2]": 5,
    "[Branch1_3]": 6,
    "[Branch2_1]": 7,
    "[Branch2_2]": 8,
    "[Branch2_3]": 9,
    "[O]": 10,
    "[N]": 11,
    "[=N]": 12,
    "[=C]": 13,
    "[#C]": 14,
    "[S]": 15,
}


@dataclass(frozen=True)
class SelfiesString:
    """An ordered, non-empty sequence of grammar symbols."""

    symbols: tuple[SelfiesSymbol, ...]

    def __post_init__(self):
        if not 1 <= len(self.symbols) <= MAX_TOKENS:
            raise ValueError(
                f"symbol strings must hold 1..{MAX_TOKENS} tokens, got {len(self.symbols)}"
            )

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self) -> Iterator[SelfiesSymbol]:
        return iter(self.symbols)


def parse_symbols(text: str) -> SelfiesString:
    """Parse a concatenation of bracketed tokens into a symbol string."""
    symbols: list[SelfiesSymbol] = []
    pos = 0
    index = 0
    n = len(text)
    while pos < n:
        if text[pos] != "[":
            raise SelfiesParseError(
                f"expected '[' at character {pos}, found {text[pos]!r}"
            )
        end = text.find("]", pos + 1)
        if end < 0:
            raise SelfiesParseError(f"unterminated token starting at character {pos}")
        token = text[pos : end + 1]
        index += 1
        sym = TOKEN_TABLE.get(token)
        if sym is None:
            raise SelfiesParseError(f"unknown token {token} at position {index}")
        symbols.append(sym)
        pos = end + 1
    if not symbols:
        raise SelfiesParseError("empty symbol string")
    return SelfiesString(tuple(symbols))


def render(s: SelfiesString) -> str:
    """Inverse of :func:`parse_symbols`: concatenated bracketed tokens."""
    return "".join(sym.token for sym in s.symbols)


# ---------------------------------------------------------------------------
# alphabet
# ---------------------------------------------------------------------------


class Alphabet:
    """Weighted symbol set used for sampling random strings and mutations."""

    def __init__(self, entries: Iterable[tuple[SelfiesSymbol, float]]):
        entries = tuple((s, float(w)) for s, w in entries)
        if not entries:
            raise ValueError("alphabet needs at least one entry")
        if any(w < 0 for _, w in entries):
            raise ValueError("alphabet weights must be nonnegative")
        total = sum(w for _, w in entries)
        if total <= 0:
            raise ValueError("alphabet needs at least one positive weight")
        self.entries = entries
        self.symbols = tuple(s for s, _ in entries)
        self.weights = np.array([w for _, w in entries], dtype=float) / total
        self._cum = np.cumsum(self.weights)
        self._cum[-1] = 1.0

    @property
    def valences(self) -> dict[str, int]:
        elements = {s.element for s in self.symbols if s.kind == "atom"}
        elements.add("C")  # benzene expansion introduces carbon
        return {e: VALENCE[e] for e in sorted(elements)}

    def sample(self, rng: np.random.Generator) -> SelfiesSymbol:
        idx = int(np.searchsorted(self._cum, rng.random(), side="right"))
        return self.symbols[min(idx, len(self.symbols) - 1)]

    def sample_many(self, rng: np.random.Generator, n: int) -> list[SelfiesSymbol]:
        us = rng.random(n)
        idxs = np.searchsorted(self._cum, us, side="right")
        last = len(self.symbols) - 1
        return [self.symbols[min(int(i), last)] for i in idxs]

    def to_dict(self) -> dict[str, float]:
        return {s.token: float(w) for s, w in self.entries}

    @classmethod
    def from_dict(cls, weights: dict[str, float]) -> "Alphabet":
        entries = []
        for token, w in weights.items():
            sym = TOKEN_TABLE.get(token)
            if sym is None:
                raise SelfiesParseError(f"unknown token {token} in alphabet")
            entries.append((sym, float(w)))
        return cls(entries)

    @classmethod
    def from_yaml(cls, path: str | Path) -> "Alphabet":
        with open(path) as fh:
            data = yaml.safe_load(fh)
        if not isinstance(data, dict):
            raise ValueError("alphabet file must map token spellings to weights")
        return cls.from_dict(data)

    def save_yaml(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            yaml.safe_dump(self.to_dict(), fh, sort_keys=True)


_DEFAULT_WEIGHTS = {
    "[C]": 0.30,
    "[c]": 0.10,
    "[N]": 0.05,
    "[n]": 0.03,
    "[O]": 0.07,
    "[o]": 0.02,
    "[F]": 0.04,
    "[S]": 0.03,
    "[s]": 0.01,
    "[=C]": 0.06,
    "[=N]": 0.03,
    "[=O]": 0.06,
    "[#C]": 0.02,
    "[#N]": 0.02,
    "[Branch1_1]": 0.05,
    "[Branch1_2]": 0.04,
    "[Ring1]": 0.04,
    "[Ring2]": 0.02,
    "[Benzene]": 0.01,
}


def default_alphabet() -> Alphabet:
    """Weighted default alphabet biased toward plain carbon."""
    return Alphabet.from_dict(_DEFAULT_WEIGHTS)


def random_string(
    length: int, alphabet: Alphabet, rng: np.random.Generator
) -> SelfiesString:
    """Draw ``length`` i.i.d. weighted symbols from the alphabet."""
    if length < 1:
        raise ValueError("length must be >= 1")
    return SelfiesString(tuple(alphabet.sample_many(rng, length)))


# ---------------------------------------------------------------------------
# decoding
# ---------------------------------------------------------------------------


class _Derivation:
    """Mutable state while a symbol string is turned into a graph."""

    def __init__(self):
        self.elements: list[str] = []
        self.intent: list[bool] = []  # aromatic intent per atom
        self.capacity: list[int] = []
        self.bond_order: dict[tuple[int, int], int] = {}
        self.bond_seq: list[tuple[int, int]] = []
        self.ring_requests: list[tuple[int, int]] = []
        self.benzene_cycles: list[list[int]] = []
        self.closure_pairs: list[tuple[int, int]] = []

    def add_atom(self, element: str, aromatic: bool) -> int:
        self.elements.append(element)
        self.intent.append(aromatic)
        self.capacity.append(_DERIVE_CAPACITY[(element, aromatic)])
        return len(self.elements) - 1

    def add_bond(self, i: int, j: int, order: int) -> None:
        pair = (i, j) if i < j else (j, i)
        if pair in self.bond_order:
            self.bond_order[pair] = min(self.bond_order[pair] + order, 3)
        else:
            self.bond_order[pair] = order
            self.bond_seq.append(pair)


def _padded(symbols: Sequence[SelfiesSymbol]) -> Iterator[Optional[SelfiesSymbol]]:
    return itertools.chain(iter(symbols), itertools.repeat(None))


def _index_value(digits: Sequence[Optional[SelfiesSymbol]]) -> int:
    value = 0
    for d in digits:
        code = INDEX_CODEBOOK.get(d.token, 0) if d is not None else 0
        value = value * 16 + code
    return value


def _derive(
    gen: Iterator[Optional[SelfiesSymbol]],
    init_state: int,
    ctx: _Derivation,
    prev: int,
) -> None:
    state = init_state
    sym = next(gen)
    while sym is not None and state >= 0:
        if sym.kind == "branch":
            if state <= 1:
                pass  # no capacity to branch: symbol is skipped
            else:
                digits = [next(gen) for _ in range(sym.length_class)]
                count = _index_value(digits) + 1
                payload = list(itertools.islice(gen, count))
                payload = [p for p in payload if p is not None]
                branch_init = min(state - 1, sym.payload_class)
                _derive(_padded(payload), branch_init, ctx, prev)
                state = state - branch_init
        elif sym.kind == "ring":
            if state != 0 and prev >= 0:
                digits = [next(gen) for _ in range(sym.length_class)]
                reach = _index_value(digits) + 1
                left = max(0, prev - reach)
                ctx.ring_requests.append((left, prev))
        elif sym.kind == "benzene":
            state, prev = _derive_benzene(ctx, state, prev)
        else:  # atom
            cap = _DERIVE_CAPACITY[(sym.element, sym.aromatic)]
            idx = ctx.add_atom(sym.element, sym.aromatic)
            if state == 0:
                state = cap
            else:
                order = min(sym.bond_order, state, cap)
                ctx.add_bond(prev, idx, order)
                ctx.capacity[prev] -= order
                ctx.capacity[idx] -= order
                state = cap - order
            prev = idx
            if state == 0:
                state = -1
        sym = next(gen)


def _derive_benzene(ctx: _Derivation, state: int, prev: int) -> tuple[int, int]:
    ring: list[int] = []
    first = ctx.add_atom("C", True)
    ring.append(first)
    if state != 0 and prev >= 0:
        ctx.add_bond(prev, first, 1)
        ctx.capacity[prev] -= 1
        ctx.capacity[first] -= 1
    for _ in range(5):
        idx = ctx.add_atom("C", True)
        ctx.add_bond(ring[-1], idx, 1)
        ctx.capacity[ring[-1]] -= 1
        ctx.capacity[idx] -= 1
        ring.append(idx)
    ctx.add_bond(ring[-1], first, 1)
    ctx.capacity[ring[-1]] -= 1
    ctx.capacity[first] -= 1
    ctx.benzene_cycles.append(ring)
    new_prev = ring[-1]
    new_state = ctx.capacity[new_prev]
    return (new_state if new_state > 0 else -1), new_prev


def _form_rings(ctx: _Derivation) -> None:
    for left, right in ctx.ring_requests:
        if left == right:
            continue
        if ctx.capacity[left] < 1 or ctx.capacity[right] < 1:
            continue
        pair = (left, right) if left < right else (right, left)
        existing = ctx.bond_order.get(pair)
        if existing is None:
            ctx.bond_order[pair] = 1
            ctx.bond_seq.append(pair)
            ctx.closure_pairs.append(pair)
            ctx.capacity[left] -= 1
            ctx.capacity[right] -= 1
        elif existing < 3:
            ctx.bond_order[pair] = existing + 1
            ctx.capacity[left] -= 1
            ctx.capacity[right] -= 1


def _promote_aromatic(ctx: _Derivation):
    """Identify aromatic cycles, choose Kekule doubles, return flags.

    Returns (aromatic_atom_flags, kekule_double_flags, aromatic_bond_pairs).
    """
    n = len(ctx.elements)
    adj: dict[int, list[int]] = {i: [] for i in range(n)}
    for (i, j) in ctx.bond_seq:
        adj[i].append(j)
        adj[j].append(i)

    aromatic = [False] * n
    kekule_double = [False] * n
    aromatic_pairs: set[tuple[int, int]] = set()

    candidates: list[list[int]] = list(ctx.benzene_cycles)
    for pair in ctx.closure_pairs:
        if ctx.intent[pair[0]] and ctx.intent[pair[1]]:
            cycle = _intent_cycle(ctx, adj, pair)
            if cycle is not None:
                candidates.append(cycle)

    for cycle in candidates:
        if len(cycle) not in (5, 6):
            continue
        if any(not ctx.intent[i] or aromatic[i] for i in cycle):
            continue
        edges = [
            tuple(sorted((cycle[k], cycle[(k + 1) % len(cycle)])))
            for k in range(len(cycle))
        ]
        if any(e in aromatic_pairs for e in edges):
            continue
        if any(ctx.bond_order.get(e, 0) != 1 for e in edges):
            continue
        sums = {i: _plain_bond_sum(ctx, adj, i) for i in cycle}
        matching = _cycle_kekule(ctx, cycle, sums)
        if matching is None:
            continue
        for i in cycle:
            aromatic[i] = True
        for i in matching:
            kekule_double[i] = True
        aromatic_pairs.update(edges)

    return aromatic, kekule_double, aromatic_pairs


def _plain_bond_sum(ctx: _Derivation, adj, i: int) -> int:
    total = 0
    for j in adj[i]:
        pair = (i, j) if i < j else (j, i)
        total += ctx.bond_order[pair]
    return total


def _intent_cycle(ctx: _Derivation, adj, pair: tuple[int, int]) -> Optional[list[int]]:
    """Shortest cycle through a closure bond within aromatic-intent atoms."""
    from collections import deque

    src, dst = pair
    prev: dict[int, Optional[int]] = {src: None}
    q = deque([src])
    while q:
        i = q.popleft()
        if i == dst:
            path = [i]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return path[::-1]
        for j in adj[i]:
            if j in prev or not ctx.intent[j]:
                continue
            if (i, j) in (pair, (pair[1], pair[0])):
                continue
            prev[j] = i
            q.append(j)
    return None


def _cycle_kekule(ctx: _Derivation, cycle: list[int], sums: dict[int, int]):
    """Pick in-ring double bonds for one candidate cycle, or None.

    Constraints: carbons carry exactly one ring double, nitrogens at most one,
    oxygen/sulfur none (they donate a lone pair); matched atoms must afford
    one extra bond order; the Hueckel count 2*doubles + 2*donors is 4n+2.
    """
    k = len(cycle)
    for mask in range(1 << k):
        matched: set[int] = set()
        ok = True
        for pos in range(k):
            if not mask >> pos & 1:
                continue
            a, b = cycle[pos], cycle[(pos + 1) % k]
            if a in matched or b in matched:
                ok = False
                break
            matched.add(a)
            matched.add(b)
        if not ok:
            continue
        donors = 0
        for i in cycle:
            elem = ctx.elements[i]
            if i in matched:
                if elem in ("O", "S"):
                    ok = False
                    break
                if sums[i] + 1 > VALENCE[elem]:
                    ok = False
                    break
            else:
                if elem == "C":
                    ok = False
                    break
                if sums[i] > VALENCE[elem]:
                    ok = False
                    break
                donors += 1
        if not ok:
            continue
        n_doubles = bin(mask).count("1")
        if (2 * n_doubles + 2 * donors) % 4 != 2:
            continue
        return matched
    return None


def decode(s: SelfiesString) -> MolecularGraph:
    """Derive the molecular graph encoded by a symbol string.

    Total by construction: any symbol string over the token table yields a
    valence-valid graph. Deterministic: no randomness, no external state.
    """
    ctx = _Derivation()
    _derive(_padded(list(s.symbols)), 0, ctx, prev=-1)
    _form_rings(ctx)

    if not ctx.elements:
        # Strings whose every symbol was skipped (e.g. a lone ring marker)
        # still must produce a molecule; fall back to methane.
        ctx.add_atom("C", False)

    aromatic, kekule_double, aromatic_pairs = _promote_aromatic(ctx)

    atoms: list[Atom] = []
    adj_sum = [0.0] * len(ctx.elements)
    for (i, j), order in ctx.bond_order.items():
        if (i, j) in aromatic_pairs:
            continue
        adj_sum[i] += order
        adj_sum[j] += order
    for i, element in enumerate(ctx.elements):
        if aromatic[i]:
            ring_orders = 3 if kekule_double[i] else 2
            h = fill_hydrogen_count(element, adj_sum[i] + ring_orders)
            atoms.append(Atom(element, True, h))
        else:
            atoms.append(Atom(element, False, fill_hydrogen_count(element, adj_sum[i])))

    bonds = [
        Bond(i, j, order=1, aromatic=True)
        if (i, j) in aromatic_pairs
        else Bond(i, j, order=ctx.bond_order[(i, j)])
        for (i, j) in ctx.bond_seq
    ]
    return MolecularGraph(atoms, bonds)
