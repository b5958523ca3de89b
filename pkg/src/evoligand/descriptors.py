"""Physicochemical descriptors computed from molecular graphs.

All values are additive-contribution estimates over the {C, N, O, F, S, H}
element set. The partition (ALogP) and polar surface area tables are built-in
defaults that can be replaced from a YAML file; they approximate published
per-atom contribution schemes but make no parity claim with any external
toolkit.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import yaml

from .molgraph import ATOMIC_MASS, MolecularGraph

# ALogP: per-atom contributions keyed by (element, aromatic), plus a
# contribution per implicit hydrogen. Crippen-flavored magnitudes.
DEFAULT_ALOGP = {
    ("C", False): 0.14,
    ("C", True): 0.29,
    ("N", False): -0.87,
    ("N", True): -0.49,
    ("O", False): -0.64,
    ("O", True): -0.20,
    ("F", False): 0.22,
    ("S", False): 0.25,
    ("S", True): 0.41,
    "H": 0.12,
}

# Polar surface area: Ertl-style fragment contributions (A^2) keyed by
# (element, aromatic, implicit_h, has_double_bond). Carbon and fluorine
# contribute nothing.
DEFAULT_PSA = {
    ("N", False, 0, False): 3.24,
    ("N", False, 1, False): 12.03,
    ("N", False, 2, False): 26.02,
    ("N", False, 0, True): 12.36,
    ("N", False, 1, True): 23.85,
    ("N", True, 0, False): 12.89,
    ("N", True, 1, False): 15.79,
    ("O", False, 0, False): 9.23,
    ("O", False, 1, False): 20.23,
    ("O", False, 0, True): 17.07,
    ("O", True, 0, False): 13.14,
    ("S", False, 0, False): 25.30,
    ("S", False, 1, False): 38.80,
    ("S", False, 0, True): 32.09,
    ("S", True, 0, False): 28.24,
}


@dataclass(frozen=True)
class DescriptorSet:
    """Descriptor bundle consumed by the drug-likeness and docking models."""

    mw: float
    alogp: float
    hbd: int
    hba: int
    psa: float
    rotb: int
    arom: int
    alerts: int
    ring_count: int
    heavy_atoms: int


def molecular_weight(g: MolecularGraph) -> float:
    total = 0.0
    for atom in g.atoms:
        total += ATOMIC_MASS[atom.element] + atom.implicit_h * ATOMIC_MASS["H"]
    return total


def alogp(g: MolecularGraph, table: Optional[dict] = None) -> float:
    table = DEFAULT_ALOGP if table is None else table
    total = 0.0
    for atom in g.atoms:
        total += table.get((atom.element, atom.aromatic), 0.0)
        total += atom.implicit_h * table.get("H", 0.0)
    return total


def polar_surface_area(g: MolecularGraph, table: Optional[dict] = None) -> float:
    table = DEFAULT_PSA if table is None else table
    total = 0.0
    for i, atom in enumerate(g.atoms):
        if atom.element in ("C", "F"):
            continue
        has_double = any(
            not b.aromatic and b.order >= 2 for _, b in g.neighbors(i)
        )
        key = (atom.element, atom.aromatic, min(atom.implicit_h, 2), has_double)
        if key in table:
            total += table[key]
        else:
            # fall back to the closest hydrogen count with the same flags
            for h in (0, 1, 2):
                alt = (atom.element, atom.aromatic, h, has_double)
                if alt in table:
                    total += table[alt]
                    break
    return total


def hydrogen_bond_donors(g: MolecularGraph) -> int:
    """Count of N/O atoms carrying at least one hydrogen."""
    return sum(
        1 for a in g.atoms if a.element in ("N", "O") and a.implicit_h >= 1
    )


def hydrogen_bond_acceptors(g: MolecularGraph) -> int:
    """Count of N, O and F atoms (fluorine counted as a weak acceptor)."""
    return sum(1 for a in g.atoms if a.element in ("N", "O", "F"))


def rotatable_bonds(g: MolecularGraph) -> int:
    """Non-ring single bonds whose both atoms have >= 2 heavy neighbors."""
    ring = g.ring_bond_indices()
    count = 0
    for k, b in enumerate(g.bonds):
        if k in ring or b.aromatic or b.order != 1:
            continue
        if g.degree(b.a) >= 2 and g.degree(b.b) >= 2:
            count += 1
    return count


def atom_signature(g: MolecularGraph, i: int, radius: int = 2) -> str:
    """Canonical string for the 2-neighborhood of an atom.

    Permutation-invariant by construction (sorted shells); used as the key
    for fragment-contribution tables.
    """

    def code(j: int) -> str:
        a = g.atoms[j]
        return a.element.lower() if a.aromatic else a.element

    def bond_char(b) -> str:
        if b.aromatic:
            return ":"
        return {1: "-", 2: "=", 3: "#"}[b.order]

    if radius <= 0:
        return code(i)
    inner = []
    for j, b in g.neighbors(i):
        shell2 = sorted(
            bond_char(b2) + code(k2)
            for k2, b2 in g.neighbors(j)
            if k2 != i
        )
        inner.append(bond_char(b) + code(j) + "(" + ",".join(shell2) + ")")
    return code(i) + "{" + ",".join(sorted(inner)) + "}"


def descriptors(
    g: MolecularGraph,
    alert_patterns: Optional[Sequence] = None,
    alogp_table: Optional[dict] = None,
    psa_table: Optional[dict] = None,
) -> DescriptorSet:
    """Compute the full descriptor bundle for a valid graph."""
    if alert_patterns is None:
        from .patterns import DEFAULT_ALERTS

        alert_patterns = DEFAULT_ALERTS
    from .patterns import matches

    n_alerts = sum(1 for p in alert_patterns if matches(g, p))
    return DescriptorSet(
        mw=molecular_weight(g),
        alogp=alogp(g, alogp_table),
        hbd=hydrogen_bond_donors(g),
        hba=hydrogen_bond_acceptors(g),
        psa=polar_surface_area(g, psa_table),
        rotb=rotatable_bonds(g),
        arom=g.aromatic_ring_count(),
        alerts=n_alerts,
        ring_count=g.ring_count(),
        heavy_atoms=g.n_atoms,
    )


def load_alogp_table(path: str | Path) -> dict:
    """Load an ALogP contribution table from YAML.

    Keys are "<element>" / "<element>:aromatic" / "H"; values are floats.
    """
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    table: dict = {}
    for key, value in raw.items():
        if key == "H":
            table["H"] = float(value)
            continue
        if ":" in key:
            element, flag = key.split(":", 1)
            table[(element, flag == "aromatic")] = float(value)
        else:
            table[(key, False)] = float(value)
    return table


def load_psa_table(path: str | Path) -> dict:
    """Load a PSA contribution table from YAML.

    Keys are "<element>:<arom|plain>:h<N>:<double|single>"; values floats.
    """
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    table: dict = {}
    for key, value in raw.items():
        element, aromflag, hpart, dblflag = key.split(":")
        table[
            (element, aromflag == "arom", int(hpart[1:]), dblflag == "double")
        ] = float(value)
    return table
