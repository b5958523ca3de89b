"""Pluggable docking backend.

Two backends share one request/response surface: a deterministic built-in
surrogate for offline runs and tests, and an adapter that talks to an
external scorer process over line-delimited JSON ({"id": n, "smiles": s} in,
{"id": n, "score": x} or {"id": n, "error": msg} out). Every request id gets
exactly one response; timeouts, process death and malformed output all turn
into per-id error responses rather than exceptions, so a long optimization
run survives a flaky scorer.

The surrogate is a smooth function of cheap descriptors. It is NOT a binding
model; it exists to exercise the optimizer with a stable, documented signal.
"""

from __future__ import annotations

import itertools
import json
import logging
import queue
import shlex
import subprocess
import threading
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .descriptors import (
    hydrogen_bond_acceptors,
    hydrogen_bond_donors,
    molecular_weight,
    rotatable_bonds,
)
from .molgraph import MolecularGraph, canonical_form

logger = logging.getLogger(__name__)


class GatewayError(RuntimeError):
    """Backend-level failure (spawn failure, unusable configuration)."""


@dataclass(frozen=True)
class DockingConfig:
    """Docking backend settings; grid fields are passed verbatim to wrappers."""

    backend: str = "surrogate"  # "surrogate" | "external"
    executable: Optional[str] = None
    receptor: str = "6LU7"
    grid_center: Optional[tuple[float, float, float]] = None
    grid_size: tuple[float, float, float] = (22.0, 24.0, 22.0)
    exhaustiveness: int = 8
    timeout: float = 30.0
    batch_size: int = 50

    def __post_init__(self):
        if self.backend not in ("surrogate", "external"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if any(s <= 0 for s in self.grid_size):
            raise ValueError("grid_size components must be positive")
        if self.exhaustiveness < 1:
            raise ValueError("exhaustiveness must be >= 1")
        if self.backend == "external" and not self.executable:
            raise ValueError("external backend needs an executable")


@dataclass(frozen=True)
class ScoreRequest:
    id: int
    molecule: str  # canonical form string
    graph: Optional[MolecularGraph] = None  # used by the surrogate backend


@dataclass(frozen=True)
class ScoreResponse:
    id: int
    score: Optional[float] = None
    error: Optional[str] = None


SURROGATE_MIN = -15.0
SURROGATE_MAX = 1.0


def surrogate_score(g: MolecularGraph) -> float:
    """Deterministic stand-in docking energy in kcal/mol.

    -(0.35*aromatic_rings + 0.15*donors + 0.15*acceptors + 0.004*mw
      - 0.02*rotatable) - 1.0, clamped to [-15, 1].
    """
    value = -(
        0.35 * g.aromatic_ring_count()
        + 0.15 * hydrogen_bond_donors(g)
        + 0.15 * hydrogen_bond_acceptors(g)
        + 0.004 * molecular_weight(g)
        - 0.02 * rotatable_bonds(g)
    ) - 1.0
    return min(SURROGATE_MAX, max(SURROGATE_MIN, value))


class DockingGateway:
    """One scorer backend instance; external mode owns one child process."""

    def __init__(self, config: Optional[DockingConfig] = None):
        self.config = config or DockingConfig()
        self._proc: Optional[subprocess.Popen] = None
        self._lines: "queue.Queue[Optional[str]]" = queue.Queue()

    # -- lifecycle ---------------------------------------------------------

    def close(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=2.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
        self._proc = None

    def __enter__(self) -> "DockingGateway":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _ensure_process(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            return
        argv = shlex.split(self.config.executable)
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            self._proc = None
            raise GatewayError(f"cannot spawn scorer {argv!r}: {exc}") from exc
        self._lines = queue.Queue()
        proc = self._proc
        lines = self._lines

        def pump():
            try:
                for line in proc.stdout:
                    lines.put(line)
            except ValueError:
                pass  # stream closed under the reader
            lines.put(None)

        threading.Thread(target=pump, daemon=True).start()

    # -- scoring -------------------------------------------------------------

    def score_batch(self, requests: Sequence[ScoreRequest]) -> list[ScoreResponse]:
        """Score a batch; the result is id-complete and in request order."""
        if self.config.backend == "surrogate":
            return [self._surrogate_one(r) for r in requests]
        return self._score_external(requests)

    @staticmethod
    def _surrogate_one(request: ScoreRequest) -> ScoreResponse:
        if request.graph is None:
            return ScoreResponse(
                request.id, error="surrogate backend needs an attached graph"
            )
        return ScoreResponse(request.id, score=surrogate_score(request.graph))

    def _score_external(self, requests: Sequence[ScoreRequest]) -> list[ScoreResponse]:
        self._ensure_process()
        proc = self._proc
        pending = {r.id for r in requests}
        answered: dict[int, ScoreResponse] = {}
        try:
            for r in requests:
                proc.stdin.write(json.dumps({"id": r.id, "smiles": r.molecule}) + "\n")
            proc.stdin.flush()
        except (BrokenPipeError, OSError):
            logger.warning("scorer process pipe broke while sending batch")

        deadline = time.monotonic() + self.config.timeout
        while pending:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                break
            try:
                line = self._lines.get(timeout=remaining)
            except queue.Empty:
                break
            if line is None:
                logger.warning("scorer process ended mid-batch")
                break
            resp = _parse_response_line(line)
            if resp is None or resp.id not in pending:
                continue
            answered[resp.id] = resp
            pending.discard(resp.id)

        out = []
        for r in requests:
            if r.id in answered:
                out.append(answered[r.id])
            else:
                out.append(ScoreResponse(r.id, error="no response before timeout"))
        return out


def _parse_response_line(line: str) -> Optional[ScoreResponse]:
    try:
        obj = json.loads(line)
        rid = int(obj["id"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError):
        return None
    if "error" in obj:
        return ScoreResponse(rid, error=str(obj["error"]))
    try:
        return ScoreResponse(rid, score=float(obj["score"]))
    except (KeyError, TypeError, ValueError):
        return ScoreResponse(rid, error="malformed response")


def score_batch(
    requests: Sequence[ScoreRequest], config: DockingConfig
) -> list[ScoreResponse]:
    """One-shot batch scoring; external mode spawns and reaps a process."""
    with DockingGateway(config) as gw:
        return gw.score_batch(requests)


def gateway_docking_fn(gateway: DockingGateway):
    """Adapt a gateway into a per-graph docking function for the evaluator.

    Raises GatewayError on an error response so the evaluator can substitute
    the worst docking score and keep going.
    """
    counter = itertools.count()

    def docking_fn(g: MolecularGraph) -> float:
        rid = next(counter)
        request = ScoreRequest(rid, canonical_form(g, check=False), graph=g)
        response = gateway.score_batch([request])[0]
        if response.error is not None:
            raise GatewayError(response.error)
        return response.score

    return docking_fn
