"""Annealer hardware constraints: coefficient normalization and quantization,
Chimera-style topology graphs, chain embedding of dense logical models, and
unembedding of physical samples by majority vote.

Feasible coefficient ranges are field in [-2, 2] and coupling in [-1, 1],
with a precision of a few bits on each.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (CapacityError, DimensionError, DomainError, EmbeddingError,
                     ParseError, RangeError, ValidationError)
from .instances import _frozen
from .qubo import IsingModel

FIELD_RANGE = 2.0
COUPLING_RANGE = 1.0


@dataclass(frozen=True, eq=False)
class HardwareGraph:
    """Grid of unit cells; each cell is a complete bipartite K_{t,t}.

    Node id = ((row*cells_cols + col)*2 + side)*t + k with side 0 = left,
    1 = right.  Right-side nodes couple to the same k of the horizontally
    adjacent cell, left-side nodes to the vertically adjacent cell.
    """

    cells_rows: int
    cells_cols: int
    t: int
    edges: frozenset

    def __post_init__(self):
        if self.cells_rows < 1 or self.cells_cols < 1 or self.t < 1:
            raise ValidationError("graph dimensions must be positive")
        for u, v in self.edges:
            if not (0 <= u < v < self.num_nodes):
                raise ValidationError(f"edge ({u},{v}) out of range or not canonical")

    @property
    def num_nodes(self) -> int:
        return self.cells_rows * self.cells_cols * 2 * self.t

    def node_id(self, row: int, col: int, side: int, k: int) -> int:
        if not (0 <= row < self.cells_rows and 0 <= col < self.cells_cols
                and side in (0, 1) and 0 <= k < self.t):
            raise ValidationError(f"no node at (row={row}, col={col}, side={side}, k={k})")
        return ((row * self.cells_cols + col) * 2 + side) * self.t + k


def chimera(cells_rows: int, cells_cols: int, t: int = 4) -> HardwareGraph:
    """Build the cells_rows x cells_cols Chimera-style graph with half-cell size t."""
    if cells_rows < 1 or cells_cols < 1 or t < 1:
        raise ValidationError("chimera dimensions must be positive")

    def nid(row, col, side, k):
        return ((row * cells_cols + col) * 2 + side) * t + k

    edges = set()
    for row in range(cells_rows):
        for col in range(cells_cols):
            for a in range(t):
                for b in range(t):
                    edges.add((nid(row, col, 0, a), nid(row, col, 1, b)))
            if col + 1 < cells_cols:
                for k in range(t):
                    u, v = nid(row, col, 1, k), nid(row, col + 1, 1, k)
                    edges.add((min(u, v), max(u, v)))
            if row + 1 < cells_rows:
                for k in range(t):
                    u, v = nid(row, col, 0, k), nid(row + 1, col, 0, k)
                    edges.add((min(u, v), max(u, v)))
    return HardwareGraph(cells_rows, cells_cols, t, frozenset(edges))


@dataclass(frozen=True, eq=False)
class EmbeddingMap:
    """One chain (set of physical nodes) per logical variable."""

    chains: tuple

    def __post_init__(self):
        chains = tuple(frozenset(int(u) for u in chain) for chain in self.chains)
        if not chains:
            raise EmbeddingError("embedding must contain at least one chain")
        seen = set()
        for i, chain in enumerate(chains):
            if not chain:
                raise EmbeddingError(f"chain {i} is empty")
            if seen & chain:
                raise EmbeddingError(f"chain {i} overlaps an earlier chain")
            seen |= chain
        object.__setattr__(self, "chains", chains)


def normalize(model: IsingModel):
    """Scale a model into the feasible coefficient ranges.

    scale = max(max|field|/2, max|coupling|, 1); every coefficient and the
    offset are divided by it, which leaves the argmin set unchanged.
    Returns (scaled model, scale).
    """
    scale = max(_frozen_max(model.field) / FIELD_RANGE,
                max((abs(v) for v in model.coupling.values()), default=0.0) / COUPLING_RANGE,
                1.0)
    scaled = IsingModel(model.n, model.field / scale,
                        {k: v / scale for k, v in model.coupling.items()},
                        model.offset / scale)
    return scaled, scale


def _frozen_max(a) -> float:
    return float(np.max(np.abs(a))) if np.asarray(a).size else 0.0


def _round_away(x):
    return np.copysign(np.floor(np.abs(x) + 0.5), x)


def quantize(model: IsingModel, bits: int = 5) -> IsingModel:
    """Round coefficients to the signed grid a `bits`-bit register can hold.

    Fields snap to multiples of 2/(2^(bits-1)-1), couplings to multiples of
    1/(2^(bits-1)-1); ties round away from zero.  The offset is untouched.
    The model must already be normalized (field in [-2,2], coupling in [-1,1]).
    """
    if not (2 <= bits <= 8):
        raise ValidationError(f"bits must be in [2, 8], got {bits}")
    if _frozen_max(model.field) > FIELD_RANGE:
        raise RangeError("field coefficients exceed [-2, 2]; normalize first")
    if any(abs(v) > COUPLING_RANGE for v in model.coupling.values()):
        raise RangeError("coupling coefficients exceed [-1, 1]; normalize first")
    steps = float(2 ** (bits - 1) - 1)
    field = _round_away(model.field * steps / FIELD_RANGE) * FIELD_RANGE / steps
    coupling = {k: float(_round_away(v * steps / COUPLING_RANGE) * COUPLING_RANGE / steps)
                for k, v in model.coupling.items()}
    return IsingModel(model.n, field, coupling, model.offset)


def cell_clique_embedding(k: int, g: HardwareGraph) -> EmbeddingMap:
    """Embed the complete graph K_k inside one cell: chain i = {left_i, right_i}.

    Every cross pair (left_i, right_j) is a cell edge and each chain's
    internal edge exists, so the map is valid for up to t logical variables.
    """
    if g.cells_rows != 1 or g.cells_cols != 1:
        raise ValidationError("cell_clique_embedding requires a single-cell graph")
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if k > g.t:
        raise CapacityError(f"a single cell hosts cliques up to K_{g.t}, got k={k}")
    return EmbeddingMap(tuple(frozenset({i, g.t + i}) for i in range(k)))


def _chain_connected(chain, edges) -> bool:
    nodes = set(chain)
    start = next(iter(nodes))
    seen = {start}
    frontier = [start]
    adj = {u: set() for u in nodes}
    for u, v in edges:
        if u in nodes and v in nodes:
            adj[u].add(v)
            adj[v].add(u)
    while frontier:
        u = frontier.pop()
        for v in adj[u] - seen:
            seen.add(v)
            frontier.append(v)
    return seen == nodes


def _cross_edges(chain_a, chain_b, edges):
    out = []
    for u, v in edges:
        if (u in chain_a and v in chain_b) or (u in chain_b and v in chain_a):
            out.append((u, v))
    return sorted(out)


def validate_embedding(model: IsingModel, g: HardwareGraph, emb: EmbeddingMap) -> None:
    """Raise EmbeddingError naming the first violated invariant."""
    if len(emb.chains) != model.n:
        raise EmbeddingError(
            f"embedding has {len(emb.chains)} chains but the model has {model.n} variables")
    for i, chain in enumerate(emb.chains):
        if any(u >= g.num_nodes or u < 0 for u in chain):
            raise EmbeddingError(f"chain {i} references nodes outside the graph")
        if not _chain_connected(chain, g.edges):
            raise EmbeddingError(f"chain {i} is not connected in the hardware graph")
    for (i, j) in model.coupling:
        if not _cross_edges(emb.chains[i], emb.chains[j], g.edges):
            raise EmbeddingError(
                f"logical coupling ({i},{j}) has no physical edge between its chains")


def embed(model: IsingModel, g: HardwareGraph, emb: EmbeddingMap,
          chain_strength="auto") -> IsingModel:
    """Map a logical Ising model onto the hardware graph.

    Each logical field splits equally across its chain's nodes and each
    logical coupling splits equally across the physical edges joining the two
    chains.  Every intra-chain edge gets an extra ferromagnetic coupling
    -sigma, and the offset grows by sigma per intra-chain edge, so a physical
    state with all chains aligned has exactly the logical state's energy.
    """
    validate_embedding(model, g, emb)
    if chain_strength == "auto":
        sigma = 2.0 * max(_frozen_max(model.field),
                          max((abs(v) for v in model.coupling.values()), default=0.0),
                          1.0)
    else:
        sigma = float(chain_strength)
        if not (np.isfinite(sigma) and sigma > 0):
            raise ValidationError(f"chain strength must be > 0, got {chain_strength}")

    fields = np.zeros(g.num_nodes)
    for i, chain in enumerate(emb.chains):
        share = model.field[i] / len(chain)
        for u in sorted(chain):
            fields[u] += share

    coupling = {}
    for (i, j), value in model.coupling.items():
        cross = _cross_edges(emb.chains[i], emb.chains[j], g.edges)
        share = value / len(cross)
        for e in cross:
            coupling[e] = coupling.get(e, 0.0) + share

    intra_edges = 0
    for chain in emb.chains:
        for u, v in sorted(g.edges):
            if u in chain and v in chain:
                coupling[(u, v)] = coupling.get((u, v), 0.0) - sigma
                intra_edges += 1

    return IsingModel(g.num_nodes, fields, coupling, model.offset + sigma * intra_edges)


def unembed(physical_state, emb: EmbeddingMap):
    """Majority-vote each chain back to one logical spin.

    Exact ties go to -1 (bit 0, the sparsity-favoring choice).  Returns
    (logical spins, number of chains with internal disagreement).  Entries of
    the state not touched by any chain are ignored.
    """
    z = np.asarray(physical_state)
    needed = max(max(chain) for chain in emb.chains)
    if z.ndim != 1 or z.shape[0] <= needed:
        raise DimensionError(
            f"physical state of shape {z.shape} does not cover node {needed}")
    logical = np.empty(len(emb.chains), dtype=np.int8)
    broken = 0
    for i, chain in enumerate(emb.chains):
        vals = z[sorted(chain)]
        if not np.all((vals == -1) | (vals == 1)):
            raise DomainError(f"chain {i} contains spins outside {{-1,+1}}")
        total = int(vals.sum())
        logical[i] = 1 if total > 0 else -1
        if np.unique(vals).size > 1:
            broken += 1
    return _frozen(logical), broken


def save_embedding(emb: EmbeddingMap, path) -> None:
    doc = {"chains": [sorted(chain) for chain in emb.chains]}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_embedding(path) -> EmbeddingMap:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(doc, dict) or "chains" not in doc:
        raise ParseError("embedding document must contain a 'chains' field")
    chains = doc["chains"]
    if not isinstance(chains, list) or not all(isinstance(c, list) for c in chains):
        raise ParseError("field 'chains' must be a list of node-id lists")
    return EmbeddingMap(tuple(frozenset(c) for c in chains))
