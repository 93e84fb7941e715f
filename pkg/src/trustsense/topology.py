"""Clustered sensor field layout: placement, cluster assignment, neighbor graph.

The layout is immutable once built and safe to share between threads. Sensors
are placed uniformly at random inside a square field, cluster heads sit on a
uniform grid, and every sensor belongs to its nearest head. Two nodes are
neighbors when their Euclidean distance is strictly below the radio range.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass


class TopologyError(ValueError):
    """Layout cannot satisfy connectivity requirements (unconnectable topology)."""


class UnknownNodeError(KeyError):
    """An operation referenced a node id that is not part of the network."""


@dataclass(frozen=True)
class Position:
    x: float
    y: float


def distance(a: Position, b: Position) -> float:
    """Euclidean distance between two positions."""
    return math.hypot(a.x - b.x, a.y - b.y)


@dataclass(frozen=True)
class TopologyConfig:
    sensor_count: int = 100
    cluster_head_count: int = 4
    field_size: float = 100.0
    radio_range: float = 20.0
    max_resample_attempts: int = 100


def head_grid_positions(count: int, field_size: float) -> list[Position]:
    """Cluster-head positions on a uniform grid covering the square field."""
    cols = math.ceil(math.sqrt(count))
    rows = math.ceil(count / cols)
    cells = []
    for r in range(rows):
        for c in range(cols):
            cells.append(Position((c + 0.5) * field_size / cols,
                                  (r + 0.5) * field_size / rows))
    return cells[:count]


class NetworkTopology:
    """Node positions plus everything derived from them.

    Derived state: cluster assignment (nearest head, ties to the lower head
    id), the symmetric neighbor graph, per-node distance to the assigned
    cluster head, and sorted member lists per cluster.
    """

    def __init__(self, sensors: dict[int, Position], heads: dict[int, Position],
                 field_size: float, radio_range: float):
        if not heads:
            raise TopologyError("at least one cluster head is required")
        if not sensors:
            raise TopologyError("at least one sensor is required")
        if set(sensors) & set(heads):
            raise TopologyError("sensor and head ids must be disjoint")
        if radio_range <= 0 or field_size <= 0:
            raise TopologyError("field size and radio range must be positive")
        for nid, pos in list(sensors.items()) + list(heads.items()):
            if not (math.isfinite(pos.x) and math.isfinite(pos.y)):
                raise TopologyError(f"non-finite position for node {nid}")
            if not (0 <= pos.x <= field_size and 0 <= pos.y <= field_size):
                raise TopologyError(f"node {nid} lies outside the field")

        self.field_size = field_size
        self.radio_range = radio_range
        self.sensors = {nid: sensors[nid] for nid in sorted(sensors)}
        self.heads = {nid: heads[nid] for nid in sorted(heads)}
        self._positions = dict(self.sensors)
        self._positions.update(self.heads)

        self.cluster_of: dict[int, int] = {}
        self.head_distance: dict[int, float] = {hid: 0.0 for hid in self.heads}
        for sid, pos in self.sensors.items():
            best = min(self.heads, key=lambda h: (distance(pos, self.heads[h]), h))
            self.cluster_of[sid] = best
            self.head_distance[sid] = distance(pos, self.heads[best])

        self.cluster_members: dict[int, list[int]] = {hid: [] for hid in self.heads}
        for sid in self.sensors:
            self.cluster_members[self.cluster_of[sid]].append(sid)

        ids = sorted(self._positions)
        self.neighbors: dict[int, set[int]] = {nid: set() for nid in ids}
        for i, a in enumerate(ids):
            pa = self._positions[a]
            for b in ids[i + 1:]:
                if distance(pa, self._positions[b]) < radio_range:
                    self.neighbors[a].add(b)
                    self.neighbors[b].add(a)

    # -- basic queries -------------------------------------------------

    def is_head(self, node_id: int) -> bool:
        return node_id in self.heads

    def position(self, node_id: int) -> Position:
        try:
            return self._positions[node_id]
        except KeyError:
            raise UnknownNodeError(f"unregistered node {node_id}") from None

    def link_distance(self, a: int, b: int) -> float:
        return distance(self.position(a), self.position(b))

    def spatial_neighbors(self, node_id: int) -> set[int]:
        """All nodes strictly within radio range of the given node."""
        if node_id not in self._positions:
            raise UnknownNodeError(f"unregistered node {node_id}")
        return set(self.neighbors[node_id])

    def routing_dead_ends(self) -> list[int]:
        """Sensors that can neither reach their head directly nor hand a packet
        to a same-cluster neighbor at most as far from the head as themselves."""
        stuck = []
        for sid in self.sensors:
            if self.head_distance[sid] < self.radio_range:
                continue
            head = self.cluster_of[sid]
            if not any(self.cluster_of.get(n) == head
                       and self.head_distance[n] <= self.head_distance[sid]
                       for n in self.neighbors[sid] if n in self.sensors):
                stuck.append(sid)
        return stuck

    # -- serialization -------------------------------------------------

    def serialize(self) -> str:
        """Line-oriented text form; round-trips bit-exactly through parse()."""
        lines = [f"topology v1 {self.field_size!r} {self.radio_range!r}"]
        for sid, pos in self.sensors.items():
            lines.append(f"S {sid} {pos.x!r} {pos.y!r}")
        for hid, pos in self.heads.items():
            lines.append(f"H {hid} {pos.x!r} {pos.y!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "NetworkTopology":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("topology v1 "):
            raise TopologyError("not a v1 topology file")
        _, _, field_size, radio_range = lines[0].split()
        sensors: dict[int, Position] = {}
        heads: dict[int, Position] = {}
        for ln in lines[1:]:
            marker, nid, x, y = ln.split()
            target = sensors if marker == "S" else heads if marker == "H" else None
            if target is None:
                raise TopologyError(f"bad node marker {marker!r}")
            target[int(nid)] = Position(float(x), float(y))
        return cls(sensors, heads, float(field_size), float(radio_range))


def generate_topology(config: TopologyConfig, rng_seed: int) -> NetworkTopology:
    """Seeded random layout; identical (config, seed) gives an identical result.

    Sensor positions are redrawn as a whole if any sensor ends up with no
    neighbor at all (no sensor and no head in radio range); after the attempt
    budget is exhausted the configuration is rejected as unconnectable.
    """
    if config.sensor_count < 1 or config.cluster_head_count < 1:
        raise TopologyError("need at least one sensor and one cluster head")
    if config.radio_range <= 0:
        raise TopologyError("radio range must be positive")

    rng = random.Random(rng_seed)
    n = config.sensor_count
    heads = {n + i: pos for i, pos in
             enumerate(head_grid_positions(config.cluster_head_count, config.field_size))}
    for _ in range(config.max_resample_attempts):
        sensors = {i: Position(rng.uniform(0, config.field_size),
                               rng.uniform(0, config.field_size))
                   for i in range(n)}
        topo = NetworkTopology(sensors, heads, config.field_size, config.radio_range)
        if all(topo.neighbors[sid] for sid in topo.sensors):
            return topo
    raise TopologyError(
        f"unconnectable topology: an isolated sensor remained after "
        f"{config.max_resample_attempts} attempts")
