"""TrustSense state machines: cluster-head trust tables, node registration via
directional flooding, seeded link selection over trust bands, reward and
punishment bookkeeping, blacklisting, and the periodic local/global trust
dissemination that keeps every sensor's cache consistent with its head.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .topology import NetworkTopology, Position, distance

logger = logging.getLogger(__name__)


class ClusterFullError(RuntimeError):
    """Registration rejected: the cluster's local table is at capacity."""


@dataclass(frozen=True)
class TrustThresholds:
    """Reputation band edges: nodes at or above `good` are highly trusted,
    nodes below `medium` are primary suspects."""
    good: float = 0.75
    medium: float = 0.25

    def __post_init__(self):
        if not 0 < self.medium < self.good < 1:
            raise ValueError("thresholds must satisfy 0 < medium < good < 1")


@dataclass(frozen=True)
class ProtocolConstants:
    """Preloaded coordination parameters shared by all cluster heads."""
    relay_reward_rate: float = 0.01
    consistency_reward_rate: float = 0.01
    packet_loss_punish_rate: float = 0.05
    outlier_punish_rate: float = 0.05
    max_outlier_sequence: int = 3
    max_cluster_size: int = 64
    outlier_threshold: float = 2.0
    spatial_presence_step: float = 0.25
    trust_update_period: int = 5

    def __post_init__(self):
        rates = (self.relay_reward_rate, self.consistency_reward_rate,
                 self.packet_loss_punish_rate, self.outlier_punish_rate)
        if any(r <= 0 for r in rates):
            raise ValueError("reward and punishment rates must be positive")
        if self.max_outlier_sequence < 1:
            raise ValueError("max_outlier_sequence must be at least 1")
        if self.trust_update_period < 1:
            raise ValueError("trust_update_period must be at least 1")


def default_trust(thresholds: TrustThresholds) -> float:
    """Initial reputation for an unknown node, interpolated between the band
    edges and biased toward the suspect side: 0.25*good + 0.75*medium."""
    return 0.25 * thresholds.good + 0.75 * thresholds.medium


@dataclass
class LocalTrustEntry:
    """Everything a cluster head tracks about one registered member."""
    node_id: int
    trust: float
    location: Position
    ip_link: int | None
    head_distance: float
    spatial_neighbors: set[int] = field(default_factory=set)
    outlier_count: int = 0
    last_sequence: int = -1
    last_value: float | None = None
    spatial_presence: float = 1.0


@dataclass(frozen=True)
class TrustUpdate:
    """Multicast payload of a local update: member reputations, the current
    blacklist, and the path selection seed valid until the next update."""
    entries: tuple[tuple[int, float], ...]
    blacklist: frozenset[int]
    path_seed: int


@dataclass
class NodeState:
    """Sensor-side view refreshed by local updates: cached neighbor trust,
    neighbor distances to the head, blacklist, and the active path seed."""
    node_id: int
    head_distance: float
    trust_cache: dict[int, float] = field(default_factory=dict)
    distance_map: dict[int, float] = field(default_factory=dict)
    blacklist: set[int] = field(default_factory=set)
    path_seed: int = 0
    registered: bool = False

    def apply_update(self, update: TrustUpdate, neighbor_ids: set[int],
                     head_distances: dict[int, float]) -> None:
        """Sieve a multicast update down to the entries about own neighbors."""
        self.trust_cache = {nid: t for nid, t in update.entries
                            if nid in neighbor_ids and nid != self.node_id}
        self.distance_map = {nid: head_distances[nid] for nid in self.trust_cache}
        self.blacklist = set(update.blacklist)
        self.path_seed = update.path_seed


class ClusterHeadState:
    """Trust tables and detection bookkeeping owned by one cluster head."""

    def __init__(self, head_id: int, location: Position,
                 thresholds: TrustThresholds, constants: ProtocolConstants,
                 radio_range: float):
        self.head_id = head_id
        self.location = location
        self.thresholds = thresholds
        self.constants = constants
        self.radio_range = radio_range
        self.local: dict[int, LocalTrustEntry] = {}
        self.global_table: dict[int, float] = {}
        self.blacklist: set[int] = set()
        self.last_path_seed = 0
        # Member geometry survives removal so route replays stay possible,
        # and each period's trust snapshot mirrors what that multicast told
        # members (their caches), not the live table that drifts between
        # updates. The history lets a loss be replayed in the era it happened.
        self.geometry: dict[int, tuple[Position, float]] = {}
        self.route_snapshot: dict[int, float] = {}
        self.route_history: list[tuple[int, int, dict[int, float]]] = []
        self.incidents: list = []
        self.rewards_applied = 0
        self.punishments_applied = 0
        self.sequence_regressions = 0

    def register_node(self, node_id: int, location: Position,
                      ip_link: int | None = None) -> None:
        """Admit a node: reuse a known global reputation or assign the default,
        then wire up spatial neighbor sets with every member in radio range.
        Blacklisted ids are refused outright so they can never reappear."""
        if node_id in self.local or node_id in self.blacklist:
            return
        if len(self.local) >= self.constants.max_cluster_size:
            raise ClusterFullError(f"cluster full: head {self.head_id} at "
                                   f"{self.constants.max_cluster_size} members")
        trust = self.global_table.get(node_id)
        if trust is None:
            trust = default_trust(self.thresholds)
            self.global_table[node_id] = trust
        entry = LocalTrustEntry(node_id, trust, location, ip_link,
                                distance(location, self.location))
        for other in self.local.values():
            if distance(other.location, location) < self.radio_range:
                other.spatial_neighbors.add(node_id)
                entry.spatial_neighbors.add(other.node_id)
        self.local[node_id] = entry
        self.geometry[node_id] = (location, entry.head_distance)

    def apply_reward(self, node_id: int, rate: float) -> bool:
        entry = self.local.get(node_id)
        if entry is None:
            return False
        entry.trust = min(1.0, entry.trust + rate)
        self.rewards_applied += 1
        return True

    def apply_punishment(self, node_id: int, rate: float) -> bool:
        """Decrement trust; crossing below zero blacklists the node and purges
        it from both tables. Unknown ids are a warned no-op."""
        entry = self.local.get(node_id)
        if entry is None:
            # Routine when a replayed path crosses a since-removed member.
            logger.debug("punishment for unknown node %s ignored", node_id)
            return False
        entry.trust -= rate
        self.punishments_applied += 1
        if entry.trust < 0:
            self._remove_member(node_id)
            self.blacklist.add(node_id)
        return True

    def _remove_member(self, node_id: int) -> None:
        self.local.pop(node_id, None)
        self.global_table.pop(node_id, None)
        for other in self.local.values():
            other.spatial_neighbors.discard(node_id)

    def route_view_at(self, round_index: int) -> tuple[int, dict[int, float]]:
        """Path seed and trust snapshot that members were routing on during
        the given round (the latest dissemination at or before it)."""
        view = (self.last_path_seed, self.route_snapshot)
        for start, seed, snapshot in reversed(self.route_history):
            if start <= round_index:
                return seed, snapshot
        return view


def flood_registration(topo: NetworkTopology, origin: int, malicious: set[int],
                       charge_broadcast: Callable[[int], None] | None = None,
                       ) -> tuple[bool, list[int] | None]:
    """Directional registration flood toward the origin's nearest head.

    The origin broadcasts to everyone in radio range; a benevolent neighbor
    rebroadcasts only if it is strictly closer to the target head than the
    sender, each node at most once. Malicious neighbors silently drop.
    Returns (delivered, path of the first copy that reached the head).
    """
    head_id = topo.cluster_of[origin]
    head_pos = topo.heads[head_id]
    queue: list[tuple[int, list[int]]] = [(origin, [origin])]
    seen = {origin}
    while queue:
        sender, trace = queue.pop(0)
        if charge_broadcast is not None:
            charge_broadcast(sender)
        sender_dist = distance(topo.position(sender), head_pos)
        if sender_dist < topo.radio_range:
            return True, trace + [head_id]
        for nb in sorted(topo.neighbors[sender]):
            if nb in seen or topo.is_head(nb) or nb in malicious:
                continue
            if distance(topo.position(nb), head_pos) < sender_dist:
                seen.add(nb)
                queue.append((nb, trace + [nb]))
    return False, None


# -- link selection ----------------------------------------------------

def band_for_seed(seed: int) -> int:
    """Map a path seed to the trust band probed first: 0 = highly trusted
    (seeds 0-59), 1 = trusted (60-89), 2 = suspect (90-100)."""
    if not 0 <= seed <= 100:
        raise ValueError(f"path seed {seed} outside [0, 100]")
    return 0 if seed < 60 else 1 if seed < 90 else 2


def pick_from_bands(candidates: list[tuple[int, float]], seed: int,
                    thresholds: TrustThresholds) -> int | None:
    """Probe trust bands starting at the seed's band, falling through each
    remaining band once (descending, wrapping to the highest untried), and
    index the first non-empty band with seed modulo its size.

    `candidates` must be sorted by node id so indexing is reproducible.
    """
    start = band_for_seed(seed)
    bounds = ((thresholds.good, 1.0),
              (thresholds.medium, thresholds.good),
              (float("-inf"), thresholds.medium))
    for k in range(3):
        lo, hi = bounds[(start + k) % 3]
        in_band = [nid for nid, trust in candidates if lo <= trust <= hi]
        if in_band:
            return in_band[seed % len(in_band)]
    return None


def select_link(node: NodeState, seed: int,
                thresholds: TrustThresholds) -> int | None:
    """Choose the next forwarding hop for a sensor.

    Eligible neighbors are the non-blacklisted entries of the distance map
    whose distance to the head does not exceed the selector's own; a neighbor
    missing from the trust cache counts at the default trust. Returns None
    only when no eligible neighbor exists in any band.
    """
    fallback = default_trust(thresholds)
    candidates = sorted(
        (nid, node.trust_cache.get(nid, fallback))
        for nid, head_dist in node.distance_map.items()
        if nid not in node.blacklist and head_dist <= node.head_distance)
    return pick_from_bands(candidates, seed, thresholds)


# -- periodic dissemination --------------------------------------------

def global_update(heads: Iterable[ClusterHeadState]) -> None:
    """Cluster heads exchange minified tables and blacklists. Each id's owning
    head (the one holding it in its local table) is authoritative; blacklisted
    ids are purged from every global table."""
    heads = sorted(heads, key=lambda h: h.head_id)
    snapshots = [(h.head_id, {nid: e.trust for nid, e in h.local.items()},
                  frozenset(h.blacklist)) for h in heads]
    merged_blacklist: set[int] = set()
    for _, _, bl in snapshots:
        merged_blacklist |= bl
    for h in heads:
        for other_id, trusts, _ in snapshots:
            if other_id != h.head_id:
                h.global_table.update(trusts)
        for nid, entry in h.local.items():
            h.global_table[nid] = entry.trust
        h.blacklist |= merged_blacklist
        for nid in merged_blacklist:
            h.global_table.pop(nid, None)


def local_update(head: ClusterHeadState, rng: random.Random,
                 effective_round: int = 0) -> TrustUpdate:
    """Build the multicast for this period: all member reputations, the
    blacklist, and a freshly drawn path selection seed. The head keeps a
    snapshot of what it multicast, since that is what members route on until
    the next update."""
    path_seed = rng.randint(0, 100)
    head.last_path_seed = path_seed
    entries = tuple(sorted((nid, e.trust) for nid, e in head.local.items()))
    head.route_snapshot = dict(entries)
    head.route_history.append((effective_round, path_seed, head.route_snapshot))
    return TrustUpdate(entries, frozenset(head.blacklist), path_seed)


def decay_spatial_presence(head: ClusterHeadState,
                           reporters: set[int]) -> list[int]:
    """End-of-window liveness pass: reporters reset to full presence, silent
    members lose one step, and members at zero or below are dropped from both
    tables (removal, not blacklisting). Returns the removed ids."""
    removed = []
    for nid in sorted(head.local):
        entry = head.local[nid]
        if nid in reporters:
            entry.spatial_presence = 1.0
        else:
            entry.spatial_presence -= head.constants.spatial_presence_step
            if entry.spatial_presence <= 0:
                removed.append(nid)
    for nid in removed:
        head._remove_member(nid)
    return removed
