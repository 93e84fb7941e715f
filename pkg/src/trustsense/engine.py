"""Deterministic round-based simulation core.

Each round every sensor reports one reading routed hop by hop toward its
cluster head under the active trust model. Registration floods run in round
zero, trust dissemination fires every update period, energy is charged per
transmitted distance, and the whole run is a pure function of
(config, topology, seed).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from . import detection
from .adversary import (AdversaryProfile, Oscillator, assign_adversaries,
                        malicious_forward, malicious_sense)
from .eigentrust import (InteractionLedger, compute_global_trust,
                         eigentrust_select_link, local_trust_matrix)
from .metrics import MetricsRecord, NoBenevolentTrafficError, compute_accuracy
from .protocol import (ClusterFullError, ClusterHeadState, NodeState,
                       ProtocolConstants, TrustThresholds,
                       decay_spatial_presence, flood_registration,
                       global_update, local_update, select_link)
from .topology import NetworkTopology, TopologyConfig, generate_topology

ADVERSARY_MODES = ("static", "oscillating")
TRUST_MODELS = ("trustsense", "eigentrust")

# Keeps the rng streams of topology generation, adversary assignment and the
# engine disjoint even for consecutive base seeds.
_SEED_STRIDE = 1000003


@dataclass
class Packet:
    """A tagged message; the path trace starts at the origin and grows one id
    per hop, so hop_count is always len(path) - 1."""
    kind: str
    origin: int
    sequence: int = -1
    value: float | None = None
    path: list[int] = field(default_factory=list)

    @property
    def hop_count(self) -> int:
        return len(self.path) - 1


@dataclass
class EnergyLedger:
    """Transmit energy by node. Cluster heads are higher-power hardware and
    tracked separately; sensor metrics use `total` only."""
    per_node: dict[int, float] = field(default_factory=dict)
    total: float = 0.0
    head_per_node: dict[int, float] = field(default_factory=dict)
    head_total: float = 0.0

    def charge(self, node_id: int, amount: float) -> None:
        self.per_node[node_id] = self.per_node.get(node_id, 0.0) + amount
        self.total += amount

    def charge_head(self, head_id: int, amount: float) -> None:
        self.head_per_node[head_id] = self.head_per_node.get(head_id, 0.0) + amount
        self.head_total += amount


@dataclass(frozen=True)
class RunConfig:
    """Everything one simulation run depends on besides the topology."""
    sensor_count: int = 100
    cluster_head_count: int = 4
    field_size: float = 100.0
    radio_range: float = 20.0
    malicious_fraction: float = 0.0
    adversary_mode: str = "static"
    rounds: int = 100
    rng_seed: int = 0
    trust_model: str = "trustsense"
    thresholds: TrustThresholds = field(default_factory=TrustThresholds)
    constants: ProtocolConstants = field(default_factory=ProtocolConstants)
    adversary: AdversaryProfile = field(default_factory=AdversaryProfile)
    energy_per_unit_distance: float = 1.0
    multicast_cost: float = 100.0
    value_base: float = 20.0
    value_gradient: float = 0.05
    eigentrust_epsilon: float = 1e-10
    eigentrust_max_iters: int = 1000
    collect_events: bool = False

    def __post_init__(self):
        if not 0 <= self.malicious_fraction <= 1:
            raise ValueError("malicious fraction must be in [0, 1]")
        if self.rounds < 1:
            raise ValueError("rounds must be at least 1")
        if self.adversary_mode not in ADVERSARY_MODES:
            raise ValueError(f"unknown adversary mode {self.adversary_mode!r}")
        if self.trust_model not in TRUST_MODELS:
            raise ValueError(f"unknown trust model {self.trust_model!r}")
        if self.energy_per_unit_distance <= 0:
            raise ValueError("energy per unit distance must be positive")

    def topology_config(self) -> TopologyConfig:
        return TopologyConfig(self.sensor_count, self.cluster_head_count,
                              self.field_size, self.radio_range)


@dataclass(frozen=True)
class EventRecord:
    """One line of the per-run event log."""
    round_index: int
    kind: str
    origin: int
    path: tuple[int, ...]
    delivered: bool
    value: float | None

    def as_line(self) -> str:
        path = "-".join(str(n) for n in self.path)
        value = "" if self.value is None else repr(self.value)
        return (f"{self.round_index},{self.kind},{self.origin},{path},"
                f"{int(self.delivered)},{value}")


class TrustSenseModel:
    """Engine hooks for the TrustSense protocol stack."""

    def __init__(self, engine: "SimulationEngine"):
        self.engine = engine
        cfg = engine.config
        topo = engine.topo
        self.heads = {hid: ClusterHeadState(hid, topo.heads[hid], cfg.thresholds,
                                            cfg.constants, topo.radio_range)
                      for hid in sorted(topo.heads)}
        self.nodes = {sid: NodeState(sid, topo.head_distance[sid])
                      for sid in sorted(topo.sensors)}
        self.window_values: dict[int, dict[int, float]] = {hid: {} for hid in self.heads}
        self.presence_removed: set[int] = set()

    def register(self, origin: int, delivered: bool,
                 trace: list[int] | None) -> None:
        if not delivered:
            return
        head = self.heads[self.engine.topo.cluster_of[origin]]
        ip_link = trace[1] if trace is not None and len(trace) > 1 else None
        try:
            head.register_node(origin, self.engine.topo.position(origin), ip_link)
        except ClusterFullError:
            return
        self.nodes[origin].registered = origin in head.local

    def bootstrap_done(self) -> None:
        # Initial dissemination so round zero routes with live caches.
        self.periodic_update(effective_round=0)

    def reregistration_candidates(self) -> list[int]:
        """Sensors that missed the latest local update (never admitted,
        dropped for lost presence, or blacklisted without knowing it); they
        flood a fresh registration packet next round."""
        received: set[int] = set()
        for hid, head in self.heads.items():
            received.update(m for m in self.engine.topo.cluster_members[hid]
                            if m in head.local)
        return [sid for sid in sorted(self.nodes) if sid not in received]

    def next_hop(self, holder: int) -> int | None:
        node = self.nodes[holder]
        return select_link(node, node.path_seed, self.engine.config.thresholds)

    def on_delivery(self, packet: Packet, head_id: int) -> bool:
        head = self.heads[head_id]
        entry = head.local.get(packet.origin)
        if entry is None:
            return False
        self.window_values[head_id][packet.origin] = packet.value
        entry.last_value = packet.value
        if self.engine.rng.random() < 0.5:
            detection.inspect_sequence(head, entry, packet.sequence,
                                       head.last_path_seed, self.engine.rng)
        else:
            entry.last_sequence = packet.sequence
        return True

    def on_drop(self, packet: Packet, dropper: int) -> None:
        pass

    def on_route_failure(self, packet: Packet) -> None:
        pass

    def end_of_round(self, round_index: int) -> None:
        for hid in sorted(self.heads):
            head = self.heads[hid]
            window = self.window_values[hid]
            for origin in sorted(window):
                entry = head.local.get(origin)
                if entry is not None:
                    detection.check_data_consistency(head, entry, window[origin],
                                                     window, self.engine.rng,
                                                     round_index)
            removed = decay_spatial_presence(head, set(window))
            self.presence_removed.update(removed)
            window.clear()

    def periodic_update(self, effective_round: int) -> None:
        global_update(self.heads.values())
        topo = self.engine.topo
        for hid in sorted(self.heads):
            head = self.heads[hid]
            update = local_update(head, self.engine.rng, effective_round)
            self.engine.ledger.charge_head(hid, self.engine.config.multicast_cost)
            for member in topo.cluster_members[hid]:
                if member in head.local:
                    self.nodes[member].apply_update(update, topo.neighbors[member],
                                                    topo.head_distance)

    def blacklist_ids(self) -> set[int]:
        merged: set[int] = set()
        for head in self.heads.values():
            merged |= head.blacklist
        return merged

    @property
    def punishments_applied(self) -> int:
        return sum(h.punishments_applied for h in self.heads.values())

    @property
    def rewards_applied(self) -> int:
        return sum(h.rewards_applied for h in self.heads.values())

    def incidents(self) -> list[detection.Incident]:
        out = []
        for hid in sorted(self.heads):
            out.extend(self.heads[hid].incidents)
        return out


class EigenTrustModel:
    """Engine hooks for the EigenTrust baseline.

    Routing greedily follows the highest global trust among closer neighbors.
    The trust vector is recomputed centrally every update period; gathering
    the ledger costs each sensor one query message per nonzero ledger entry
    in its row, charged at its distance to the cluster head.
    """

    def __init__(self, engine: "SimulationEngine"):
        self.engine = engine
        topo = engine.topo
        self.sensor_ids = sorted(topo.sensors)
        self.ledger = InteractionLedger(self.sensor_ids)
        n = len(self.sensor_ids)
        self.trust = {sid: 1.0 / n for sid in self.sensor_ids}
        self.registered: set[int] = set()
        self.converged = True
        self._all_candidates: dict[int, list[int]] = {}
        for sid in self.sensor_ids:
            head = topo.cluster_of[sid]
            self._all_candidates[sid] = [
                n_id for n_id in sorted(topo.neighbors[sid])
                if n_id in topo.sensors and topo.cluster_of[n_id] == head
                and topo.head_distance[n_id] <= topo.head_distance[sid]]
        self._candidates = dict(self._all_candidates)

    def register(self, origin: int, delivered: bool,
                 trace: list[int] | None) -> None:
        if delivered and origin not in self.registered:
            self.registered.add(origin)
            self._filter_candidates()

    def bootstrap_done(self) -> None:
        self._filter_candidates()

    def _filter_candidates(self) -> None:
        self._candidates = {sid: [n for n in self._all_candidates[sid]
                                  if n in self.registered]
                            for sid in self._all_candidates}

    def reregistration_candidates(self) -> list[int]:
        return [sid for sid in self.sensor_ids if sid not in self.registered]

    def next_hop(self, holder: int) -> int | None:
        return eigentrust_select_link(self._candidates[holder], self.trust)

    def _rate_relays(self, packet: Packet, satisfactory: bool,
                     include_last: bool) -> None:
        relays = packet.path[1:] if include_last else packet.path[1:-1]
        for relay in relays:
            self.ledger.record(packet.origin, relay, satisfactory)

    def on_delivery(self, packet: Packet, head_id: int) -> bool:
        self._rate_relays(packet, True, include_last=False)
        return packet.origin in self.registered

    def on_drop(self, packet: Packet, dropper: int) -> None:
        self._rate_relays(packet, False, include_last=True)

    def on_route_failure(self, packet: Packet) -> None:
        self._rate_relays(packet, False, include_last=True)

    def end_of_round(self, round_index: int) -> None:
        pass

    def periodic_update(self, effective_round: int = 0) -> None:
        cfg = self.engine.config
        c = local_trust_matrix(self.ledger.sat, self.ledger.unsat)
        vector, self.converged = compute_global_trust(
            c, cfg.eigentrust_epsilon, cfg.eigentrust_max_iters)
        self.trust = {sid: float(vector[k])
                      for k, sid in enumerate(self.sensor_ids)}
        topo = self.engine.topo
        row_entries = self.ledger.nonzero_entries_per_row()
        for k, sid in enumerate(self.sensor_ids):
            messages = int(row_entries[k])
            if messages:
                dist = topo.head_distance[sid]
                for _ in range(messages):
                    self.engine.charge_transmission(sid, topo.cluster_of[sid], dist)

    def blacklist_ids(self) -> set[int]:
        return set()

    @property
    def punishments_applied(self) -> int:
        return 0

    @property
    def rewards_applied(self) -> int:
        return 0


class SimulationEngine:
    """One deterministic run: wires the topology, adversary population and
    the selected trust model together and aggregates metrics."""

    def __init__(self, config: RunConfig, topo: NetworkTopology):
        if config.sensor_count != len(topo.sensors):
            raise ValueError("config sensor count does not match topology")
        if config.cluster_head_count != len(topo.heads):
            raise ValueError("config head count does not match topology")
        self.config = config
        self.topo = topo
        self.rng = random.Random(config.rng_seed * _SEED_STRIDE + 17)
        plan = assign_adversaries(topo, config.malicious_fraction,
                                  config.rng_seed * _SEED_STRIDE + 29)
        self.plan = plan
        self.oscillator = Oscillator(sorted(topo.sensors), plan.assignment,
                                     config.adversary,
                                     config.adversary_mode == "oscillating")
        self.ledger = EnergyLedger()
        self.next_sequence = {sid: 0 for sid in sorted(topo.sensors)}
        self.emitted_benevolent = 0
        self.satisfactory = 0
        self.satisfactory_hops = 0
        self.malicious_count_by_round: list[int] = []
        self.event_log: list[EventRecord] = []
        self.hop_log: list[tuple[int, int, int | None, float]] = []
        self._round = 0
        if config.trust_model == "trustsense":
            self.model = TrustSenseModel(self)
        else:
            self.model = EigenTrustModel(self)

    # -- energy ----------------------------------------------------------

    def charge_transmission(self, src: int, dst: int | None, dist: float) -> None:
        self.ledger.charge(src, self.config.energy_per_unit_distance * dist)
        if self.config.collect_events:
            self.hop_log.append((self._round, src, dst, dist))

    # -- run -------------------------------------------------------------

    def run(self) -> MetricsRecord:
        self._bootstrap()
        pending_registration: list[int] = []
        for r in range(self.config.rounds):
            self._round = r
            self.oscillator.maybe_toggle(r, self.rng)
            self.malicious_count_by_round.append(len(self.oscillator.current))
            for sid in pending_registration:
                self._flood_register(sid)
            pending_registration = []
            self._sensing_round(r)
            self.model.end_of_round(r)
            if (r + 1) % self.config.constants.trust_update_period == 0:
                self.model.periodic_update(effective_round=r + 1)
                # Sensors that missed this dissemination try to rejoin.
                pending_registration = self.model.reregistration_candidates()
        return self._finalize()

    def _flood_register(self, sid: int) -> None:
        malicious = set(self.oscillator.current)
        delivered, trace = flood_registration(
            self.topo, sid, malicious - {sid},
            charge_broadcast=lambda node: self.charge_transmission(
                node, None, self.topo.radio_range))
        self.model.register(sid, delivered, trace)
        if self.config.collect_events:
            path = tuple(trace) if trace else (sid,)
            self.event_log.append(EventRecord(self._round, "registration",
                                              sid, path, delivered, None))

    def _bootstrap(self) -> None:
        """Round-zero registration: every sensor floods toward its nearest
        head; sink-holes drop, so a sensor walled off by attackers cannot
        join and its data is rejected at the head until a retry succeeds."""
        for sid in sorted(self.topo.sensors):
            self._flood_register(sid)
        self.model.bootstrap_done()

    def field_value(self, sid: int) -> float:
        pos = self.topo.position(sid)
        return self.config.value_base + self.config.value_gradient * pos.x

    def _sensing_round(self, r: int) -> None:
        for sid in sorted(self.topo.sensors):
            truth = self.field_value(sid)
            is_malicious = sid in self.oscillator.current
            value = (malicious_sense(self.config.adversary, truth, self.rng)
                     if is_malicious else truth)
            seq = self.next_sequence[sid]
            self.next_sequence[sid] = seq + 1
            if not is_malicious:
                self.emitted_benevolent += 1
            packet = Packet("data", sid, seq, value, [sid])
            self._route(packet, benevolent=not is_malicious, emitted_value=value)

    def _route(self, packet: Packet, benevolent: bool,
               emitted_value: float) -> None:
        topo = self.topo
        holder = packet.origin
        hop_limit = len(topo.sensors) + 2
        delivered = False
        while True:
            head_dist = topo.head_distance[holder]
            if head_dist < topo.radio_range:
                head_id = topo.cluster_of[holder]
                self.charge_transmission(holder, head_id, head_dist)
                packet.path.append(head_id)
                accepted = self.model.on_delivery(packet, head_id)
                if (benevolent and accepted
                        and head_id == topo.cluster_of[packet.origin]
                        and packet.value == emitted_value):
                    self.satisfactory += 1
                    self.satisfactory_hops += packet.hop_count
                delivered = True
                break
            nxt = self.model.next_hop(holder)
            if nxt is None or len(packet.path) >= hop_limit:
                self.model.on_route_failure(packet)
                break
            self.charge_transmission(holder, nxt, topo.link_distance(holder, nxt))
            packet.path.append(nxt)
            if (nxt in self.oscillator.current
                    and not malicious_forward(self.config.adversary, self.rng)):
                self.model.on_drop(packet, nxt)
                break
            holder = nxt
        if self.config.collect_events:
            self.event_log.append(EventRecord(self._round, packet.kind,
                                              packet.origin, tuple(packet.path),
                                              delivered, packet.value))

    def _finalize(self) -> MetricsRecord:
        accuracy = compute_accuracy(self.satisfactory, self.emitted_benevolent)
        avg_path = (self.satisfactory_hops / self.satisfactory
                    if self.satisfactory else 0.0)
        ground_truth = self.oscillator.ever_malicious
        blacklisted = self.model.blacklist_ids()
        return MetricsRecord(
            accuracy=accuracy,
            avg_path_length=avg_path,
            energy=self.ledger.total,
            blacklist_true_positives=len(blacklisted & ground_truth),
            blacklist_false_positives=len(blacklisted - ground_truth))

    def write_event_log(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("round,kind,origin,path,delivered,value\n")
            for ev in self.event_log:
                fh.write(ev.as_line() + "\n")


def deliver_hop(packet: Packet, src: int, dst: int, topo: NetworkTopology,
                ledger: EnergyLedger, energy_per_unit_distance: float = 1.0,
                ) -> Packet:
    """Move a packet one hop, extending the trace and charging the sender
    energy linear in the hop distance."""
    if dst not in topo.neighbors[src] and dst != topo.cluster_of.get(src):
        raise ValueError(f"{dst} is not reachable from {src}")
    dist = topo.link_distance(src, dst)
    ledger.charge(src, energy_per_unit_distance * dist)
    packet.path.append(dst)
    return packet


def run_simulation(config: RunConfig,
                   topo: NetworkTopology | None = None) -> MetricsRecord:
    """Execute one run; same (config, topology, seed) always yields the same
    record. Raises NoBenevolentTrafficError when no benevolent sensor ever
    emitted (accuracy is undefined)."""
    if topo is None:
        topo = generate_topology(config.topology_config(), config.rng_seed)
    return SimulationEngine(config, topo).run()


def make_run_config(**overrides) -> RunConfig:
    """Convenience for tests and scripts: RunConfig with keyword overrides."""
    return replace(RunConfig(), **overrides)
