"""Cluster-head-side misbehavior detection: spatially-expected-value outlier
checks via a linear variogram, packet sequence inspection, and most-probable
path estimation used to spread rewards and punishments along routes.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass

from .protocol import ClusterHeadState, LocalTrustEntry, pick_from_bands
from .topology import UnknownNodeError, distance

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VariogramInput:
    """One subject reading plus same-window neighbor readings with their
    distances to the subject. All distances must lie in (0, d_max]."""
    subject_value: float
    neighbor_samples: tuple[tuple[float, float], ...]
    d_max: float


@dataclass(frozen=True)
class OutlierVerdict:
    expected: float
    deviation: float
    is_outlier: bool


@dataclass(frozen=True)
class Incident:
    """Base-station report raised when a node's outlier streak hits the
    maximum event outlier sequence."""
    round_index: int
    node_id: int
    expected: float
    actual: float
    deviation: float

    def as_line(self) -> str:
        return (f"{self.round_index},{self.node_id},{self.expected!r},"
                f"{self.actual!r},{self.deviation!r}")


def expected_value(inp: VariogramInput) -> float:
    """Spatially expected reading for the subject: the subject's own value and
    each neighbor's value averaged with weights w = d/d_max, the subject
    carrying implicit weight 1 (the most influential single term)."""
    if inp.d_max <= 0:
        raise ValueError("d_max must be positive")
    weight_sum = 0.0
    weighted_values = 0.0
    for d, v in inp.neighbor_samples:
        if not 0 < d <= inp.d_max:
            raise ValueError(f"neighbor distance {d} outside (0, {inp.d_max}]")
        w = d / inp.d_max
        weight_sum += w
        weighted_values += w * v
    return (weighted_values + inp.subject_value) / (weight_sum + 1.0)


def assess_reading(inp: VariogramInput, threshold: float) -> OutlierVerdict:
    exp = expected_value(inp)
    dev = abs(exp - inp.subject_value)
    return OutlierVerdict(exp, dev, dev > threshold)


def check_data_consistency(head: ClusterHeadState, entry: LocalTrustEntry,
                           reported_value: float, window_values: dict[int, float],
                           rng: random.Random, round_index: int) -> OutlierVerdict:
    """Judge one member's reading against its spatial neighborhood.

    Consistent readings earn the consistency reward with probability 0.5, but
    a consistent reading that interrupts a short outlier streak (the on-off
    injection signature) is punished immediately; either way the streak
    counter resets. Outliers extend the streak, and a streak reaching the
    maximum event outlier sequence is escalated as a base-station incident
    (counter reset, no punishment: it may be a genuine local event).
    """
    samples = []
    for nid in sorted(entry.spatial_neighbors):
        other = head.local.get(nid)
        if other is not None and nid in window_values:
            samples.append((distance(entry.location, other.location),
                            window_values[nid]))
    verdict = assess_reading(
        VariogramInput(reported_value, tuple(samples), head.radio_range),
        head.constants.outlier_threshold)
    if verdict.is_outlier:
        entry.outlier_count += 1
        if entry.outlier_count >= head.constants.max_outlier_sequence:
            head.incidents.append(Incident(round_index, entry.node_id,
                                           verdict.expected, reported_value,
                                           verdict.deviation))
            entry.outlier_count = 0
    else:
        if rng.random() < 0.5:
            head.apply_reward(entry.node_id, head.constants.consistency_reward_rate)
        if 0 < entry.outlier_count < head.constants.max_outlier_sequence:
            head.apply_punishment(entry.node_id, head.constants.outlier_punish_rate)
        entry.outlier_count = 0
    return verdict


def estimate_path(head: ClusterHeadState, origin: int, path_seed: int,
                  trust_view: dict[int, float] | None = None) -> list[int]:
    """Most probable route the origin's traffic took, origin included.

    Replays link selection from the origin with the given seed against a
    multicast trust snapshot (what every member's cache held during the
    period in question; defaults to the latest one), until a hop is within
    radio range of the head or no candidate remains. While caches match the
    snapshot and all hops used the same seed, the estimate reproduces the
    actual route exactly.
    """
    if origin not in head.local:
        raise UnknownNodeError(f"unregistered origin {origin}")
    if trust_view is None:
        trust_view = head.route_snapshot or {
            nid: e.trust for nid, e in head.local.items()}
    path = [origin]
    cur_pos, cur_head_dist = head.geometry[origin]
    limit = len(trust_view) + 1
    while len(path) <= limit:
        if cur_head_dist < head.radio_range:
            break
        candidates = []
        for nid, trust in trust_view.items():
            if nid == path[-1]:
                continue
            pos, head_dist = head.geometry[nid]
            if (head_dist <= cur_head_dist
                    and distance(cur_pos, pos) < head.radio_range):
                candidates.append((nid, trust))
        candidates.sort()
        nxt = pick_from_bands(candidates, path_seed, head.thresholds)
        if nxt is None or nxt in path:
            break
        path.append(nxt)
        cur_pos, cur_head_dist = head.geometry[nxt]
    return path


def inspect_sequence(head: ClusterHeadState, entry: LocalTrustEntry,
                     sequence: int, path_seed: int,
                     rng: random.Random) -> None:
    """Packet loss inspection on one received data packet.

    A sequence gap other than one (including replays and regressions) means
    traffic was skipped: the path the missing packet must have travelled is
    punished, the loss rate split equally across its nodes. Sequence numbers
    advance one per sensing window, so the freshest missing packet dates the
    loss and selects the dissemination era to replay it under. An in-order
    packet earns, with probability 0.5, the relay reward split the same way
    along the current era's path. The cached sequence advances in all cases.
    """
    gap = sequence - entry.last_sequence
    if gap != 1:
        if gap <= 0:
            head.sequence_regressions += 1
            logger.debug("sequence regression from node %s (gap %d)",
                         entry.node_id, gap)
        loss_round = max(sequence - 1, 0)
        loss_seed, loss_view = head.route_view_at(loss_round)
        path = estimate_path(head, entry.node_id, loss_seed, loss_view)
        share = head.constants.packet_loss_punish_rate / len(path)
        for nid in path:
            head.apply_punishment(nid, share)
    elif rng.random() < 0.5:
        path = estimate_path(head, entry.node_id, path_seed)
        share = head.constants.relay_reward_rate / len(path)
        for nid in path:
            head.apply_reward(nid, share)
    entry.last_sequence = sequence
