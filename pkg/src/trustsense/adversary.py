"""Malicious node behaviors and population dynamics: packet dropping,
data falsification, and static versus oscillating adversary populations.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .topology import NetworkTopology

DROP_MODES = ("none", "full", "selective")
FALSIFY_MODES = ("none", "offset", "random")


@dataclass(frozen=True)
class AdversaryProfile:
    """How a node behaves while in the malicious state."""
    drop_mode: str = "selective"
    drop_probability: float = 0.5
    falsify_mode: str = "offset"
    falsify_delta: float = 10.0
    falsify_range: float = 5.0
    oscillation: str = "static"
    toggle_period: int = 5
    toggle_probability: float = 0.5

    def __post_init__(self):
        if self.drop_mode not in DROP_MODES:
            raise ValueError(f"unknown drop mode {self.drop_mode!r}")
        if self.falsify_mode not in FALSIFY_MODES:
            raise ValueError(f"unknown falsify mode {self.falsify_mode!r}")
        if self.oscillation not in ("static", "oscillating"):
            raise ValueError(f"unknown oscillation mode {self.oscillation!r}")
        if not 0 <= self.drop_probability <= 1:
            raise ValueError("drop probability must be in [0, 1]")
        if not 0 <= self.toggle_probability <= 1:
            raise ValueError("toggle probability must be in [0, 1]")
        if self.drop_mode == "none" and self.falsify_mode == "none":
            raise ValueError("a malicious profile must drop or falsify")
        if self.toggle_period < 1:
            raise ValueError("toggle period must be at least 1")


@dataclass(frozen=True)
class PopulationPlan:
    malicious_fraction: float
    assignment: frozenset[int]


def assign_adversaries(topo: NetworkTopology, fraction: float,
                       rng_seed: int) -> PopulationPlan:
    """Pick a uniformly random sensor subset of exactly round(fraction * n).
    Cluster heads are tamper-proof and never selected."""
    if not 0 <= fraction <= 1:
        raise ValueError("malicious fraction must be in [0, 1]")
    sensor_ids = sorted(topo.sensors)
    count = round(fraction * len(sensor_ids))
    chosen = random.Random(rng_seed).sample(sensor_ids, count)
    return PopulationPlan(fraction, frozenset(chosen))


def malicious_forward(profile: AdversaryProfile, rng: random.Random) -> bool:
    """Forwarding decision of a node currently in the malicious state:
    True means the packet is relayed, False means it is dropped."""
    if profile.drop_mode == "full":
        return False
    if profile.drop_mode == "selective":
        return rng.random() >= profile.drop_probability
    return True


def malicious_sense(profile: AdversaryProfile, true_value: float,
                    rng: random.Random) -> float:
    """Reading reported by a node currently in the malicious state."""
    if profile.falsify_mode == "offset":
        return true_value + profile.falsify_delta
    if profile.falsify_mode == "random":
        return true_value + rng.uniform(-profile.falsify_range,
                                        profile.falsify_range)
    return true_value


class Oscillator:
    """Tracks which sensors are currently malicious.

    In oscillating mode, nodes at each toggle boundary flip state by pairwise
    swap: willing flippers from the malicious side trade places with willing
    flippers from the benevolent side, so the malicious count never changes.
    """

    def __init__(self, pool: list[int], initial: frozenset[int],
                 profile: AdversaryProfile, oscillating: bool):
        self.pool = sorted(pool)
        self.current: set[int] = set(initial)
        self.ever_malicious: set[int] = set(initial)
        self.profile = profile
        self.oscillating = oscillating

    def maybe_toggle(self, round_index: int, rng: random.Random) -> None:
        if (not self.oscillating or round_index == 0
                or round_index % self.profile.toggle_period != 0):
            return
        p = self.profile.toggle_probability
        mal_flip = [n for n in sorted(self.current) if rng.random() < p]
        ben_flip = [n for n in sorted(set(self.pool) - self.current)
                    if rng.random() < p]
        rng.shuffle(mal_flip)
        rng.shuffle(ben_flip)
        for out_node, in_node in zip(mal_flip, ben_flip):
            self.current.discard(out_node)
            self.current.add(in_node)
            self.ever_malicious.add(in_node)
