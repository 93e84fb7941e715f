"""Human-readable key-value run configuration.

One `key = value` pair per line, `#` starts a comment. Every tunable of a run
(topology, protocol constants, adversary profile, score weights, sweep grid)
has a key; unknown keys fail fast so typos cannot silently fall back to
defaults.
"""

from __future__ import annotations

from .adversary import AdversaryProfile
from .engine import RunConfig
from .metrics import ScoreWeights
from .protocol import ProtocolConstants, TrustThresholds
from .sweep import SweepSpec


class ConfigError(ValueError):
    """Malformed configuration file or unknown key."""


def _float_list(raw: str) -> tuple[float, ...]:
    return tuple(float(x) for x in raw.split(",") if x.strip())


def _str_list(raw: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in raw.split(",") if x.strip())


def _bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


# key -> (parser, default)
SCHEMA: dict[str, tuple] = {
    # run / topology
    "sensorCount": (int, 100),
    "clusterHeadCount": (int, 4),
    "fieldSize": (float, 100.0),
    "radioRange": (float, 20.0),
    "maliciousFraction": (float, 0.0),
    "adversaryMode": (str, "static"),
    "rounds": (int, 100),
    "rngSeed": (int, 0),
    "trustModel": (str, "trustsense"),
    "energyPerUnitDistance": (float, 1.0),
    "multicastCost": (float, 100.0),
    "valueBase": (float, 20.0),
    "valueGradient": (float, 0.05),
    "collectEvents": (_bool, False),
    # trust thresholds
    "goodThreshold": (float, 0.75),
    "mediumThreshold": (float, 0.25),
    # protocol constants
    "relayRewardRate": (float, 0.01),
    "consistencyRewardRate": (float, 0.01),
    "packetLossPunishRate": (float, 0.05),
    "outlierPunishRate": (float, 0.05),
    "maxOutlierSequence": (int, 3),
    "maxClusterSize": (int, 64),
    "outlierThreshold": (float, 2.0),
    "spatialPresenceStep": (float, 0.25),
    "trustUpdatePeriod": (int, 5),
    # adversary profile
    "dropMode": (str, "selective"),
    "dropProbability": (float, 0.5),
    "falsifyMode": (str, "offset"),
    "falsifyDelta": (float, 10.0),
    "falsifyRange": (float, 5.0),
    "togglePeriod": (int, 5),
    "toggleProbability": (float, 0.5),
    # score weights (pMax 0 means: use the sensor count)
    "wA": (float, 40.0),
    "wP": (float, 20.0),
    "wE": (float, 40.0),
    "aMax": (float, 1.0),
    "pMax": (float, 0.0),
    "eMaxRounding": (float, 100000.0),
    # sweep grid
    "fractions": (_float_list, tuple(i / 10 for i in range(10))),
    "runsPerPoint": (int, 30),
    "adversaryModes": (_str_list, ("static", "oscillating")),
    "models": (_str_list, ("trustsense", "eigentrust")),
    "baseSeed": (int, 0),
    # eigentrust baseline
    "eigentrustEpsilon": (float, 1e-10),
    "eigentrustMaxIters": (int, 1000),
}


def default_settings() -> dict:
    return {key: default for key, (_, default) in SCHEMA.items()}


def parse_settings(text: str) -> dict:
    """Parse config text into a full settings dict (defaults plus overrides)."""
    settings = default_settings()
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw_value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value', "
                              f"got {raw_line!r}")
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        parser, _ = SCHEMA[key]
        try:
            settings[key] = parser(raw_value.strip())
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
    return settings


def load_settings(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_settings(fh.read())


def build_run_config(settings: dict, **overrides) -> RunConfig:
    thresholds = TrustThresholds(good=settings["goodThreshold"],
                                 medium=settings["mediumThreshold"])
    constants = ProtocolConstants(
        relay_reward_rate=settings["relayRewardRate"],
        consistency_reward_rate=settings["consistencyRewardRate"],
        packet_loss_punish_rate=settings["packetLossPunishRate"],
        outlier_punish_rate=settings["outlierPunishRate"],
        max_outlier_sequence=settings["maxOutlierSequence"],
        max_cluster_size=settings["maxClusterSize"],
        outlier_threshold=settings["outlierThreshold"],
        spatial_presence_step=settings["spatialPresenceStep"],
        trust_update_period=settings["trustUpdatePeriod"])
    adversary = AdversaryProfile(
        drop_mode=settings["dropMode"],
        drop_probability=settings["dropProbability"],
        falsify_mode=settings["falsifyMode"],
        falsify_delta=settings["falsifyDelta"],
        falsify_range=settings["falsifyRange"],
        oscillation=settings["adversaryMode"],
        toggle_period=settings["togglePeriod"],
        toggle_probability=settings["toggleProbability"])
    kwargs = dict(
        sensor_count=settings["sensorCount"],
        cluster_head_count=settings["clusterHeadCount"],
        field_size=settings["fieldSize"],
        radio_range=settings["radioRange"],
        malicious_fraction=settings["maliciousFraction"],
        adversary_mode=settings["adversaryMode"],
        rounds=settings["rounds"],
        rng_seed=settings["rngSeed"],
        trust_model=settings["trustModel"],
        thresholds=thresholds,
        constants=constants,
        adversary=adversary,
        energy_per_unit_distance=settings["energyPerUnitDistance"],
        multicast_cost=settings["multicastCost"],
        value_base=settings["valueBase"],
        value_gradient=settings["valueGradient"],
        eigentrust_epsilon=settings["eigentrustEpsilon"],
        eigentrust_max_iters=settings["eigentrustMaxIters"],
        collect_events=settings["collectEvents"])
    kwargs.update(overrides)
    return RunConfig(**kwargs)


def build_score_weights(settings: dict) -> ScoreWeights:
    p_max = settings["pMax"] if settings["pMax"] > 0 else float(settings["sensorCount"])
    return ScoreWeights(w_accuracy=settings["wA"], w_path=settings["wP"],
                        w_energy=settings["wE"], a_max=settings["aMax"],
                        p_max=p_max, e_max_rounding=settings["eMaxRounding"])


def build_sweep_spec(settings: dict, **overrides) -> SweepSpec:
    kwargs = dict(fractions=settings["fractions"],
                  runs_per_point=settings["runsPerPoint"],
                  adversary_modes=settings["adversaryModes"],
                  models=settings["models"],
                  base_seed=settings["baseSeed"])
    kwargs.update(overrides)
    return SweepSpec(**kwargs)
