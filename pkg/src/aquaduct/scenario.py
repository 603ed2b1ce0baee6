"""Scenario configuration and the end-to-end pipeline.

A scenario describes the plant, the polling console, the attack
schedule, the split and the model list; one master seed derives every
module seed, so a run is fully reproducible: capture traffic, cut it
into labeled flows, write the dataset, train and score the models
offline, then replay freshly seeded traffic through the deployed
models for the online comparison.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from . import modbus
from .attacks import AttackKind, AttackSpec, GroundTruthRegistry, schedule_attacks
from .dataset import Dataset, SplitSpec, split, stats, write_csv
from .flows import DEFAULT_IDLE_TIMEOUT, DEFAULT_STATUS_INTERVAL, FlowTable, label
from .ids import OnlineDetector, evaluate, save_model, train
from .ids.models import ALGORITHMS
from .network import Clock, Endpoint, ModbusServer, Network, hmi_poller
from .plant import Plant, PlantConfig

SERVER_HOST = "10.0.0.10"
HMI_HOST = "10.0.0.20"
HMI_SPORT = 51000

# one attacker host per attack kind keeps ground-truth labeling unambiguous
ATTACKER_HOSTS = {
    AttackKind.PORT_SCAN: "10.0.0.60",
    AttackKind.ADDRESS_SCAN: "10.0.0.61",
    AttackKind.DEVICE_ID: "10.0.0.62",
    AttackKind.DEVICE_ID_AGGRESSIVE: "10.0.0.63",
    AttackKind.COIL_READ_EXPLOIT: "10.0.0.64",
}


@dataclass
class FlowConfig:
    status_interval: float = DEFAULT_STATUS_INTERVAL
    idle_timeout: float = DEFAULT_IDLE_TIMEOUT


@dataclass
class ScenarioConfig:
    plant: PlantConfig = field(default_factory=PlantConfig)
    plant_tick: float = 0.1  # virtual seconds per plant tick
    poll_period: float = 1.0
    duration: float = 600.0
    attacks: list[AttackSpec] = field(default_factory=list)
    flow: FlowConfig = field(default_factory=FlowConfig)
    split: SplitSpec = field(default_factory=SplitSpec)
    models: tuple = ALGORITHMS
    hyperparams: dict = field(default_factory=dict)
    master_seed: int = 1

    def validate(self):
        self.plant.validate()
        for spec in self.attacks:
            if not 0 <= spec.start_time <= self.duration:
                raise ValueError(
                    f"attack {spec.kind.value} starts at {spec.start_time}, "
                    f"outside [0, {self.duration}]"
                )
        for algorithm in self.models:
            if algorithm not in ALGORITHMS:
                raise ValueError(f"unknown model {algorithm!r}")


def derive_seed(master_seed: int, *names) -> int:
    """Stable per-module seed from the master seed and a label path."""
    digest = hashlib.sha256(
        ("/".join([str(master_seed), *map(str, names)])).encode()
    ).digest()
    return int.from_bytes(digest[:8], "big")


def config_hash(config: ScenarioConfig) -> str:
    return hashlib.sha256(
        json.dumps(config_to_dict(config), sort_keys=True).encode()
    ).hexdigest()[:16]


# ----------------------------------------------------------- (de)serialization


def config_to_dict(config: ScenarioConfig) -> dict:
    return {
        "plant": vars(config.plant) | {},
        "plant_tick": config.plant_tick,
        "poll_period": config.poll_period,
        "duration": config.duration,
        "attacks": [
            {
                "kind": spec.kind.value,
                "start_time": spec.start_time,
                "attacker_host": spec.attacker_host,
                "seed": spec.seed,
                "target_host": spec.target_host,
                "target_port": spec.target_port,
                "ports": list(spec.ports),
                "gap_range": list(spec.gap_range),
                "candidates": [list(c) for c in spec.candidates],
                "probe_gap": spec.probe_gap,
                "unit_ids": list(spec.unit_ids),
                "sweeps": spec.sweeps,
                "interval_range": list(spec.interval_range),
                "duration": spec.duration,
                "sessions": spec.sessions,
            }
            for spec in config.attacks
        ],
        "flow": vars(config.flow) | {},
        "split": {
            "train_fraction": config.split.train_fraction,
            "seed": config.split.seed,
            "stratified": config.split.stratified,
        },
        "models": list(config.models),
        "hyperparams": config.hyperparams,
        "master_seed": config.master_seed,
    }


def attack_spec_from_dict(data: dict, master_seed: int = 0, index: int = 0) -> AttackSpec:
    kind = AttackKind(data["kind"])
    spec = AttackSpec(
        kind=kind,
        start_time=float(data["start_time"]),
        attacker_host=data.get("attacker_host", ATTACKER_HOSTS[kind]),
        seed=int(data.get("seed", derive_seed(master_seed, "attack", index, kind.value))),
    )
    for key in (
        "target_host",
        "target_port",
        "probe_gap",
        "sweeps",
        "duration",
        "sessions",
    ):
        if key in data:
            setattr(spec, key, type(getattr(spec, key))(data[key]))
    for key in ("ports", "unit_ids"):
        if key in data:
            setattr(spec, key, tuple(int(v) for v in data[key]))
    for key in ("gap_range", "interval_range"):
        if key in data:
            setattr(spec, key, tuple(float(v) for v in data[key]))
    if "candidates" in data:
        spec.candidates = tuple((str(h), int(u)) for h, u in data["candidates"])
    return spec


def config_from_dict(data: dict) -> ScenarioConfig:
    master_seed = int(data.get("master_seed", 1))
    config = ScenarioConfig(master_seed=master_seed)
    if "plant" in data:
        config.plant = PlantConfig(**{k: float(v) for k, v in data["plant"].items()})
    for key in ("plant_tick", "poll_period", "duration"):
        if key in data:
            setattr(config, key, float(data[key]))
    if "flow" in data:
        config.flow = FlowConfig(**{k: float(v) for k, v in data["flow"].items()})
    if "split" in data:
        s = data["split"]
        config.split = SplitSpec(
            train_fraction=float(s.get("train_fraction", 0.8)),
            seed=int(s.get("seed", derive_seed(master_seed, "split"))),
            stratified=bool(s.get("stratified", True)),
        )
    else:
        config.split = SplitSpec(seed=derive_seed(master_seed, "split"))
    if "models" in data:
        config.models = tuple(data["models"])
    config.hyperparams = data.get("hyperparams", {})
    config.attacks = [
        attack_spec_from_dict(a, master_seed, i) for i, a in enumerate(data.get("attacks", []))
    ]
    config.validate()
    return config


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as handle:
        return config_from_dict(yaml.safe_load(handle))


# ------------------------------------------------------------------- capture


@dataclass
class CaptureResult:
    events: list
    registry: GroundTruthRegistry
    plant: Plant
    flow_table: FlowTable
    labeled: list  # LabeledFlow in closure order


def build_session(config: ScenarioConfig, phase: str):
    """Wire up clock, plant, server, console, and attacks for one phase.

    ``phase`` ("offline"/"online") perturbs every derived seed, so the
    online phase is fresh traffic from the same generators.
    """
    clock = Clock()
    network = Network(clock)
    plant = Plant(replace(config.plant))
    plant.command("on")  # operator starts the process at t=0
    server_ep = Endpoint(SERVER_HOST, modbus.MODBUS_PORT)
    network.listen(server_ep, ModbusServer(plant))
    registry = GroundTruthRegistry()

    def plant_task():
        while True:
            plant.tick()
            yield config.plant_tick

    clock.spawn(0.0, plant_task())
    clock.spawn(
        config.plant_tick,  # console starts after the first scan
        hmi_poller(network, Endpoint(HMI_HOST, HMI_SPORT), server_ep, config.poll_period),
    )
    specs = []
    for i, base in enumerate(config.attacks):
        specs.append(replace(base, seed=derive_seed(config.master_seed, phase, "attack", i)))
    attacks = schedule_attacks(network, specs, registry)
    return network, plant, registry, attacks


def run_capture(config: ScenarioConfig, phase: str) -> CaptureResult:
    network, plant, registry, _ = build_session(config, phase)
    network.clock.run(config.duration)
    events = network.tap.events()
    table = FlowTable(config.flow.status_interval, config.flow.idle_timeout)
    table.ingest_all(events)
    table.flush()
    labeled = [label(record, registry) for record in table.records]
    return CaptureResult(events, registry, plant, table, labeled)


def write_tap_log(events, path):
    """Tab-delimited capture log: ts, src, dst, kind, payload, header."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("ts\tsrc\tdst\tkind\tpayload_bytes\theader_bytes\n")
        for e in events:
            handle.write(
                f"{e.ts:.6f}\t{e.src}\t{e.dst}\t{e.kind.value}\t{e.payload_bytes}\t{e.header_bytes}\n"
            )


def write_registry(registry: GroundTruthRegistry, path):
    entries = [
        {"host": e.host, "start": e.start, "end": e.end, "kind": e.kind.value}
        for e in registry.entries
    ]
    Path(path).write_text(json.dumps(entries, sort_keys=True) + "\n", encoding="utf-8")


# ------------------------------------------------------------------ pipeline


def _metrics_dict(cm, metrics) -> dict:
    return {
        "confusion": {"tp": cm.tp, "tn": cm.tn, "fp": cm.fp, "fn": cm.fn},
        "accuracy": metrics.accuracy,
        "far": metrics.far,
        "und": metrics.und,
    }


def run_scenario(config: ScenarioConfig, outdir) -> dict:
    """Full pipeline; returns the run report (also written to report.json)."""
    config.validate()
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    provenance = f"{config_hash(config)}:{config.master_seed}"

    # 1. capture + featurize + label
    capture = run_capture(config, "offline")
    write_tap_log(capture.events, outdir / "tap.log")
    write_registry(capture.registry, outdir / "ground_truth.json")
    data = Dataset(capture.labeled, provenance=provenance)
    write_csv(data, outdir / "dataset.csv")
    data_stats = stats(data)

    # 2. split + offline train/eval
    train_set, test_set = split(data, config.split)
    write_csv(train_set, outdir / "train.csv")
    write_csv(test_set, outdir / "test.csv")
    models_dir = outdir / "models"
    models_dir.mkdir(exist_ok=True)
    trained = {}
    report_models = {}
    for algorithm in config.models:
        model = train(
            algorithm,
            train_set,
            config.hyperparams.get(algorithm),
            seed=derive_seed(config.master_seed, "train", algorithm),
        )
        save_model(model, models_dir / f"{algorithm}.json")
        cm, metrics = evaluate(model, test_set)
        trained[algorithm] = model
        report_models[algorithm] = {"offline": _metrics_dict(cm, metrics)}

    # 3. online phase: fresh traffic through the deployed models
    online = run_capture(config, "online")
    write_tap_log(online.events, outdir / "tap_online.log")
    online_data = Dataset(online.labeled, provenance=provenance + ":online")
    online_stats = stats(online_data)
    alerts_dir = outdir / "alerts"
    alerts_dir.mkdir(exist_ok=True)
    for algorithm, model in trained.items():
        detector = OnlineDetector(model)
        detector.observe_batch(online.labeled)
        report_models[algorithm]["online"] = _metrics_dict(detector.confusion, detector.metrics())
        with open(alerts_dir / f"{algorithm}.ndjson", "w", encoding="utf-8", newline="\n") as fh:
            for alert in detector.alerts:
                fh.write(json.dumps(vars(alert), sort_keys=True) + "\n")

    report = {
        "schema_version": "1",
        "provenance": {"config_hash": config_hash(config), "master_seed": config.master_seed},
        "dataset": data_stats,
        "online_traffic": online_stats,
        "split": {
            "train_rows": len(train_set.rows),
            "test_rows": len(test_set.rows),
            "train_fraction": config.split.train_fraction,
            "stratified": config.split.stratified,
        },
        "tap_events": len(capture.events),
        "flow_packet_total": capture.flow_table.total_recorded_packets,
        "models": report_models,
        "artifacts": {
            "tap_log": "tap.log",
            "tap_log_online": "tap_online.log",
            "ground_truth": "ground_truth.json",
            "dataset": "dataset.csv",
            "train": "train.csv",
            "test": "test.csv",
            "models": sorted(f"models/{a}.json" for a in trained),
            "alerts": sorted(f"alerts/{a}.ndjson" for a in trained),
        },
    }
    (outdir / "report.json").write_text(
        json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return report
