"""Reconnaissance and exploit traffic generators.

Five seedable attacks against the field network: a half-open port scan,
a Modbus server address scan, device identification in normal and
aggressive mode, and a low-rate coil-reading exploit whose traffic is
deliberately close to normal polling.  Every attack registers its
endpoint and activity window in the ground-truth registry before it
sends anything, so flows can be labeled without inspecting payloads.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from enum import Enum

from . import modbus
from .modbus import DeviceIdRequest, ModbusFrame, ReadBitsRequest, ReadRegistersRequest
from .network import (
    REQUEST_TIMEOUT,
    Connection,
    DestinationUnreachable,
    Endpoint,
    Network,
)

EPHEMERAL_LO = 49152
EPHEMERAL_HI = 65535


class AttackKind(Enum):
    PORT_SCAN = "port_scan"
    ADDRESS_SCAN = "address_scan"
    DEVICE_ID = "device_id"
    DEVICE_ID_AGGRESSIVE = "device_id_aggressive"
    COIL_READ_EXPLOIT = "coil_read_exploit"


@dataclass
class AttackSpec:
    kind: AttackKind
    start_time: float
    attacker_host: str
    seed: int
    target_host: str = "10.0.0.10"
    target_port: int = modbus.MODBUS_PORT
    # port scan
    ports: tuple = (modbus.MODBUS_PORT, 80, 443, 8080)
    gap_range: tuple = (1.0, 3.0)
    # address scan: (host, unit_id) candidates
    candidates: tuple = ()
    probe_gap: float = 1.0
    # device identification
    unit_ids: tuple = tuple(range(1, 17))
    sweeps: int = 1
    # exploit
    interval_range: tuple = (1.0, 2.0)
    duration: float = 60.0
    sessions: int = 1


@dataclass(frozen=True)
class RegistryEntry:
    host: str
    start: float
    end: float
    kind: AttackKind


class GroundTruthRegistry:
    """Append-only record of which hosts were attacking when."""

    def __init__(self):
        self.entries: list[RegistryEntry] = []

    def register(self, host: str, start: float, end: float, kind: AttackKind):
        self.entries.append(RegistryEntry(host, start, end, kind))

    def lookup(self, host: str, ts: float) -> AttackKind | None:
        for entry in self.entries:
            if entry.host == host and entry.start <= ts <= entry.end:
                return entry.kind
        return None


@dataclass
class AttackResult:
    """Filled in as the attack task runs."""

    open_ports: list = field(default_factory=list)
    discovered: tuple | None = None  # (host, unit_id) of the Modbus server
    identities: dict = field(default_factory=dict)  # unit_id -> {object_id: text}
    coil_reads: list = field(default_factory=list)  # (ts, (pump1, pump2, valve, light))
    request_count: int = 0


def _ephemeral(rng: random.Random) -> int:
    return rng.randint(EPHEMERAL_LO, EPHEMERAL_HI)


def _attacker_ep(spec: AttackSpec, rng: random.Random) -> Endpoint:
    return Endpoint(spec.attacker_host, _ephemeral(rng))


def planned_duration(spec: AttackSpec) -> float:
    """Worst-case activity window used for the ground-truth registry."""
    if spec.kind is AttackKind.PORT_SCAN:
        return len(spec.ports) * spec.gap_range[1] + 1.0
    if spec.kind is AttackKind.ADDRESS_SCAN:
        return len(spec.candidates) * (spec.probe_gap + REQUEST_TIMEOUT) + 1.0
    if spec.kind is AttackKind.DEVICE_ID:
        return len(spec.unit_ids) * REQUEST_TIMEOUT + 1.0
    if spec.kind is AttackKind.DEVICE_ID_AGGRESSIVE:
        return spec.sweeps * 2 * len(spec.unit_ids) * REQUEST_TIMEOUT + 1.0
    return spec.sessions * (spec.duration + spec.interval_range[1]) + 1.0


class Attack:
    """One scheduled attack: registry entry plus a generator task."""

    def __init__(self, network: Network, spec: AttackSpec, registry: GroundTruthRegistry):
        self.network = network
        self.spec = spec
        self.registry = registry
        self.result = AttackResult()
        registry.register(
            spec.attacker_host, spec.start_time, spec.start_time + self._planned_duration(), spec.kind
        )

    def _planned_duration(self) -> float:
        return planned_duration(self.spec)

    def task(self):
        s = self.spec
        if s.kind is AttackKind.PORT_SCAN:
            return self._port_scan()
        if s.kind is AttackKind.ADDRESS_SCAN:
            return self._address_scan()
        if s.kind is AttackKind.DEVICE_ID:
            return self._device_id(aggressive=False)
        if s.kind is AttackKind.DEVICE_ID_AGGRESSIVE:
            return self._device_id(aggressive=True)
        if s.kind is AttackKind.COIL_READ_EXPLOIT:
            return self._coil_read_exploit()
        raise ValueError(f"unknown attack kind {s.kind}")

    # -- the five behaviors ---------------------------------------------

    def _port_scan(self):
        """Half-open SYN probes with 1-3 s gaps; never completes a handshake."""
        rng = random.Random(self.spec.seed)
        for port in self.spec.ports:
            yield rng.uniform(*self.spec.gap_range)
            conn = self.network.connect(
                _attacker_ep(self.spec, rng), Endpoint(self.spec.target_host, port)
            )
            try:
                conn.open(half_open=True)
            except DestinationUnreachable:
                continue
            self.result.open_ports.append(port)

    def _address_scan(self):
        """One Modbus read probe per (host, unit id) candidate."""
        rng = random.Random(self.spec.seed)
        probe = ReadRegistersRequest(modbus.READ_HOLDING_REGISTERS, 0, 1)
        for host, unit_id in self.spec.candidates:
            yield self.spec.probe_gap
            conn = self.network.connect(
                _attacker_ep(self.spec, rng), Endpoint(host, modbus.MODBUS_PORT)
            )
            try:
                conn.open()
            except DestinationUnreachable:
                continue
            response, done = conn.request(ModbusFrame(1, unit_id, probe))
            self.result.request_count += 1
            if response is None:
                yield done - self.network.clock.now  # wait out the timeout
            elif self.result.discovered is None:
                self.result.discovered = (host, unit_id)
            conn.close()

    def _device_id(self, aggressive: bool):
        """Enumerate slave ids and pull vendor/firmware identification.

        Normal mode stops at the first answering unit id and asks for the
        basic category only; aggressive mode interrogates every candidate
        for basic plus extended objects.
        """
        rng = random.Random(self.spec.seed)
        conn = self.network.connect(
            _attacker_ep(self.spec, rng), Endpoint(self.spec.target_host, self.spec.target_port)
        )
        try:
            conn.open()
        except DestinationUnreachable:
            return
        read_codes = (modbus.DEVID_BASIC, modbus.DEVID_EXTENDED) if aggressive else (
            modbus.DEVID_BASIC,
        )
        for _ in range(self.spec.sweeps if aggressive else 1):
            for unit_id in self.spec.unit_ids:
                answered = False
                for read_code in read_codes:
                    response, done = conn.request(
                        ModbusFrame(conn.next_tid(), unit_id, DeviceIdRequest(read_code))
                    )
                    self.result.request_count += 1
                    if response is None:
                        yield done - self.network.clock.now
                        break
                    answered = True
                    objects = dict(response.pdu.objects)
                    self.result.identities.setdefault(unit_id, {}).update(objects)
                    yield 0.01  # brief think time between answered queries
                if answered and not aggressive:
                    conn.close()
                    return
        conn.close()

    def _coil_read_exploit(self):
        """Low-rate coil reads over full connections, paced like the HMI."""
        rng = random.Random(self.spec.seed)
        read = ReadBitsRequest(modbus.READ_COILS, 0, 4)
        for _ in range(self.spec.sessions):
            conn = self.network.connect(
                _attacker_ep(self.spec, rng),
                Endpoint(self.spec.target_host, self.spec.target_port),
            )
            try:
                conn.open()
            except DestinationUnreachable:
                return
            session_end = self.network.clock.now + self.spec.duration
            while self.network.clock.now < session_end:
                response, _ = conn.request(ModbusFrame(conn.next_tid(), 1, read))
                self.result.request_count += 1
                if response is not None:
                    self.result.coil_reads.append(
                        (self.network.clock.now, tuple(response.pdu.bits[:4]))
                    )
                yield rng.uniform(*self.spec.interval_range)
            conn.close()


def schedule_attacks(network: Network, specs, registry: GroundTruthRegistry):
    """Register and spawn every attack on the network clock; returns them."""
    attacks = []
    for spec in specs:
        attack = Attack(network, spec, registry)
        network.clock.spawn(spec.start_time, attack.task())
        attacks.append(attack)
    return attacks
