"""Bidirectional flow aggregation and feature extraction.

Turns the ordered tap stream into flow records keyed by the 5-tuple,
oriented by whoever sent the first packet.  Long-lived flows are cut
into status records at a fixed interval (the way Argus-style flow
monitors report persistent connections), and a flow finally closes on
FIN, RST, or idle timeout.  Each record yields the six dataset
features plus a ground-truth label from the attack registry.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .attacks import AttackKind, GroundTruthRegistry
from .network import Endpoint, PacketEvent, PacketKind

DEFAULT_STATUS_INTERVAL = 5.0
DEFAULT_IDLE_TIMEOUT = 60.0


class FlowState(Enum):
    OPEN = "open"  # status record of a still-active flow
    CLOSED_FIN = "closed_fin"
    CLOSED_RST = "closed_rst"
    CLOSED_IDLE = "closed_idle"
    HALF_OPEN = "half_open"  # handshake never completed


class OutOfOrderError(ValueError):
    """Event timestamp went backwards; the stream contract is broken."""


@dataclass(frozen=True)
class FlowRecord:
    src: Endpoint  # initiator
    dst: Endpoint  # responder
    proto: str
    first_ts: float
    last_ts: float
    src_pkts: int
    dst_pkts: int
    src_bytes: int
    dst_bytes: int
    state: FlowState


@dataclass(frozen=True)
class FeatureVector:
    tot_pkts: int
    tot_bytes: int
    src_pkts: int
    dst_pkts: int
    src_bytes: int
    sport: int

    def as_tuple(self):
        return (
            self.tot_pkts,
            self.tot_bytes,
            self.src_pkts,
            self.dst_pkts,
            self.src_bytes,
            self.sport,
        )


LABEL_NORMAL = "normal"
LABEL_ATTACK = "attack"


@dataclass(frozen=True)
class LabeledFlow:
    features: FeatureVector
    label: str
    attack_kind: AttackKind | None = None
    record: FlowRecord | None = None


def featurize(record: FlowRecord) -> FeatureVector:
    """Project a closed record onto the six dataset features."""
    return FeatureVector(
        tot_pkts=record.src_pkts + record.dst_pkts,
        tot_bytes=record.src_bytes + record.dst_bytes,
        src_pkts=record.src_pkts,
        dst_pkts=record.dst_pkts,
        src_bytes=record.src_bytes,
        sport=record.src.port,
    )


def label(record: FlowRecord, registry: GroundTruthRegistry) -> LabeledFlow:
    """Attack iff the initiator was registered as attacking at first_ts."""
    kind = registry.lookup(record.src.host, record.first_ts)
    return LabeledFlow(
        features=featurize(record),
        label=LABEL_ATTACK if kind is not None else LABEL_NORMAL,
        attack_kind=kind,
        record=record,
    )


class _Flow:
    __slots__ = (
        "initiator",
        "responder",
        "flow_first_ts",
        "first_ts",
        "last_ts",
        "src_pkts",
        "dst_pkts",
        "src_bytes",
        "dst_bytes",
        "handshake_done",
        "boundary",
    )

    def __init__(self, event: PacketEvent, interval: float):
        self.initiator = event.src
        self.responder = event.dst
        self.flow_first_ts = event.ts
        self.boundary = event.ts + interval
        self._reset(event.ts)
        self.handshake_done = False

    def _reset(self, ts: float):
        self.first_ts = ts
        self.last_ts = ts
        self.src_pkts = 0
        self.dst_pkts = 0
        self.src_bytes = 0
        self.dst_bytes = 0

    def account(self, event: PacketEvent):
        size = event.header_bytes + event.payload_bytes
        if event.src == self.initiator:
            self.src_pkts += 1
            self.src_bytes += size
            if event.kind in (PacketKind.ACK, PacketKind.DATA):
                self.handshake_done = True
        else:
            self.dst_pkts += 1
            self.dst_bytes += size
        self.last_ts = max(self.last_ts, event.ts)

    def snapshot(self, state: FlowState) -> FlowRecord:
        return FlowRecord(
            src=self.initiator,
            dst=self.responder,
            proto="tcp",
            first_ts=self.first_ts,
            last_ts=self.last_ts,
            src_pkts=self.src_pkts,
            dst_pkts=self.dst_pkts,
            src_bytes=self.src_bytes,
            dst_bytes=self.dst_bytes,
            state=state,
        )


class FlowTable:
    """Single-consumer stream processor turning packet events into records.

    ``on_record`` is called with every emitted :class:`FlowRecord`;
    records are also kept in :attr:`records` in emission order.
    """

    def __init__(
        self,
        status_interval: float = DEFAULT_STATUS_INTERVAL,
        idle_timeout: float = DEFAULT_IDLE_TIMEOUT,
        on_record=None,
    ):
        self.status_interval = status_interval
        self.idle_timeout = idle_timeout
        self.on_record = on_record
        self.records: list[FlowRecord] = []
        self.watermark = float("-inf")
        self.event_count = 0
        self._flows: dict[tuple, _Flow] = {}

    def _emit(self, record: FlowRecord):
        self.records.append(record)
        if self.on_record is not None:
            self.on_record(record)

    @staticmethod
    def _key(a: Endpoint, b: Endpoint):
        return (a, b) if a <= b else (b, a)

    def ingest(self, event: PacketEvent):
        if event.ts < self.watermark:
            raise OutOfOrderError(
                f"event at {event.ts} behind watermark {self.watermark}"
            )
        self.watermark = event.ts
        self.event_count += 1
        key = self._key(event.src, event.dst)
        flow = self._flows.get(key)
        if flow is None:
            flow = _Flow(event, self.status_interval)
            self._flows[key] = flow
        elif event.ts >= flow.boundary:
            self._emit(flow.snapshot(FlowState.OPEN))
            periods = int((event.ts - flow.flow_first_ts) // self.status_interval) + 1
            flow.boundary = flow.flow_first_ts + periods * self.status_interval
            flow._reset(event.ts)
        flow.account(event)
        if event.kind is PacketKind.FIN:
            self._emit(flow.snapshot(FlowState.CLOSED_FIN))
            del self._flows[key]
        elif event.kind is PacketKind.RST:
            self._emit(flow.snapshot(FlowState.CLOSED_RST))
            del self._flows[key]

    def ingest_all(self, events):
        for event in events:
            self.ingest(event)

    def _final_state(self, flow: _Flow) -> FlowState:
        return FlowState.CLOSED_IDLE if flow.handshake_done else FlowState.HALF_OPEN

    def close_flows(self, now: float, idle_timeout: float | None = None):
        """Close flows idle for longer than the timeout; returns their records."""
        timeout = self.idle_timeout if idle_timeout is None else idle_timeout
        closed = []
        for key in [k for k, f in self._flows.items() if now - f.last_ts > timeout]:
            flow = self._flows.pop(key)
            record = flow.snapshot(self._final_state(flow))
            self._emit(record)
            closed.append(record)
        return closed

    def flush(self):
        """Close every remaining flow (end of capture); returns their records."""
        closed = []
        for key in list(self._flows):
            flow = self._flows.pop(key)
            record = flow.snapshot(self._final_state(flow))
            self._emit(record)
            closed.append(record)
        return closed

    @property
    def total_recorded_packets(self) -> int:
        live = sum(f.src_pkts + f.dst_pkts for f in self._flows.values())
        emitted = sum(r.src_pkts + r.dst_pkts for r in self.records)
        return live + emitted
