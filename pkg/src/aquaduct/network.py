"""Simulated field network with a capture tap.

Deterministic in-memory transport on a virtual clock: a Modbus server
(the PLC slave) listens on port 502, clients open connections that emit
handshake and data events, and every event lands on a tap ordered by
virtual timestamp.  The tap log is the artifact's pcap-equivalent.

Tasks are plain generators yielding delays in virtual seconds; the
scheduler resumes them in (time, sequence) order, which makes two runs
with equal seeds byte-identical.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from enum import Enum

from . import modbus
from .modbus import (
    DataTable,
    DeviceIdRequest,
    DeviceIdResponse,
    ModbusFrame,
    ReadBitsRequest,
    ReadBitsResponse,
    ReadRegistersRequest,
    ReadRegistersResponse,
    WriteSingleCoilRequest,
    WriteSingleCoilResponse,
    WriteSingleRegisterRequest,
    WriteSingleRegisterResponse,
    make_exception,
)
from .plant import Plant, ReadOnlyPointError, UnmappedAddressError

# fixed synthetic Ethernet+IP+TCP header size so packet sizes are
# comparable to real captures
HEADER_BYTES = 54

# one-way delivery latency on the simulated wire
LINK_LATENCY = 0.0005

# how long a client waits for a response before giving up
REQUEST_TIMEOUT = 2.0

DEVICE_IDENTITY_BASIC = (
    (0x00, "AquaductSim"),
    (0x01, "WT-1"),
    (0x02, "1.0"),
)
DEVICE_IDENTITY_EXTENDED = (
    (0x80, "water storage tank level control"),
    (0x81, "tank-1"),
)


class PacketKind(Enum):
    SYN = "syn"
    SYN_ACK = "syn_ack"
    ACK = "ack"
    DATA = "data"
    FIN = "fin"
    RST = "rst"


@dataclass(frozen=True, order=True)
class Endpoint:
    host: str
    port: int

    def __str__(self):
        return f"{self.host}:{self.port}"


@dataclass(frozen=True)
class PacketEvent:
    ts: float
    src: Endpoint
    dst: Endpoint
    kind: PacketKind
    payload_bytes: int = 0
    header_bytes: int = HEADER_BYTES

    @property
    def total_bytes(self) -> int:
        return self.header_bytes + self.payload_bytes


class DestinationUnreachable(ConnectionError):
    """No listener behind the destination endpoint."""


class Clock:
    """Virtual clock plus (time, sequence)-ordered task queue."""

    def __init__(self):
        self.now = 0.0
        self._seq = 0
        self._queue = []

    def call_at(self, when: float, fn, *args):
        self._seq += 1
        heapq.heappush(self._queue, (when, self._seq, fn, args))

    def spawn(self, when: float, task):
        """Run a generator task; each yielded value is a delay in seconds."""

        def advance():
            try:
                delay = next(task)
            except StopIteration:
                return
            self.call_at(self.now + delay, advance)

        self.call_at(when, advance)

    def run(self, until: float):
        while self._queue and self._queue[0][0] <= until:
            when, _, fn, args = heapq.heappop(self._queue)
            self.now = max(self.now, when)
            fn(*args)
        self.now = until


class Tap:
    """Single consumer of every packet event, ordered by (ts, seq)."""

    def __init__(self):
        self._events = []
        self._seq = 0

    def record(self, event: PacketEvent):
        self._seq += 1
        self._events.append((event.ts, self._seq, event))

    def events(self):
        """All recorded events in timestamp order with deterministic ties."""
        return [e for _, _, e in sorted(self._events, key=lambda t: (t[0], t[1]))]

    def drain_until(self, watermark: float):
        """Remove and return ordered events with ts <= watermark.

        Safe once the clock has advanced past ``watermark``: tasks only
        emit events at or after their own execution time.
        """
        ready = sorted(
            (t for t in self._events if t[0] <= watermark), key=lambda t: (t[0], t[1])
        )
        self._events = [t for t in self._events if t[0] > watermark]
        return [e for _, _, e in ready]

    def __len__(self):
        return len(self._events)


class ModbusServer:
    """PLC slave: dispatches decoded requests against the plant point map."""

    def __init__(self, plant: Plant, unit_id: int = 1):
        self.plant = plant
        self.unit_id = unit_id

    def handle(self, frame: ModbusFrame) -> ModbusFrame | None:
        """Response frame, or None when the request is for a foreign unit id."""
        if frame.unit_id != self.unit_id:
            return None
        pdu = frame.pdu
        try:
            if isinstance(pdu, ReadBitsRequest):
                table = (
                    DataTable.COILS
                    if pdu.function_code == modbus.READ_COILS
                    else DataTable.DISCRETE_INPUTS
                )
                bits = self.plant.read_point(table, pdu.start, pdu.quantity)
                reply = ReadBitsResponse(pdu.function_code, tuple(bits))
            elif isinstance(pdu, ReadRegistersRequest):
                table = (
                    DataTable.HOLDING_REGISTERS
                    if pdu.function_code == modbus.READ_HOLDING_REGISTERS
                    else DataTable.INPUT_REGISTERS
                )
                values = self.plant.read_point(table, pdu.start, pdu.quantity)
                reply = ReadRegistersResponse(pdu.function_code, tuple(values))
            elif isinstance(pdu, WriteSingleCoilRequest):
                self.plant.write_point(DataTable.COILS, pdu.address, pdu.on)
                reply = WriteSingleCoilResponse(pdu.address, pdu.on)
            elif isinstance(pdu, WriteSingleRegisterRequest):
                self.plant.write_point(DataTable.HOLDING_REGISTERS, pdu.address, pdu.value)
                reply = WriteSingleRegisterResponse(pdu.address, pdu.value)
            elif isinstance(pdu, DeviceIdRequest):
                reply = self._device_id(pdu)
            else:
                reply = make_exception(pdu, modbus.EXC_ILLEGAL_FUNCTION)
        except UnmappedAddressError:
            reply = make_exception(pdu, modbus.EXC_ILLEGAL_DATA_ADDRESS)
        except ReadOnlyPointError:
            reply = make_exception(pdu, modbus.EXC_ILLEGAL_DATA_VALUE)
        except ValueError:
            reply = make_exception(pdu, modbus.EXC_ILLEGAL_DATA_VALUE)
        return ModbusFrame(frame.transaction_id, frame.unit_id, reply)

    def _device_id(self, pdu: DeviceIdRequest) -> DeviceIdResponse:
        if pdu.read_code == modbus.DEVID_BASIC:
            return DeviceIdResponse(pdu.read_code, DEVICE_IDENTITY_BASIC)
        if pdu.read_code == modbus.DEVID_EXTENDED:
            return DeviceIdResponse(
                pdu.read_code, DEVICE_IDENTITY_BASIC + DEVICE_IDENTITY_EXTENDED
            )
        raise ValueError(f"unsupported device identification read code {pdu.read_code}")


class Connection:
    """One simulated TCP connection from ``src`` toward ``dst``."""

    def __init__(self, network: "Network", src: Endpoint, dst: Endpoint):
        self.network = network
        self.src = src
        self.dst = dst
        self.ready = False
        self.closed = False
        self._tid = 0

    def _emit(self, ts, src, dst, kind, payload=0):
        self.network.tap.record(PacketEvent(ts, src, dst, kind, payload))

    def open(self, half_open: bool = False) -> float:
        """Run the handshake; returns the virtual time when it completed.

        Half-open mode stops after the server's SYN-ACK (the scan's
        signature).  Connecting to a port without a listener draws a
        RST and raises :class:`DestinationUnreachable`.
        """
        t = self.network.clock.now
        self._emit(t, self.src, self.dst, PacketKind.SYN)
        listener = self.network.listeners.get(self.dst)
        if listener is None:
            self._emit(t + LINK_LATENCY, self.dst, self.src, PacketKind.RST)
            raise DestinationUnreachable(f"no listener at {self.dst}")
        self._emit(t + LINK_LATENCY, self.dst, self.src, PacketKind.SYN_ACK)
        if half_open:
            return t + LINK_LATENCY
        self._emit(t + 2 * LINK_LATENCY, self.src, self.dst, PacketKind.ACK)
        self.ready = True
        return t + 2 * LINK_LATENCY

    def request(self, frame: ModbusFrame):
        """Send one request; returns (response frame or None, completion time).

        Requests to a unit id the server does not own are silently
        dropped and the client waits out the request timeout.
        """
        if not self.ready or self.closed:
            raise ConnectionError("connection not established")
        t = self.network.clock.now
        wire = modbus.encode_frame(frame)
        self._emit(t, self.src, self.dst, PacketKind.DATA, len(wire))
        server = self.network.listeners[self.dst]
        response = server.handle(frame)
        if response is None:
            return None, t + REQUEST_TIMEOUT
        reply_wire = modbus.encode_frame(response)
        self._emit(t + LINK_LATENCY, self.dst, self.src, PacketKind.DATA, len(reply_wire))
        return response, t + LINK_LATENCY

    def next_tid(self) -> int:
        self._tid = (self._tid + 1) & 0xFFFF
        return self._tid

    def close(self):
        if not self.closed:
            if self.ready:
                self._emit(self.network.clock.now, self.src, self.dst, PacketKind.FIN)
            self.closed = True


class Network:
    """Hosts, listeners, the shared clock, and the capture tap."""

    def __init__(self, clock: Clock | None = None):
        self.clock = clock or Clock()
        self.tap = Tap()
        self.listeners: dict[Endpoint, ModbusServer] = {}

    def listen(self, endpoint: Endpoint, server: ModbusServer):
        self.listeners[endpoint] = server

    def connect(self, src: Endpoint, dst: Endpoint) -> Connection:
        return Connection(self, src, dst)


# standard read list an operator console polls every cycle:
# level sensors, actuator states, tank level
HMI_READS = (
    ReadBitsRequest(modbus.READ_DISCRETE_INPUTS, 0, 2),
    ReadBitsRequest(modbus.READ_COILS, 0, 4),
    ReadRegistersRequest(modbus.READ_INPUT_REGISTERS, 0, 1),
)


def hmi_poller(
    network: Network,
    src: Endpoint,
    server_ep: Endpoint,
    period: float,
    unit_id: int = 1,
    reads=HMI_READS,
    on_cycle=None,
):
    """Generator task: persistent connection polling the server every period.

    ``on_cycle`` receives the list of response frames after each cycle
    (the live console's data feed).  Reconnects with 1 s backoff after
    a lost connection.
    """
    conn = None
    deadline = network.clock.now
    while True:
        if conn is None or conn.closed:
            conn = network.connect(src, server_ep)
            try:
                conn.open()
            except DestinationUnreachable:
                yield 1.0
                deadline = network.clock.now
                continue
        responses = []
        for pdu in reads:
            frame = ModbusFrame(conn.next_tid(), unit_id, pdu)
            response, _ = conn.request(frame)
            responses.append(response)
            yield 2 * LINK_LATENCY  # round trip before the next read
        if on_cycle is not None:
            on_cycle(network.clock.now, responses)
        deadline += period  # exact cadence, immune to in-cycle drift
        yield max(deadline - network.clock.now, 0.0)
