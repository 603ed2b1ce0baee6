import pytest

from aquaduct import modbus as mb
from aquaduct.network import (
    DEVICE_IDENTITY_BASIC,
    DEVICE_IDENTITY_EXTENDED,
    HEADER_BYTES,
    LINK_LATENCY,
    REQUEST_TIMEOUT,
    Clock,
    DestinationUnreachable,
    Endpoint,
    ModbusServer,
    Network,
    PacketEvent,
    PacketKind,
    Tap,
    hmi_poller,
)
from aquaduct.plant import Plant

SERVER = Endpoint("10.0.0.10", 502)
CLIENT = Endpoint("10.0.0.20", 51000)


def make_network():
    network = Network()
    plant = Plant()
    network.listen(SERVER, ModbusServer(plant))
    return network, plant


# -------------------------------------------------------------------- clock


def test_clock_runs_tasks_in_time_order_with_stable_ties():
    clock = Clock()
    log = []
    clock.call_at(2.0, log.append, "late")
    clock.call_at(1.0, log.append, "early-first")
    clock.call_at(1.0, log.append, "early-second")
    clock.run(until=5.0)
    assert log == ["early-first", "early-second", "late"]
    assert clock.now == 5.0


def test_clock_generator_task_delays_accumulate():
    clock = Clock()
    seen = []

    def task():
        seen.append(clock.now)
        yield 1.5
        seen.append(clock.now)
        yield 0.25
        seen.append(clock.now)

    clock.spawn(1.0, task())
    clock.run(until=10.0)
    assert seen == [1.0, 2.5, 2.75]


def test_clock_run_stops_at_horizon():
    clock = Clock()
    log = []
    clock.call_at(3.0, log.append, "inside")
    clock.call_at(7.0, log.append, "outside")
    clock.run(until=5.0)
    assert log == ["inside"]
    clock.run(until=10.0)
    assert log == ["inside", "outside"]


# ---------------------------------------------------------------------- tap


def make_event(ts, kind=PacketKind.DATA, payload=0):
    return PacketEvent(ts, CLIENT, SERVER, kind, payload)


def test_tap_orders_by_timestamp_with_insertion_ties():
    tap = Tap()
    tap.record(make_event(2.0))
    first = make_event(1.0, PacketKind.SYN)
    second = make_event(1.0, PacketKind.SYN_ACK)
    tap.record(first)
    tap.record(second)
    assert [e.kind for e in tap.events()] == [
        PacketKind.SYN,
        PacketKind.SYN_ACK,
        PacketKind.DATA,
    ]


def test_tap_drain_until_removes_only_ready_events():
    tap = Tap()
    for ts in (0.5, 1.5, 2.5):
        tap.record(make_event(ts))
    drained = tap.drain_until(1.5)
    assert [e.ts for e in drained] == [0.5, 1.5]
    assert len(tap) == 1
    assert [e.ts for e in tap.drain_until(10.0)] == [2.5]


# --------------------------------------------------------------- connection


def test_full_handshake_emits_three_packets_with_link_latency():
    network, _ = make_network()
    conn = network.connect(CLIENT, SERVER)
    done = conn.open()
    events = network.tap.events()
    assert [e.kind for e in events] == [PacketKind.SYN, PacketKind.SYN_ACK, PacketKind.ACK]
    assert [e.ts for e in events] == [0.0, LINK_LATENCY, 2 * LINK_LATENCY]
    assert done == 2 * LINK_LATENCY
    assert events[1].src == SERVER and events[1].dst == CLIENT
    assert all(e.total_bytes == HEADER_BYTES for e in events)


def test_half_open_stops_after_syn_ack():
    network, _ = make_network()
    conn = network.connect(CLIENT, SERVER)
    conn.open(half_open=True)
    assert [e.kind for e in network.tap.events()] == [PacketKind.SYN, PacketKind.SYN_ACK]
    assert not conn.ready


def test_closed_port_draws_rst():
    network, _ = make_network()
    conn = network.connect(CLIENT, Endpoint("10.0.0.10", 80))
    with pytest.raises(DestinationUnreachable):
        conn.open()
    kinds = [e.kind for e in network.tap.events()]
    assert kinds == [PacketKind.SYN, PacketKind.RST]


def test_request_emits_data_packets_with_wire_sizes():
    network, _ = make_network()
    conn = network.connect(CLIENT, SERVER)
    conn.open()
    request = mb.ModbusFrame(1, 1, mb.ReadBitsRequest(mb.READ_COILS, 0, 4))
    response, done = conn.request(request)
    assert isinstance(response.pdu, mb.ReadBitsResponse)
    data = [e for e in network.tap.events() if e.kind is PacketKind.DATA]
    assert data[0].payload_bytes == len(mb.encode_frame(request))
    assert data[1].payload_bytes == len(mb.encode_frame(response))
    assert done == data[1].ts


def test_foreign_unit_id_times_out_silently():
    network, _ = make_network()
    conn = network.connect(CLIENT, SERVER)
    conn.open()
    t0 = network.clock.now
    response, done = conn.request(
        mb.ModbusFrame(1, 9, mb.ReadBitsRequest(mb.READ_COILS, 0, 4))
    )
    assert response is None
    assert done == t0 + REQUEST_TIMEOUT
    # request went out, nothing came back
    data = [e for e in network.tap.events() if e.kind is PacketKind.DATA]
    assert len(data) == 1


def test_close_emits_single_fin():
    network, _ = make_network()
    conn = network.connect(CLIENT, SERVER)
    conn.open()
    conn.close()
    conn.close()
    fins = [e for e in network.tap.events() if e.kind is PacketKind.FIN]
    assert len(fins) == 1
    with pytest.raises(ConnectionError):
        conn.request(mb.ModbusFrame(1, 1, mb.ReadBitsRequest(mb.READ_COILS, 0, 4)))


def test_next_tid_wraps_at_16_bits():
    network, _ = make_network()
    conn = network.connect(CLIENT, SERVER)
    conn._tid = 0xFFFE
    assert conn.next_tid() == 0xFFFF
    assert conn.next_tid() == 0


# ------------------------------------------------------------------- server


def test_server_maps_bad_address_to_exception_code_2():
    network, _ = make_network()
    server = network.listeners[SERVER]
    reply = server.handle(
        mb.ModbusFrame(5, 1, mb.ReadBitsRequest(mb.READ_COILS, 100, 4))
    )
    assert isinstance(reply.pdu, mb.ExceptionResponse)
    assert reply.pdu.exception_code == mb.EXC_ILLEGAL_DATA_ADDRESS
    assert reply.pdu.function_code == 0x81
    assert reply.transaction_id == 5


def test_server_maps_readonly_coil_write_to_exception_code_3():
    network, _ = make_network()
    server = network.listeners[SERVER]
    reply = server.handle(mb.ModbusFrame(1, 1, mb.WriteSingleCoilRequest(0, True)))
    assert reply.pdu.exception_code == mb.EXC_ILLEGAL_DATA_VALUE


def test_server_device_identification_categories():
    network, _ = make_network()
    server = network.listeners[SERVER]
    basic = server.handle(mb.ModbusFrame(1, 1, mb.DeviceIdRequest(mb.DEVID_BASIC)))
    extended = server.handle(mb.ModbusFrame(2, 1, mb.DeviceIdRequest(mb.DEVID_EXTENDED)))
    assert basic.pdu.objects == DEVICE_IDENTITY_BASIC
    assert extended.pdu.objects == DEVICE_IDENTITY_BASIC + DEVICE_IDENTITY_EXTENDED


def test_server_echoes_threshold_register_write():
    network, plant = make_network()
    server = network.listeners[SERVER]
    reply = server.handle(mb.ModbusFrame(1, 1, mb.WriteSingleRegisterRequest(0, 950)))
    assert isinstance(reply.pdu, mb.WriteSingleRegisterResponse)
    assert plant.config.level_max == 950.0


# ------------------------------------------------------------------- poller


def test_hmi_poller_keeps_one_connection_and_exact_cadence():
    network, plant = make_network()
    cycles = []
    network.clock.spawn(
        1.0,
        hmi_poller(network, CLIENT, SERVER, period=1.0,
                   on_cycle=lambda ts, frames: cycles.append((ts, frames))),
    )
    network.clock.run(until=61.0)
    events = network.tap.events()
    assert sum(1 for e in events if e.kind is PacketKind.SYN) == 1
    requests = [e for e in events if e.kind is PacketKind.DATA and e.src == CLIENT]
    # three reads per cycle, first request of each cycle exactly a period apart
    starts = [e.ts for e in requests[::3]]
    assert len(starts) >= 59
    spacing = {round(b - a, 9) for a, b in zip(starts, starts[1:])}
    assert spacing == {1.0}
    # the cycle launched right at the horizon may not have reported yet
    assert len(starts) - 1 <= len(cycles) <= len(starts)
    # each cycle carries sensor bits, actuator bits, and the level register
    _, frames = cycles[0]
    assert isinstance(frames[0].pdu, mb.ReadBitsResponse)
    assert isinstance(frames[2].pdu, mb.ReadRegistersResponse)
