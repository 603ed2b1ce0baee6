"""Modbus/TCP application data unit codec.

Bit-exact encoder/decoder for the MBAP-framed PDUs the testbed uses:
read coils / discrete inputs / holding registers / input registers,
write single coil / register, and encapsulated-interface device
identification (MEI type 0x0E).  All multi-byte wire fields are
big-endian.  Malformed input raises ``ModbusDecodeError`` subclasses,
never anything else.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

MBAP_HEADER_LEN = 7
MODBUS_PORT = 502

# function codes
READ_COILS = 0x01
READ_DISCRETE_INPUTS = 0x02
READ_HOLDING_REGISTERS = 0x03
READ_INPUT_REGISTERS = 0x04
WRITE_SINGLE_COIL = 0x05
WRITE_SINGLE_REGISTER = 0x06
ENCAPSULATED_INTERFACE = 0x2B
MEI_READ_DEVICE_ID = 0x0E

MAX_READ_BITS = 2000
MAX_READ_REGISTERS = 125

COIL_ON = 0xFF00
COIL_OFF = 0x0000

# exception codes
EXC_ILLEGAL_FUNCTION = 0x01
EXC_ILLEGAL_DATA_ADDRESS = 0x02
EXC_ILLEGAL_DATA_VALUE = 0x03
EXC_SERVER_FAILURE = 0x04

# device identification read codes
DEVID_BASIC = 0x01
DEVID_EXTENDED = 0x03


class ModbusEncodeError(ValueError):
    """Frame cannot be encoded (quantity out of range, body too long...)."""


class ModbusDecodeError(ValueError):
    """Base class for every decoder failure; decoding never raises anything else."""


class TruncatedHeaderError(ModbusDecodeError):
    pass


class LengthMismatchError(ModbusDecodeError):
    pass


class ProtocolIdError(ModbusDecodeError):
    pass


class UnknownFunctionCodeError(ModbusDecodeError):
    pass


class MalformedPduError(ModbusDecodeError):
    pass


# ---------------------------------------------------------------- PDU variants


@dataclass(frozen=True)
class ReadBitsRequest:
    """Read coils (fc 0x01) or discrete inputs (fc 0x02)."""

    function_code: int
    start: int
    quantity: int


@dataclass(frozen=True)
class ReadRegistersRequest:
    """Read holding (fc 0x03) or input (fc 0x04) registers."""

    function_code: int
    start: int
    quantity: int


@dataclass(frozen=True)
class WriteSingleCoilRequest:
    address: int
    on: bool
    function_code: int = WRITE_SINGLE_COIL


@dataclass(frozen=True)
class WriteSingleRegisterRequest:
    address: int
    value: int
    function_code: int = WRITE_SINGLE_REGISTER


@dataclass(frozen=True)
class DeviceIdRequest:
    read_code: int
    object_id: int = 0x00
    function_code: int = ENCAPSULATED_INTERFACE


@dataclass(frozen=True)
class ReadBitsResponse:
    """Bit values packed LSB-first on the wire.

    The wire carries whole bytes, so ``bits`` is normalised to a multiple
    of eight (padded with False); this keeps encode/decode a bijection.
    """

    function_code: int
    bits: tuple

    def __post_init__(self):
        pad = (-len(self.bits)) % 8
        if pad:
            object.__setattr__(self, "bits", tuple(self.bits) + (False,) * pad)
        else:
            object.__setattr__(self, "bits", tuple(bool(b) for b in self.bits))


@dataclass(frozen=True)
class ReadRegistersResponse:
    function_code: int
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))


@dataclass(frozen=True)
class WriteSingleCoilResponse:
    address: int
    on: bool
    function_code: int = WRITE_SINGLE_COIL


@dataclass(frozen=True)
class WriteSingleRegisterResponse:
    address: int
    value: int
    function_code: int = WRITE_SINGLE_REGISTER


@dataclass(frozen=True)
class DeviceIdResponse:
    read_code: int
    objects: tuple  # ((object_id, str), ...) ordered as on the wire
    conformity: int = 0x83
    more_follows: int = 0x00
    next_object_id: int = 0x00
    function_code: int = ENCAPSULATED_INTERFACE


@dataclass(frozen=True)
class ExceptionResponse:
    function_code: int  # original fc + 0x80
    exception_code: int


Pdu = Union[
    ReadBitsRequest,
    ReadRegistersRequest,
    WriteSingleCoilRequest,
    WriteSingleRegisterRequest,
    DeviceIdRequest,
    ReadBitsResponse,
    ReadRegistersResponse,
    WriteSingleCoilResponse,
    WriteSingleRegisterResponse,
    DeviceIdResponse,
    ExceptionResponse,
]

REQUEST_TYPES = (
    ReadBitsRequest,
    ReadRegistersRequest,
    WriteSingleCoilRequest,
    WriteSingleRegisterRequest,
    DeviceIdRequest,
)


@dataclass(frozen=True)
class ModbusFrame:
    transaction_id: int
    unit_id: int
    pdu: Pdu
    protocol_id: int = 0


# ------------------------------------------------------------------- encoding


def _check_u16(value, what):
    if not 0 <= value <= 0xFFFF:
        raise ModbusEncodeError(f"{what} {value} outside 0..65535")


def encode_pdu(pdu: Pdu) -> bytes:
    if isinstance(pdu, ReadBitsRequest):
        if pdu.function_code not in (READ_COILS, READ_DISCRETE_INPUTS):
            raise ModbusEncodeError(f"bad bit-read function code {pdu.function_code}")
        if not 1 <= pdu.quantity <= MAX_READ_BITS:
            raise ModbusEncodeError(f"bit quantity {pdu.quantity} outside 1..{MAX_READ_BITS}")
        _check_u16(pdu.start, "start address")
        return struct.pack(">BHH", pdu.function_code, pdu.start, pdu.quantity)
    if isinstance(pdu, ReadRegistersRequest):
        if pdu.function_code not in (READ_HOLDING_REGISTERS, READ_INPUT_REGISTERS):
            raise ModbusEncodeError(f"bad register-read function code {pdu.function_code}")
        if not 1 <= pdu.quantity <= MAX_READ_REGISTERS:
            raise ModbusEncodeError(
                f"register quantity {pdu.quantity} outside 1..{MAX_READ_REGISTERS}"
            )
        _check_u16(pdu.start, "start address")
        return struct.pack(">BHH", pdu.function_code, pdu.start, pdu.quantity)
    if isinstance(pdu, (WriteSingleCoilRequest, WriteSingleCoilResponse)):
        _check_u16(pdu.address, "coil address")
        return struct.pack(
            ">BHH", WRITE_SINGLE_COIL, pdu.address, COIL_ON if pdu.on else COIL_OFF
        )
    if isinstance(pdu, (WriteSingleRegisterRequest, WriteSingleRegisterResponse)):
        _check_u16(pdu.address, "register address")
        _check_u16(pdu.value, "register value")
        return struct.pack(">BHH", WRITE_SINGLE_REGISTER, pdu.address, pdu.value)
    if isinstance(pdu, DeviceIdRequest):
        return struct.pack(
            ">BBBB", ENCAPSULATED_INTERFACE, MEI_READ_DEVICE_ID, pdu.read_code, pdu.object_id
        )
    if isinstance(pdu, ReadBitsResponse):
        nbytes = len(pdu.bits) // 8
        if nbytes > 0xFF:
            raise ModbusEncodeError("too many bits for one response")
        packed = bytearray(nbytes)
        for i, bit in enumerate(pdu.bits):
            if bit:
                packed[i // 8] |= 1 << (i % 8)
        return struct.pack(">BB", pdu.function_code, nbytes) + bytes(packed)
    if isinstance(pdu, ReadRegistersResponse):
        if len(pdu.values) > MAX_READ_REGISTERS:
            raise ModbusEncodeError("too many registers for one response")
        for v in pdu.values:
            _check_u16(v, "register value")
        return (
            struct.pack(">BB", pdu.function_code, 2 * len(pdu.values))
            + b"".join(struct.pack(">H", v) for v in pdu.values)
        )
    if isinstance(pdu, DeviceIdResponse):
        out = struct.pack(
            ">BBBBBBB",
            ENCAPSULATED_INTERFACE,
            MEI_READ_DEVICE_ID,
            pdu.read_code,
            pdu.conformity,
            pdu.more_follows,
            pdu.next_object_id,
            len(pdu.objects),
        )
        for obj_id, text in pdu.objects:
            data = text.encode("latin-1")
            if len(data) > 0xFF:
                raise ModbusEncodeError("device identification object too long")
            out += struct.pack(">BB", obj_id, len(data)) + data
        return out
    if isinstance(pdu, ExceptionResponse):
        if not pdu.function_code & 0x80:
            raise ModbusEncodeError("exception function code must have bit 0x80 set")
        return struct.pack(">BB", pdu.function_code, pdu.exception_code)
    raise ModbusEncodeError(f"unsupported PDU type {type(pdu).__name__}")


def encode_frame(frame: ModbusFrame) -> bytes:
    """Serialize a frame as the 7-byte MBAP header followed by the PDU."""
    if frame.protocol_id != 0:
        raise ModbusEncodeError("protocol id must be 0")
    _check_u16(frame.transaction_id, "transaction id")
    if not 0 <= frame.unit_id <= 0xFF:
        raise ModbusEncodeError(f"unit id {frame.unit_id} outside 0..255")
    pdu_bytes = encode_pdu(frame.pdu)
    length = len(pdu_bytes) + 1  # + unit id
    if length > 0xFFFF:
        raise ModbusEncodeError("PDU too long for MBAP length field")
    header = struct.pack(">HHHB", frame.transaction_id, 0, length, frame.unit_id)
    return header + pdu_bytes


# ------------------------------------------------------------------- decoding


def _decode_request_pdu(body: bytes) -> Pdu:
    fc = body[0]
    if fc in (READ_COILS, READ_DISCRETE_INPUTS, READ_HOLDING_REGISTERS, READ_INPUT_REGISTERS):
        if len(body) != 5:
            raise MalformedPduError(f"read request fc={fc:#04x} needs 5 bytes, got {len(body)}")
        _, start, qty = struct.unpack(">BHH", body)
        limit = MAX_READ_BITS if fc in (READ_COILS, READ_DISCRETE_INPUTS) else MAX_READ_REGISTERS
        if not 1 <= qty <= limit:
            raise MalformedPduError(f"read quantity {qty} outside 1..{limit}")
        if fc in (READ_COILS, READ_DISCRETE_INPUTS):
            return ReadBitsRequest(fc, start, qty)
        return ReadRegistersRequest(fc, start, qty)
    if fc == WRITE_SINGLE_COIL:
        if len(body) != 5:
            raise MalformedPduError("write single coil needs 5 bytes")
        _, addr, value = struct.unpack(">BHH", body)
        if value not in (COIL_ON, COIL_OFF):
            raise MalformedPduError(f"coil value {value:#06x} is neither FF00 nor 0000")
        return WriteSingleCoilRequest(addr, value == COIL_ON)
    if fc == WRITE_SINGLE_REGISTER:
        if len(body) != 5:
            raise MalformedPduError("write single register needs 5 bytes")
        _, addr, value = struct.unpack(">BHH", body)
        return WriteSingleRegisterRequest(addr, value)
    if fc == ENCAPSULATED_INTERFACE:
        if len(body) != 4:
            raise MalformedPduError("device identification request needs 4 bytes")
        _, mei, read_code, object_id = struct.unpack(">BBBB", body)
        if mei != MEI_READ_DEVICE_ID:
            raise UnknownFunctionCodeError(f"unsupported MEI type {mei:#04x}")
        return DeviceIdRequest(read_code, object_id)
    raise UnknownFunctionCodeError(f"unknown function code {fc:#04x}")


def _decode_response_pdu(body: bytes) -> Pdu:
    fc = body[0]
    if fc & 0x80:
        if len(body) != 2:
            raise MalformedPduError("exception response needs 2 bytes")
        return ExceptionResponse(fc, body[1])
    if fc in (READ_COILS, READ_DISCRETE_INPUTS):
        if len(body) < 2 or len(body) != 2 + body[1]:
            raise MalformedPduError("bit-read response byte count mismatch")
        bits = []
        for i in range(body[1] * 8):
            bits.append(bool(body[2 + i // 8] >> (i % 8) & 1))
        return ReadBitsResponse(fc, tuple(bits))
    if fc in (READ_HOLDING_REGISTERS, READ_INPUT_REGISTERS):
        if len(body) < 2 or len(body) != 2 + body[1] or body[1] % 2:
            raise MalformedPduError("register-read response byte count mismatch")
        values = struct.unpack(f">{body[1] // 2}H", body[2:])
        return ReadRegistersResponse(fc, values)
    if fc == WRITE_SINGLE_COIL:
        if len(body) != 5:
            raise MalformedPduError("write single coil echo needs 5 bytes")
        _, addr, value = struct.unpack(">BHH", body)
        if value not in (COIL_ON, COIL_OFF):
            raise MalformedPduError(f"coil value {value:#06x} is neither FF00 nor 0000")
        return WriteSingleCoilResponse(addr, value == COIL_ON)
    if fc == WRITE_SINGLE_REGISTER:
        if len(body) != 5:
            raise MalformedPduError("write single register echo needs 5 bytes")
        _, addr, value = struct.unpack(">BHH", body)
        return WriteSingleRegisterResponse(addr, value)
    if fc == ENCAPSULATED_INTERFACE:
        if len(body) < 7:
            raise MalformedPduError("device identification response too short")
        _, mei, read_code, conformity, more, next_id, count = struct.unpack(">BBBBBBB", body[:7])
        if mei != MEI_READ_DEVICE_ID:
            raise UnknownFunctionCodeError(f"unsupported MEI type {mei:#04x}")
        objects = []
        pos = 7
        for _ in range(count):
            if pos + 2 > len(body):
                raise MalformedPduError("truncated device identification object header")
            obj_id, obj_len = body[pos], body[pos + 1]
            pos += 2
            if pos + obj_len > len(body):
                raise MalformedPduError("truncated device identification object value")
            objects.append((obj_id, body[pos : pos + obj_len].decode("latin-1")))
            pos += obj_len
        if pos != len(body):
            raise MalformedPduError("trailing bytes after device identification objects")
        return DeviceIdResponse(read_code, tuple(objects), conformity, more, next_id)
    raise UnknownFunctionCodeError(f"unknown function code {fc:#04x}")


def decode_frame(data: bytes, role: str = "request") -> ModbusFrame:
    """Parse one MBAP-framed ADU.

    ``role`` selects request or response PDU grammar; function codes
    0x01-0x04 share the same code byte in both directions so the wire
    alone does not disambiguate them.  Raises ``ModbusDecodeError``
    subclasses on any malformed input.
    """
    if role not in ("request", "response"):
        raise ValueError(f"role must be 'request' or 'response', got {role!r}")
    if len(data) < MBAP_HEADER_LEN + 1:
        raise TruncatedHeaderError(f"need at least 8 bytes, got {len(data)}")
    tid, proto, length, uid = struct.unpack(">HHHB", data[:MBAP_HEADER_LEN])
    if proto != 0:
        raise ProtocolIdError(f"protocol id {proto} is not 0")
    if length != len(data) - 6:
        raise LengthMismatchError(f"length field {length} but {len(data) - 6} bytes follow")
    body = data[MBAP_HEADER_LEN:]
    pdu = _decode_request_pdu(body) if role == "request" else _decode_response_pdu(body)
    return ModbusFrame(tid, uid, pdu)


def make_exception(request: Pdu, code: int) -> ExceptionResponse:
    """Build the exception response matching a request PDU."""
    if code not in (
        EXC_ILLEGAL_FUNCTION,
        EXC_ILLEGAL_DATA_ADDRESS,
        EXC_ILLEGAL_DATA_VALUE,
        EXC_SERVER_FAILURE,
    ):
        raise ValueError(f"unsupported exception code {code}")
    return ExceptionResponse(request.function_code + 0x80, code)


# --------------------------------------------------------- reference addresses


class DataTable(Enum):
    COILS = "coils"
    DISCRETE_INPUTS = "discrete_inputs"
    INPUT_REGISTERS = "input_registers"
    HOLDING_REGISTERS = "holding_registers"


_REFERENCE_RANGES = (
    (1, 9999, DataTable.COILS),
    (10001, 19999, DataTable.DISCRETE_INPUTS),
    (30001, 39999, DataTable.INPUT_REGISTERS),
    (40001, 49999, DataTable.HOLDING_REGISTERS),
)


class ReferenceRangeError(ValueError):
    """Reference number falls outside every data reference range."""


@dataclass(frozen=True)
class ReferenceAddress:
    reference: int
    table: DataTable
    offset: int


def resolve_reference(reference: int) -> ReferenceAddress:
    """Map a one-based data reference (e.g. 40001) to (table, zero-based offset)."""
    for lo, hi, table in _REFERENCE_RANGES:
        if lo <= reference <= hi:
            return ReferenceAddress(reference, table, reference % 10000 - 1)
    raise ReferenceRangeError(f"reference {reference} is not in any data reference range")
