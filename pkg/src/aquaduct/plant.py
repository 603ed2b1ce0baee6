"""Water-storage-tank process simulation.

Discrete-time model of the tank, its level sensors, pumps and valve,
with the two-threshold on/off control scan a PLC would run: fill until
the maximum level sensor trips, then drain until the minimum level
sensor trips, and start over.  The process state is exposed through a
fixed Modbus point map (coils for actuators, discrete inputs for
sensors and buttons, registers for the scaled level and thresholds).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .modbus import DataTable, resolve_reference

LEVEL_SCALE = 1000  # level register reports 0..1000 proportional to 0..capacity


class Phase(Enum):
    IDLE = "idle"
    FILLING = "filling"
    DRAINING = "draining"


@dataclass(frozen=True)
class PlantConfig:
    capacity: float = 1000.0  # liters
    level_max: float = 900.0  # LS1 threshold
    level_min: float = 100.0  # LS2 threshold
    fill_rate: float = 10.0  # liters per tick
    drain_rate: float = 8.0  # liters per tick
    initial_level: float = 500.0

    def validate(self):
        if not 0 <= self.level_min < self.level_max <= self.capacity:
            raise ValueError("thresholds must satisfy 0 <= min < max <= capacity")
        if self.fill_rate <= 0 or self.drain_rate <= 0:
            raise ValueError("flow rates must be positive")
        if not 0 <= self.initial_level <= self.capacity:
            raise ValueError("initial level must lie within the tank")


@dataclass(frozen=True)
class PlantState:
    level: float
    running: bool = False
    light: bool = False
    ls1: bool = False  # maximum level sensor
    ls2: bool = False  # minimum level sensor
    pump1: bool = False  # fills the tank
    pump2: bool = False  # drains the tank
    valve: bool = False
    phase: Phase = Phase.IDLE
    tick: int = 0


def initial_state(config: PlantConfig) -> PlantState:
    config.validate()
    return PlantState(
        level=config.initial_level,
        ls1=config.initial_level >= config.level_max,
        ls2=config.initial_level <= config.level_min,
    )


def step(state: PlantState, config: PlantConfig) -> PlantState:
    """Advance one tick: physics first, then the control scan.

    Sense-then-actuate within a tick means the level can overshoot a
    threshold by at most one tick's flow before the phase flips.
    """
    if not state.running:
        return replace(state, tick=state.tick + 1)

    level = state.level
    if state.pump1:
        level += config.fill_rate
    if state.pump2:
        level -= config.drain_rate
    level = min(max(level, 0.0), config.capacity)

    phase, pump1, pump2, valve = state.phase, state.pump1, state.pump2, state.valve
    if level >= config.level_max:
        phase, pump1, pump2, valve = Phase.DRAINING, False, True, True
    elif level <= config.level_min:
        phase, pump1, pump2, valve = Phase.FILLING, True, False, False

    return PlantState(
        level=level,
        running=True,
        light=True,
        ls1=level >= config.level_max,
        ls2=level <= config.level_min,
        pump1=pump1,
        pump2=pump2,
        valve=valve,
        phase=phase,
        tick=state.tick + 1,
    )


def press_on(state: PlantState) -> PlantState:
    """On-button pulse: start the level control process in the filling phase."""
    return replace(
        state, running=True, light=True, phase=Phase.FILLING, pump1=True, pump2=False, valve=False
    )


def press_off(state: PlantState) -> PlantState:
    """Off-button pulse: stop the process and de-energize every actuator."""
    return replace(
        state, running=False, light=False, phase=Phase.IDLE, pump1=False, pump2=False, valve=False
    )


def cycle_period_ticks(config: PlantConfig) -> int:
    """Closed-form fill+drain cycle length for levels strictly inside thresholds."""
    span = config.level_max - config.level_min
    return math.ceil(span / config.fill_rate) + math.ceil(span / config.drain_rate)


# ------------------------------------------------------------------ point map

# (reference, point name, writable through Modbus)
POINT_MAP = (
    (1, "pump1", False),
    (2, "pump2", False),
    (3, "valve", False),
    (4, "light", False),
    (10001, "ls1", False),
    (10002, "ls2", False),
    (10003, "on_button", False),
    (10004, "off_button", False),
    (30001, "level_scaled", False),
    (40001, "level_max_scaled", True),
    (40002, "level_min_scaled", True),
)


class UnmappedAddressError(LookupError):
    """Address range not covered by the point map (Modbus exception code 2)."""


class ReadOnlyPointError(PermissionError):
    """Write to a PLC-driven output without the maintenance override."""


def _scaled(value: float, capacity: float) -> int:
    return round(value / capacity * LEVEL_SCALE)


class Plant:
    """Single-owner stepper around the tank model.

    Exactly one context advances the simulation via :meth:`tick`;
    button pulses go through a command queue and are applied at the
    start of the next tick.  ``state`` snapshots are immutable and safe
    to share.
    """

    def __init__(self, config: PlantConfig | None = None, maintenance_override: bool = False):
        self.config = config or PlantConfig()
        self.state = initial_state(self.config)
        self.maintenance_override = maintenance_override
        self._pending = []

    def command(self, name: str):
        if name not in ("on", "off"):
            raise ValueError(f"unknown command {name!r}")
        self._pending.append(name)

    def tick(self):
        for name in self._pending:
            self.state = press_on(self.state) if name == "on" else press_off(self.state)
        self._pending.clear()
        self.state = step(self.state, self.config)

    # -- Modbus-visible surface ------------------------------------------

    def _coils(self):
        s = self.state
        return (s.pump1, s.pump2, s.valve, s.light)

    def _discrete_inputs(self):
        # buttons read back as momentary contacts: always open
        s = self.state
        return (s.ls1, s.ls2, False, False)

    def read_point(self, table: DataTable, offset: int, count: int = 1):
        """Current values of ``count`` consecutive points in one data table."""
        if table is DataTable.COILS:
            points = self._coils()
        elif table is DataTable.DISCRETE_INPUTS:
            points = self._discrete_inputs()
        elif table is DataTable.INPUT_REGISTERS:
            points = (_scaled(self.state.level, self.config.capacity),)
        elif table is DataTable.HOLDING_REGISTERS:
            points = (
                _scaled(self.config.level_max, self.config.capacity),
                _scaled(self.config.level_min, self.config.capacity),
            )
        else:
            raise UnmappedAddressError(f"no points in table {table}")
        if offset < 0 or count < 1 or offset + count > len(points):
            raise UnmappedAddressError(f"{table.value} offsets {offset}..{offset + count - 1} unmapped")
        return list(points[offset : offset + count])

    def write_point(self, table: DataTable, offset: int, value):
        """Write one point; only the threshold holding registers are writable.

        Coils are outputs of the control logic, so direct writes are
        rejected unless the maintenance override is set.
        """
        if table is DataTable.HOLDING_REGISTERS:
            if offset not in (0, 1):
                raise UnmappedAddressError(f"holding register offset {offset} unmapped")
            liters = int(value) / LEVEL_SCALE * self.config.capacity
            if offset == 0:
                candidate = replace(self.config, level_max=liters)
            else:
                candidate = replace(self.config, level_min=liters)
            candidate.validate()
            self.config = candidate
            return
        if table is DataTable.COILS:
            if not 0 <= offset < 4:
                raise UnmappedAddressError(f"coil offset {offset} unmapped")
            if not self.maintenance_override:
                raise ReadOnlyPointError("coils are PLC outputs; maintenance override required")
            name = ("pump1", "pump2", "valve", "light")[offset]
            self.state = replace(self.state, **{name: bool(value)})
            return
        raise UnmappedAddressError(f"table {table.value} is not writable")
