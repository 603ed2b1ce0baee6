import pytest

from aquaduct.modbus import DataTable
from aquaduct.plant import (
    LEVEL_SCALE,
    Phase,
    Plant,
    PlantConfig,
    PlantState,
    ReadOnlyPointError,
    UnmappedAddressError,
    cycle_period_ticks,
    initial_state,
    press_off,
    press_on,
    step,
)

CFG = PlantConfig()


def run_ticks(state, config, n):
    for _ in range(n):
        state = step(state, config)
    return state


def test_idle_state_is_fixed_point():
    state = initial_state(CFG)
    after = run_ticks(state, CFG, 10)
    assert after.level == state.level
    assert not (after.pump1 or after.pump2 or after.valve or after.light)
    assert after.phase is Phase.IDLE


def test_filling_flips_to_draining_at_max():
    state = PlantState(
        level=900.0, running=True, light=True, pump1=True, phase=Phase.FILLING
    )
    after = step(state, CFG)
    assert after.phase is Phase.DRAINING
    assert (after.pump1, after.pump2, after.valve) == (False, True, True)


def test_draining_flips_to_filling_at_min():
    state = PlantState(
        level=100.0, running=True, light=True, pump2=True, valve=True, phase=Phase.DRAINING
    )
    after = step(state, CFG)
    assert after.phase is Phase.FILLING
    assert (after.pump1, after.pump2, after.valve) == (True, False, False)


def test_two_step_hand_simulation_reaches_threshold():
    state = PlantState(
        level=880.0, running=True, light=True, pump1=True, phase=Phase.FILLING
    )
    state = step(state, CFG)
    assert (state.level, state.phase) == (890.0, Phase.FILLING)
    state = step(state, CFG)
    assert (state.level, state.phase) == (900.0, Phase.DRAINING)


def test_buttons():
    state = press_on(initial_state(CFG))
    assert state.running and state.light and state.phase is Phase.FILLING
    state = press_off(state)
    assert not state.running
    assert not (state.pump1 or state.pump2 or state.valve or state.light)


def check_invariants(state, config):
    assert 0 <= state.level <= config.capacity
    assert not (state.pump1 and state.pump2)
    if not state.running:
        assert not (state.pump1 or state.pump2 or state.valve)
        assert state.phase is Phase.IDLE
    else:
        assert state.light
        assert (state.phase is Phase.DRAINING) == state.valve == state.pump2


@pytest.mark.parametrize(
    "config",
    [
        CFG,
        PlantConfig(capacity=500, level_max=450, level_min=50, fill_rate=7, drain_rate=13,
                    initial_level=449),
        PlantConfig(capacity=100, level_max=99, level_min=1, fill_rate=1, drain_rate=1,
                    initial_level=0),
    ],
)
def test_long_run_invariants_and_alternation(config):
    state = press_on(initial_state(config))
    phases = []
    lo = min(config.level_min, config.initial_level) - config.drain_rate
    hi = config.level_max + config.fill_rate
    for _ in range(20_000):
        state = step(state, config)
        check_invariants(state, config)
        assert lo <= state.level <= hi
        if not phases or phases[-1] is not state.phase:
            phases.append(state.phase)
    assert all(a is not b for a, b in zip(phases, phases[1:]))
    assert set(phases[1:]) <= {Phase.FILLING, Phase.DRAINING}


def test_cycle_period_matches_closed_form():
    assert cycle_period_ticks(CFG) == 80 + 100
    state = PlantState(level=CFG.level_max, running=True, light=True, pump2=True, valve=True,
                      ls1=True, phase=Phase.DRAINING)
    # count ticks until the state returns to the same (level, phase) point
    start_level = state.level
    period = 0
    while True:
        state = step(state, CFG)
        period += 1
        if state.phase is Phase.DRAINING and state.level == start_level and period > 1:
            break
    assert period == cycle_period_ticks(CFG)


def test_step_is_deterministic():
    state = press_on(initial_state(CFG))
    assert run_ticks(state, CFG, 777) == run_ticks(state, CFG, 777)


# --------------------------------------------------------------- point map io


def make_draining_plant():
    plant = Plant()
    plant.command("on")
    while plant.state.phase is not Phase.DRAINING:
        plant.tick()
    return plant


def test_read_coils_while_draining():
    plant = make_draining_plant()
    assert plant.read_point(DataTable.COILS, 0, 4) == [False, True, True, True]


def test_level_register_midpoint_scaling():
    plant = Plant()
    plant.state = initial_state(plant.config)  # level = capacity / 2
    assert plant.read_point(DataTable.INPUT_REGISTERS, 0, 1) == [LEVEL_SCALE // 2]


def test_read_unmapped_offset():
    plant = Plant()
    with pytest.raises(UnmappedAddressError):
        plant.read_point(DataTable.COILS, 7, 1)
    with pytest.raises(UnmappedAddressError):
        plant.read_point(DataTable.INPUT_REGISTERS, 0, 2)


def test_threshold_registers_writable():
    plant = Plant()
    plant.write_point(DataTable.HOLDING_REGISTERS, 0, 950)
    assert plant.config.level_max == 950.0
    assert plant.read_point(DataTable.HOLDING_REGISTERS, 0, 2) == [950, 100]


def test_coil_write_requires_maintenance_override():
    plant = Plant()
    with pytest.raises(ReadOnlyPointError):
        plant.write_point(DataTable.COILS, 0, True)
    plant.maintenance_override = True
    plant.write_point(DataTable.COILS, 0, True)
    assert plant.state.pump1


def test_command_queue_applies_on_next_tick():
    plant = Plant()
    plant.command("on")
    assert not plant.state.running
    plant.tick()
    assert plant.state.running and plant.state.light
    plant.command("off")
    plant.tick()
    assert not plant.state.running
