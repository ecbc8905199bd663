import pytest

from procfock.protocols.counting import CountMode, OperationTrace, OpKind, TraceEntry, count_operations, kind_from_occupation


def _trace(*entries):
    return OperationTrace("t", tuple(entries))


def test_flag_counts_particle_entries_only():
    t = _trace(
        TraceEntry("L", "t_i", OpKind.PREPARATION),
        TraceEntry("A", "t_2", OpKind.PARTICLE, agent="Alice", operation="A"),
        TraceEntry("B", "t_2", OpKind.PARTICLE, agent="Bob", operation="B"),
        TraceEntry("A'", "t_f", OpKind.VACUUM, agent="Alice", operation="A'"),
    )
    assert count_operations(t, CountMode.FLAG) == 2
    assert count_operations(t, "vacuum_inclusive") == 3


def test_shared_operation_counts_once():
    t = _trace(
        TraceEntry("A", "t_2", OpKind.PARTICLE, agent="Alice", operation="U"),
        TraceEntry("A'", "t_3", OpKind.PARTICLE, agent="Alice", operation="U"),
    )
    assert count_operations(t, "flag") == 1
    assert count_operations(t, "vacuum_inclusive") == 2


def test_one_entry_per_gate():
    e = TraceEntry("A", "t_2", OpKind.PARTICLE, agent="Alice")
    with pytest.raises(ValueError):
        _trace(e, e)


def test_unknown_mode():
    with pytest.raises(ValueError):
        count_operations(_trace(), "everything")


def test_kind_threshold():
    assert kind_from_occupation(0.0) is OpKind.VACUUM
    assert kind_from_occupation(1e-13) is OpKind.VACUUM
    assert kind_from_occupation(0.5) is OpKind.PARTICLE
