import pytest
from hypothesis import given
from hypothesis import strategies as st

from robodialog.levels import (
    DialogVariant,
    ExplanationLevel,
    Intent,
    JustificationLevel,
    TableConfigError,
    TransitionTable,
    VerbosityLevel,
    default_transition_table,
    loe_components,
    loe_from_components,
    next_level,
    reachable_levels,
    tables_from_records,
    validate_table,
)

L = ExplanationLevel
V = VerbosityLevel
J = JustificationLevel


def test_exactly_four_levels_two_axes_two_variants():
    assert len(ExplanationLevel) == 4
    assert len(VerbosityLevel) == 2
    assert len(JustificationLevel) == 2
    assert len(DialogVariant) == 2


@pytest.mark.parametrize("level, pair", [
    (L.LOW, (V.LOW, J.LOW)),
    (L.MEDIUM1, (V.HIGH, J.LOW)),
    (L.MEDIUM2, (V.LOW, J.HIGH)),
    (L.HIGH, (V.HIGH, J.HIGH)),
])
def test_level_components(level, pair):
    assert loe_components(level) == pair
    assert loe_from_components(*pair) is level


def test_bijection_round_trips_exhaustive():
    for level in ExplanationLevel:
        assert loe_from_components(*loe_components(level)) is level
    for v in VerbosityLevel:
        for j in JustificationLevel:
            assert loe_components(loe_from_components(v, j)) == (v, j)


@pytest.mark.parametrize("variant, current, intent, expected", [
    (DialogVariant.AD1, L.LOW, Intent.WHAT, L.MEDIUM1),
    (DialogVariant.AD1, L.LOW, Intent.WHY, L.MEDIUM2),
    (DialogVariant.AD1, L.MEDIUM1, Intent.WHAT, L.MEDIUM1),
    (DialogVariant.AD1, L.MEDIUM1, Intent.WHY, L.MEDIUM2),
    (DialogVariant.AD1, L.MEDIUM2, Intent.WHAT, L.MEDIUM2),
    (DialogVariant.AD1, L.MEDIUM2, Intent.WHY, L.MEDIUM2),
    (DialogVariant.AD1, L.HIGH, Intent.WHAT, L.HIGH),
    (DialogVariant.AD1, L.HIGH, Intent.WHY, L.HIGH),
    (DialogVariant.AD2, L.LOW, Intent.WHAT, L.MEDIUM1),
    (DialogVariant.AD2, L.LOW, Intent.WHY, L.MEDIUM2),
    (DialogVariant.AD2, L.MEDIUM1, Intent.WHAT, L.MEDIUM1),
    (DialogVariant.AD2, L.MEDIUM1, Intent.WHY, L.HIGH),
    (DialogVariant.AD2, L.MEDIUM2, Intent.WHAT, L.HIGH),
    (DialogVariant.AD2, L.MEDIUM2, Intent.WHY, L.MEDIUM2),
    (DialogVariant.AD2, L.HIGH, Intent.WHAT, L.HIGH),
    (DialogVariant.AD2, L.HIGH, Intent.WHY, L.HIGH),
])
def test_default_table_cells(variant, current, intent, expected):
    table = default_transition_table(variant)
    assert next_level(table, current, intent) is expected


@given(
    variant=st.sampled_from(DialogVariant),
    level=st.sampled_from(ExplanationLevel),
    intent=st.sampled_from([Intent.CONTINUE, Intent.OUT_OF_SCOPE]),
)
def test_non_question_intents_never_move_the_level(variant, level, intent):
    table = default_transition_table(variant)
    assert next_level(table, level, intent) is level


def test_ad1_never_reaches_high_from_low():
    table = default_transition_table(DialogVariant.AD1)
    reached = reachable_levels(table)
    assert L.HIGH not in reached
    assert reached == {L.LOW, L.MEDIUM1, L.MEDIUM2}


def test_ad1_cap_exhaustive_over_intent_sequences():
    # Breadth-first over every intent sequence up to the state-space bound.
    table = default_transition_table(DialogVariant.AD1)
    states = {L.LOW}
    for _ in range(8):
        states |= {next_level(table, s, i) for s in states for i in Intent}
    assert L.HIGH not in states


@pytest.mark.parametrize("sequence", [[Intent.WHAT, Intent.WHY], [Intent.WHY, Intent.WHAT]])
def test_ad2_reaches_high_by_either_question_order(sequence):
    table = default_transition_table(DialogVariant.AD2)
    level = L.LOW
    for intent in sequence:
        level = next_level(table, level, intent)
    assert level is L.HIGH


def test_why_never_lowers_justification_in_default_tables():
    for variant in DialogVariant:
        table = default_transition_table(variant)
        for level in ExplanationLevel:
            before = loe_components(level)[1]
            after = loe_components(next_level(table, level, Intent.WHY))[1]
            assert not (before is J.HIGH and after is J.LOW)


def test_validate_accepts_default_tables():
    for variant in DialogVariant:
        result = validate_table(default_transition_table(variant))
        assert result.ok, result.error


def test_validate_rejects_high_reachable_in_ad1():
    entries = dict(default_transition_table(DialogVariant.AD1).entries)
    entries[(L.MEDIUM1, Intent.WHY)] = L.HIGH
    result = validate_table(TransitionTable(DialogVariant.AD1, entries))
    assert not result.ok
    assert "High" in result.error
    assert result.entry == (L.MEDIUM1, Intent.WHY)


def test_validate_rejects_missing_cell():
    entries = dict(default_transition_table(DialogVariant.AD2).entries)
    del entries[(L.MEDIUM2, Intent.WHAT)]
    result = validate_table(TransitionTable(DialogVariant.AD2, entries))
    assert not result.ok
    assert "total" in result.error
    assert result.entry == (L.MEDIUM2, Intent.WHAT)


def test_validate_rejects_non_question_key():
    entries = dict(default_transition_table(DialogVariant.AD2).entries)
    entries[(L.LOW, Intent.CONTINUE)] = L.LOW
    result = validate_table(TransitionTable(DialogVariant.AD2, entries))
    assert not result.ok


def test_tables_round_trip_through_records():
    for variant in DialogVariant:
        table = default_transition_table(variant)
        rebuilt = tables_from_records(table.to_records())[variant]
        assert rebuilt.entries == dict(table.entries)


def test_records_loader_accepts_exact_spellings():
    records = [
        {"variant": "AD2", "from": lv, "intent": it, "to": to}
        for (lv, it, to) in [
            ("Low", "What", "Medium1"), ("Low", "Why", "Medium2"),
            ("Medium1", "What", "Medium1"), ("Medium1", "Why", "High"),
            ("Medium2", "What", "High"), ("Medium2", "Why", "Medium2"),
            ("High", "What", "High"), ("High", "Why", "High"),
        ]
    ]
    table = tables_from_records(records)[DialogVariant.AD2]
    assert next_level(table, L.MEDIUM1, Intent.WHY) is L.HIGH


def test_records_loader_rejects_duplicates_and_partial_tables():
    record = {"variant": "AD1", "from": "Low", "intent": "What", "to": "Medium1"}
    with pytest.raises(TableConfigError, match="duplicate"):
        tables_from_records([record, record])
    with pytest.raises(TableConfigError, match="total"):
        tables_from_records([record])
    with pytest.raises(TableConfigError):
        tables_from_records([{**record, "intent": "Continue"}])
