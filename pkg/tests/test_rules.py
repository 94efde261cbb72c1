import numpy as np
import pytest

from helpers import rule_oracle_error
from xxladder.rules import (
    CELL_GH,
    CELL_TYPES,
    DegenerateTargetError,
    RuleDerivationError,
    derive_j_rule,
    derive_p_rule,
    local_l0,
    reference_row_regression,
    select_target_state,
    snap_coefficient,
)


def test_cell_templates():
    assert set(CELL_TYPES) == {-1, 0, 1, 2, 3, 4}
    assert CELL_GH[-1] == (0.0, 0.0)
    assert CELL_GH[2] == (1.0, 1.0)


def test_reference_rows(rules):
    for label, ok, detail in reference_row_regression(rules):
        assert ok, f"{label}: {detail}"


def test_table_covers_every_context(rules):
    live = [t for t in CELL_TYPES if t >= 0]
    n_j = len(live) ** 3 * 2
    n_p = len(live) ** 2 * 2
    j_err = sum(1 for k in rules.errors if len(k) == 4)
    p_err = sum(1 for k in rules.errors if len(k) == 3)
    assert len(rules.j_rules) + j_err == n_j
    assert len(rules.p_rules) + p_err == n_p


def test_all_rules_are_clean(rules):
    for rule in list(rules.j_rules.values()) + list(rules.p_rules.values()):
        assert rule.probe_residual < 1e-8
        assert rule.snapped, f"{rule.kind}{rule.context}/{rule.branch}"


def test_disconnected_neighbor_maps_to_type_zero(rules):
    for branch in ("min", "max"):
        assert rules.j_rule(-1, 0, -1, branch) is rules.j_rules[(0, 0, 0, branch)]
        assert rules.p_rule(-1, 2, branch) is rules.p_rules[(0, 2, branch)]


def test_cannot_decimate_disconnected_cell():
    with pytest.raises(RuleDerivationError):
        derive_j_rule(0, -1, 0, "min")


def test_unknown_type_rejected():
    with pytest.raises(ValueError):
        derive_j_rule(0, 7, 0, "min")
    with pytest.raises(ValueError):
        derive_p_rule(5, 0, "max")


def test_select_target_state_branches():
    l0 = local_l0("p", strength=1.0)
    lam_min, _ = select_target_state(l0, "min")
    lam_max, _ = select_target_state(l0, "max")
    assert lam_min.real < lam_max.real
    with pytest.raises(ValueError):
        select_target_state(l0, "middle")


def test_degenerate_targets_are_refused():
    # a Hermitian type-2 cell has a doubly degenerate extremal level
    # combination in some contexts; the table records those as errors
    # rather than silently projecting.  Verify the error type directly
    # on a degenerate operator.
    op = np.diag([1.0, 1.0, 0.0, -1.0]).astype(complex)
    with pytest.raises(DegenerateTargetError):
        select_target_state(op, "max")


def test_snap_coefficient():
    val, ok = snap_coefficient(0.3535533905932738 + 0j)  # 1/(2 sqrt 2)
    assert ok and val == pytest.approx(1.0 / (2.0 * np.sqrt(2.0)))
    val, ok = snap_coefficient(0.123456789 + 0j)
    assert not ok and val == pytest.approx(0.123456789)


@pytest.mark.parametrize("kind,context,branch", [
    ("J", (0, 0, 0), "min"),
    ("J", (2, 2, 2), "max"),
    ("J", (0, 1, 2), "max"),
    ("p", (0, 0), "min"),
    ("p", (2, 2), "max"),
])
def test_second_order_scaling_spot_checks(rules, kind, context, branch):
    rule = (rules.j_rule(*context, branch) if kind == "J"
            else rules.p_rule(*context, branch))
    e1 = rule_oracle_error(rule, 0.05)
    e2 = rule_oracle_error(rule, 0.025)
    assert e2 < 1e-12 or e1 / e2 >= 7.0


def test_zeno_cascade_cannot_recouple(rules):
    # the default vertical-bond branch keeps the maximally mixed state;
    # two type-0 neighbors then merge into a Hermitian type-1 cell,
    # which is itself dark on both sides, so repeated vertical-bond
    # decimations can only darken the chain further
    assert rules.p_rule(0, 0, "max").new_type == 1
    for other in (0, 1, 2, 3, 4):
        assert rules.p_rule(1, other, "max").new_type == -1
        assert rules.p_rule(other, 1, "max").new_type == -1


def test_dark_neighbors_produce_no_coupling(rules):
    # no bilinear coupling passes through a dark cell next to the
    # maximally mixed vertical-bond target; the dark set is orientation
    # dependent because the diagonal coupling conjugates across rails:
    # types {1, 4} are dark on the left, types {1, 3} on the right
    for other in (0, 1, 2, 3, 4):
        for dark in (1, 4):
            assert rules.p_rule(dark, other, "max").new_type == -1
        for dark in (1, 3):
            assert rules.p_rule(other, dark, "max").new_type == -1
