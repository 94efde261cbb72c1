import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xxladder.ladder import (
    BranchPolicy,
    DecimationEvent,
    EmptyChainError,
    InitConfig,
    LogValue,
    accumulated_eigenvalue,
    decimate_step,
    final_state_description,
    init_chain,
    replay,
    run,
    strongest_bond,
)

finite_complex = st.complex_numbers(
    min_magnitude=1e-6, max_magnitude=1e6, allow_nan=False,
    allow_infinity=False)


@settings(max_examples=200, deadline=None)
@given(finite_complex, finite_complex)
def test_logvalue_arithmetic_matches_complex(a, b):
    la, lb = LogValue.from_complex(a), LogValue.from_complex(b)
    assert (la * lb).to_complex() == pytest.approx(a * b, rel=1e-12)
    assert (la / lb).to_complex() == pytest.approx(a / b, rel=1e-12)
    s = (la + lb).to_complex()
    assert s == pytest.approx(a + b, rel=1e-9, abs=1e-9 * (abs(a) + abs(b)))


def test_logvalue_zero():
    z = LogValue.zero()
    assert z.is_zero and z.to_complex() == 0.0
    x = LogValue.from_complex(2.0)
    assert (z * x).is_zero
    assert (z + x).to_complex() == pytest.approx(2.0)


def test_logvalue_underflow_survives():
    tiny = LogValue(-100_000.0, 0.5)
    prod = tiny * tiny
    assert prod.log_mag == pytest.approx(-200_000.0)
    assert prod.phase == pytest.approx(1.0)


def test_init_config_validation():
    with pytest.raises(ValueError):
        InitConfig(n=2)
    with pytest.raises(ValueError):
        InitConfig(n=8, family="gaussian")
    with pytest.raises(ValueError):
        InitConfig(n=8, family="explicit", J=(1.0,) * 8, p=None)


def test_init_chain_is_deterministic():
    cfg = InitConfig(n=50, family="exponential", gamma0=3.0)
    a = init_chain(cfg, seed=5)
    b = init_chain(cfg, seed=5)
    c = init_chain(cfg, seed=6)
    assert a.fingerprint() == b.fingerprint()
    assert a.fingerprint() != c.fingerprint()


def test_branch_policy_modes():
    default = BranchPolicy()
    assert default.branch_for(0, "p", None) == "max"
    assert default.branch_for(0, "J", 1) == "max"
    assert default.branch_for(0, "J", 2) == "max"
    assert default.branch_for(0, "J", 0) == "min"
    assert default.branch_for(0, "J", 3) == "min"
    bits = BranchPolicy(mode="bits", bits="01")
    assert bits.branch_for(0, "J", 0) == "min"
    assert bits.branch_for(1, "J", 0) == "max"
    assert bits.branch_for(2, "J", 0) == "min"  # bits repeat
    rnd = BranchPolicy(mode="random", seed=3)
    seq = [rnd.branch_for(k, "p", None) for k in range(40)]
    assert set(seq) == {"min", "max"}
    assert seq == [rnd.branch_for(k, "p", None) for k in range(40)]
    with pytest.raises(ValueError):
        BranchPolicy(mode="coin")


def test_trivial_uniform_cell_arithmetic(rules):
    # strongest cell 1.0 between two 0.5 cells: type-0 chain rule gives
    # amp 1, so the merged cell must be exactly 0.5 * 0.5 / 1.0
    cfg = InitConfig(n=4, family="explicit",
                     J=(0.5, 1.0, 0.5, 1e-9), p=(0.0,) * 4)
    chain = init_chain(cfg, seed=0)
    kind, slot, lm = strongest_bond(chain)
    assert kind == "J" and math.exp(lm) == pytest.approx(1.0)
    decimate_step(chain, rules, BranchPolicy())
    merged = [chain.cell(s).strength.to_complex()
              for s in range(4)
              if chain.alive[s] and chain.cell_type[s] == 0]
    assert any(abs(v) == pytest.approx(0.25) for v in merged)


def test_empty_stop_criteria_rejected(rules):
    chain = init_chain(InitConfig(n=8), seed=0)
    with pytest.raises(ValueError):
        run(chain, rules)
    with pytest.raises(ValueError):
        run(chain, rules, stop={"bogus": 1})


def test_run_gamma_is_monotone_and_events_ordered(rules):
    chain = init_chain(InitConfig(n=300, gamma0=2.0), seed=1)
    chain, events, _ = run(chain, rules, stop={"min_survivors": 0})
    gammas = [e.gamma for e in events]
    assert gammas == sorted(gammas)
    clamped = sum(1 for e in events if e.non_monotone)
    assert clamped == chain.non_monotone_count


def test_final_state_partitions_all_rungs(rules):
    for seed in range(3):
        n = 120
        chain = init_chain(InitConfig(n=n, gamma0=1.5), seed=seed)
        chain, _, _ = run(chain, rules, stop={"min_survivors": 0})
        desc = final_state_description(chain)
        total = 2 * len(desc["pairs"]) + len(desc["mixed"]) \
            + len(desc["unresolved"])
        assert total == n


def test_zeno_runs_fully_disconnect(rules):
    J = tuple(1e-6 * (1.0 + 0.1 * k) for k in range(8))
    p = tuple(1.0 + 0.05 * k for k in range(8))
    cfg = InitConfig(n=8, family="explicit", J=J, p=p)
    chain = init_chain(cfg, seed=0)
    chain, events, _ = run(chain, rules, stop={"min_survivors": 0})
    assert chain.j_decimations == 0
    desc = final_state_description(chain)
    assert len(desc["mixed"]) == 8 and not desc["pairs"]
    assert abs(accumulated_eigenvalue(chain)) < 1e-12


def test_measurement_free_run_has_real_invariant(rules):
    chain = init_chain(InitConfig(n=2000, gamma0=1.0, beta=0.0), seed=2)
    chain, events, _ = run(chain, rules, stop={"min_survivors": 2})
    assert all(e.kind == "J" for e in events if e.kind != "freeze")
    assert abs(accumulated_eigenvalue(chain).real) < 1e-9


def test_all_twos_closure(rules):
    chain = init_chain(InitConfig(n=200, gamma0=4.0, all_twos=True), seed=3)
    chain, events, _ = run(chain, rules, stop={"min_survivors": 0})
    for e in events:
        if e.kind in ("J", "p"):
            assert set(e.context) <= {2}
            assert e.new_type in (2, -1)


def test_replay_reproduces_fingerprint(rules):
    cfg = InitConfig(n=400, gamma0=2.5)
    chain, events, _ = run(init_chain(cfg, seed=4), rules,
                           stop={"min_survivors": 0})
    replayed = replay(init_chain(cfg, seed=4), events)
    assert replayed.fingerprint() == chain.fingerprint()


def test_event_json_round_trip(rules):
    chain, events, _ = run(init_chain(InitConfig(n=60, gamma0=2.0), seed=5),
                           rules, stop={"min_survivors": 0})
    for e in events:
        assert DecimationEvent.from_json(e.to_json()) == e


def test_decimating_empty_chain_raises(rules):
    chain, _, _ = run(init_chain(InitConfig(n=8, gamma0=1.0), seed=6), rules,
                      stop={"min_survivors": 0})
    with pytest.raises(EmptyChainError):
        strongest_bond(chain)


def test_snapshot_schedule_records_requested_gammas(rules):
    chain = init_chain(InitConfig(n=500, gamma0=1.0, beta=0.0), seed=7)
    chain, _, snaps = run(chain, rules, stop={"min_survivors": 10},
                          snapshot_schedule={"gamma_values": [2.0, 3.0]})
    gammas = [s.gamma for s in snaps]
    assert len(gammas) >= 3
    assert any(g >= 2.0 for g in gammas) and any(g >= 3.0 for g in gammas)
