"""Large-N decimation engine on the non-Hermitian spin ladder.

The chain is a circular alternating sequence of rungs (vertical bonds)
and cells (horizontal/diagonal coupling units classified by type).  At
every step the strongest bond max{J_i, p_i/2} is decimated: the local
block is projected onto the branch-selected extremal eigenstate and the
neighbors reconnect through the precomputed second-order rules.

Couplings are kept in log-magnitude/phase form because the strong-
disorder flow drives them far below float underflow (Gamma can exceed
700).  The strongest bond is found with a heap under lazy deletion:
every slot carries a version counter and stale entries are discarded on
pop.

Disconnections (type -1 cells) stay in the circular linked list as
zero-strength markers; the rule table treats them as absent neighbors,
so open segments need no special topology.  Remnants of three or fewer
rungs are too small for the perturbative block and are retired by exact
diagonalization ("freeze").
"""

from __future__ import annotations

import cmath
import heapq
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import flow as flow_mod
from .rules import RuleTable, cell_operator, vertical_operator
from .spectra import eig_general, eig_hermitian

__all__ = [
    "LogValue",
    "BranchPolicy",
    "InitConfig",
    "Cell",
    "Chain",
    "DecimationEvent",
    "EngineError",
    "EmptyChainError",
    "ComplexBondError",
    "init_chain",
    "strongest_bond",
    "decimate_step",
    "run",
    "accumulated_eigenvalue",
    "final_state_description",
    "sextuple_preset",
    "search_sextuple",
    "replay",
]

NEG_INF = float("-inf")
FREEZE_MAX_RUNGS = 3
MIN_RUNGS = 4


class EngineError(RuntimeError):
    pass


class EmptyChainError(EngineError):
    """No live bond left to decimate."""


class ComplexBondError(EngineError):
    """A vertical bond with nonzero phase reached decimation
    (only possible with drop_imag_vertical disabled)."""


# ---------------------------------------------------------------------------
# log-domain scalar arithmetic

@dataclass(frozen=True)
class LogValue:
    """A complex number as (natural-log magnitude, phase).

    ``log_mag = -inf`` encodes exact zero (phase 0 by convention).
    Multiplication adds log-magnitudes and phases; addition goes through
    a log-sum-exp with phases so opposite-phase cancellation is handled
    without leaving the representation.
    """

    log_mag: float
    phase: float = 0.0

    @classmethod
    def zero(cls) -> "LogValue":
        return cls(NEG_INF, 0.0)

    @classmethod
    def from_complex(cls, z: complex) -> "LogValue":
        z = complex(z)
        if z == 0:
            return cls.zero()
        return cls(math.log(abs(z)), cmath.phase(z))

    @property
    def is_zero(self) -> bool:
        return self.log_mag == NEG_INF

    def to_complex(self) -> complex:
        if self.is_zero:
            return 0.0 + 0.0j
        return cmath.exp(complex(self.log_mag, self.phase))

    def __mul__(self, other: "LogValue") -> "LogValue":
        if self.is_zero or other.is_zero:
            return LogValue.zero()
        return LogValue(self.log_mag + other.log_mag,
                        _wrap(self.phase + other.phase))

    def __truediv__(self, other: "LogValue") -> "LogValue":
        if other.is_zero:
            raise ZeroDivisionError("division by exact log-zero")
        if self.is_zero:
            return LogValue.zero()
        return LogValue(self.log_mag - other.log_mag,
                        _wrap(self.phase - other.phase))

    def __add__(self, other: "LogValue") -> "LogValue":
        lm, ph = _log_add(self.log_mag, self.phase,
                          other.log_mag, other.phase)
        return LogValue(lm, ph)

    def __lt__(self, other: "LogValue") -> bool:
        return self.log_mag < other.log_mag


def _wrap(phase: float) -> float:
    """Wrap to (-pi, pi]."""
    ph = math.remainder(phase, 2.0 * math.pi)
    if ph <= -math.pi:
        ph += 2.0 * math.pi
    return ph


def _log_add(lm1: float, ph1: float, lm2: float, ph2: float) -> tuple[float, float]:
    """Stable log-domain complex addition."""
    if lm1 == NEG_INF:
        return lm2, ph2
    if lm2 == NEG_INF:
        return lm1, ph1
    m = lm1 if lm1 >= lm2 else lm2
    s = cmath.exp(complex(lm1 - m, ph1)) + cmath.exp(complex(lm2 - m, ph2))
    mag = abs(s)
    if mag == 0.0:
        return NEG_INF, 0.0
    return m + math.log(mag), cmath.phase(s)


def _real_project(lm: float, ph: float) -> tuple[float, float]:
    """Drop the imaginary part: z -> Re z, staying in log form."""
    c = math.cos(ph)
    if c == 0.0 or lm == NEG_INF:
        return NEG_INF, 0.0
    return lm + math.log(abs(c)), 0.0 if c > 0 else math.pi


# ---------------------------------------------------------------------------
# policy, config, events

_HERMITIAN_TYPES = (1, 2)


@dataclass(frozen=True)
class BranchPolicy:
    """Maps each decimation step to a branch choice.

    mode "default" is the constant fast-oscillating long-lived route:
    min for anti-Hermitian cell blocks (types 0, 3, 4), max for
    Hermitian cell blocks (types 1, 2) and for vertical bonds.  mode
    "bits" consumes an explicit 0/1 string (0 = min, 1 = max) indexed by
    step; mode "random" draws uniformly from a seeded stream.
    """

    mode: str = "default"
    bits: str = ""
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("default", "bits", "random"):
            raise ValueError(f"unknown policy mode {self.mode!r}")
        if self.mode == "bits" and (not self.bits or set(self.bits) - {"0", "1"}):
            raise ValueError("bits mode needs a non-empty 0/1 string")

    def branch_for(self, step: int, kind: str, center_type: int | None) -> str:
        if self.mode == "bits":
            return "max" if self.bits[step % len(self.bits)] == "1" else "min"
        if self.mode == "random":
            g = np.random.Generator(np.random.Philox(key=self.seed + step))
            return "max" if g.integers(2) else "min"
        if kind == "p":
            return "max"
        if kind == "J" and center_type in _HERMITIAN_TYPES:
            return "max"
        return "min"  # anti-Hermitian blocks and frozen remnants


@dataclass(frozen=True)
class InitConfig:
    """Initial chain draw.

    families: "exponential" draws zeta ~ Exp(Gamma0) and sets the bond
    magnitude to exp(-Gamma0 - zeta) (both J and p/2, so the initial
    log-coupling density is exp(-zeta/Gamma0)/Gamma0 with the front at
    Gamma0); "log-uniform" spreads magnitudes over ``decades`` decades
    below 1; "constant" uses fixed values; "explicit" takes lists.
    ``beta`` multiplies every measurement rate (beta = 0 switches the
    rates off); ``all_twos`` starts every cell as type 2;
    ``j_perturb_logamp`` multiplies each J by exp(U(-a, a)).
    """

    n: int
    family: str = "exponential"
    gamma0: float = 1.0
    decades: float = 6.0
    j_value: float = 1.0
    p_value: float = 0.0
    J: tuple[float, ...] | None = None
    p: tuple[float, ...] | None = None
    beta: float = 1.0
    all_twos: bool = False
    j_perturb_logamp: float = 0.0
    drop_imag_vertical: bool = True

    def __post_init__(self):
        if self.n < MIN_RUNGS:
            raise ValueError(f"need at least {MIN_RUNGS} rungs")
        if self.family not in ("exponential", "log-uniform", "constant",
                               "explicit"):
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == "exponential" and self.gamma0 <= 0:
            raise ValueError("gamma0 must be positive")
        if self.family == "log-uniform" and self.decades <= 0:
            raise ValueError("decades must be positive")
        if self.family == "explicit":
            if self.J is None or self.p is None:
                raise ValueError("explicit family needs J and p lists")
            if len(self.J) != self.n or len(self.p) != self.n:
                raise ValueError("explicit lists must have length n")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")


@dataclass(slots=True)
class DecimationEvent:
    """One decimation, replayable against the initial chain."""

    step: int
    kind: str  # "J" | "p" | "freeze"
    location: tuple[int, ...]  # pre-decimation rung indices
    gamma: float  # clamped RG scale at decimation
    gamma_raw: float  # -ln of the decimated magnitude (unclamped)
    context: tuple[int, ...]
    branch: str
    new_type: int | None
    pair_separation: int | None
    rule_key: tuple | None
    non_monotone: bool
    absent_neighbor: bool = False

    def to_json(self) -> str:
        return json.dumps({
            "v": 1, "step": self.step, "kind": self.kind,
            "location": list(self.location), "gamma": self.gamma,
            "gamma_raw": self.gamma_raw, "context": list(self.context),
            "branch": self.branch, "new_type": self.new_type,
            "pair_separation": self.pair_separation,
            "rule_key": list(self.rule_key) if self.rule_key else None,
            "non_monotone": self.non_monotone,
            "absent_neighbor": self.absent_neighbor,
        })

    @classmethod
    def from_json(cls, line: str) -> "DecimationEvent":
        d = json.loads(line)
        return cls(
            step=d["step"], kind=d["kind"], location=tuple(d["location"]),
            gamma=d["gamma"], gamma_raw=d["gamma_raw"],
            context=tuple(d["context"]), branch=d["branch"],
            new_type=d["new_type"], pair_separation=d["pair_separation"],
            rule_key=tuple(d["rule_key"]) if d["rule_key"] else None,
            non_monotone=d["non_monotone"],
            absent_neighbor=d.get("absent_neighbor", False),
        )


@dataclass(frozen=True)
class Cell:
    """Read-only view of one cell."""

    ctype: int
    strength: LogValue


# ---------------------------------------------------------------------------
# the chain

class Chain:
    """Mutable decimation state over ``n0`` original rungs.

    Internals are flat per-slot lists: rung i carries a vertical bond,
    and slot i also holds the cell to the right of rung i (between rung
    i and ``nxt[i]``).  The linked list stays circular for the whole
    run; type -1 cells mark disconnections in place.
    """

    def __init__(self, n0: int, drop_imag_vertical: bool = True):
        self.n0 = n0
        self.drop_imag_vertical = drop_imag_vertical
        self.alive = [True] * n0
        self.nxt = [(i + 1) % n0 for i in range(n0)]
        self.prv = [(i - 1) % n0 for i in range(n0)]
        self.cell_type = [0] * n0
        self.cell_lm = [NEG_INF] * n0
        self.cell_ph = [0.0] * n0
        self.vb_lm = [NEG_INF] * n0
        self.vb_ph = [0.0] * n0
        self.cell_ver = [0] * n0
        self.vb_ver = [0] * n0
        self.heap: list[tuple] = []
        self.live_rungs = n0
        self.gamma = 0.0
        self.omega0 = 1.0
        self.accumulator = 0.0 + 0.0j
        self.non_monotone_count = 0
        self.steps = 0
        self.j_decimations = 0
        self.p_decimations = 0
        self.events: list[DecimationEvent] = []
        # classification filled in as rungs retire
        self._mixed: list[int] = []
        self._pairs: list[tuple[int, int, str]] = []

    # -- bond access ------------------------------------------------------

    def cell(self, slot: int) -> Cell:
        return Cell(self.cell_type[slot],
                    LogValue(self.cell_lm[slot], self.cell_ph[slot]))

    def vertical(self, slot: int) -> LogValue:
        return LogValue(self.vb_lm[slot], self.vb_ph[slot])

    def set_cell(self, slot: int, ctype: int, lm: float, ph: float) -> None:
        if lm == NEG_INF:
            ctype = -1
        self.cell_type[slot] = ctype
        self.cell_lm[slot] = lm
        self.cell_ph[slot] = ph
        self.cell_ver[slot] += 1
        if lm != NEG_INF:
            heapq.heappush(self.heap, (-lm, slot, 0, self.cell_ver[slot]))

    def set_vertical(self, slot: int, lm: float, ph: float) -> None:
        if self.drop_imag_vertical:
            lm, ph = _real_project(lm, ph)
        self.vb_lm[slot] = lm
        self.vb_ph[slot] = ph
        self.vb_ver[slot] += 1
        if lm != NEG_INF:
            heapq.heappush(self.heap, (-lm, slot, 1, self.vb_ver[slot]))

    def _entry_valid(self, entry: tuple) -> bool:
        neg_lm, slot, kind, ver = entry
        if not self.alive[slot]:
            return False
        if kind == 0:
            return ver == self.cell_ver[slot] and self.cell_lm[slot] == -neg_lm
        return ver == self.vb_ver[slot] and self.vb_lm[slot] == -neg_lm

    def peek_strongest(self) -> tuple | None:
        while self.heap and not self._entry_valid(self.heap[0]):
            heapq.heappop(self.heap)
        return self.heap[0] if self.heap else None

    # -- diagnostics ------------------------------------------------------

    def zeta_samples(self) -> tuple[float, np.ndarray, np.ndarray]:
        """(Gamma_used, zeta_J, zeta_p) for all live couplings."""
        top = self.peek_strongest()
        gamma_used = self.gamma
        if top is not None:
            gamma_used = max(gamma_used, top[0])  # top[0] = -log_mag
        # zeta_i = ln(Omega / c_i) = -Gamma - ln c_i  (>= 0 for live bonds)
        zj = [-gamma_used - self.cell_lm[i] for i in range(self.n0)
              if self.alive[i] and self.cell_lm[i] != NEG_INF]
        zp = [-gamma_used - self.vb_lm[i] for i in range(self.n0)
              if self.alive[i] and self.vb_lm[i] != NEG_INF]
        return (gamma_used,
                np.maximum(np.array(zj), 0.0),
                np.maximum(np.array(zp), 0.0))

    def fingerprint(self) -> tuple:
        """Hashable full-state summary for replay/determinism checks."""
        return (
            tuple(self.alive), tuple(self.cell_type),
            tuple(self.cell_lm), tuple(self.cell_ph),
            tuple(self.vb_lm), tuple(self.vb_ph),
            self.gamma, self.accumulator, self.live_rungs,
        )


def init_chain(config: InitConfig, seed: int) -> Chain:
    """Draw the initial chain; deterministic under a fixed seed.

    RNG streams are counter-based (Philox) and purpose-separated: stream
    0 draws J, stream 1 draws p, stream 2 the multiplicative J
    perturbation; adding diagnostics never perturbs the draws.
    """
    n = config.n
    chain = Chain(n, drop_imag_vertical=config.drop_imag_vertical)
    rng_j = np.random.Generator(np.random.Philox(key=seed))
    rng_p = np.random.Generator(np.random.Philox(key=seed).jumped(1))
    rng_x = np.random.Generator(np.random.Philox(key=seed).jumped(2))

    if config.family == "exponential":
        g0 = config.gamma0
        lj = -g0 - rng_j.exponential(scale=g0, size=n)
        lp = -g0 - rng_p.exponential(scale=g0, size=n)
    elif config.family == "log-uniform":
        ln10 = math.log(10.0)
        lj = -rng_j.uniform(0.0, config.decades, size=n) * ln10
        lp = -rng_p.uniform(0.0, config.decades, size=n) * ln10
    elif config.family == "constant":
        lj = np.full(n, math.log(config.j_value) if config.j_value > 0 else NEG_INF)
        lp = np.full(n, math.log(config.p_value / 2.0)
                     if config.p_value > 0 else NEG_INF)
    else:  # explicit: J list and p list (vertical bond stored as p/2)
        lj = np.array([math.log(j) if j > 0 else NEG_INF for j in config.J])
        lp = np.array([math.log(p / 2.0) if p > 0 else NEG_INF
                       for p in config.p])

    if config.j_perturb_logamp:
        a = config.j_perturb_logamp
        lj = lj + rng_x.uniform(-a, a, size=n)
    if config.beta == 0.0:
        lp = np.full(n, NEG_INF)
    elif config.beta != 1.0:
        lp = lp + math.log(config.beta)

    ctype = 2 if config.all_twos else 0
    for i in range(n):
        chain.set_cell(i, ctype if lj[i] != NEG_INF else -1, float(lj[i]), 0.0)
        chain.set_vertical(i, float(lp[i]), 0.0)

    top = chain.peek_strongest()
    if top is None:
        raise ValueError("initial chain has no nonzero coupling")
    chain.omega0 = math.exp(-top[0])
    chain.gamma = top[0]
    return chain


def strongest_bond(chain: Chain) -> tuple[str, int, float]:
    """(kind, slot, log magnitude) of the current strongest bond.

    Ties break to the lowest slot index, cells before vertical bonds.
    """
    top = chain.peek_strongest()
    if top is None:
        raise EmptyChainError("no live bond")
    neg_lm, slot, kind, _ = top
    return ("J" if kind == 0 else "p", slot, -neg_lm)


# ---------------------------------------------------------------------------
# decimation internals

def _rule_scalars(chain: Chain, rule, jl: LogValue, jr: LogValue,
                  c: LogValue) -> tuple[LogValue, LogValue, LogValue, complex]:
    """(new coupling, lvb correction, rvb correction, scalar shift)."""
    new = LogValue.from_complex(rule.amp) * jl * jr / c
    lcorr = LogValue.from_complex(rule.lvb) * jl * jl / c
    rcorr = LogValue.from_complex(rule.rvb) * jr * jr / c
    shift = (rule.shift_const * c.to_complex()
             + rule.shift_l2 * (jl * jl / c).to_complex()
             + rule.shift_r2 * (jr * jr / c).to_complex())
    return new, lcorr, rcorr, shift


def _advance_gamma(chain: Chain, lm: float) -> tuple[float, bool]:
    gamma_raw = -lm
    non_mono = gamma_raw < chain.gamma - 1e-12
    if non_mono:
        chain.non_monotone_count += 1
    else:
        chain.gamma = gamma_raw
    return gamma_raw, non_mono


def _apply_j(chain: Chain, rules: RuleTable, slot: int, branch: str) -> DecimationEvent:
    a = slot
    b = chain.nxt[a]
    left = chain.prv[a]
    right = chain.nxt[b]
    ctx = (chain.cell_type[left], chain.cell_type[a], chain.cell_type[b])
    rule = rules.j_rule(*ctx, branch)
    jl = chain.cell(left).strength
    jr = chain.cell(b).strength
    c = chain.cell(a).strength
    if chain.vb_ph[a] not in (0.0, math.pi) or chain.vb_ph[b] not in (0.0, math.pi):
        raise ComplexBondError(f"complex interior vertical bond at rungs {a},{b}")
    va = chain.vertical(a).to_complex()
    vb = chain.vertical(b).to_complex()

    gamma_raw, non_mono = _advance_gamma(chain, chain.cell_lm[a])
    new, lcorr, rcorr, shift = _rule_scalars(chain, rule, jl, jr, c)
    chain.accumulator += shift + rule.shift_lv * va + rule.shift_rv * vb

    # retire interior rungs a, b
    for r in (a, b):
        chain.alive[r] = False
        chain.cell_ver[r] += 1
        chain.vb_ver[r] += 1
    chain.nxt[left] = right
    chain.prv[right] = left
    chain.live_rungs -= 2
    d = abs(a - b)
    sep = min(d, chain.n0 - d)
    chain._pairs.append((a, b, branch))

    chain.set_cell(left, rule.new_type, new.log_mag, new.phase)
    lv = chain.vertical(left) + lcorr
    rv = chain.vertical(right) + rcorr
    chain.set_vertical(left, lv.log_mag, lv.phase)
    chain.set_vertical(right, rv.log_mag, rv.phase)

    chain.j_decimations += 1
    chain.steps += 1
    ev = DecimationEvent(
        step=chain.steps - 1, kind="J", location=(a, b), gamma=chain.gamma,
        gamma_raw=gamma_raw, context=ctx, branch=branch,
        new_type=chain.cell_type[left], pair_separation=sep,
        rule_key=("J",) + ctx + (branch,), non_monotone=non_mono,
        absent_neighbor=(ctx[0] == -1 or ctx[2] == -1),
    )
    chain.events.append(ev)
    return ev


def _apply_p(chain: Chain, rules: RuleTable, slot: int, branch: str) -> DecimationEvent:
    i = slot
    left = chain.prv[i]
    right = chain.nxt[i]
    ctx = (chain.cell_type[left], chain.cell_type[i])
    gamma_raw, non_mono = _advance_gamma(chain, chain.vb_lm[i])
    if chain.vb_ph[i] not in (0.0, math.pi):
        raise ComplexBondError(f"complex vertical bond decimated at rung {i}")

    if left == i:  # isolated rung: bare projection, no reconnection
        rule = rules.p_rule(-1, -1, branch)
        c = LogValue(chain.vb_lm[i] + math.log(2.0), chain.vb_ph[i])
        chain.accumulator += rule.shift_const * c.to_complex()
        chain.alive[i] = False
        chain.cell_ver[i] += 1
        chain.vb_ver[i] += 1
        chain.live_rungs -= 1
        chain._mixed.append(i)
        chain.p_decimations += 1
        chain.steps += 1
        ev = DecimationEvent(
            step=chain.steps - 1, kind="p", location=(i,), gamma=chain.gamma,
            gamma_raw=gamma_raw, context=(-1, -1), branch=branch,
            new_type=None, pair_separation=None,
            rule_key=("p", -1, -1, branch), non_monotone=non_mono,
            absent_neighbor=True,
        )
        chain.events.append(ev)
        return ev

    rule = rules.p_rule(*ctx, branch)
    jl = chain.cell(left).strength
    jr = chain.cell(i).strength
    c = LogValue(chain.vb_lm[i] + math.log(2.0), chain.vb_ph[i])  # p = 2 v
    new, lcorr, rcorr, shift = _rule_scalars(chain, rule, jl, jr, c)
    chain.accumulator += shift

    chain.alive[i] = False
    chain.cell_ver[i] += 1
    chain.vb_ver[i] += 1
    chain.nxt[left] = right
    chain.prv[right] = left
    chain.live_rungs -= 1
    chain._mixed.append(i)

    chain.set_cell(left, rule.new_type, new.log_mag, new.phase)
    lv = chain.vertical(left) + lcorr
    rv = chain.vertical(right) + rcorr
    chain.set_vertical(left, lv.log_mag, lv.phase)
    chain.set_vertical(right, rv.log_mag, rv.phase)

    chain.p_decimations += 1
    chain.steps += 1
    ev = DecimationEvent(
        step=chain.steps - 1, kind="p", location=(i,), gamma=chain.gamma,
        gamma_raw=gamma_raw, context=ctx, branch=branch,
        new_type=chain.cell_type[left], pair_separation=None,
        rule_key=("p",) + ctx + (branch,), non_monotone=non_mono,
        absent_neighbor=(ctx[0] == -1 or ctx[1] == -1),
    )
    chain.events.append(ev)
    return ev


def _segment_rungs(chain: Chain, start: int) -> list[int]:
    out = [start]
    r = chain.nxt[start]
    while r != start:
        out.append(r)
        if len(out) > FREEZE_MAX_RUNGS:
            raise EngineError("freeze requested on an oversized segment")
        r = chain.nxt[r]
    return out

def _freeze_remnant(chain: Chain, start: int, branch: str,
                    lm_dec: float, trigger: str = "p") -> DecimationEvent:
    """Retire a <=3-rung circular remnant by exact diagonalization.

    The remnant operator (all remaining cells and vertical bonds) is
    built densely and the branch-selected extremal eigenvalue is added
    to the accumulator: min picks the most negative imaginary part (ties
    to the largest real part), max the most positive imaginary part.
    """
    rungs = _segment_rungs(chain, start)
    k = len(rungs)
    local = {r: j for j, r in enumerate(rungs)}
    dim = 4**k
    op = np.zeros((dim, dim), dtype=complex)
    for r in rungs:
        v = chain.vertical(r).to_complex()
        if v != 0:
            op += v * vertical_operator(local[r], k)
        ct, cs = chain.cell_type[r], chain.cell(r).strength.to_complex()
        nb = chain.nxt[r]
        if ct >= 0 and cs != 0 and nb != r:
            op += cell_operator(ct, cs, local[r], local[nb], k)

    gamma_raw, non_mono = _advance_gamma(chain, lm_dec)
    if np.any(op):
        if np.allclose(op, op.conj().T, atol=0.0):
            vals = eig_hermitian(op).eigenvalues.astype(complex)
        else:
            vals = eig_general(op).eigenvalues
        re, im = vals.real, vals.imag
        # selection axis follows the bond that triggered the freeze:
        # vertical bonds branch along the real axis, cells along the
        # imaginary axis
        if trigger == "p":
            pick = np.lexsort((im, re))[0] if branch == "min" \
                else np.lexsort((-im, -re))[0]
        else:
            pick = np.lexsort((-re, im))[0] if branch == "min" \
                else np.lexsort((-re, -im))[0]
        chain.accumulator += complex(vals[pick])

    for r in rungs:
        chain.alive[r] = False
        chain.cell_ver[r] += 1
        chain.vb_ver[r] += 1
    chain.live_rungs -= k
    # a 2-rung remnant whose dominant bond is a cell retires as an
    # entangled pair; vertical-bond-dominated remnants are locally mixed
    if k == 2 and trigger == "J":
        chain._pairs.append((rungs[0], rungs[1], branch))
    else:
        chain._mixed.extend(rungs)

    chain.steps += 1
    ev = DecimationEvent(
        step=chain.steps - 1, kind="freeze", location=tuple(rungs),
        gamma=chain.gamma, gamma_raw=gamma_raw,
        context=tuple(chain.cell_type[r] for r in rungs), branch=branch,
        new_type=None, pair_separation=None, rule_key=("freeze", trigger),
        non_monotone=non_mono,
    )
    chain.events.append(ev)
    return ev


def decimate_step(chain: Chain, rules: RuleTable,
                  policy: BranchPolicy) -> DecimationEvent:
    """Decimate the current strongest bond; returns the logged event."""
    kind, slot, lm = strongest_bond(chain)
    if kind == "J":
        branch = policy.branch_for(chain.steps, "J", chain.cell_type[slot])
        b = chain.nxt[slot]
        left = chain.prv[slot]
        right = chain.nxt[b]
        if b == slot or left == b or right == slot or left == right:
            return _freeze_remnant(chain, slot, branch, lm, trigger="J")
        return _apply_j(chain, rules, slot, branch)
    branch = policy.branch_for(chain.steps, "p", None)
    left = chain.prv[slot]
    right = chain.nxt[slot]
    if left == right and left != slot:
        return _freeze_remnant(chain, slot, branch, lm, trigger="p")
    return _apply_p(chain, rules, slot, branch)


# ---------------------------------------------------------------------------
# run loop

def run(
    chain: Chain,
    rules: RuleTable,
    policy: BranchPolicy | None = None,
    stop: dict | None = None,
    snapshot_schedule: dict | None = None,
) -> tuple[Chain, list[DecimationEvent], list]:
    """Decimate until a stop criterion fires.

    ``stop`` keys (any may combine; at least one required):
    min_survivors, max_steps, gamma_target.  ``snapshot_schedule``:
    {"every_steps": k} or {"gamma_interval": dg} or
    {"gamma_values": [...]}; the initial and final states are always
    snapshotted when a schedule is given.
    """
    if policy is None:
        policy = BranchPolicy()
    if not stop:
        raise ValueError("need at least one stop criterion")
    if not set(stop) & {"min_survivors", "max_steps", "gamma_target"}:
        raise ValueError(f"unrecognized stop criteria: {sorted(stop)}")
    min_surv = stop.get("min_survivors", -1)
    max_steps = stop.get("max_steps", None)
    gamma_target = stop.get("gamma_target", None)

    snapshots: list = []
    sched_steps = sched_dg = None
    sched_vals: list[float] = []
    if snapshot_schedule:
        sched_steps = snapshot_schedule.get("every_steps")
        sched_dg = snapshot_schedule.get("gamma_interval")
        sched_vals = sorted(snapshot_schedule.get("gamma_values", []))
        snapshots.append(take_snapshot(chain))
    next_gamma = chain.gamma + sched_dg if sched_dg else None

    start_step = chain.steps
    while True:
        if chain.live_rungs <= min_surv:
            break
        if max_steps is not None and chain.steps - start_step >= max_steps:
            break
        if gamma_target is not None and chain.gamma >= gamma_target:
            break
        try:
            decimate_step(chain, rules, policy)
        except EmptyChainError:
            break
        if sched_steps and (chain.steps - start_step) % sched_steps == 0:
            snapshots.append(take_snapshot(chain))
        if next_gamma is not None and chain.gamma >= next_gamma:
            snapshots.append(take_snapshot(chain))
            while next_gamma <= chain.gamma:
                next_gamma += sched_dg
        while sched_vals and chain.gamma >= sched_vals[0]:
            snapshots.append(take_snapshot(chain))
            sched_vals.pop(0)
    if snapshot_schedule:
        snapshots.append(take_snapshot(chain))
    return chain, chain.events, snapshots


def take_snapshot(chain: Chain):
    """Current coupling statistics as an immutable FlowSnapshot."""
    gamma_used, zj, zp = chain.zeta_samples()
    fit_f = fit_g = None
    try:
        if zj.size >= flow_mod.MIN_FIT_SAMPLES:
            fit_f = flow_mod.fit_exponential(zj)
        if zp.size >= flow_mod.MIN_FIT_SAMPLES:
            fit_g = flow_mod.fit_exponential(zp)
    except ValueError:  # degenerate (all-zero) samples: no fit
        pass
    return flow_mod.FlowSnapshot(
        gamma=gamma_used, survivors=chain.live_rungs, zeta_J=zj, zeta_p=zp,
        non_monotone_count=chain.non_monotone_count,
        fit_f=fit_f, fit_g=fit_g,
    )


def accumulated_eigenvalue(chain: Chain) -> complex:
    """Running estimate of the targeted generator eigenvalue."""
    return chain.accumulator


def final_state_description(chain: Chain) -> dict:
    """Classification of every original rung after a finished run.

    Returns {"mixed": [rungs], "pairs": [(i, j, branch)], "unresolved":
    [rungs still live]}.  Rungs retired by a J-decimation (or a 2-rung
    freeze) form entangled pairs; p-decimated and isolated rungs are in
    locally mixed states; 3-rung freezes count their rungs as mixed.
    """
    unresolved = [i for i in range(chain.n0) if chain.alive[i]]
    desc = {
        "mixed": sorted(chain._mixed),
        "pairs": sorted(chain._pairs),
        "unresolved": unresolved,
    }
    total = len(desc["mixed"]) + 2 * len(desc["pairs"]) + len(unresolved)
    if total != chain.n0:
        raise EngineError(
            f"classification covers {total} of {chain.n0} rungs")
    return desc


def sextuple_preset(alpha: float, beta: float = 1.0) -> InitConfig:
    """Six type-0 cells tuned so the flow manufactures a type-2 cell.

    ``alpha`` (<< 1) sets the coupling hierarchy, ``beta`` scales every
    measurement rate.  The dominant vertical bond sits between two equal
    cells of strength alpha with measurement-free endpoints, so its
    decimation creates a Hermitian (type-1) cell that exactly ties the
    boosted endpoint bonds and wins the tie-break; decimating that cell
    between type-0 neighbors then yields a type-2 cell.
    """
    if not (0 < alpha < 0.5):
        raise ValueError("alpha must be in (0, 0.5)")
    a3 = alpha**3
    J = (a3, 1.1 * a3, alpha, alpha, 0.9 * a3, 1.2 * a3)
    p = (0.8 * a3 * beta, 1.3 * a3 * beta, 0.0, 2.0 * beta, 0.0,
         0.95 * a3 * beta)
    return InitConfig(n=6, family="explicit", J=J, p=p)


def search_sextuple(rules: RuleTable, alphas=(0.3, 0.1, 0.03, 0.01),
                    betas=(1.0, 0.8, 1.25), seed: int = 0):
    """Search the preset grid for a run that produces a type-2 cell.

    Returns (alpha, beta, config, events) for the first hit; raises
    EngineError when the whole grid fails.
    """
    for alpha in alphas:
        for beta in betas:
            config = sextuple_preset(alpha, beta)
            chain = init_chain(config, seed=seed)
            chain, events, _ = run(chain, rules, stop={"min_survivors": 0})
            if any(e.new_type == 2 for e in events):
                return alpha, beta, config, events
    raise EngineError("no type-2 production found on the preset grid")


def replay(chain: Chain, events) -> Chain:
    """Re-apply a recorded event log to a freshly initialized chain.

    Bypasses the priority structure entirely; locations and branches
    come from the log.  Raises on any mismatch with the recorded
    context, so a successful replay certifies the log.
    """
    from .rules import generate_rule_table  # local: avoid table rebuild cost upstream

    rules = getattr(replay, "_table", None)
    if rules is None:
        rules = generate_rule_table()
        replay._table = rules
    for ev in events:
        if ev.kind == "J":
            a = ev.location[0]
            if chain.nxt[a] != ev.location[1]:
                raise EngineError(f"replay mismatch at step {ev.step}")
            got = _apply_j(chain, rules, a, ev.branch)
        elif ev.kind == "p":
            got = _apply_p(chain, rules, ev.location[0], ev.branch)
        else:
            got = _freeze_remnant(chain, ev.location[0], ev.branch,
                                  -ev.gamma_raw, trigger=ev.rule_key[1])
        if got.context != ev.context or got.new_type != ev.new_type:
            raise EngineError(f"replay diverged at step {ev.step}")
    return chain
