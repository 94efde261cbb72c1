"""Command-line entry point and experiment orchestration.

Verbs: ``spectrum | rules | rsrg | phase-scan | flow-pde``, each taking
``--config <path> --out <dir> --seed <u64> --emit csv,jsonl,svg``.
Every run writes a ``manifest.txt`` echoing the fully resolved
configuration (itself valid config syntax), so a run can be repeated
from its manifest alone.  Exit codes: 0 success, 2 invariant or
regression failure, 3 numerical failure, 4 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from . import __version__, flow
from .config import ConfigError, read_config, merge, write_config
from .ladder import (
    BranchPolicy,
    EngineError,
    InitConfig,
    accumulated_eigenvalue,
    final_state_description,
    init_chain,
    run as run_chain,
    search_sextuple,
    sextuple_preset,
)
from .liouville import LadderSpec, ModeVerificationError, build_ladder_liouvillian, build_lindbladian, known_modes
from .rules import generate_rule_table, reference_row_regression
from .spectra import NonConvergenceError, eig_general, eigvals_general, write_spectrum_csv
from . import plots

EXIT_OK = 0
EXIT_INVARIANT = 2
EXIT_NUMERICAL = 3
EXIT_CONFIG = 4

_RULE_TABLE = None


def _rule_table():
    global _RULE_TABLE
    if _RULE_TABLE is None:
        _RULE_TABLE = generate_rule_table()
    return _RULE_TABLE


def _resolve(args) -> tuple[dict, str, set]:
    cfg = read_config(args.config) if args.config else {}
    cfg.setdefault("model", {})
    cfg.setdefault("run", {})
    cfg.setdefault("output", {})
    if args.seed is not None:
        cfg["run"]["seed"] = args.seed
    cfg["run"].setdefault("seed", 0)
    if args.emit:
        cfg["output"]["emit"] = tuple(args.emit.split(","))
    emit_val = cfg["output"].setdefault("emit", ("csv", "jsonl"))
    if isinstance(emit_val, str):
        emit_val = (emit_val,)
    emit = set(emit_val)
    unknown = emit - {"csv", "jsonl", "svg"}
    if unknown:
        raise ConfigError(f"unknown emit formats: {sorted(unknown)}")
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return cfg, out, emit


def _write_manifest(out: str, command: str, cfg: dict) -> None:
    manifest = merge(cfg, {"meta": {"command": command,
                                    "version": __version__}})
    write_config(os.path.join(out, "manifest.txt"), manifest)


def _policy_from(cfg: dict) -> BranchPolicy:
    runc = cfg["run"]
    mode = runc.get("branch_policy", "default")
    return BranchPolicy(mode=mode, bits=str(runc.get("branch_bits", "")),
                        seed=int(runc.get("seed", 0)))


def _init_config_from(model: dict) -> InitConfig:
    fam = model.get("family", "exponential")
    kwargs = dict(
        n=int(model.get("n", 1000)),
        family=fam,
        beta=float(model.get("beta", 1.0)),
        all_twos=bool(model.get("all_twos", False)),
        j_perturb_logamp=float(model.get("j_perturb_logamp", 0.0)),
        drop_imag_vertical=bool(model.get("drop_imag_vertical", True)),
    )
    if model.get("p_zero", False):
        kwargs["beta"] = 0.0
    if fam == "exponential":
        kwargs["gamma0"] = float(model.get("gamma0", 1.0))
    elif fam == "log-uniform":
        kwargs["decades"] = float(model.get("decades", 6.0))
    elif fam == "constant":
        kwargs["j_value"] = float(model.get("j_value", 1.0))
        kwargs["p_value"] = float(model.get("p_value", 0.0))
    elif fam == "explicit":
        kwargs["J"] = tuple(float(x) for x in model.get("J", ()))
        kwargs["p"] = tuple(float(x) for x in model.get("p", ()))
    return InitConfig(**kwargs)


def _stop_from(runc: dict) -> dict:
    stop = {}
    for key in ("min_survivors", "max_steps"):
        if key in runc:
            stop[key] = int(runc[key])
    if "gamma_target" in runc:
        stop["gamma_target"] = float(runc["gamma_target"])
    if not stop:
        stop = {"min_survivors": 2}
    return stop


def _schedule_from(runc: dict) -> dict | None:
    sched = {}
    if "snapshot_gamma_interval" in runc:
        sched["gamma_interval"] = float(runc["snapshot_gamma_interval"])
    if "snapshot_every_steps" in runc:
        sched["every_steps"] = int(runc["snapshot_every_steps"])
    if "snapshot_gamma_values" in runc:
        vals = runc["snapshot_gamma_values"]
        if not isinstance(vals, tuple):
            vals = (vals,)
        sched["gamma_values"] = [float(v) for v in vals]
    return sched or None


# ---------------------------------------------------------------------------
# verbs

def cmd_spectrum(args) -> int:
    cfg, out, emit = _resolve(args)
    model = cfg["model"]
    n = int(model.get("n_rungs", 4))
    if n > 4 or n % 2:
        print("spectrum: n_rungs must be an even number <= 4", file=sys.stderr)
        return EXIT_CONFIG
    decades = float(model.get("decades", 3.0))
    beta = float(model.get("beta", 1.0))
    n_seeds = int(model.get("seeds", 4))
    seed0 = int(cfg["run"]["seed"])
    _write_manifest(out, "spectrum", cfg)
    for k in range(n_seeds):
        seed = seed0 + k
        rng = np.random.Generator(np.random.Philox(key=seed))
        J = tuple(10.0 ** (-rng.uniform(0.0, decades, n)))
        p = tuple(10.0 ** (-rng.uniform(0.0, decades, n)))
        spec = LadderSpec(n_rungs=n, J=J, p=p, beta=beta)
        try:
            known_modes(spec)
            lad = build_ladder_liouvillian(spec)
            dec = eig_general(lad)
            lams = dec.eigenvalues
            lind_vals = eigvals_general(build_lindbladian(spec))
            _check_spectrum_invariants(spec, lams, lind_vals)
        except (ModeVerificationError, InvariantError) as exc:
            print(f"spectrum seed {seed}: invariant violated: {exc}",
                  file=sys.stderr)
            return EXIT_INVARIANT
        except NonConvergenceError as exc:
            print(f"spectrum seed {seed}: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        marked = _bottom_right_mode(lams)
        if "csv" in emit:
            write_spectrum_csv(os.path.join(out, f"spectrum_{seed}.csv"), dec)
        if "svg" in emit:
            plots.spectrum_scatter(
                os.path.join(out, f"spectrum_{seed}.svg"), lams,
                marked=marked, title=f"seed {seed}")
    return EXIT_OK


class InvariantError(RuntimeError):
    pass


def _check_spectrum_invariants(spec, lams, lind_vals) -> None:
    norm = max(float(np.max(np.abs(lams))), 1.0)
    total = float(np.sum(spec.rates))
    if np.min(np.abs(lams)) > 1e-9 * norm:
        raise InvariantError("no steady state at the origin")
    if np.max(lams.real) > 1e-10 * norm:
        raise InvariantError("eigenvalue with positive real part")
    # spectrum symmetric about -sum(rates)
    mirrored = 2.0 * (-total) - lams.real + 1j * lams.imag
    for lam in mirrored:
        if np.min(np.abs(lams - lam)) > 1e-8 * norm:
            raise InvariantError("spectrum not symmetric about -sum rates")
    # both builders agree as multisets
    rest = list(lind_vals)
    for lam in lams:
        arr = np.asarray(rest)
        k = int(np.argmin(np.abs(arr - lam)))
        if abs(arr[k] - lam) > 1e-6 * norm:
            raise InvariantError("generator builders disagree")
        rest.pop(k)


def _bottom_right_mode(lams: np.ndarray) -> int:
    """Index of the extremal mode: max Re within the lowest Im decile."""
    cut = np.quantile(lams.imag, 0.1)
    idx = np.where(lams.imag <= cut)[0]
    return int(idx[np.argmax(lams.real[idx])])


def cmd_rules(args) -> int:
    cfg, out, emit = _resolve(args)
    _write_manifest(out, "rules", cfg)
    table = _rule_table()
    if "csv" in emit:
        table.write_csv(os.path.join(out, "rules.csv"))
    checks = reference_row_regression(table)
    bad = [c for c in checks if not c[1]]
    for label, ok, detail in checks:
        print(f"{label}: {'ok' if ok else detail}")
    n_rules = len(table.j_rules) // 2 + len(table.p_rules) // 2
    print(f"{n_rules} contexts x 2 branches; {len(table.errors)} derivation errors")
    return EXIT_INVARIANT if bad else EXIT_OK


def _emit_run_outputs(out, emit, prefix, chain, events, snapshots,
                      model: dict) -> None:
    if "csv" in emit:
        flow.write_snapshot_csv(os.path.join(out, f"{prefix}_snapshots.csv"),
                                snapshots)
        desc = final_state_description(chain)
        acc = accumulated_eigenvalue(chain)
        with open(os.path.join(out, f"{prefix}_summary.csv"), "w",
                  newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["key", "value"])
            w.writerow(["survivors", chain.live_rungs])
            w.writerow(["steps", chain.steps])
            w.writerow(["gamma", repr(chain.gamma)])
            w.writerow(["non_monotone", chain.non_monotone_count])
            w.writerow(["j_decimations", chain.j_decimations])
            w.writerow(["p_decimations", chain.p_decimations])
            w.writerow(["eigenvalue_re", repr(acc.real)])
            w.writerow(["eigenvalue_im", repr(acc.imag)])
            w.writerow(["mixed_rungs", len(desc["mixed"])])
            w.writerow(["entangled_pairs", len(desc["pairs"])])
            w.writerow(["unresolved", len(desc["unresolved"])])
    if "jsonl" in emit:
        with open(os.path.join(out, f"{prefix}_events.jsonl"), "w") as fh:
            for e in events:
                fh.write(e.to_json() + "\n")
    if "svg" in emit and snapshots:
        mids = [s for s in snapshots if s.survivors < chain.n0]
        picks = mids[:: max(len(mids) // 3, 1)][:3] if mids else snapshots[:1]
        plots.zeta_histograms(os.path.join(out, f"{prefix}_hist.svg"), picks)
        fitted = [s for s in snapshots if s.fit_f and s.fit_g]
        if fitted:
            gs = np.array([s.gamma for s in fitted])
            model_g0 = float(model.get("gamma0", gs[0]))
            pred_f = pred_g = None
            try:
                m = flow.AnalyticModel(gamma0=model_g0, variant="ode")
                pred_f, pred_g = flow.fg_prediction(m, np.maximum(gs, model_g0))
            except Exception:
                pass
            plots.fg_curves(
                os.path.join(out, f"{prefix}_fg.svg"), gs,
                [s.fit_f.rate for s in fitted],
                [s.fit_f.stderr for s in fitted],
                [s.fit_g.rate for s in fitted],
                [s.fit_g.stderr for s in fitted],
                f_pred=pred_f, g_pred=pred_g)


def cmd_rsrg(args) -> int:
    cfg, out, emit = _resolve(args)
    try:
        init = _init_config_from(cfg["model"])
        policy = _policy_from(cfg)
        stop = _stop_from(cfg["run"])
        sched = _schedule_from(cfg["run"])
    except (ValueError, TypeError) as exc:
        print(f"rsrg: bad configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _write_manifest(out, "rsrg", cfg)
    try:
        chain = init_chain(init, seed=int(cfg["run"]["seed"]))
        chain, events, snapshots = run_chain(
            chain, _rule_table(), policy, stop=stop, snapshot_schedule=sched)
    except EngineError as exc:
        print(f"rsrg: engine failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    prefix = str(cfg["output"].get("prefix", "rsrg"))
    _emit_run_outputs(out, emit, prefix, chain, events, snapshots, cfg["model"])
    return EXIT_OK


def cmd_phase_scan(args) -> int:
    cfg, out, emit = _resolve(args)
    model = cfg["model"]
    runc = cfg["run"]
    betas = runc.get("betas", (0.0, 0.5, 1.0, 2.0))
    if not isinstance(betas, tuple):
        betas = (betas,)
    seeds_per = int(runc.get("seeds_per_beta", 2))
    seed0 = int(runc["seed"])
    preset = str(model.get("preset", ""))
    _write_manifest(out, "phase-scan", cfg)
    rows = []
    for beta in betas:
        for k in range(seeds_per):
            seed = seed0 + k
            try:
                if preset == "sextuple":
                    init = sextuple_preset(
                        float(model.get("alpha", 0.1)), beta=float(beta))
                else:
                    m = dict(model)
                    m["beta"] = float(beta)
                    init = _init_config_from(m)
                chain = init_chain(init, seed=seed)
                chain, events, _ = run_chain(
                    chain, _rule_table(), _policy_from(cfg),
                    stop={"min_survivors": 0})
            except (EngineError, ValueError) as exc:
                rows.append((float(beta), seed, "error", 0.0, 0.0, 0.0, 0.0,
                             str(exc)))
                continue
            census = _cell_type_census(events)
            p_events = sum(1 for e in events if e.kind == "p")
            disc = census.get(-1, 0.0)
            t2 = census.get(2, 0.0)
            nm = chain.non_monotone_count / max(chain.steps, 1)
            if p_events == 0:
                label = "all-0s-like"
            elif t2 >= 0.99:
                label = "all-2s-like"
            elif disc >= 0.99:
                label = "disconnected"
            else:
                label = "other"
            rows.append((float(beta), seed, label, disc, t2,
                         p_events / max(chain.steps, 1), nm, ""))
    rows.sort(key=lambda r: (r[0], r[1]))
    if "csv" in emit:
        with open(os.path.join(out, "phase_scan.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["beta", "seed", "label", "disconnected_fraction",
                        "type2_fraction", "p_event_fraction",
                        "non_monotone_fraction", "error"])
            for r in rows:
                w.writerow([repr(r[0]), r[1], r[2], repr(r[3]), repr(r[4]),
                            repr(r[5]), repr(r[6]), r[7]])
    if preset == "sextuple":
        try:
            alpha, beta, init, events = search_sextuple(_rule_table())
        except EngineError as exc:
            print(f"phase-scan: sextuple search failed: {exc}",
                  file=sys.stderr)
            return EXIT_INVARIANT
        fixture = {
            "model": {"preset": "sextuple", "alpha": alpha, "beta": beta,
                      "J": init.J, "p": init.p},
            "meta": {"command": "phase-scan", "version": __version__},
        }
        write_config(os.path.join(out, "sextuple_fixture.txt"), fixture)
        if "jsonl" in emit:
            with open(os.path.join(out, "sextuple_events.jsonl"), "w") as fh:
                for e in events:
                    fh.write(e.to_json() + "\n")
    return EXIT_OK


def _cell_type_census(events) -> dict:
    """Final distribution of generated cell types over J/p events."""
    types = [e.new_type for e in events if e.new_type is not None]
    if not types:
        return {}
    out: dict[int, float] = {}
    for t in types:
        out[t] = out.get(t, 0.0) + 1.0 / len(types)
    return out


def cmd_flow_pde(args) -> int:
    cfg, out, emit = _resolve(args)
    model = cfg["model"]
    system = str(model.get("system", "all0s"))
    g0 = float(model.get("gamma0", 1.0))
    g_stop = float(model.get("gamma_stop", 5.0 * g0))
    n_grid = int(model.get("n_grid", 4096))
    zeta_max = model.get("zeta_max")
    kwargs = dict(
        system=system, gamma_span=(g0, g_stop), n_grid=n_grid,
        drift_tol=float(model.get("drift_tol", 1e-4)),
        include_log72=bool(model.get("include_log72", False)),
    )
    if zeta_max is not None:
        kwargs["zeta_max"] = float(zeta_max)

    def expo(z):
        return np.exp(-z / g0) / g0

    try:
        if system == "all0s":
            grid = flow.integrate_flow_equations(expo, **kwargs)
        elif system == "all2s":
            grid = flow.integrate_flow_equations((expo, expo), **kwargs)
        else:
            print(f"flow-pde: unknown system {system!r}", file=sys.stderr)
            return EXIT_CONFIG
    except flow.StepSizeError as exc:
        print(f"flow-pde: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    _write_manifest(out, "flow-pde", cfg)
    if "csv" in emit:
        with open(os.path.join(out, "flow_pde.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["gamma", "front_J", "front_p", "drift_J", "drift_p",
                        "idfp_l1"])
            for i, gam in enumerate(grid.gammas):
                pj = grid.p_J[i]
                l1 = float(np.trapezoid(
                    np.abs(pj - flow.idfp_density(grid.zeta, gam)),
                    grid.zeta))
                pp0 = grid.p_p[i][0] if grid.p_p else ""
                dp = grid.drift_p[i] if grid.drift_p else ""
                w.writerow([repr(float(gam)), repr(float(pj[0])),
                            repr(float(pp0)) if pp0 != "" else "",
                            repr(float(grid.drift_J[i])),
                            repr(float(dp)) if dp != "" else "", repr(l1)])
    if "svg" in emit:
        plots.density_profiles(os.path.join(out, "flow_pde.svg"), grid)
    return EXIT_OK


# ---------------------------------------------------------------------------

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="xxladder",
        description="Strong-disorder RG toolkit for measured XX chains "
                    "mapped to non-Hermitian spin ladders")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("spectrum", cmd_spectrum), ("rules", cmd_rules),
                     ("rsrg", cmd_rsrg), ("phase-scan", cmd_phase_scan),
                     ("flow-pde", cmd_flow_pde)):
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None)
        sp.add_argument("--out", default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--emit", default=None,
                        help="comma list from csv,jsonl,svg")
        sp.set_defaults(fn=fn)
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonConvergenceError, flow.StepSizeError, EngineError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
