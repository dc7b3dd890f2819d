"""Batch CLI: solve, simulate, and report on the benchmark systems.

Every run writes its artifacts into one output directory together with a
manifest.json recording the full configuration, the disturbance tables,
derived bounds, per-phase wall-clock, and the design knobs in effect, so
any number in the CSVs can be reproduced from the manifest alone.  CSV
floats are written with repr (shortest round-trip), which makes repeat
runs with the same seed byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import re
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .cvar import (default_s_resolution, outer_minimize, solve_cvar_inner)
from .errors import MemoryBudgetError, ParameterError, RiskctlError
from .eu import NONNEGATIVE, RAW, solve_eu
from .model import SystemModel, ValueTable
from .neutral import solve_risk_neutral
from .plots import (plot_pedagogical, plot_safe_sets, plot_tradeoff,
                    plot_value_table)
from .safesets import export_mask_csv, sublevel_mask
from .simulate import simulate_cvar, simulate_markov_policy, tradeoff_table
from .systems import SYSTEM_BUILDERS, pedagogical_curves

EU = "eu"
CVAR = "cvar"
RISK_NEUTRAL = "risk-neutral"
MODES = ("solve", "simulate", "tradeoff", "safe-sets", "pedagogical")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_MEMORY = 3
EXIT_NUMERIC = 4

# Informal schema for --config JSON documents (also in the README):
# every key is optional except mode; unknown keys are rejected.
CONFIG_SCHEMA = {
    "mode": "one of " + ", ".join(MODES),
    "system": "thermostat | stormwater",
    "solver": "eu | cvar | risk-neutral",
    "thetas": "list of negative floats (eu sweep)",
    "alphas": "list of floats in (0, 1] (cvar sweep / stat levels)",
    "variant": "raw | nonnegative (eu)",
    "s_res": "int >= 2: intervals on [0, a_hi] of the budget grid",
    "n": "int >= 1: trajectories per sample set",
    "seed": "uint64 base seed",
    "x0": "list of initial states (each a list of floats)",
    "r": "list of safe-set thresholds",
    "out": "output directory",
    "jobs": "parallel chunk count (env RISKCTL_JOBS overrides)",
    "mem_budget": "bytes allowed for augmented value tables",
    "figures": "bool: render PNG figures next to the CSVs",
    "gammas": "pedagogical certainty-equivalent weights",
    "u_steps": "pedagogical u-grid point count on [0, 0.25]",
}


@dataclass
class RunConfig:
    mode: str = "solve"
    system: str = ""
    solver: str = EU
    thetas: list = field(default_factory=list)
    alphas: list = field(default_factory=list)
    variant: str = RAW
    s_res: int | None = None
    n: int = 100_000
    seed: int = 0
    x0: list = field(default_factory=list)
    r: list = field(default_factory=list)
    out: str = "riskctl-out"
    jobs: int = 0
    mem_budget: int = 8 << 30
    figures: bool = True
    gammas: list = field(default_factory=lambda: [0.0, 1.0, 5.0])
    u_steps: int = 101

    def validate(self):
        if self.mode not in MODES:
            raise ParameterError(f"mode: unknown mode {self.mode!r}")
        if self.mode == "pedagogical":
            return
        if self.system not in SYSTEM_BUILDERS:
            raise ParameterError(
                f"system: unknown system {self.system!r}; "
                f"choose from {sorted(SYSTEM_BUILDERS)}")
        if self.solver not in (EU, CVAR, RISK_NEUTRAL):
            raise ParameterError(f"solver: unknown solver {self.solver!r}")
        if self.solver == EU:
            if not self.thetas:
                raise ParameterError("theta: eu runs need a non-empty sweep")
            for th in self.thetas:
                if th >= 0:
                    raise ParameterError(f"theta: must be < 0, got {th}")
            if self.variant not in (RAW, NONNEGATIVE):
                raise ParameterError(f"variant: unknown {self.variant!r}")
        if self.solver == CVAR and not self.alphas:
            raise ParameterError("alpha: cvar runs need a non-empty sweep")
        for a in self.alphas:
            if not 0.0 < a <= 1.0:
                raise ParameterError(f"alpha: must be in (0, 1], got {a}")
        if self.n < 1:
            raise ParameterError(f"n: must be >= 1, got {self.n}")
        if not 0 <= self.seed < 2**64:
            raise ParameterError("seed: must fit in 64 unsigned bits")
        if self.mode in ("simulate", "tradeoff") and not self.x0:
            raise ParameterError(f"x0: {self.mode} needs initial conditions")
        if self.mode == "safe-sets":
            if not self.r:
                raise ParameterError("r: safe-sets needs thresholds")
            sweep = self.thetas if self.solver == EU else self.alphas
            if self.solver != RISK_NEUTRAL and len(sweep) != 1:
                raise ParameterError(
                    "safe-sets runs take exactly one theta/alpha")

    def sweep(self) -> list:
        if self.solver == EU:
            return list(self.thetas)
        if self.solver == CVAR:
            return list(self.alphas)
        return [None]


def _tag(solver: str, param) -> str:
    if solver == EU:
        return f"theta_{param!r}"
    if solver == CVAR:
        return f"alpha_{param!r}"
    return "risk_neutral"


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(value) -> str:
    return repr(float(value))


class _Runner:
    """Executes one validated RunConfig and collects manifest data."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.phases: dict[str, float] = {}
        self.artifacts: list[str] = []
        self.model: SystemModel | None = None
        self._solutions: dict = {}
        os.makedirs(config.out, exist_ok=True)
        if config.mode != "pedagogical":
            self.model = SYSTEM_BUILDERS[config.system]()
            self._rn = None
            self._inner = None
            dim = self.model.state_grid.ndim
            for x0 in config.x0:
                if len(x0) != dim:
                    raise ParameterError(
                        f"x0: {config.system} states have {dim} "
                        f"component(s), got {x0}")

    def _path(self, name: str) -> str:
        path = os.path.join(self.config.out, name)
        self.artifacts.append(name)
        return path

    def _timed(self, name: str, fn):
        start = time.perf_counter()
        result = fn()
        self.phases[name] = self.phases.get(name, 0.0) + (
            time.perf_counter() - start)
        return result

    @property
    def s_resolution(self) -> int:
        if self.config.s_res is not None:
            return self.config.s_res
        return default_s_resolution(self.model)

    def _risk_neutral(self):
        if self._rn is None:
            self._rn = self._timed(
                "solve", lambda: solve_risk_neutral(self.model))
        return self._rn

    def _cvar_inner(self):
        if self._inner is None:
            self._inner = self._timed(
                "solve", lambda: solve_cvar_inner(
                    self.model, self.s_resolution,
                    memory_budget=self.config.mem_budget))
        return self._inner

    def _solve_one(self, param):
        """(values ValueTable in original cost units, policy info) per param."""
        key = (self.config.solver, param)
        if key in self._solutions:
            return self._solutions[key]
        if self.config.solver == EU:
            sol = self._timed("solve", lambda: solve_eu(
                self.model, param, self.config.variant))
            values = ValueTable(0, self.model.state_grid.axes,
                                sol.optimal_values)
            out = (values, sol)
        elif self.config.solver == CVAR:
            inner = self._cvar_inner()
            cv = self._timed("outer", lambda: outer_minimize(inner, param))
            out = (cv.values, cv)
        else:
            tables, policy = self._risk_neutral()
            values = ValueTable(0, self.model.state_grid.axes,
                                self.model.lower_bound_b + tables[0].values)
            out = (values, policy)
        self._solutions[key] = out
        return out

    # -- artifact writers ---------------------------------------------------

    def write_values(self, tag: str, values: ValueTable):
        axes = values.axes
        header = [f"x{i + 1}" for i in range(len(axes))] + ["value"]
        mesh = np.meshgrid(*axes, indexing="ij")
        coords = np.stack([m.ravel() for m in mesh], axis=-1)
        flat = values.values.ravel()
        rows = [[_fmt(c) for c in coords[i]] + [_fmt(flat[i])]
                for i in range(coords.shape[0])]
        _write_csv(self._path(f"values_{tag}.csv"), header, rows)
        if self.config.figures:
            plot_value_table(values, self._path(f"values_{tag}.png"),
                             title=tag)

    def write_policy_eu(self, tag: str, policy_indices):
        axes = self.model.state_grid.axes
        n = self.model.horizon
        header = ([f"x{i + 1}" for i in range(len(axes))]
                  + [f"u_t{t}" for t in range(n)])
        mesh = np.meshgrid(*axes, indexing="ij")
        coords = np.stack([m.ravel() for m in mesh], axis=-1)
        controls = self.model.controls
        flat = [controls[policy_indices[t].ravel()] for t in range(n)]
        rows = [[_fmt(c) for c in coords[i]]
                + [_fmt(flat[t][i]) for t in range(n)]
                for i in range(coords.shape[0])]
        _write_csv(self._path(f"policy_{tag}.csv"), header, rows)

    def write_policy_cvar(self, tag: str, inner, cv):
        axes = inner.state_axes + (inner.s_axis,)
        n = self.model.horizon
        header = ([f"x{i + 1}" for i in range(len(inner.state_axes))]
                  + ["s"] + [f"u_t{t}" for t in range(n)])
        mesh = np.meshgrid(*axes, indexing="ij")
        coords = np.stack([m.ravel() for m in mesh], axis=-1)
        controls = self.model.controls
        flat = [controls[inner.policy[t].ravel()] for t in range(n)]
        rows = [[_fmt(c) for c in coords[i]]
                + [_fmt(flat[t][i]) for t in range(n)]
                for i in range(coords.shape[0])]
        _write_csv(self._path(f"policy_{tag}.csv"), header, rows)
        # minimizing initial budgets per state node
        bh = [f"x{i + 1}" for i in range(len(inner.state_axes))] + ["s_star"]
        smesh = np.meshgrid(*inner.state_axes, indexing="ij")
        scoords = np.stack([m.ravel() for m in smesh], axis=-1)
        sb = cv.budgets.ravel()
        brows = [[_fmt(c) for c in scoords[i]] + [_fmt(sb[i])]
                 for i in range(scoords.shape[0])]
        _write_csv(self._path(f"budgets_{tag}.csv"), bh, brows)

    def _sample_set(self, param, x0):
        jobs = self.config.jobs or 1
        n, seed = self.config.n, self.config.seed
        if self.config.solver == CVAR:
            inner = self._cvar_inner()
            return self._timed("simulate", lambda: simulate_cvar(
                self.model, inner, param, x0, n, seed, jobs))
        if self.config.solver == EU:
            _, sol = self._solve_one(param)
            return self._timed("simulate", lambda: simulate_markov_policy(
                self.model, sol.policy.indices, x0, n, seed, jobs))
        _, policy = self._solve_one(param)
        return self._timed("simulate", lambda: simulate_markov_policy(
            self.model, policy.indices, x0, n, seed, jobs))

    # -- modes --------------------------------------------------------------

    def run_solve(self):
        for param in self.config.sweep():
            tag = _tag(self.config.solver, param)
            values, extra = self._solve_one(param)
            self.write_values(tag, values)
            if self.config.solver == CVAR:
                self.write_policy_cvar(tag, self._cvar_inner(), extra)
            elif self.config.solver == EU:
                self.write_policy_eu(tag, extra.policy.indices)
            else:
                self.write_policy_eu(tag, extra.indices)

    def run_simulate(self):
        for x0 in self.config.x0:
            for param in self.config.sweep():
                tag = _tag(self.config.solver, param)
                x0tag = "_".join(repr(float(c)) for c in x0)
                samples = self._sample_set(param, x0)
                rows = [[_fmt(z)] for z in samples.samples]
                _write_csv(self._path(f"samples_{tag}_x0_{x0tag}.csv"),
                           ["z"], rows)

    def _stat_alphas(self):
        if self.config.solver == CVAR:
            return sorted(self.config.alphas)
        return sorted(self.config.alphas) if self.config.alphas else []

    def run_tradeoff(self):
        alphas = self._stat_alphas()
        header = ["parameter", "x0", "n", "seed", "mean", "variance"]
        for a in alphas:
            header += [f"var_{a:g}", f"exceedance_{a:g}", f"cvar_{a:g}"]
        rows = []
        rows_by_x0 = {}
        for x0 in self.config.x0:
            sets = {}
            for param in self.config.sweep():
                key = param if param is not None else 0.0
                sets[key] = self._sample_set(param, x0)
            trows = tradeoff_table(sets, alphas)
            rows_by_x0[tuple(x0)] = trows
            x0tag = ";".join(_fmt(c) for c in x0)
            for tr in trows:
                row = [_fmt(tr.parameter), x0tag, self.config.n,
                       self.config.seed, _fmt(tr.stats.mean),
                       _fmt(tr.stats.variance)]
                for a in alphas:
                    row += [_fmt(tr.stats.var_at[a]),
                            _fmt(tr.stats.exceedance_at[a]),
                            _fmt(tr.stats.cvar_at[a])]
                rows.append(row)
        _write_csv(self._path("tradeoff.csv"), header, rows)
        if self.config.figures:
            kind = CVAR if self.config.solver == CVAR else EU
            labeled = {(x0[0] if len(x0) == 1 else tuple(x0)): v
                       for x0, v in rows_by_x0.items()}
            plot_tradeoff(labeled, self._path("tradeoff.png"), kind)

    def run_safe_sets(self):
        param = self.config.sweep()[0]
        values, _ = self._solve_one(param)
        masks = {}
        for r in sorted(self.config.r):
            mask = sublevel_mask(values, r)
            masks[r] = mask
            path = self._path(f"safesets_{r!r}.csv")
            export_mask_csv(values, mask, path)
        if self.config.figures:
            plot_safe_sets(values, masks, self._path("safesets.png"),
                           title=_tag(self.config.solver, param))

    def run_pedagogical(self):
        cfg = self.config
        u_grid = np.linspace(0.0, 0.25, cfg.u_steps)
        alphas = sorted(cfg.alphas) if cfg.alphas else [1.0, 0.5, 0.25, 0.05]
        rows = self._timed("solve", lambda: pedagogical_curves(
            u_grid, cfg.gammas, alphas))
        header = list(rows[0].keys())
        out_rows = [[_fmt(row[k]) for k in header] for row in rows]
        _write_csv(self._path("pedagogical.csv"), header, out_rows)
        if cfg.figures:
            plot_pedagogical(rows, self._path("pedagogical.png"))

    def write_manifest(self):
        cfg = self.config
        manifest = {
            "tool": "riskctl",
            "version": __version__,
            "config": asdict(cfg),
            "knobs": {
                "tie_break": "smallest-control-index",
                "budget_tie_tolerance": 1e-9,
                "policy_lookup": "nearest-grid-node",
                "interpolation": "multilinear",
                "state_clamping": "grid-bounding-box",
                "budget_extension": "slope-minus-one-below-range",
                "eu_stabilization": {
                    "raw": "max-shift log-sum-exp",
                    "nonnegative": "direct exponentiation (classic form)",
                },
                "rng": "philox keyed by (seed << 64) | trajectory_index",
                "s_grid": "[-a_hi, a_hi], 0 and a_hi exact, dense half on [0, a_hi]",
                "effective_jobs": cfg.jobs or 1,
            },
            "phase_seconds": self.phases,
            "artifacts": sorted(self.artifacts),
        }
        if self.model is not None:
            manifest["system"] = {
                "name": self.model.name,
                "horizon": self.model.horizon,
                "cost_lower": self.model.cost_lower,
                "cost_upper": self.model.cost_upper,
                "b_lower": self.model.lower_bound_b,
                "a_hi": self.model.cost_span_a,
                "controls": self.model.controls.tolist(),
                "state_axes": [ax.tolist()
                               for ax in self.model.state_grid.axes],
                "disturbance": {
                    "support": self.model.disturbance.support.tolist(),
                    "probabilities":
                        self.model.disturbance.probabilities.tolist(),
                },
            }
            if self.config.solver == CVAR:
                manifest["knobs"]["s_resolution"] = self.s_resolution
        path = os.path.join(cfg.out, "manifest.json")
        with open(path, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def run(self):
        mode = self.config.mode
        if mode == "solve":
            self.run_solve()
        elif mode == "simulate":
            self.run_simulate()
        elif mode == "tradeoff":
            self.run_tradeoff()
        elif mode == "safe-sets":
            self.run_safe_sets()
        elif mode == "pedagogical":
            self.run_pedagogical()
        self.write_manifest()


def run(config: RunConfig) -> int:
    """Validate and execute a run; returns a process exit status."""
    try:
        config.validate()
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        _Runner(config).run()
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except MemoryBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MEMORY
    except RiskctlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _float_list(values) -> list[float]:
    out = []
    for chunk in values or []:
        out.extend(float(v) for v in str(chunk).split(",") if v != "")
    return out


def _x0_list(values) -> list[list[float]]:
    return [[float(v) for v in str(chunk).split(",")] for chunk in values or []]


# lets "--theta -5e-5" and "--r -2,0,2" parse: tokens that look like
# negative numbers or comma-separated number lists are values, not flags
_NEGATIVE_NUMBER = re.compile(r"^-[\d.][\d.,eE+-]*$")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riskctl",
        description="risk-averse optimal control on grids: solve, simulate, "
                    "and report")
    parser._negative_number_matcher = _NEGATIVE_NUMBER
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode)
        p._negative_number_matcher = _NEGATIVE_NUMBER
        p.add_argument("--config", help="JSON file with RunConfig fields; "
                                        "overrides the other flags")
        p.add_argument("--system", default="",
                       choices=["", *sorted(SYSTEM_BUILDERS)])
        p.add_argument("--solver", default=EU,
                       choices=[EU, CVAR, RISK_NEUTRAL])
        p.add_argument("--theta", action="append",
                       help="EU level(s), repeatable or comma separated")
        p.add_argument("--alpha", action="append",
                       help="CVaR level(s), repeatable or comma separated")
        p.add_argument("--variant", default=RAW, choices=[RAW, NONNEGATIVE])
        p.add_argument("--s-res", type=int, default=None,
                       help="budget-grid intervals on [0, a_hi]")
        p.add_argument("--n", type=int, default=100_000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--x0", action="append",
                       help="initial state, comma separated components; "
                            "repeatable")
        p.add_argument("--r", action="append",
                       help="safe-set threshold(s)")
        p.add_argument("--out", default="riskctl-out")
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
        p.add_argument("--mem-budget", type=int, default=8 << 30)
        p.add_argument("--no-figures", action="store_true")
        p.add_argument("--gamma", action="append",
                       help="pedagogical certainty-equivalent weight(s)")
        p.add_argument("--u-steps", type=int, default=101)
    return parser


def config_from_args(args) -> RunConfig:
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        unknown = set(data) - set(RunConfig.__dataclass_fields__)
        if unknown:
            raise ParameterError(f"config: unknown keys {sorted(unknown)}")
        data.setdefault("mode", args.mode)
        return RunConfig(**data)
    cfg = RunConfig(
        mode=args.mode,
        system=args.system,
        solver=args.solver,
        thetas=_float_list(args.theta),
        alphas=_float_list(args.alpha),
        variant=args.variant,
        s_res=args.s_res,
        n=args.n,
        seed=args.seed,
        x0=_x0_list(args.x0),
        r=_float_list(args.r),
        out=args.out,
        jobs=args.jobs,
        mem_budget=args.mem_budget,
        figures=not args.no_figures,
        u_steps=args.u_steps,
    )
    if args.gamma:
        cfg.gammas = _float_list(args.gamma)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except (ParameterError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    env_jobs = os.environ.get("RISKCTL_JOBS")
    if env_jobs is not None:
        try:
            config.jobs = int(env_jobs)
        except ValueError:
            print(f"error: RISKCTL_JOBS={env_jobs!r} is not an integer",
                  file=sys.stderr)
            return EXIT_VALIDATION
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
