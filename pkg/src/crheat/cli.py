"""Scenario runner.

``crheat run <config.json> [--out DIR] [--seed N] [--threads K]`` loads a
JSON scenario description, simulates it, and writes three artifacts into
the output directory:

* ``series.csv``: time series of the standard readout columns,
* ``summary.csv``: one row per swept value (sweep scenarios only),
* ``manifest.json``: config echo, self-check results and a digest.

The digest covers only deterministic fields (never wall-clock time or
thread count), and all numeric output is produced by deterministic
reductions, so a given config, seed and package version yields
byte-identical CSV files no matter how often or how parallel it runs.

``crheat validate <config.json>`` checks a config without running it;
``crheat list-scenarios`` enumerates what can be run.  Exit codes:
0 success, 2 configuration error, 3 numerical failure or failed check.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .errors import ConfigError, CrheatError
from .hilbert import DensityOp, LinOp, SpaceSpec, basis_ket, dag, destroy, identity, kron, sigma_minus
from .lindblad import evolve, steady_state
from .models import (
    DissipationSpec,
    JumpChannel,
    RabiParams,
    SidebandParams,
    build_rabi,
    build_sideband,
    jump_channels,
)
from .observables import (
    cumulative_emission,
    emission_rates,
    excited_population,
    mean_phonon,
)
from .spectra import decorrelation_energy, entanglement_entropy, ground_state, product_ground
from .trajectories import GENERATOR, ensemble_mean

SERIES_COLUMNS = (
    "time",
    "excited_population",
    "mean_phonon",
    "rate_a",
    "rate_b",
    "total_rate",
    "trace_error",
    "min_eigenvalue",
)

_RABI_KEYS = {"omega_a", "omega_b", "g_rot", "g_cr", "fock_cutoff"}
_SIDEBAND_KEYS = {"delta", "nu", "omega_rabi", "eta", "include_cr", "fock_cutoff"}
_TOP_KEYS = {
    "scenario",
    "model",
    "dissipation",
    "t_final",
    "samples",
    "tolerances",
    "seed",
    "output",
    "sweep",
    "trajectories",
}

#: Settling horizon of the quench scenario, in units of the slowest
#: damping time: the pre-quench model relaxes for 20 / min positive rate.
QUENCH_SETTLE_FACTOR = 20.0


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    model: RabiParams | SidebandParams
    dissipation: DissipationSpec
    t_final: float
    samples: int
    rel_tol: float
    abs_tol: float
    seed: int
    output: str | None
    sweep_g_cr: tuple[float, ...] | None
    traj_count: int | None
    traj_dt: float | None


def _require_type(value, types, field: str, what: str):
    if isinstance(value, bool) and bool not in (
        types if isinstance(types, tuple) else (types,)
    ):
        raise ConfigError(f"field '{field}' must be {what}", field=field)
    if not isinstance(value, types):
        raise ConfigError(f"field '{field}' must be {what}", field=field)
    return value


def _get(obj: dict, field: str, types, what: str, default=None, required=True):
    if field not in obj:
        if required:
            raise ConfigError(f"missing required field '{field}'", field=field)
        return default
    return _require_type(obj[field], types, field, what)


def _check_unknown(obj: dict, allowed: set, where: str) -> None:
    for key in obj:
        if key not in allowed:
            prefix = f"{where}." if where else ""
            raise ConfigError(f"unknown field '{prefix}{key}'", field=key)


def load_config(path: str | Path) -> dict:
    """Read and JSON-decode a config file (errors become ConfigError)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return raw


def parse_config(raw: dict) -> ScenarioConfig:
    """Validate a raw config dict against the scenario schema.

    Unknown fields anywhere are rejected; every error message names the
    offending field.
    """
    _check_unknown(raw, _TOP_KEYS, "")
    scenario = _get(raw, "scenario", str, "a string")
    if scenario not in SCENARIOS:
        raise ConfigError(
            f"field 'scenario' must be one of {sorted(SCENARIOS)}, got {scenario!r}",
            field="scenario",
        )

    model_raw = _get(raw, "model", dict, "an object")
    sideband = scenario == "sideband"
    keys = _SIDEBAND_KEYS if sideband else _RABI_KEYS
    _check_unknown(model_raw, keys, "model")
    for key in keys:
        if key not in model_raw:
            raise ConfigError(f"missing required field 'model.{key}'", field=key)
        want_bool = key == "include_cr"
        want_int = key == "fock_cutoff"
        if want_bool:
            _require_type(model_raw[key], bool, f"model.{key}", "a boolean")
        elif want_int:
            _require_type(model_raw[key], int, f"model.{key}", "an integer")
        else:
            _require_type(
                model_raw[key], (int, float), f"model.{key}", "a number"
            )
    try:
        if sideband:
            model = SidebandParams(
                delta=float(model_raw["delta"]),
                nu=float(model_raw["nu"]),
                omega_rabi=float(model_raw["omega_rabi"]),
                eta=float(model_raw["eta"]),
                include_cr=model_raw["include_cr"],
                fock_cutoff=model_raw["fock_cutoff"],
            )
        else:
            model = RabiParams(
                omega_a=float(model_raw["omega_a"]),
                omega_b=float(model_raw["omega_b"]),
                g_rot=float(model_raw["g_rot"]),
                g_cr=float(model_raw["g_cr"]),
                fock_cutoff=model_raw["fock_cutoff"],
            )
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from exc

    diss_raw = _get(raw, "dissipation", dict, "an object")
    _check_unknown(diss_raw, {"gamma_a", "kappa_b"}, "dissipation")
    for key in ("gamma_a", "kappa_b"):
        if key not in diss_raw:
            raise ConfigError(
                f"missing required field 'dissipation.{key}'", field=key
            )
        _require_type(diss_raw[key], (int, float), f"dissipation.{key}", "a number")
    try:
        dissipation = DissipationSpec(
            gamma_a=float(diss_raw["gamma_a"]), kappa_b=float(diss_raw["kappa_b"])
        )
    except ValueError as exc:
        raise ConfigError(f"dissipation: {exc}") from exc

    t_final = float(_get(raw, "t_final", (int, float), "a number"))
    if not (t_final > 0 and np.isfinite(t_final)):
        raise ConfigError("field 't_final' must be positive", field="t_final")

    samples = _get(raw, "samples", int, "an integer", default=201, required=False)
    if samples < 2:
        raise ConfigError("field 'samples' must be at least 2", field="samples")

    tol_raw = _get(raw, "tolerances", dict, "an object", default={}, required=False)
    _check_unknown(tol_raw, {"rel_tol", "abs_tol"}, "tolerances")
    rel_tol = float(
        _get(tol_raw, "rel_tol", (int, float), "a number", default=1e-8, required=False)
    )
    abs_tol = float(
        _get(tol_raw, "abs_tol", (int, float), "a number", default=1e-10, required=False)
    )
    if not 1e-12 <= rel_tol <= 1e-4:
        raise ConfigError(
            "field 'tolerances.rel_tol' must lie in [1e-12, 1e-4]", field="rel_tol"
        )
    if not (abs_tol > 0 and np.isfinite(abs_tol)):
        raise ConfigError(
            "field 'tolerances.abs_tol' must be positive", field="abs_tol"
        )

    seed = _get(raw, "seed", int, "an integer")
    if not 0 <= seed < 2 ** 64:
        raise ConfigError(
            "field 'seed' must fit in an unsigned 64-bit integer", field="seed"
        )

    output = _get(raw, "output", str, "a string", default=None, required=False)

    sweep_g_cr = None
    if scenario == "vacuum-emission":
        sweep_raw = _get(raw, "sweep", dict, "an object")
        _check_unknown(sweep_raw, {"g_cr"}, "sweep")
        values = _get(sweep_raw, "g_cr", list, "an array", required=True)
        if len(values) < 2:
            raise ConfigError(
                "field 'sweep.g_cr' must list at least two values", field="g_cr"
            )
        for v in values:
            _require_type(v, (int, float), "sweep.g_cr", "an array of numbers")
            if v < 0:
                raise ConfigError(
                    "field 'sweep.g_cr' values must be non-negative", field="g_cr"
                )
        if not all(b > a for a, b in zip(values, values[1:])):
            raise ConfigError(
                "field 'sweep.g_cr' values must be strictly increasing", field="g_cr"
            )
        sweep_g_cr = tuple(float(v) for v in values)
    elif "sweep" in raw:
        raise ConfigError(
            "field 'sweep' is only valid for the vacuum-emission scenario",
            field="sweep",
        )

    traj_count = traj_dt = None
    if scenario == "trajectories":
        traj_raw = _get(raw, "trajectories", dict, "an object")
        _check_unknown(traj_raw, {"count", "dt"}, "trajectories")
        traj_count = _get(traj_raw, "count", int, "an integer")
        if traj_count < 2:
            raise ConfigError(
                "field 'trajectories.count' must be at least 2", field="count"
            )
        traj_dt = float(_get(traj_raw, "dt", (int, float), "a number"))
        if not (traj_dt > 0 and np.isfinite(traj_dt)):
            raise ConfigError(
                "field 'trajectories.dt' must be positive", field="dt"
            )
        n_steps = round(t_final / traj_dt)
        if n_steps < 1 or abs(n_steps * traj_dt - t_final) > 1e-9 * max(1.0, t_final):
            raise ConfigError(
                "field 't_final' must be an integer multiple of trajectories.dt",
                field="t_final",
            )
        spacing = t_final / (samples - 1)
        k = round(spacing / traj_dt)
        if k < 1 or abs(k * traj_dt - spacing) > 1e-9 * max(1.0, spacing):
            raise ConfigError(
                "the sample grid (t_final, samples) must align with "
                "trajectories.dt",
                field="samples",
            )
    elif "trajectories" in raw:
        raise ConfigError(
            "field 'trajectories' is only valid for the trajectories scenario",
            field="trajectories",
        )

    if scenario == "dark-state" and model.g_cr != 0.0:
        raise ConfigError(
            "field 'model.g_cr' must be 0 for the dark-state scenario",
            field="g_cr",
        )
    if scenario == "quench" and model.g_cr == 0.0:
        raise ConfigError(
            "field 'model.g_cr' must be positive for the quench scenario "
            "(there is nothing to switch on)",
            field="g_cr",
        )

    return ScenarioConfig(
        scenario=scenario,
        model=model,
        dissipation=dissipation,
        t_final=t_final,
        samples=int(samples),
        rel_tol=rel_tol,
        abs_tol=abs_tol,
        seed=int(seed),
        output=output,
        sweep_g_cr=sweep_g_cr,
        traj_count=traj_count,
        traj_dt=traj_dt,
    )


# -- scenario machinery ----------------------------------------------


def _grid(cfg: ScenarioConfig) -> np.ndarray:
    return np.linspace(0.0, cfg.t_final, cfg.samples)


def _series_from_states(times, states, space, channels):
    rows = []
    for t, state in zip(times, states):
        report = emission_rates(state, channels)
        rows.append(
            [
                float(t),
                excited_population(state, space),
                mean_phonon(state, space),
                report.channel_rates[0],
                report.channel_rates[1],
                report.total,
                state.trace_error(),
                state.min_eigenvalue(),
            ]
        )
    return rows


def _check(observed: float, bound: float, sense: str) -> dict:
    passed = observed <= bound if sense == "<=" else observed >= bound
    return {
        "passed": bool(passed),
        "observed": float(observed),
        "bound": float(bound),
        "sense": sense,
    }


def _hygiene_checks(states) -> dict:
    return {
        "max_trace_error": _check(
            max(s.trace_error() for s in states), 1e-8, "<="
        ),
        "max_hermiticity_defect": _check(
            max(s.hermiticity_defect() for s in states), 1e-10, "<="
        ),
        "min_eigenvalue": _check(
            min(s.min_eigenvalue() for s in states), -1e-8, ">="
        ),
    }


def _ground_props(params) -> tuple[float, float]:
    h = build_sideband(params) if isinstance(params, SidebandParams) else build_rabi(params)
    pair = ground_state(h)
    delta_e = decorrelation_energy(h, product_ground(params), pair)
    entropy = entanglement_entropy(pair.state, params.space())
    return delta_e, entropy


def _run_dark_state(cfg: ScenarioConfig, seed: int, threads: int):
    space = cfg.model.space()
    h = build_rabi(cfg.model)
    channels = jump_channels(cfg.dissipation, space)
    rho0 = basis_ket(space.total_dim, 0).to_density()
    result = evolve(
        h, channels, rho0, cfg.t_final,
        rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol, sample_times=_grid(cfg),
    )
    series = _series_from_states(result.times, result.states, space, channels)
    max_rate = max(row[5] for row in series)
    checks = {"max_total_rate": _check(max_rate, 1e-12, "<=")}
    checks.update(_hygiene_checks(result.states))
    results = {"max_total_rate": float(max_rate)}
    return series, None, None, checks, results


def _run_vacuum_emission(cfg: ScenarioConfig, seed: int, threads: int):
    space = cfg.model.space()
    h = build_rabi(cfg.model)
    channels = jump_channels(cfg.dissipation, space)
    rho0 = basis_ket(space.total_dim, 0).to_density()
    result = evolve(
        h, channels, rho0, cfg.t_final,
        rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol, sample_times=_grid(cfg),
    )
    series = _series_from_states(result.times, result.states, space, channels)

    summary_rows = []
    steady_states = []
    for g in cfg.sweep_g_cr:
        params = dataclasses.replace(cfg.model, g_cr=g)
        rho_ss = steady_state(build_rabi(params), channels)
        steady_states.append(rho_ss)
        report = emission_rates(rho_ss, channels)
        delta_e, entropy = _ground_props(params)
        summary_rows.append(
            [
                g,
                excited_population(rho_ss, space),
                mean_phonon(rho_ss, space),
                report.channel_rates[0],
                report.channel_rates[1],
                report.total,
                delta_e,
                entropy,
            ]
        )
    totals = [row[5] for row in summary_rows]
    denergies = [row[6] for row in summary_rows]
    checks = {
        "total_rate_increasing": _check(
            min(b - a for a, b in zip(totals, totals[1:])), 0.0, ">="
        ),
        "decorrelation_energy_increasing": _check(
            min(b - a for a, b in zip(denergies, denergies[1:])), 0.0, ">="
        ),
    }
    checks.update(_hygiene_checks(list(result.states) + steady_states))
    # Strict monotonicity: the minimum successive difference must be > 0,
    # which ">= 0" alone does not capture for exact ties.
    checks["total_rate_increasing"]["passed"] = bool(
        all(b > a for a, b in zip(totals, totals[1:]))
    )
    checks["decorrelation_energy_increasing"]["passed"] = bool(
        all(b > a for a, b in zip(denergies, denergies[1:]))
    )
    summary_header = (
        "g_cr,excited_population,mean_phonon,rate_a,rate_b,total_rate,"
        "decorrelation_energy,entanglement_entropy"
    )
    results = {
        "sweep_g_cr": [float(g) for g in cfg.sweep_g_cr],
        "total_rates": [float(v) for v in totals],
        "decorrelation_energies": [float(v) for v in denergies],
    }
    return series, summary_header, summary_rows, checks, results


def _run_quench(cfg: ScenarioConfig, seed: int, threads: int):
    space = cfg.model.space()
    channels = jump_channels(cfg.dissipation, space)
    rho0 = basis_ket(space.total_dim, 0).to_density()

    pre = dataclasses.replace(cfg.model, g_cr=0.0)
    rates = [r for r in (cfg.dissipation.gamma_a, cfg.dissipation.kappa_b) if r > 0]
    t_settle = QUENCH_SETTLE_FACTOR / min(rates)
    settled = evolve(
        build_rabi(pre), channels, rho0, t_settle,
        rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol, sample_times=[t_settle],
    ).states[-1]

    result = evolve(
        build_rabi(cfg.model), channels, settled, cfg.t_final,
        rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol, sample_times=_grid(cfg),
    )
    series = _series_from_states(result.times, result.states, space, channels)
    emitted = cumulative_emission(
        [row[0] for row in series], [row[5] for row in series]
    )
    checks = {
        "emitted_quanta_positive": _check(emitted, 0.0, ">="),
        "final_rate_positive": _check(series[-1][5], 0.0, ">="),
    }
    checks["emitted_quanta_positive"]["passed"] = bool(emitted > 0)
    checks["final_rate_positive"]["passed"] = bool(series[-1][5] > 0)
    checks.update(_hygiene_checks(result.states))
    results = {
        "settle_time": float(t_settle),
        "emitted_quanta": float(emitted),
        "final_total_rate": float(series[-1][5]),
    }
    return series, None, None, checks, results


def _run_sideband(cfg: ScenarioConfig, seed: int, threads: int):
    space = cfg.model.space()
    channels = jump_channels(cfg.dissipation, space)
    rho0 = basis_ket(space.total_dim, 0).to_density()
    result = evolve(
        build_sideband(cfg.model), channels, rho0, cfg.t_final,
        rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol, sample_times=_grid(cfg),
    )
    series = _series_from_states(result.times, result.states, space, channels)

    summary_rows = []
    floors = {}
    steady_states = []
    for include_cr in (False, True):
        params = dataclasses.replace(cfg.model, include_cr=include_cr)
        rho_ss = steady_state(build_sideband(params), channels)
        steady_states.append(rho_ss)
        report = emission_rates(rho_ss, channels)
        delta_e, entropy = _ground_props(params)
        n_ss = mean_phonon(rho_ss, space)
        floors[include_cr] = n_ss
        summary_rows.append(
            [
                int(include_cr),
                excited_population(rho_ss, space),
                n_ss,
                report.channel_rates[0],
                report.channel_rates[1],
                report.total,
                delta_e,
                entropy,
            ]
        )
    checks = {
        "floor_without_cr_positive": _check(floors[False], 0.0, ">="),
        "cr_raises_floor": _check(floors[True] - floors[False], 0.0, ">="),
    }
    checks["floor_without_cr_positive"]["passed"] = bool(floors[False] > 0)
    checks["cr_raises_floor"]["passed"] = bool(floors[True] > floors[False])
    checks.update(_hygiene_checks(list(result.states) + steady_states))
    summary_header = (
        "include_cr,excited_population,mean_phonon,rate_a,rate_b,total_rate,"
        "decorrelation_energy,entanglement_entropy"
    )
    results = {
        "phonon_floor_without_cr": float(floors[False]),
        "phonon_floor_with_cr": float(floors[True]),
        "floor_ratio": float(floors[True] / floors[False]),
    }
    return series, summary_header, summary_rows, checks, results


def _run_trajectories(cfg: ScenarioConfig, seed: int, threads: int):
    space = cfg.model.space()
    n = space.fock_cutoff
    h = build_rabi(cfg.model)
    channels = jump_channels(cfg.dissipation, space)
    psi0 = basis_ket(space.total_dim, 0)
    sm = sigma_minus()
    observables = [
        kron(dag(sm) @ sm, identity(n)),          # excited population
        kron(identity(2), dag(destroy(n)) @ destroy(n)),  # phonon number
        identity(space.total_dim),                # norm monitor
    ]
    ens = ensemble_mean(
        h, channels, psi0, cfg.t_final, cfg.traj_dt, cfg.traj_count,
        master_seed=seed, observables=observables,
        sample_times=_grid(cfg), n_workers=threads,
    )
    gamma, kappa = cfg.dissipation.gamma_a, cfg.dissipation.kappa_b
    series = []
    for i, t in enumerate(ens.times):
        excited = float(ens.means[0, i])
        phonon = float(ens.means[1, i])
        norm_err = abs(float(ens.means[2, i]) - 1.0)
        series.append(
            [
                float(t),
                excited,
                phonon,
                gamma * excited,
                kappa * phonon,
                gamma * excited + kappa * phonon,
                norm_err,
                # Pure-state mixtures are positive semidefinite by
                # construction; there is no eigenvalue to monitor.
                0.0,
            ]
        )
    checks = {
        "max_norm_error": _check(max(row[6] for row in series), 1e-8, "<=")
    }
    results = {
        "n_trajectories": int(cfg.traj_count),
        "final_excited_mean": float(ens.means[0, -1]),
        "final_excited_se": float(ens.standard_errors[0, -1]),
        "final_phonon_mean": float(ens.means[1, -1]),
        "final_phonon_se": float(ens.standard_errors[1, -1]),
    }
    return series, None, None, checks, results


SCENARIOS = {
    "dark-state": _run_dark_state,
    "vacuum-emission": _run_vacuum_emission,
    "quench": _run_quench,
    "sideband": _run_sideband,
    "trajectories": _run_trajectories,
}

SCENARIO_DESCRIPTIONS = {
    "dark-state": "rotating coupling only: the damped vacuum stays dark",
    "vacuum-emission": "steady emission rates across a counter-rotating sweep",
    "quench": "switch the counter-rotating coupling on and count emitted quanta",
    "sideband": "driven cooling floor with and without the blue-sideband term",
    "trajectories": "quantum-jump ensemble statistics for the damped model",
}


def _echo_config(cfg: ScenarioConfig, seed: int) -> dict:
    echo: dict = {
        "scenario": cfg.scenario,
        "model": dataclasses.asdict(cfg.model),
        "dissipation": dataclasses.asdict(cfg.dissipation),
        "t_final": cfg.t_final,
        "samples": cfg.samples,
        "tolerances": {"rel_tol": cfg.rel_tol, "abs_tol": cfg.abs_tol},
        "seed": seed,
    }
    if cfg.sweep_g_cr is not None:
        echo["sweep"] = {"g_cr": list(cfg.sweep_g_cr)}
    if cfg.traj_count is not None:
        echo["trajectories"] = {"count": cfg.traj_count, "dt": cfg.traj_dt}
    return echo


def _format_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path: Path, header: str, rows, digest: str, scenario: str) -> None:
    lines = [
        f"# crheat {__version__}",
        f"# scenario: {scenario}",
        f"# manifest: {digest}",
        header,
    ]
    for row in rows:
        lines.append(",".join(_format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def run_scenario(
    cfg: ScenarioConfig,
    out_dir: Path,
    seed: int | None = None,
    threads: int = 1,
) -> int:
    """Execute a parsed scenario and write its artifacts.

    Returns the process exit code (0 ok, 3 numerical failure or failed
    self-check).  ``seed`` overrides the config seed; ``threads`` only
    affects scheduling, never results.
    """
    effective_seed = cfg.seed if seed is None else seed
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    echo = _echo_config(cfg, effective_seed)
    started = time.perf_counter()
    try:
        series, summary_header, summary_rows, checks, results = SCENARIOS[
            cfg.scenario
        ](cfg, effective_seed, threads)
    except CrheatError as exc:
        manifest = {
            "tool": "crheat",
            "version": __version__,
            "scenario": cfg.scenario,
            "generator": GENERATOR,
            "config": echo,
            "status": "error",
            "error": str(exc),
            "duration_seconds": time.perf_counter() - started,
            "threads": threads,
        }
        (out_dir / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n"
        )
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3

    status = "ok" if all(c["passed"] for c in checks.values()) else "failed"
    core = {
        "tool": "crheat",
        "version": __version__,
        "scenario": cfg.scenario,
        "generator": GENERATOR,
        "config": echo,
        "checks": checks,
        "results": results,
        "status": status,
    }
    digest = "sha256:" + hashlib.sha256(
        json.dumps(core, sort_keys=True).encode()
    ).hexdigest()
    manifest = dict(core)
    manifest["digest"] = digest
    manifest["duration_seconds"] = time.perf_counter() - started
    manifest["threads"] = threads

    _write_csv(
        out_dir / "series.csv", ",".join(SERIES_COLUMNS), series, digest, cfg.scenario
    )
    if summary_rows is not None:
        _write_csv(
            out_dir / "summary.csv", summary_header, summary_rows, digest, cfg.scenario
        )
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )

    failed = [name for name, c in checks.items() if not c["passed"]]
    if failed:
        print(
            f"{cfg.scenario}: checks failed: {', '.join(sorted(failed))} "
            f"(see {out_dir / 'manifest.json'})",
            file=sys.stderr,
        )
        return 3
    print(f"{cfg.scenario}: ok, wrote {out_dir / 'series.csv'}")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="crheat",
        description="Simulate damped qubit-boson models and their "
        "counter-rotating heating signatures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario config")
    p_run.add_argument("config", help="path to a JSON scenario config")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument(
        "--seed", type=int, default=None, help="override the config seed"
    )
    p_run.add_argument(
        "--threads", type=int, default=1,
        help="worker threads for trajectory ensembles (results unchanged)",
    )

    p_val = sub.add_parser("validate", help="validate a config without running")
    p_val.add_argument("config", help="path to a JSON scenario config")

    sub.add_parser("list-scenarios", help="list runnable scenarios")

    args = parser.parse_args(argv)

    if args.command == "list-scenarios":
        width = max(len(name) for name in SCENARIOS)
        for name in sorted(SCENARIOS):
            print(f"{name:<{width}}  {SCENARIO_DESCRIPTIONS[name]}")
        return 0

    try:
        cfg = parse_config(load_config(args.config))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        print(f"OK: valid {cfg.scenario} scenario configuration")
        return 0

    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        print(
            "config error: --seed must fit in an unsigned 64-bit integer",
            file=sys.stderr,
        )
        return 2
    if args.threads < 1:
        print("config error: --threads must be at least 1", file=sys.stderr)
        return 2

    out_dir = Path(args.out) if args.out else Path(cfg.output or ".")
    return run_scenario(cfg, out_dir, seed=args.seed, threads=args.threads)


if __name__ == "__main__":
    raise SystemExit(main())
