"""Experiment drivers behind the CLI: timer, squeezing classifier, IPC, invariants.

Each driver returns plain result records and, when given an output
directory, writes deterministic CSV files.  Realization ``r`` always uses
seed ``base_seed + r``.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import gaussian, readout, spin
from .config import ExperimentConfig
from .core import IdentityReservoir, run_sequence
from .tasks import SqueezeClassify, squeeze_dataset, timer_sequence, total_ipc

log = logging.getLogger(__name__)


def fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def _map(fn: Callable, items: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _stream_seeds(seed: int, n: int) -> list[int]:
    """Independent integer seeds for the sub-streams of one realization."""
    return [int(x) for x in np.random.SeedSequence(seed).generate_state(n)]


# -- timer ----------------------------------------------------------------

@dataclass
class TimerRealization:
    index: int
    seed: int
    inputs: np.ndarray
    # outputs[(tau, O)] -> (target, prediction) over the evaluated window
    outputs: dict
    mses: dict


def _timer_realization(args) -> TimerRealization:
    cfg, index = args
    t = cfg.task
    seed = cfg.base_seed + index
    sets = cfg.spin["observable_sets"]
    widest = max(sets, key=lambda s: spin.observable_count(cfg.spin["n_spins"], s))
    res = spin.SpinReservoir(cfg.spin_config(seed, widest))
    s, _ = timer_sequence(t["c"], t["taus"][0], t["length"])
    F = run_sequence(res, s, t["washout"])
    if cfg.training["eval_mode"] == "holdout":
        # same network and inputs from an independent random initial state
        rng = np.random.default_rng(_stream_seeds(seed, 1)[0])
        rho0 = spin.random_density_matrix(cfg.spin["n_spins"], rng, rank=1)
        F_eval = run_sequence(res, s, t["washout"], state=res.state_from_density(rho0))
    else:
        F_eval = F
    outputs, mses = {}, {}
    for tau in t["taus"]:
        _, y = timer_sequence(t["c"], tau, t["length"])
        y = y[t["washout"] :]
        for name in sets:
            O = spin.observable_count(cfg.spin["n_spins"], name)
            w = readout.train_linear(F[:, :O], y, cfg.training["ridge"])
            pred = readout.predict(F_eval[:, :O], w)
            outputs[(tau, O)] = (y, pred)
            mses[(tau, O)] = readout.mse(pred, y)
    log.info("timer realization %d done", index)
    return TimerRealization(index, seed, s, outputs, mses)


def run_timer(cfg: ExperimentConfig, out: Path | None = None, jobs: int = 1) -> dict:
    reals = _map(_timer_realization, [(cfg, r) for r in range(cfg.realizations)], jobs)
    reals.sort(key=lambda r: r.index)
    t = cfg.task
    keys = list(reals[0].mses)
    summary = {}
    for key in keys:
        per = np.array([r.mses[key] for r in reals])
        traj = np.mean([r.outputs[key][1] for r in reals], axis=0)
        target = reals[0].outputs[key][0]
        summary[key] = dict(
            mse_mean=float(per.mean()),
            mse_std=float(per.std()),
            mse_of_mean_trajectory=readout.mse(traj, target),
            per_realization=per,
            trajectory=traj,
            trajectory_std=np.std([r.outputs[key][1] for r in reals], axis=0),
            target=target,
        )
    if out is not None:
        k = np.arange(t["washout"], t["length"])
        s = reals[0].inputs[t["washout"] :]
        for (tau, O), v in summary.items():
            write_csv(
                out / f"trajectory_{tau}_{O}.csv",
                ["k", "s", "target", "y_mean", "y_std"],
                zip(k, s, v["target"], v["trajectory"], v["trajectory_std"]),
            )
        write_csv(
            out / "timer_mse.csv",
            ["realization", "seed", "tau", "O", "mse"],
            ((r.index, r.seed, tau, O, r.mses[(tau, O)]) for r in reals for (tau, O) in keys),
        )
        write_csv(
            out / "timer_summary.csv",
            ["tau", "O", "mse_mean", "mse_std", "mse_of_mean_trajectory"],
            ((tau, O, v["mse_mean"], v["mse_std"], v["mse_of_mean_trajectory"]) for (tau, O), v in summary.items()),
        )
    return summary


# -- squeezing classifier -------------------------------------------------

def _classify_realization(args):
    cfg, index = args
    t = cfg.task
    seed = cfg.base_seed + index
    net_seed, dt_seed, data_seed = _stream_seeds(seed, 3)
    g = cfg.gaussian
    rows = []
    for n_classes in t["class_counts"]:
        for mode in t["phase_modes"]:
            random_phase = mode == "random"
            builder = lambda dt: gaussian.build_oscillator_network(cfg.gaussian_config(net_seed, dt))  # noqa: E731
            dt = gaussian.select_dt(builder, g["dt_candidates"], n_classes, random_phase, seed=dt_seed)
            net = builder(dt)
            spec = SqueezeClassify(n_classes, random_phase, t["n_train"], t["n_test"])
            data = squeeze_dataset(spec, t["r_max"], t["phi_max"], seed=data_seed)
            Xtr = gaussian.qelm_features(net, gaussian.squeezed_covariances(data.train_r, data.train_phi))
            Xte = gaussian.qelm_features(net, gaussian.squeezed_covariances(data.test_r, data.test_phi))
            model = readout.train_classifier(Xtr, data.train_r, data.class_values, cfg.training["ridge"])
            acc = float(np.mean(readout.classify(model, Xte) == data.test_r))
            rows.append((n_classes, mode, index, seed, dt, model.train_accuracy, acc))
    return rows


def run_classify(cfg: ExperimentConfig, out: Path | None = None, jobs: int = 1) -> dict:
    per = _map(_classify_realization, [(cfg, r) for r in range(cfg.realizations)], jobs)
    rows = sorted((row for rs in per for row in rs), key=lambda r: (r[0], r[1], r[2]))
    summary = {}
    for n_classes in cfg.task["class_counts"]:
        for mode in cfg.task["phase_modes"]:
            acc = np.array([r[6] for r in rows if r[0] == n_classes and r[1] == mode])
            summary[(n_classes, mode)] = dict(mean=float(acc.mean()), std=float(acc.std()), rates=acc)
    if out is not None:
        write_csv(
            out / "classify_realizations.csv",
            ["n_classes", "phase_mode", "realization", "seed", "dt", "train_accuracy", "test_accuracy"],
            rows,
        )
        write_csv(
            out / "classify_summary.csv",
            ["n_classes", "phase_mode", "mean", "std"],
            ((n, m, v["mean"], v["std"]) for (n, m), v in summary.items()),
        )
    return summary


# -- information processing capacity --------------------------------------

def _ipc_realization(args):
    cfg, index = args
    t = cfg.task
    seed = cfg.base_seed + index
    input_seed = _stream_seeds(seed, 1)[0]
    if t["substrate"] == "identity":
        jobs = [("input", IdentityReservoir())]
    else:
        jobs = [(name, spin.SpinReservoir(cfg.spin_config(seed, name))) for name in cfg.spin["observable_sets"]]
    rows = []
    for name, res in jobs:
        r = total_ipc(res, t["length"], t["d_max"], t["delay_max"], seed=input_seed, washout=t["washout"])
        rows.append((index, seed, name, res.n_features, r.per_degree, r.total))
    return rows


def run_ipc(cfg: ExperimentConfig, out: Path | None = None, jobs: int = 1) -> dict:
    per = _map(_ipc_realization, [(cfg, r) for r in range(cfg.realizations)], jobs)
    rows = sorted((row for rs in per for row in rs), key=lambda r: (r[0], r[2]))
    summary = {}
    for name in dict.fromkeys(r[2] for r in rows):
        mine = [r for r in rows if r[2] == name]
        totals = np.array([r[5] for r in mine])
        summary[name] = dict(
            n_features=mine[0][3],
            total_mean=float(totals.mean()),
            total_std=float(totals.std()),
            totals=totals,
            per_degree={d: float(np.mean([r[4][d] for r in mine])) for d in mine[0][4]},
        )
    if out is not None:
        write_csv(
            out / "ipc_degrees.csv",
            ["realization", "seed", "observables", "n_features", "degree", "capacity"],
            ((r[0], r[1], r[2], r[3], d, c) for r in rows for d, c in sorted(r[4].items())),
        )
        write_csv(
            out / "ipc_summary.csv",
            ["observables", "n_features", "total_mean", "total_std"],
            ((n, v["n_features"], v["total_mean"], v["total_std"]) for n, v in summary.items()),
        )
    return summary


# -- physics and readout invariants ---------------------------------------

@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    value: float
    limit: float
    passed: bool


def _spin_checks(n_spins: int = 6, steps: int = 1000, seed: int = 0) -> list[Check]:
    out = []
    rng = np.random.default_rng(seed)
    for encoding in ("pure", "mixed"):
        cfg = spin.SpinConfig(n_spins=n_spins, encoding=encoding, observable_set="XYZ_ZZ", seed=seed)
        res = spin.SpinReservoir(cfg)
        U = res.propagator()
        unit = float(np.abs(U.conj().T @ U - np.eye(U.shape[0])).max())
        out.append(Check("spin", f"unitarity[{encoding}]", unit, 1e-10, unit <= 1e-10))
        state = res.initial_state()
        worst_obs = 0.0
        for s in rng.uniform(0, 1, steps):
            state = res.step(state, s)
            worst_obs = max(worst_obs, float(np.abs(res.features(state)).max()))
        rho = res.density_matrix(state)
        tr = abs(np.trace(rho) - 1.0)
        herm = float(np.abs(rho - rho.conj().T).max())
        mineig = float(np.linalg.eigvalsh(rho).min())
        out += [
            Check("spin", f"trace[{encoding}]", tr, 1e-10, tr <= 1e-10),
            Check("spin", f"hermiticity[{encoding}]", herm, 1e-10, herm <= 1e-10),
            Check("spin", f"min_eigenvalue[{encoding}]", mineig, -1e-9, mineig >= -1e-9),
            Check("spin", f"observable_bound[{encoding}]", worst_obs, 1.0, worst_obs <= 1.0 + 1e-12),
        ]
    return out


def _gaussian_checks(realizations: int = 100, seed: int = 0) -> list[Check]:
    out = []
    worst_symp, worst_unc, worst_pur = 0.0, np.inf, 0.0
    r_grid = np.linspace(0.0, 2.0, 9)
    phi_grid = np.linspace(0.0, np.pi / 4, 5)
    for k in range(realizations):
        for dt in (1.0, 5.0, 20.0):
            net = gaussian.build_oscillator_network(gaussian.GaussianConfig(dt=dt, seed=seed + k))
            S = net.s_matrix
            Om = gaussian.symplectic_form(net.n_modes)
            worst_symp = max(worst_symp, float(np.abs(S @ Om @ S.T - Om).max()))
            for r in r_grid:
                for phi in phi_grid:
                    st = gaussian.inject_mode(gaussian.vacuum(net.n_modes), gaussian.squeezed_vacuum(r, phi), 0)
                    ev = gaussian.evolve(st, S)
                    worst_unc = min(worst_unc, gaussian.uncertainty_margin(ev.cov))
                    purity = abs(np.linalg.det(ev.cov) / 0.5 ** (2 * net.n_modes) - 1.0)
                    worst_pur = max(worst_pur, purity)
    out += [
        Check("gaussian", "symplecticity", worst_symp, 1e-10, worst_symp <= 1e-10),
        Check("gaussian", "uncertainty_margin", worst_unc, -1e-9, worst_unc >= -1e-9),
        Check("gaussian", "purity_relative", worst_pur, 1e-8, worst_pur <= 1e-8),
    ]
    return out


def _readout_checks(seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((300, 8))
    y = X @ rng.standard_normal(8) + 0.3 * rng.standard_normal(300)
    w = readout.train_linear(X, y)
    resid = y - readout.predict(X, w)
    A = np.column_stack([X, np.ones(len(y))])
    orth = float(np.abs(A.T @ resid).max() / np.linalg.norm(A))
    errs = [readout.mse(readout.predict(X, readout.train_linear(X, y, lam)), y) for lam in (0, 0.1, 1, 10, 100)]
    mono = float(min(np.diff(errs)))
    caps = readout.capacities(X, rng.uniform(-1, 1, (300, 50)))
    return [
        Check("readout", "normal_equations", orth, 1e-8, orth <= 1e-8),
        Check("readout", "ridge_monotonicity", mono, 0.0, mono >= -1e-15),
        Check("readout", "capacity_range_min", float(caps.min()), 0.0, caps.min() >= 0.0),
        Check("readout", "capacity_range_max", float(caps.max()), 1.0, caps.max() <= 1.0),
    ]


SUITES = {"spin": _spin_checks, "gaussian": _gaussian_checks, "readout": _readout_checks}


def run_invariants(suite: str = "all", out: Path | None = None, seed: int = 0) -> list[Check]:
    names = list(SUITES) if suite == "all" else [suite]
    checks = [c for name in names for c in SUITES[name](seed=seed)]
    if out is not None:
        write_csv(
            out / "invariants.csv",
            ["suite", "check", "value", "limit", "passed"],
            ((c.suite, c.name, c.value, c.limit, int(c.passed)) for c in checks),
        )
    return checks


def run_experiment(cfg: ExperimentConfig, out: Path | None = None, jobs: int = 1):
    """Dispatch on ``cfg.experiment`` and write ``meta.txt`` plus the CSV reports."""
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        seeds = [cfg.base_seed + r for r in range(cfg.realizations)]
        lines = cfg.resolved_lines() + [f"seeds = {', '.join(map(str, seeds))}"]
        (out / "meta.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    if cfg.experiment == "timer":
        return run_timer(cfg, out, jobs)
    if cfg.experiment == "classify":
        return run_classify(cfg, out, jobs)
    if cfg.experiment == "ipc":
        return run_ipc(cfg, out, jobs)
    return run_invariants(cfg.task["suite"], out, seed=cfg.base_seed)
