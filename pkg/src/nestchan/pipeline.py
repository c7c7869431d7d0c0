"""End-to-end estimation, metrics and the Monte-Carlo harness.

``estimate`` runs solve -> decomposition -> gains -> channel reconstruction on
one snapshot block. The covariance is estimated on the aperture actually
spanned by the selection (``max(Omega)`` antennas) and the channel is then
evaluated on all ``N`` antennas through the steering vectors.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

from .config import METHODS, Scenario
from .geometry import SelectionSet
from .recovery import DecompositionError, least_squares_gains, md_vandermonde, model_order, noise_floor
from .sdp import SdpOptions, SolverError, solve_anm_baseline, solve_dual, solve_primal
from .signal import (NoiseSpec, PathSet, SnapshotBlock, random_paths, snr_to_sigma, steering_matrix,
                     synthesize_snapshots, true_channel, vectorize)
from .tbt import TbtDecomposition

__all__ = [
    "EstimationError",
    "EstimatorConfig",
    "EstimationResult",
    "TrialRecord",
    "ExperimentResult",
    "estimate",
    "nmse",
    "spectral_efficiency",
    "ideal_spectral_efficiency",
    "match_paths",
    "run_trial",
    "run_experiment",
    "run_array_sweep",
    "synthesize_trial",
    "records_digest",
]


class EstimationError(RuntimeError):
    """Failure inside :func:`estimate`, labelled with the stage that raised it."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass(frozen=True)
class EstimatorConfig:
    method: str = "primal"
    tau: float = 1e-3
    anm_kappa: float = 1.0
    decomposition_tolerance: float = float("inf")
    sdp: SdpOptions = field(default_factory=SdpOptions)
    use_spanned_aperture: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")

    @classmethod
    def from_scenario(cls, sc: Scenario, method: str, trace: bool = False) -> "EstimatorConfig":
        opts = SdpOptions(max_iterations=sc.max_iterations, abs_tolerance=sc.abs_tolerance,
                          rel_tolerance=sc.rel_tolerance, backend=sc.backend, trace=trace)
        return cls(method=method, tau=sc.tau, anm_kappa=sc.anm_kappa,
                   decomposition_tolerance=sc.decomposition_tolerance, sdp=opts)


@dataclass
class EstimationResult:
    h_hat: np.ndarray
    atoms: TbtDecomposition
    g_hat: np.ndarray
    diagnostics: dict

    @property
    def f_hat(self) -> np.ndarray:
        return self.atoms.f

    @property
    def theta_hat(self) -> np.ndarray:
        return self.atoms.theta


def _solve(y, s, L, cfg: EstimatorConfig, sigma_true):
    if cfg.method == "primal":
        return solve_primal(y, s, L, cfg.sdp)
    if cfg.method == "dual":
        return solve_dual(y, s, L, cfg.sdp)[1]
    if sigma_true is None:
        raise EstimationError("solve", "ANM needs the true noise variance")
    return solve_anm_baseline(y, s, L, sigma_true, cfg.sdp, kappa=cfg.anm_kappa)


def estimate(X: SnapshotBlock, config: EstimatorConfig | None = None,
             sigma_true: float | None = None) -> EstimationResult:
    """Estimate the reference-time channel and path parameters from ``X``."""
    cfg = config or EstimatorConfig()
    t_start = time.perf_counter()
    s_full: SelectionSet = X.selection
    s = s_full.with_aperture(s_full.indices[-1]) if cfg.use_spanned_aperture else s_full
    L = X.L
    y = vectorize(X)
    try:
        sol = _solve(y, s, L, cfg, sigma_true)
    except SolverError as exc:
        raise EstimationError("solve", str(exc)) from exc
    t_hat = sol.t_hat
    diag = dict(objective=sol.objective, gap=sol.gap, converged=sol.converged,
                solve_time_s=sol.wall_time_s, iterations=sol.iterations, solver_path=cfg.method,
                estimation_aperture=s.N)
    if sol.trace:
        diag["trace"] = sol.trace
    sigma_hat = noise_floor(t_hat)
    k_hat = model_order(t_hat, sigma_hat, cfg.tau)
    k_hat = min(k_hat, s.M * L, s.N * L - max(s.N, L))
    diag.update(sigma_hat=sigma_hat, K_hat=int(k_hat))
    if k_hat == 0:
        atoms = TbtDecomposition(np.zeros(0), np.zeros(0), np.zeros(0), sigma_hat, 0.0)
        g = np.zeros(0, complex)
        diag.update(decomposition_residual=0.0, gain_residual=float(np.linalg.norm(y)))
    else:
        try:
            with warnings.catch_warnings():
                # zero-power atoms are harmless here; the gains step refits them
                warnings.simplefilter("ignore", RuntimeWarning)
                atoms = md_vandermonde(t_hat, k_hat, sigma_hat, tol=cfg.decomposition_tolerance)
        except DecompositionError as exc:
            raise EstimationError("decompose", str(exc)) from exc
        try:
            g, gres = least_squares_gains(y, s, L, atoms)
        except DecompositionError as exc:
            raise EstimationError("gains", str(exc)) from exc
        diag.update(decomposition_residual=atoms.residual, gain_residual=gres)
    h_hat = steering_matrix(atoms.theta, s_full.N) @ g if g.size else np.zeros(s_full.N, complex)
    diag["wall_time_s"] = time.perf_counter() - t_start
    return EstimationResult(h_hat=h_hat, atoms=atoms, g_hat=g, diagnostics=diag)


# metrics ----------------------------------------------------------------------

def nmse(h_hat, h_true) -> float:
    h_hat, h_true = np.asarray(h_hat), np.asarray(h_true)
    if h_hat.shape != h_true.shape:
        raise ValueError("h_hat and h_true differ in length")
    ref = np.vdot(h_true, h_true).real
    if ref == 0:
        raise ValueError("true channel has zero norm")
    e = h_hat - h_true
    return float(np.vdot(e, e).real / ref)


def spectral_efficiency(h_hat, h_true, snr_linear: float) -> float:
    """``log2(1 + snr |w^H h|^2)`` with the matched filter ``w = h_hat / |h_hat|``."""
    h_hat = np.asarray(h_hat)
    nrm = np.linalg.norm(h_hat)
    if nrm == 0:
        raise ValueError("estimated channel is zero")
    gain = abs(np.vdot(h_hat / nrm, h_true)) ** 2
    return float(np.log2(1.0 + snr_linear * gain))


def ideal_spectral_efficiency(h_true, snr_linear: float) -> float:
    return float(np.log2(1.0 + snr_linear * np.vdot(h_true, h_true).real))


def _wrap(df):
    return np.abs((np.asarray(df) + 0.5) % 1.0 - 0.5)


def match_paths(theta_true, f_true, theta_est, f_est, power_est=None, weight=(1.0, 0.01)):
    """Optimal assignment of estimated to true paths.

    Only the ``K`` strongest estimates take part when more are available.
    Returns ``(true_idx, est_idx, dtheta_deg, df)``.
    """
    theta_est = np.asarray(theta_est)
    f_est = np.asarray(f_est)
    K = len(theta_true)
    cand = np.arange(theta_est.size)
    if power_est is not None and theta_est.size > K:
        cand = np.sort(np.argsort(power_est)[::-1][:K])
    if cand.size == 0:
        return np.zeros(0, int), np.zeros(0, int), np.zeros(0), np.zeros(0)
    dth = np.abs(np.rad2deg(np.subtract.outer(np.asarray(theta_true), theta_est[cand])))
    dff = _wrap(np.subtract.outer(np.asarray(f_true), f_est[cand]))
    cost = dth / weight[0] + dff / weight[1]
    r, c = linear_sum_assignment(cost)
    return r, cand[c], dth[r, c], dff[r, c]


# harness ----------------------------------------------------------------------

@dataclass
class TrialRecord:
    scenario: str
    seed: int
    trial: int
    snr_db: float
    method: str
    failed: bool
    error: str
    nmse: float
    nmse_db: float
    se_bits: float
    se_ideal_bits: float
    wall_time_s: float
    solve_time_s: float
    iterations: int
    k_hat: int
    sigma_hat: float
    gap: float
    theta_err_max_deg: float
    f_err_max: float
    path_errors: str

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]


TIMING_COLUMNS = ("wall_time_s", "solve_time_s")


@dataclass
class ExperimentResult:
    scenario: Scenario
    records: list
    scatter: list
    summary: dict

    def write(self, out_dir: str | Path) -> dict:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {"trials": out / "trials.csv", "summary": out / "summary.json",
                 "scatter": out / "scatter.csv"}
        paths["trials"].write_text(records_csv(self.records))
        paths["scatter"].write_text(scatter_csv(self.scatter))
        paths["summary"].write_text(json.dumps(self.summary, indent=2, sort_keys=True) + "\n")
        return paths


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def records_csv(records, exclude=()) -> str:
    cols = [c for c in TrialRecord.columns() if c not in exclude]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in records:
        d = asdict(r)
        w.writerow([_fmt(d[c]) for c in cols])
    return buf.getvalue()


SCATTER_COLUMNS = ("scenario", "trial", "snr_db", "method", "path", "theta_true_deg", "f_true",
                   "theta_est_deg", "f_est", "power_est")


def scatter_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCATTER_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in SCATTER_COLUMNS])
    return buf.getvalue()


def records_digest(records) -> str:
    """SHA-256 of the trials table with the timing columns removed."""
    return hashlib.sha256(records_csv(records, exclude=TIMING_COLUMNS).encode()).hexdigest()


def trial_streams(seed: int, trial: int):
    """Channel RNG and noise seed for one trial (shared across SNR points and methods)."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, trial, 0]))
    noise_seed = int(np.random.SeedSequence([seed, trial, 1]).generate_state(1, np.uint64)[0])
    return rng, noise_seed


def draw_paths(sc: Scenario, trial: int) -> tuple[PathSet, int]:
    rng, noise_seed = trial_streams(sc.seed, trial)
    return random_paths(rng, sc.K, sc.theta_range_deg, sc.f_range, sc.gain), noise_seed


def synthesize_trial(sc: Scenario, trial: int, snr_db: float):
    """Return ``(paths, X, h_true, sigma)`` for one (trial, SNR) draw."""
    paths, noise_seed = draw_paths(sc, trial)
    sigma = 0.0 if sc.noiseless else snr_to_sigma(snr_db)
    X = synthesize_snapshots(paths, sc.selection(), sc.L, NoiseSpec(sigma, noise_seed))
    return paths, X, true_channel(paths, sc.N), sigma


def run_trial(sc: Scenario, trial: int, snr_db: float, methods=None, trace: bool = False):
    """All requested methods on one (trial, SNR) draw; returns ``(records, scatter_rows)``."""
    methods = tuple(methods or sc.methods)
    paths, X, h, sigma = synthesize_trial(sc, trial, snr_db)
    snr_lin = 10.0 ** (snr_db / 10.0)
    se_ideal = ideal_spectral_efficiency(h, snr_lin)
    records, scatter = [], []
    for m in methods:
        cfg = EstimatorConfig.from_scenario(sc, m, trace=trace)
        base = dict(scenario=sc.name, seed=sc.seed, trial=trial, snr_db=float(snr_db), method=m,
                    se_ideal_bits=se_ideal)
        try:
            res = estimate(X, cfg, sigma_true=sigma)
        except EstimationError as exc:
            records.append(TrialRecord(**base, failed=True, error=str(exc).replace(",", ";"),
                                       nmse=np.nan, nmse_db=np.nan, se_bits=np.nan,
                                       wall_time_s=np.nan, solve_time_s=np.nan, iterations=0,
                                       k_hat=0, sigma_hat=np.nan, gap=np.nan,
                                       theta_err_max_deg=np.nan, f_err_max=np.nan, path_errors=""))
            continue
        d = res.diagnostics
        e = nmse(res.h_hat, h)
        try:
            se = spectral_efficiency(res.h_hat, h, snr_lin)
        except ValueError:
            se = 0.0
        ti, ei, dth, dff = match_paths(paths.theta, paths.f, res.theta_hat, res.f_hat,
                                       res.atoms.p, sc.match_weight)
        perr = ";".join(f"{a:.6g}:{b:.6g}" for a, b in zip(dth, dff))
        records.append(TrialRecord(
            **base, failed=False, error="", nmse=e, nmse_db=10 * np.log10(max(e, 1e-300)),
            se_bits=se, wall_time_s=d["wall_time_s"], solve_time_s=d["solve_time_s"],
            iterations=int(d["iterations"]), k_hat=int(d["K_hat"]), sigma_hat=d["sigma_hat"],
            gap=d["gap"], theta_err_max_deg=float(dth.max()) if dth.size else np.nan,
            f_err_max=float(dff.max()) if dff.size else np.nan, path_errors=perr))
        est_of = dict(zip(ti, ei))
        for k in range(paths.K):
            j = est_of.get(k)
            scatter.append(dict(
                scenario=sc.name, trial=trial, snr_db=float(snr_db), method=m, path=k,
                theta_true_deg=float(np.rad2deg(paths.theta[k])), f_true=float(paths.f[k]),
                theta_est_deg=float(np.rad2deg(res.theta_hat[j])) if j is not None else np.nan,
                f_est=float(res.f_hat[j]) if j is not None else np.nan,
                power_est=float(res.atoms.p[j]) if j is not None else np.nan))
    return records, scatter


def _run_task(args):
    return run_trial(*args)


def _summarize(sc: Scenario, records) -> dict:
    cells = []
    for m in sc.methods:
        for snr in sc.snr_db:
            rs = [r for r in records if r.method == m and r.snr_db == float(snr)]
            ok = [r for r in rs if not r.failed]
            nm = np.array([r.nmse for r in ok])
            wt = np.array([r.solve_time_s for r in ok])
            se = np.array([r.se_bits for r in ok])
            cells.append(dict(
                method=m, snr_db=float(snr), trials=len(rs), failures=len(rs) - len(ok),
                failure_rate=(len(rs) - len(ok)) / len(rs) if rs else 0.0,
                median_nmse=float(np.median(nm)) if nm.size else None,
                mean_nmse=float(np.mean(nm)) if nm.size else None,
                median_nmse_db=float(10 * np.log10(np.median(nm))) if nm.size else None,
                mean_se_bits=float(np.mean(se)) if se.size else None,
                mean_se_ideal_bits=float(np.mean([r.se_ideal_bits for r in rs])) if rs else None,
                median_solve_time_s=float(np.median(wt)) if wt.size else None,
                mean_solve_time_s=float(np.mean(wt)) if wt.size else None,
                std_solve_time_s=float(np.std(wt)) if wt.size else None,
            ))
    return {"scenario": sc.to_dict(), "selection": list(sc.selection().indices),
            "cells": cells, "digest": records_digest(records)}


_METHOD_ORDER = {m: i for i, m in enumerate(METHODS)}


def run_array_sweep(sc: Scenario, array_types=("mra", "nested", "coprime", "ula"),
                    threads: int = 1) -> dict:
    """One :func:`run_experiment` per array type on identical path and noise draws."""
    return {at: run_experiment(sc.with_overrides(array_type=at, indices=None,
                                                 name=f"{sc.name}-{at}"), threads=threads)
            for at in array_types}


def run_experiment(sc: Scenario, out_dir: str | Path | None = None, threads: int = 1,
                   methods=None, progress=None) -> ExperimentResult:
    """Monte-Carlo sweep over ``trials x snr_db`` for every requested method."""
    if methods is not None:
        sc = sc.with_overrides(methods=tuple(methods))
    tasks = [(sc, t, snr) for snr in sc.snr_db for t in range(sc.trials)]
    results = []
    if threads and threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            for i, r in enumerate(ex.map(_run_task, tasks)):
                results.append(r)
                if progress:
                    progress(i + 1, len(tasks))
    else:
        for i, task in enumerate(tasks):
            results.append(_run_task(task))
            if progress:
                progress(i + 1, len(tasks))
    records = [r for rec, _ in results for r in rec]
    scatter = [row for _, sc_rows in results for row in sc_rows]
    records.sort(key=lambda r: (r.snr_db, r.trial, _METHOD_ORDER[r.method]))
    scatter.sort(key=lambda r: (r["snr_db"], r["trial"], _METHOD_ORDER[r["method"]], r["path"]))
    result = ExperimentResult(sc, records, scatter, _summarize(sc, records))
    if out_dir is not None:
        result.write(out_dir)
    return result
