"""Command-line harness: seeded scenario runs that write CSV/JSON artifacts.

Usage::

    flolearn passive --n 4 --eps 0.25,0.2 --trials 25 --out-dir runs/passive
    flolearn bootstrap-sweep --scenario passive --n 4 --eps 0.1,0.05,0.025 --eps0 relaxed
    flolearn verify

Every subcommand writes ``report.json`` (one :class:`LearnerReport` per
trial plus the verbatim config), ``results.csv`` and ``timings.csv`` into
the output directory. Wall-clock time goes to ``timings.csv`` only, unless
``--record-wall-time`` is given, so that ``results.csv`` and
``report.json`` are byte-identical across reruns with the same config.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
import scipy.linalg as sla

from . import checks, foracle, gsim
from .florep import embed_passive
from .learn import (
    CALIBRATED,
    PAPER,
    Access,
    BootstrapDivergence,
    FloBlackBox,
    LearnerReport,
    active_tomo_base,
    bootstrap,
    choi_tomo_base,
    gaussian_tomo,
    passive_tomo_base,
    phase_est,
    slater_tomo,
    synthetic_base,
)
from .learn.bootstrap import EPS0_RELAXED, EPS0_SAFE, active_base, choi_base, iterations, passive_base
from .learn.passive import passive_sizes
from .learn.report import orthogonal_errors, state_trace_distance, unitary_errors
from .learn.state import access_source
from .matlin import (
    haar_special_orthogonal,
    haar_unitary,
    matrix_from_json,
    matrix_to_json,
    opnorm,
    rng_stream,
    svd_round,
)

SCENARIOS = ("slater", "gauss", "passive", "active", "choi", "phase", "bootstrap-sweep", "verify")
SWEEP_SCENARIOS = ("passive", "active", "choi", "synthetic")
OUT_DIR_ENV = "FLOLEARN_OUT_DIR"

CSV_COLUMNS = (
    "scenario",
    "n",
    "eta",
    "eps",
    "delta",
    "seed",
    "trial",
    "queries",
    "op_err",
    "ph_err",
    "diamond_err",
    "wall_ms",
    "constant_scale",
    "success",
)


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    scenario: str
    n: int = 4
    eta: int = 1
    eps: tuple[float, ...] = (0.25,)
    delta: float = 0.1
    seed: int = 0
    trials: int = 1
    constant_scale: float = 1.0
    out_dir: Optional[str] = None
    oracle_cap: int = foracle.DEFAULT_CAP
    calibration: str = "calibrated"
    mode: str = "diamond"
    eps0: str = "safe"
    sweep: str = "passive"
    truth: Optional[str] = None
    workers: int = 1
    record_wall_time: bool = False

    def validate(self) -> "ScenarioConfig":
        problems = []
        if self.scenario not in SCENARIOS:
            problems.append(f"unknown scenario {self.scenario!r}")
        if not 1 <= self.n <= 64:
            problems.append("n must be between 1 and 64")
        if self.scenario == "slater" and not 1 <= self.eta <= self.n:
            problems.append("eta must be between 1 and n")
        if not self.eps:
            problems.append("at least one eps is required")
        top = 1.0 if self.scenario == "bootstrap-sweep" else 1.0 - 1e-12
        for e in self.eps:
            if not 0 < e <= top:
                problems.append(f"eps = {e} is outside (0, 1)")
        if not 0 < self.delta < 1:
            problems.append("delta must lie in (0, 1)")
        if self.trials < 1:
            problems.append("trials must be positive")
        if not self.constant_scale > 0:
            problems.append("constant_scale must be positive")
        if not 1 <= self.oracle_cap <= 14:
            problems.append("oracle_cap must be between 1 and 14")
        if self.calibration not in ("paper", "calibrated"):
            problems.append("calibration is 'paper' or 'calibrated'")
        if self.mode not in ("diamond", "sector"):
            problems.append("mode is 'diamond' or 'sector'")
        if self.sweep not in SWEEP_SCENARIOS:
            problems.append(f"sweep scenario must be one of {', '.join(SWEEP_SCENARIOS)}")
        if self.workers < 1:
            problems.append("workers must be positive")
        try:
            e0 = self.eps0_value
            if not 0 < e0 < 1 / (3 * math.pi):
                problems.append("eps0 must lie in (0, 1/(3 pi))")
        except ValueError:
            problems.append(f"eps0 {self.eps0!r} is not 'safe', 'relaxed' or a number")
        if problems:
            raise ConfigError("; ".join(problems))
        return self

    @property
    def eps0_value(self) -> float:
        named = {"safe": EPS0_SAFE, "relaxed": EPS0_RELAXED}
        return named[self.eps0] if self.eps0 in named else float(self.eps0)

    @property
    def calibration_policy(self):
        return (PAPER if self.calibration == "paper" else CALIBRATED).scaled(self.constant_scale)

    def output_dir(self) -> Path:
        if self.out_dir:
            return Path(self.out_dir)
        return Path(os.environ.get(OUT_DIR_ENV, "runs")) / self.scenario

    def to_json(self) -> dict[str, Any]:
        d = asdict(self)
        d["eps"] = list(self.eps)
        return d

    @classmethod
    def from_mapping(cls, data: dict[str, Any]) -> "ScenarioConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        data = dict(data)
        if "eps" in data:
            data["eps"] = _parse_eps(data["eps"])
        return cls(**data)


def _parse_eps(value) -> tuple[float, ...]:
    if isinstance(value, (int, float)):
        return (float(value),)
    if isinstance(value, str):
        try:
            return tuple(float(x) for x in value.split(",") if x.strip())
        except ValueError:
            raise ConfigError(f"cannot parse eps list {value!r}") from None
    return tuple(float(x) for x in value)


# ---------------------------------------------------------------------------
# Ground truth files
# ---------------------------------------------------------------------------


def export_ground_truth(path, M: np.ndarray) -> None:
    Path(path).write_text(json.dumps(matrix_to_json(M)) + "\n")


def load_ground_truth(path, n: Optional[int] = None) -> np.ndarray:
    """Read a matrix file and return a unitary (``n x n``) or orthogonal (``2n x 2n``) matrix.

    A complex square matrix is read as a passive FLO. A real one is read as
    the orthogonal matrix of a general FLO, unless ``n`` says it is ``n x n``.
    Inputs more than 1e-8 from the target group are rounded with a warning.
    """
    try:
        M = matrix_from_json(Path(path).read_text())
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot read ground truth {path}: {exc}") from exc
    rows, cols = M.shape
    if rows != cols:
        raise ConfigError(f"ground truth must be square, got {rows} x {cols}")
    passive = np.iscomplexobj(M) or (n is not None and rows == n) or rows % 2
    if n is not None and rows not in (n, 2 * n):
        raise ConfigError(f"ground truth is {rows} x {rows}, expected {n} x {n} or {2 * n} x {2 * n}")
    target = "unitary" if passive else "orthogonal"
    I = np.eye(rows)
    defect = opnorm(M.conj().T @ M - I)
    if defect > 1e-8:
        warnings.warn(f"ground truth is {defect:.2e} from {target}; rounding to the nearest {target} matrix")
        M = svd_round(M, target)
    return M.astype(complex) if passive else M.real


def import_ground_truth(path, n: Optional[int] = None, **box_options) -> FloBlackBox:
    M = load_ground_truth(path, n)
    if np.iscomplexobj(M):
        return FloBlackBox.passive(M, **box_options)
    return FloBlackBox(M, **box_options)


# ---------------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------------


def _random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    Q = haar_special_orthogonal(2 * n, rng)
    if rng.random() < 0.5:
        Q[:, 0] *= -1
    return Q


def _truth(cfg: ScenarioConfig, rng: np.random.Generator, passive: bool) -> np.ndarray:
    if cfg.truth is None:
        return haar_unitary(cfg.n, rng) if passive else _random_orthogonal(cfg.n, rng)
    M = load_ground_truth(cfg.truth, cfg.n)
    if passive and not np.iscomplexobj(M):
        raise ConfigError("this scenario needs a passive (complex n x n) ground truth")
    if not passive and np.iscomplexobj(M):
        M = embed_passive(M)
    return M


def _floats(errs: dict) -> dict:
    return {k: (None if v is None else float(v)) for k, v in errs.items()}


def run_slater(cfg, eps, rng):
    n, eta = cfg.n, cfg.eta
    U = _truth(cfg, rng, passive=True)
    box = FloBlackBox.passive(U)
    N = cfg.calibration_policy.size("slater_tomo", n=n, eta=eta, eps=eps, delta=cfg.delta)
    src = access_source(Access(box), [1] * eta + [0] * (n - eta), "slater")
    est = slater_tomo(src, n, N, eta, rng)
    P = U[:, :eta] @ U[:, :eta].conj().T
    trd = state_trace_distance(gsim.covariance_from_rdm(est.projector), gsim.covariance_from_rdm(P), cfg.oracle_cap)
    errs = {"op_err": opnorm(est.projector - P), "ph_err": None, "diamond_err": trd}
    return est.projector, box, errs, None if trd is None else trd <= eps, {"N": N}


def run_gauss(cfg, eps, rng):
    n = cfg.n
    Q = _truth(cfg, rng, passive=False)
    box = FloBlackBox(Q)
    N = cfg.calibration_policy.size("covariance", n=n, eps=eps, delta=cfg.delta)
    est = gaussian_tomo(access_source(Access(box), [0] * n, "gauss"), n, N, rng)
    gamma = gsim.apply_flo(gsim.vacuum_state(n), Q).gamma
    op = opnorm(est.mean - gamma)
    trd = state_trace_distance(est.gamma, gamma, cfg.oracle_cap)
    return est.mean, box, {"op_err": op, "ph_err": None, "diamond_err": trd}, op <= eps, {"N": N}


def run_passive(cfg, eps, rng):
    U = _truth(cfg, rng, passive=True)
    box = FloBlackBox.passive(U)
    res = passive_tomo_base(Access(box), rng, eps, cfg.delta, mode=cfg.mode, calibration=cfg.calibration_policy)
    errs = unitary_errors(res.U, U, cfg.oracle_cap)
    hit = errs["ph_err"] if cfg.mode == "sector" else errs["op_err"]
    extra = {"n_phaseless": res.n_phaseless, "n_phase": res.n_phase, "theta": res.theta}
    return res.U, box, errs, hit <= eps, extra


def run_active(cfg, eps, rng):
    Q = _truth(cfg, rng, passive=False)
    box = FloBlackBox(Q)
    res = active_tomo_base(Access(box), rng, eps, cfg.delta, calibration=cfg.calibration_policy)
    errs = orthogonal_errors(res.Q, Q, cfg.oracle_cap)
    return res.Q, box, errs, errs["op_err"] <= eps, {"n_act": res.n_act, "n_pas": res.n_pas, "n_ph": res.n_ph}


def run_choi(cfg, eps, rng):
    Q = _truth(cfg, rng, passive=False)
    box = FloBlackBox(Q)
    box.grant_choi_register()
    res = choi_tomo_base(Access(box), rng, eps, cfg.delta, calibration=cfg.calibration_policy)
    errs = orthogonal_errors(res.Q, Q, cfg.oracle_cap)
    return res.Q, box, errs, errs["op_err"] <= eps, {"N": res.N}


def near_identity(n: int, radius: float, rng: np.random.Generator) -> np.ndarray:
    """``exp(iH)`` with ``||exp(iH) - I||`` uniform on ``[0, radius]``."""
    H = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    H = 0.5 * (H + H.conj().T)
    size = rng.uniform(0, radius)
    return sla.expm(1j * H * (2 * math.asin(size / 2) / opnorm(H)))


def run_phase(cfg, eps, rng):
    theta = rng.uniform(-math.pi, math.pi)
    W = near_identity(cfg.n, eps, rng)
    box = FloBlackBox.passive(np.exp(1j * theta) * W)
    N = cfg.calibration_policy.size("phase", eps=eps, delta=cfg.delta)
    est = phase_est(Access(box), N, rng)
    err = abs(np.exp(1j * est.theta) - np.exp(1j * theta))
    extra = {"N": N, "theta": theta, "theta_hat": est.theta, "w_distance": opnorm(W - np.eye(cfg.n))}
    errs = {"op_err": err, "ph_err": None, "diamond_err": None}
    return np.array([[np.exp(1j * est.theta)]]), box, errs, err <= (math.pi + 2) * eps, extra


def _sweep_base(cfg):
    cal = cfg.calibration_policy
    if cfg.sweep == "passive":
        return passive_base(cal, cfg.mode), True
    if cfg.sweep == "active":
        return active_base(cal), False
    if cfg.sweep == "choi":
        return choi_base(cal), False

    def base_queries(delta: float) -> int:
        n_pas, n_ph = passive_sizes(cfg.n, cfg.eps0_value, delta, cal)
        return 2 * cfg.n * n_pas + 2 * n_ph

    return synthetic_base(base_queries, passive=True), True


def run_bootstrap(cfg, eps, rng, trace_path=None):
    base, passive = _sweep_base(cfg)
    M = _truth(cfg, rng, passive=passive)
    box = FloBlackBox.passive(M) if passive else FloBlackBox(M)
    if cfg.sweep == "choi":
        box.grant_choi_register()
    extra: dict[str, Any] = {"T": iterations(eps), "eps0": cfg.eps0_value, "sweep": cfg.sweep}
    try:
        out = bootstrap(base, Access(box), eps, cfg.delta, rng, passive=passive, eps0=cfg.eps0_value, truth=M)
    except BootstrapDivergence as exc:
        extra["diverged"] = str(exc)
        errs = {"op_err": None, "ph_err": None, "diamond_err": None}
        return np.eye(M.shape[0]), box, errs, False, extra
    if trace_path is not None:
        out.write_trace(trace_path)
    extra["steps"] = out.to_json()
    errs = unitary_errors(out.estimate, M, cfg.oracle_cap) if passive else orthogonal_errors(out.estimate, M, cfg.oracle_cap)
    return out.estimate, box, errs, errs["op_err"] <= eps, extra


RUNNERS = {
    "slater": run_slater,
    "gauss": run_gauss,
    "passive": run_passive,
    "active": run_active,
    "choi": run_choi,
    "phase": run_phase,
}


def run_trial(cfg: ScenarioConfig, eps_index: int, trial: int) -> tuple[LearnerReport, float]:
    """One seeded trial; the RNG stream depends only on ``(seed, eps_index, trial)``."""
    eps = cfg.eps[eps_index]
    rng = rng_stream(cfg.seed, eps_index, trial)
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore" if trial else "default")
        if cfg.scenario == "bootstrap-sweep":
            trace = cfg.output_dir() / "traces" / f"eps{eps_index}_trial{trial}.csv"
            estimate, box, errs, success, extra = run_bootstrap(cfg, eps, rng, trace)
        else:
            estimate, box, errs, success, extra = RUNNERS[cfg.scenario](cfg, eps, rng)
    wall_ms = 1000 * (time.perf_counter() - t0)
    report = LearnerReport(
        scenario=cfg.scenario,
        n=cfg.n,
        trial=trial,
        seed=cfg.seed,
        estimate=estimate,
        queries=box.ledger.snapshot(),
        config={**cfg.to_json(), "eps": eps, "eps_index": eps_index},
        success=None if success is None else bool(success),
        extra=extra,
        **_floats(errs),
    )
    return report, wall_ms


def _csv_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def result_row(cfg: ScenarioConfig, report: LearnerReport, wall_ms: float) -> dict[str, str]:
    row = {
        "scenario": cfg.scenario if cfg.scenario != "bootstrap-sweep" else f"bootstrap-{cfg.sweep}",
        "n": cfg.n,
        "eta": cfg.eta if cfg.scenario == "slater" else None,
        "eps": report.config["eps"],
        "delta": cfg.delta,
        "seed": cfg.seed,
        "trial": report.trial,
        "queries": report.queries["total_queries"],
        "op_err": report.op_err,
        "ph_err": report.ph_err,
        "diamond_err": report.diamond_err,
        "wall_ms": round(wall_ms, 3) if cfg.record_wall_time else None,
        "constant_scale": cfg.constant_scale,
        "success": report.success,
    }
    return {k: _csv_value(v) for k, v in row.items()}


def _run_task(args):
    cfg, i, t = args
    return i, t, run_trial(cfg, i, t)


def run(cfg: ScenarioConfig, log=sys.stderr) -> int:
    """Execute a validated config and write its artifacts; returns the exit status."""
    cfg.validate()
    out = cfg.output_dir()
    out.mkdir(parents=True, exist_ok=True)
    if cfg.scenario == "verify":
        return run_verify(cfg, out, log)
    if cfg.scenario == "bootstrap-sweep":
        (out / "traces").mkdir(exist_ok=True)
    tasks = [(cfg, i, t) for i in range(len(cfg.eps)) for t in range(cfg.trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(task) for task in tasks]
    results.sort(key=lambda r: (r[0], r[1]))

    rows, reports, timings = [], [], []
    for i, t, (report, wall_ms) in results:
        rows.append(result_row(cfg, report, wall_ms))
        reports.append(report.to_json())
        timings.append((cfg.eps[i], t, f"{wall_ms:.3f}"))
    with open(out / "results.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    with open(out / "timings.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["eps", "trial", "wall_ms"])
        w.writerows(timings)

    summary = summarize(cfg, results)
    if cfg.scenario == "bootstrap-sweep":
        write_scaling(out / "scaling.csv", summary)
    doc = {
        "config": cfg.to_json(),
        "calibration": cfg.calibration_policy.to_json(),
        "summary": summary,
        "reports": reports,
    }
    (out / "report.json").write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    for s in summary:
        print(
            f"{cfg.scenario} n={cfg.n} eps={s['eps']}: success {s['successes']}/{s['trials']}"
            f" (fraction {s['success_fraction']:.3f}), queries per trial {s['queries']}",
            file=log,
        )
    print(f"artifacts written to {out}", file=log)
    return 0


def summarize(cfg: ScenarioConfig, results) -> list[dict[str, Any]]:
    out = []
    for i, eps in enumerate(cfg.eps):
        reps = [r for j, _, (r, _) in results if j == i]
        wins = sum(bool(r.success) for r in reps)
        queries = sorted({r.queries["total_queries"] for r in reps})
        errs = [r.op_err for r in reps if r.op_err is not None]
        out.append(
            {
                "eps": eps,
                "T": iterations(eps) if cfg.scenario == "bootstrap-sweep" else None,
                "trials": len(reps),
                "successes": wins,
                "success_fraction": wins / len(reps),
                "queries": queries[0] if len(queries) == 1 else queries,
                "max_op_err": max(errs) if errs else None,
            }
        )
    return out


def write_scaling(path: Path, summary: list[dict[str, Any]]) -> None:
    """Queries against eps; ``ratio`` compares each row with the previous one."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["eps", "T", "queries", "ratio", "success_fraction"])
        prev = None
        for s in summary:
            q = s["queries"] if isinstance(s["queries"], int) else max(s["queries"])
            ratio = "" if prev is None else repr(q / prev)
            w.writerow([repr(s["eps"]), s["T"], q, ratio, repr(s["success_fraction"])])
            prev = q


def run_verify(cfg: ScenarioConfig, out: Path, log) -> int:
    results = []
    for name, suite in checks.SUITES.items():
        for r in suite(cfg.seed):
            print(r.line(), file=log, flush=True)
            results.append({"suite": name, **asdict(r)})
    passed = all(r["passed"] for r in results)
    with open(out / "results.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["suite", "check", "passed", "detail"])
        for r in results:
            w.writerow([r["suite"], r["name"], str(r["passed"]).lower(), r["detail"]])
    doc = {"config": cfg.to_json(), "passed": passed, "checks": results}
    (out / "report.json").write_text(json.dumps(doc, indent=1) + "\n")
    print(f"{sum(r['passed'] for r in results)}/{len(results)} checks passed", file=log)
    return 0 if passed else 1


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flolearn", description="Learn FLO unitaries in simulation.")
    sub = parser.add_subparsers(dest="scenario", required=True)
    common = argparse.ArgumentParser(add_help=False)
    # Defaults are None so that a --config file can fill anything not given explicitly.
    common.add_argument("--config", help="JSON file with any of the options below")
    common.add_argument("--n", type=int)
    common.add_argument("--eta", type=int)
    common.add_argument("--eps", help="accuracy, or a comma-separated list")
    common.add_argument("--delta", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--constant-scale", type=float, help="extra multiplier on every sample size")
    common.add_argument("--calibration", choices=("paper", "calibrated"))
    common.add_argument("--out-dir", help=f"default: ${OUT_DIR_ENV}/<scenario> or runs/<scenario>")
    common.add_argument("--oracle-cap", type=int, help="largest n for exact Fock-space distances")
    common.add_argument("--truth", help="ground-truth matrix JSON file")
    common.add_argument("--mode", choices=("diamond", "sector"))
    common.add_argument("--eps0", help="bootstrap base accuracy: safe, relaxed, or a number")
    common.add_argument("--workers", type=int)
    common.add_argument("--record-wall-time", action="store_true", default=None)
    helps = {
        "slater": "Slater-determinant tomography",
        "gauss": "Gaussian-state covariance tomography",
        "passive": "base passive learner",
        "active": "two-stage active learner",
        "choi": "Choi-state learner (n ancillas)",
        "phase": "interferometric global-phase estimation",
        "bootstrap-sweep": "bootstrap over a list of eps, with a scaling table",
        "verify": "run every invariant suite",
    }
    for name in SCENARIOS:
        p = sub.add_parser(name, parents=[common], help=helps[name])
        if name == "bootstrap-sweep":
            p.add_argument("--scenario", dest="sweep", choices=SWEEP_SCENARIOS)
    return parser


def config_from_args(args: argparse.Namespace) -> ScenarioConfig:
    data: dict[str, Any] = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        if data.get("scenario", args.scenario) != args.scenario:
            raise ConfigError(f"config is for {data['scenario']!r}, not {args.scenario!r}")
    for key, value in vars(args).items():
        if key != "config" and value is not None:
            data[key] = value
    return ScenarioConfig.from_mapping(data)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args).validate()
        return run(cfg)
    except ConfigError as exc:
        print(f"flolearn: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
