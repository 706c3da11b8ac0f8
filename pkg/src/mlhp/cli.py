"""Command line harness: ``validate``, ``run`` and ``report``.

A run writes into one directory::

    config.yaml               normalized configuration that ran
    equilibrium.json          masses, constants, residuals (re-certifiable)
    equilibrium_density.csv   plot data for the equilibrium measures
    solutions/nNNN.json       Hermite-Pade coefficients per index
    factorizations/nNNN.json  zeros of the forms per index
    solutions.csv             per-index solver and factorization diagnostics
    z_points.csv              seeded evaluation points
    records.csv               one row per claim x n x z
    summary.csv               final gaps and trend verdicts
    series/<claim>.csv        measured/predicted pairs against n
    manifest.json             hashes of every file, versions, seeds

On failure the directory keeps whatever was written plus ``FAILED`` and
``error.json`` naming the stage.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import platform
import sys as _sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path

import mpmath

from . import __version__
from .config import ExperimentConfig, load_config, validate_config
from .equilibrium import EquilibriumSolution, compare_solutions, solve_vector_equilibrium
from .forms import factorize
from .hp_solver import DegenerateIndexError, solve_hp, verify_orthogonality
from .nikishin import check_pole_count
from .verify import (CLAIMS, AsymptoticReport, Record, form_asymptotics_check, norm_limit_check,
                     pole_attraction_check, ratio_and_recovery_check, rate_check, sample_z_points,
                     summarize, zero_distribution_check)

__all__ = ["RunResult", "StageError", "run_experiment", "write_report_tables", "read_records",
           "RECORD_COLUMNS", "SUMMARY_COLUMNS", "main"]

RECORD_COLUMNS = ("claim", "quantity", "n", "j", "k", "z_index", "z_re", "z_im",
                  "measured", "predicted", "gap")
SUMMARY_COLUMNS = ("claim", "quantity", "j", "k", "z_index", "n_last", "measured_last",
                   "predicted_last", "gap_last", "max_abs_gap", "trend", "bound")
SOLUTION_COLUMNS = ("n", "status", "nullity", "degenerate", "relative_residual",
                    "orthogonality_max", "min_pivot_ratio", "D", "outliers",
                    "factorization_error", "gap_sign_changes")
SERIES_COLUMNS = ("quantity", "j", "k", "z_index", "n", "measured", "predicted")

NUMBER_DIGITS = 17


class StageError(RuntimeError):
    def __init__(self, stage: str, exc: BaseException):
        super().__init__(f"{stage}: {type(exc).__name__}: {exc}")
        self.stage = stage
        self.original = exc


@dataclass
class RunResult:
    status: int
    directory: Path
    report: AsymptoticReport | None = None
    solutions: dict = field(default_factory=dict)
    factorizations: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    equilibrium: EquilibriumSolution | None = None
    error: dict | None = None


def fmt(x) -> str:
    """Decimal string with a fixed number of significant digits (floats or mpf)."""
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    with mpmath.workprec(80):
        x = mpmath.mpf(x)
        if mpmath.isnan(x):
            return "nan"
        if mpmath.isinf(x):
            return "inf" if x > 0 else "-inf"
        return mpmath.nstr(x, NUMBER_DIGITS, min_fixed=-4, max_fixed=6, strip_zeros=False)


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


class _Writer:
    """Single funnel for every file of a run; tracks hashes for the manifest."""

    def __init__(self, root: Path):
        self.root = root
        self.files = {}
        root.mkdir(parents=True, exist_ok=True)

    def text(self, rel: str, content: str) -> None:
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        data = content.encode()
        path.write_bytes(data)
        self.files[rel] = hashlib.sha256(data).hexdigest()

    def json(self, rel: str, obj) -> None:
        self.text(rel, json.dumps(obj, indent=1, sort_keys=True) + "\n")


# per-process state for the worker pool
_STATE = {}


def _init_worker(cfg_raw: dict, eq: EquilibriumSolution, z_points: list, id_points: list):
    cfg = load_config(cfg_raw)
    sys, pert = cfg.build()
    _STATE.update(cfg=cfg, sys=sys, pert=pert, eq=eq, z=z_points, ids=id_points)


def _index_records(cfg, sys, pert, eq, z_points, id_points, n, sol, fact) -> list:
    claims = set(cfg.verify["claims"])
    sols, facts = {n: sol}, {n: fact}
    out = []
    m = sys.m
    if "weak_Qnj" in claims:
        for j in range(1, m + 1):
            out += zero_distribution_check(facts, eq, j)
    if "limit_nesimo" in claims:
        for j in range(1, m + 1):
            out += norm_limit_check(facts, sols, sys, eq, j)
    if "limit_nrooth_Anj" in claims:
        for j in range(m + 1):
            out += form_asymptotics_check(sols, sys, pert, eq, j, z_points)
    if claims & {"ratio_Anj", "recover"}:
        recs = ratio_and_recovery_check(sols, sys, pert, eq, z_points, id_points)
        out += [r for r in recs if r.claim in claims]
    for j in range(m):
        claim = "geometric_speed_an0" if j == 0 else "geometric_speed"
        if claim in claims:
            out += rate_check(sols, sys, pert, eq, j, z_points)
    if "pole_attraction" in claims:
        out += pole_attraction_check(facts, pert)
    return out


def _process_index(n: int):
    """Solve, factorize and measure one index in a worker."""
    s = _STATE
    sys, pert = s["sys"], s["pert"]
    try:
        sol = solve_hp(sys, pert, n)
    except DegenerateIndexError as exc:
        return n, "degenerate", exc.solution, None, None, [], None
    if sol.degenerate:
        return n, "degenerate", sol, None, None, [], None
    try:
        fact = factorize(sys, pert, sol)
        ortho = verify_orthogonality(sys, pert, sol, fact)
        recs = _index_records(s["cfg"], sys, pert, s["eq"], s["z"], s["ids"], n, sol, fact)
    except Exception as exc:  # reported by the main process with the stage name
        return n, "error", sol, None, None, [], f"{type(exc).__name__}: {exc}"
    return n, "ok", sol, fact, ortho, recs, None


def _records_rows(records):
    for r in records:
        z = r.z
        yield (r.claim, r.quantity, r.n, r.j, r.k, r.z_index,
               "" if z is None else z.real, "" if z is None else z.imag,
               r.measured, r.predicted, r.gap)


def _floors(precision: int) -> dict:
    tiny = mpmath.mpf(2) ** (-precision // 2)
    return {"outlier_distance": tiny, "recovery_gap": tiny}


def write_report_tables(writer: _Writer, report: AsymptoticReport, precision: int,
                        slack: float) -> list:
    """``records.csv``, ``summary.csv`` and the series files; returns the summary rows."""
    records = report.sorted_records()
    writer.text("records.csv", _csv_text(RECORD_COLUMNS, _records_rows(records)))
    summary = summarize(report, slack=slack, floors=_floors(precision))
    writer.text("summary.csv", _csv_text(SUMMARY_COLUMNS,
                                         ([row[c] for c in SUMMARY_COLUMNS] for row in summary)))
    by_claim = {}
    for r in records:
        by_claim.setdefault(r.claim, []).append(r)
    for claim in CLAIMS:
        if claim not in by_claim:
            continue
        rows = sorted(by_claim[claim], key=lambda r: (r.quantity, r.j, r.k, r.z_index, r.n))
        writer.text(f"series/{claim}.csv", _csv_text(
            SERIES_COLUMNS, ((r.quantity, r.j, r.k, r.z_index, r.n, r.measured, r.predicted)
                             for r in rows)))
    return summary


def read_records(directory) -> AsymptoticReport:
    """Rebuild an :class:`AsymptoticReport` from ``records.csv`` and ``manifest.json``."""
    directory = Path(directory)
    man = json.loads((directory / "manifest.json").read_text())
    recs = []
    with mpmath.workprec(80):
        with open(directory / "records.csv", newline="") as fh:
            for row in csv.DictReader(fh):
                z = None if row["z_re"] == "" else complex(float(row["z_re"]), float(row["z_im"]))
                num = lambda s: mpmath.mpf(s)
                recs.append(Record(row["claim"], row["quantity"], int(row["n"]), int(row["j"]),
                                   int(row["k"]), int(row["z_index"]), z, num(row["measured"]),
                                   num(row["predicted"]), num(row["gap"])))
    return AsymptoticReport(man["experiment"], tuple(man["n_list"]), recs,
                            seed=man["seeds"]["z_points"],
                            degenerate=tuple(man.get("degenerate", [])))


def _versions() -> dict:
    out = {"python": platform.python_version(), "mlhp": __version__}
    for pkg in ("mpmath", "gmpy2", "numpy", "scipy", "PyYAML"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = "unknown"
    return out


def _write_manifest(writer: _Writer, cfg: ExperimentConfig, status: str, timings: dict,
                    degenerate=(), seeds=None) -> None:
    config_text = cfg.dump()
    man = {"experiment": cfg.experiment, "status": status,
           "config_sha256": hashlib.sha256(config_text.encode()).hexdigest(),
           "precision": cfg.precision, "node_count": cfg.node_count, "n_list": cfg.n_list,
           "seeds": seeds or {}, "versions": _versions(), "degenerate": list(degenerate),
           "timings_seconds": {k: round(v, 3) for k, v in timings.items()},
           "files": dict(sorted(writer.files.items()))}
    path = writer.root / "manifest.json"
    path.write_text(json.dumps(man, indent=1, sort_keys=True) + "\n")


def run_experiment(cfg: ExperimentConfig, out_dir=None, workers: int | None = None,
                   log=None) -> RunResult:
    """Full pipeline; returns exit status 0 on success, 1 on a stage failure,
    2 when validation refuses the configuration."""
    log = log or (lambda msg: None)
    root = Path(out_dir if out_dir is not None else cfg.output["directory"])
    writer = _Writer(root)
    for stale in ("FAILED", "error.json"):
        (root / stale).unlink(missing_ok=True)
    workers = cfg.workers if workers is None else int(workers)
    timings = {}
    result = RunResult(1, root)
    stage = "validate"
    seed = cfg.verify["seed"]
    seeds = {"z_points": seed, "identity_points": seed + 1}
    try:
        writer.text("config.yaml", cfg.dump())
        t0 = time.perf_counter()
        diag = validate_config(cfg)
        log(diag.render())
        if not diag.ok:
            raise StageError(stage, ValueError("; ".join(f"{c.name}: {c.message}"
                                                         for c in diag.failures())))
        stage = "build system"
        sys, pert = cfg.build()
        stage = "pole count"
        poles = check_pole_count(sys, pert)
        timings["setup"] = time.perf_counter() - t0

        stage = "equilibrium"
        t0 = time.perf_counter()
        e = cfg.equilibrium
        eq = solve_vector_equilibrium(sys, e["grid_size"], e["tol"], e["iter_cap"], e["method"],
                                      cross_validate=False)
        if e["cross_validate"]:
            other = "energy-descent" if e["method"] == "cyclic-relaxation" else "cyclic-relaxation"
            alt = solve_vector_equilibrium(sys, e["grid_size"], e["tol"], e["iter_cap"], other)
            check = compare_solutions(eq, alt)
            if check["max_cdf"] > 3 * e["tol"] or check["max_omega"] > 3 * e["tol"]:
                raise ValueError(f"equilibrium methods disagree: {check}")
            cross = {"method": other, "max_cdf": check["max_cdf"],
                     "max_omega": check["max_omega"], "omegas": [float(w) for w in alt.omegas]}
        else:
            cross = None
        timings["equilibrium"] = time.perf_counter() - t0
        eq_json = eq.to_json()
        eq_json["cross_validation"] = cross
        # hull of the nodes carrying mass above the certification threshold
        eq_json["effective_supports"] = [[fmt(v) for v in lam.support(1e-3 / eq.grid_size)]
                                         for lam in eq.lambdas]
        eq_json["pole_reports"] = [{"root": fmt(mpmath.re(p.root)), "multiplicity": p.multiplicity,
                                    "limit": fmt(abs(p.limit)), "passed": p.passed} for p in poles]
        writer.json("equilibrium.json", eq_json)
        dens = []
        for j, lam in enumerate(eq.lambdas, start=1):
            for x, w, lo, hi in zip(lam.points, lam.masses, lam.edges[:-1], lam.edges[1:]):
                dens.append((j, x, w, w / (hi - lo)))
        writer.text("equilibrium_density.csv", _csv_text(("level", "x", "mass", "density"), dens))
        result.equilibrium = eq

        stage = "z-points"
        v = cfg.verify
        z_points = sample_z_points(sys, pert, v["z_points"], seeds["z_points"],
                                   tuple(v["annulus"]), v["margin"])
        z_points += [complex(*p) for p in v["extra_points"]]
        id_points = sample_z_points(sys, pert, v["identity_points"], seeds["identity_points"],
                                    tuple(v["annulus"]), v["margin"])
        writer.text("z_points.csv", _csv_text(
            ("set", "index", "re", "im"),
            [("eval", i, z.real, z.imag) for i, z in enumerate(z_points)]
            + [("identity", i, z.real, z.imag) for i, z in enumerate(id_points)]))

        stage = "hermite-pade"
        t0 = time.perf_counter()
        init = (cfg.raw, eq, z_points, id_points)
        if workers > 1:
            with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=init) as pool:
                outcomes = list(pool.map(_process_index, cfg.n_list))
        else:
            _STATE.clear()
            _STATE.update(cfg=cfg, sys=sys, pert=pert, eq=eq, z=z_points, ids=id_points)
            outcomes = [_process_index(n) for n in cfg.n_list]
        timings["hermite_pade"] = time.perf_counter() - t0
        report = AsymptoticReport(cfg.experiment, tuple(cfg.n_list), z_points=tuple(z_points),
                                  identity_points=tuple(id_points), seed=seed,
                                  equilibrium={"method": eq.method, "grid_size": eq.grid_size,
                                               "tol": eq.tol,
                                               "omegas": [float(w) for w in eq.omegas]})
        degenerate, sol_rows = [], []
        for n, status, sol, fact, ortho, recs, err in sorted(outcomes, key=lambda o: o[0]):
            if sol is not None:
                writer.json(f"solutions/n{n:03d}.json", sol.to_json())
                result.solutions[n] = sol
            if status == "error":
                stage = f"factorize/verify n={n}"
                raise RuntimeError(err)
            if status == "degenerate":
                degenerate.append(n)
                sol_rows.append((n, status, sol.nullity if sol else "", 1, "", "", "", pert.D,
                                 "", "", ""))
                continue
            writer.json(f"factorizations/n{n:03d}.json", fact.to_json())
            result.factorizations[n] = fact
            result.diagnostics[n] = {"orthogonality": ortho.max_relative,
                                     "relative_residual": sol.relative_residual}
            report.extend(recs)
            sol_rows.append((n, status, sol.nullity, 0, sol.relative_residual, ortho.max_relative,
                             sol.min_pivot_ratio, fact.D, len(fact.outlier_roots),
                             fact.factorization_error,
                             " ".join(str(g) for g in fact.gap_sign_changes)))
        report.degenerate = tuple(degenerate)
        writer.text("solutions.csv", _csv_text(SOLUTION_COLUMNS, sol_rows))

        stage = "report"
        write_report_tables(writer, report, cfg.precision, cfg.verify["slack"])
        result.report = report
        _write_manifest(writer, cfg, "ok", timings, degenerate, seeds)
        result.status = 0
        return result
    except Exception as exc:
        name = exc.stage if isinstance(exc, StageError) else stage
        original = exc.original if isinstance(exc, StageError) else exc
        result.error = {"stage": name, "type": type(original).__name__, "message": str(original)}
        (root / "error.json").write_text(json.dumps(result.error, indent=1) + "\n")
        (root / "FAILED").write_text(f"{name}\n")
        _write_manifest(writer, cfg, "failed", timings, seeds=seeds)
        result.status = 2 if name == "validate" else 1
        log(f"FAILED at stage {name}: {result.error['type']}: {result.error['message']}")
        return result


def _print_summary(rows, stream) -> None:
    cols = ("claim", "quantity", "j", "k", "z_index", "n_last", "gap_last", "trend", "bound")
    w = csv.writer(stream, delimiter="\t", lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([fmt(row[c]) if not isinstance(row[c], str) else row[c] for c in cols])


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mlhp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("validate", "check a configuration and print the hypothesis checklist"),
                        ("run", "run an experiment and write its artifacts"),
                        ("report", "re-emit report tables from a stored run")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", required=(name != "report"))
        s.add_argument("--out", help="artifact directory")
        s.add_argument("--workers", type=int)
        s.add_argument("--precision", type=int, help="working precision in bits (override)")
        s.add_argument("--seed", type=int, help="seed for the random z-points (u64)")
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    log = lambda msg: print(msg, file=_sys.stderr)
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        log("--seed must be an unsigned 64-bit integer")
        return 2
    if args.command == "report":
        if args.out is None:
            log("report needs --out pointing at a run directory")
            return 2
        root = Path(args.out)
        cfg = load_config(root / "config.yaml")
        report = read_records(root)
        writer = _Writer(root)
        summary = write_report_tables(writer, report, cfg.precision, cfg.verify["slack"])
        _print_summary(summary, _sys.stdout)
        return 0
    cfg = load_config(args.config, precision=args.precision, seed=args.seed,
                      workers=args.workers, out=args.out)
    if args.command == "validate":
        diag = validate_config(cfg)
        print(diag.render())
        return 0 if diag.ok else 1
    result = run_experiment(cfg, log=log)
    if result.report is not None:
        _print_summary(summarize(result.report, cfg.verify["slack"],
                                 _floors(cfg.precision)), _sys.stdout)
    return result.status


if __name__ == "__main__":
    raise SystemExit(main())
