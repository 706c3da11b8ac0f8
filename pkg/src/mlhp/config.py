"""Experiment configuration: YAML ingestion, normalization and validation."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import yaml

from .measures import Interval, MeasureSpec
from .nikishin import HypothesisError, NikishinSystem, build_perturbation, check_pole_count
from .polynomials import to_fraction
from .verify import CLAIMS

__all__ = ["ExperimentConfig", "Check", "Diagnostics", "load_config", "validate_config",
           "precision_rule"]

EQUILIBRIUM_METHODS = ("energy-descent", "cyclic-relaxation")


def precision_rule(n_max: int) -> int:
    """Rule-of-thumb working precision ``8 n + 128`` bits."""
    return 8 * int(n_max) + 128


@dataclass
class ExperimentConfig:
    """Parsed configuration, one attribute per section.

    ``raw`` keeps the normalized mapping; :meth:`dump` writes it back so an
    artifact directory records exactly what ran.
    """

    experiment: str
    measures: list
    fractions: list
    n_list: list
    precision: int
    precision_override: bool
    node_count: int
    node_policy: str
    workers: int
    equilibrium: dict
    verify: dict
    output: dict
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def m(self) -> int:
        return len(self.measures)

    def specs(self) -> list:
        return [MeasureSpec.from_config(b) for b in self.measures]

    def fraction_pairs(self) -> list:
        out = []
        for fr in self.fractions:
            if fr is None:
                out.append(None)
            else:
                out.append((tuple(to_fraction(c) for c in fr["numerator"]),
                            tuple(to_fraction(c) for c in fr["denominator"])))
        return out

    def build(self):
        """``(NikishinSystem, RationalPerturbation)`` at the configured precision."""
        sys = NikishinSystem(self.specs(), self.node_count, self.precision)
        pert = build_perturbation(self.fraction_pairs(), m=self.m, precision=self.precision,
                                  intervals=sys.intervals)
        return sys, pert

    def dump(self) -> str:
        return yaml.safe_dump(self.raw, sort_keys=True, default_flow_style=None)


def _auto_nodes(n_max: int) -> int:
    return max(64, 4 * n_max + 64)


def _scalar(x):
    """Exact rationals as strings so coefficients survive the YAML round trip."""
    if isinstance(x, Fraction):
        return str(x)
    return x


def load_config(source, precision: int | None = None, seed: int | None = None,
                workers: int | None = None, out: str | None = None) -> ExperimentConfig:
    """Parse a YAML file (path) or an already-loaded mapping.

    Command line overrides replace the matching entries; a precision given
    here counts as an explicit override of the rule of thumb.
    """
    if isinstance(source, (str, Path)):
        data = yaml.safe_load(Path(source).read_text())
    else:
        data = copy.deepcopy(dict(source))
    system = data.get("system", {})
    run = data.get("run", {})
    eqb = data.get("equilibrium", {})
    ver = data.get("verify", {})
    outb = data.get("output", {})
    measures = [dict(b) for b in system.get("measures", [])]
    for b in measures:
        b["interval"] = [_scalar(to_fraction(v)) for v in b["interval"]]
    fractions = list(data.get("perturbation", {}).get("fractions", []))
    fractions += [None] * (len(measures) - len(fractions))
    fractions = [None if fr is None else
                 {"numerator": [_scalar(to_fraction(c)) for c in fr["numerator"]],
                  "denominator": [_scalar(to_fraction(c)) for c in fr["denominator"]]}
                 for fr in fractions]
    n_list = [int(n) for n in run.get("n_list", [])]
    if "n_range" in run:
        lo, hi, step = (int(v) for v in run["n_range"])
        n_list = list(range(lo, hi + 1, step))
    override = bool(run.get("precision_override", False))
    prec = int(run.get("precision", precision_rule(max(n_list, default=0))))
    if precision is not None:
        prec, override = int(precision), True
    nodes = run.get("nodes", "auto")
    if nodes == "auto":
        policy, node_count = "auto", _auto_nodes(max(n_list, default=0))
    else:
        policy, node_count = "fixed", int(nodes)
    equilibrium = {"grid_size": int(eqb.get("grid_size", 2000)),
                   "tol": float(eqb.get("tol", 1e-3)),
                   "iter_cap": int(eqb.get("iter_cap", 20000)),
                   "method": str(eqb.get("method", "cyclic-relaxation")),
                   "cross_validate": bool(eqb.get("cross_validate", True))}
    verify = {"claims": list(ver.get("claims", CLAIMS)),
              "z_points": int(ver.get("z_points", 10)),
              "identity_points": int(ver.get("identity_points", 20)),
              "annulus": [float(v) for v in ver.get("annulus", [1.2, 2.5])],
              "margin": float(ver.get("margin", 0.25)),
              "extra_points": [[float(v) for v in p] for p in ver.get("extra_points", [])],
              "seed": int(ver.get("seed", 0) if seed is None else seed),
              "slack": float(ver.get("slack", 0.05))}
    output = {"directory": str(out if out is not None else outb.get("directory", "runs/out")),
              "formats": list(outb.get("formats", ["csv", "json"]))}
    n_workers = int(run.get("workers", 1) if workers is None else workers)
    raw = {"experiment": str(data.get("experiment", "experiment")),
           "system": {"measures": measures},
           "perturbation": {"fractions": fractions},
           "run": {"n_list": n_list, "precision": prec, "precision_override": override,
                   "nodes": node_count if policy == "fixed" else "auto",
                   "node_count": node_count, "workers": n_workers},
           "equilibrium": equilibrium, "verify": verify, "output": output}
    return ExperimentConfig(experiment=raw["experiment"], measures=measures, fractions=fractions,
                            n_list=n_list, precision=prec, precision_override=override,
                            node_count=node_count, node_policy=policy, workers=n_workers,
                            equilibrium=equilibrium, verify=verify, output=output, raw=raw)


@dataclass(frozen=True)
class Check:
    name: str
    status: str          # "ok", "warn" or "fail"
    message: str


@dataclass
class Diagnostics:
    checks: list = field(default_factory=list)

    def add(self, name: str, status: str, message: str) -> None:
        self.checks.append(Check(name, status, message))

    @property
    def ok(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if c.status == "fail"]

    def render(self) -> str:
        mark = {"ok": "[ok]  ", "warn": "[warn]", "fail": "[FAIL]"}
        return "\n".join(f"{mark[c.status]} {c.name}: {c.message}" for c in self.checks)


def validate_config(cfg: ExperimentConfig, build_system: bool = True) -> Diagnostics:
    """Check structural invariants and the hypotheses of the construction.

    With ``build_system`` the quadrature is built so the pole-count
    criterion can be evaluated; otherwise that check is skipped.
    """
    d = Diagnostics()
    if cfg.m < 1:
        d.add("system", "fail", "at least one measure is required")
        return d
    try:
        specs = cfg.specs()
        d.add("weights", "ok", ", ".join(f"{s.weight.kind} on {s.interval}" for s in specs))
    except (ValueError, KeyError, TypeError) as exc:
        d.add("weights", "fail", str(exc))
        return d
    ivs = [s.interval for s in specs]
    bad = [j for j in range(len(ivs) - 1) if ivs[j].intersects(ivs[j + 1])]
    if bad:
        j = bad[0]
        d.add("disjointness", "fail", f"consecutive intervals must be disjoint: Delta_{j + 1}"
              f"={ivs[j]} meets Delta_{j + 2}={ivs[j + 1]}")
    else:
        d.add("disjointness", "ok", "consecutive intervals are disjoint")
    n = cfg.n_list
    if not n or n[0] < 1 or any(b <= a for a, b in zip(n, n[1:])):
        d.add("n_list", "fail", f"n_list must be positive and strictly increasing, got {n}")
    else:
        d.add("n_list", "ok", f"{len(n)} indices from {n[0]} to {n[-1]}")
    n_max = max(n, default=0)
    need = precision_rule(n_max)
    if cfg.precision >= need:
        d.add("precision", "ok", f"{cfg.precision} bits >= 8*{n_max}+128 = {need}")
    else:
        note = " (explicit override)" if cfg.precision_override else ""
        d.add("precision", "warn", f"{cfg.precision} bits below the rule of thumb "
              f"8*{n_max}+128 = {need}{note}")
    exact = 2 * cfg.node_count - 1
    if 2 * n_max + 1 > exact:
        d.add("quadrature", "fail", f"{cfg.node_count} nodes integrate degree {exact}; "
              f"index {n_max} needs degree {2 * n_max + 1}")
    else:
        d.add("quadrature", "ok", f"{cfg.node_count} nodes ({cfg.node_policy}), exact to degree {exact}")
    eq = cfg.equilibrium
    if eq["method"] not in EQUILIBRIUM_METHODS:
        d.add("equilibrium", "fail", f"unknown method {eq['method']!r}")
    elif eq["grid_size"] < 16 or eq["tol"] <= 0:
        d.add("equilibrium", "fail", "grid_size must be >= 16 and tol > 0")
    else:
        d.add("equilibrium", "ok", f"{eq['method']}, G={eq['grid_size']}, tol={eq['tol']:g}")
    unknown = [c for c in cfg.verify["claims"] if c not in CLAIMS]
    if unknown:
        d.add("claims", "fail", f"unknown claims {unknown}; expected a subset of {list(CLAIMS)}")
    else:
        d.add("claims", "ok", ", ".join(cfg.verify["claims"]))
    if len(cfg.fractions) > cfg.m:
        d.add("perturbation", "fail", f"{len(cfg.fractions)} fractions for m={cfg.m}")
        return d
    try:
        pert = build_perturbation(cfg.fraction_pairs(), m=cfg.m, precision=cfg.precision,
                                  intervals=ivs)
        d.add("fractions", "ok", "deg v_k < deg t_k, v_k and t_k coprime")
        d.add("zeros of T", "ok", f"D={pert.D}; zeros of T keep off Delta_1 and Delta_m")
    except HypothesisError as exc:
        d.add("zeros of T", "fail", str(exc))
        return d
    except (ValueError, ZeroDivisionError) as exc:
        d.add("fractions", "fail", str(exc))
        return d
    if not d.ok or not build_system:
        return d
    sys = NikishinSystem(specs, cfg.node_count, cfg.precision)
    reports = check_pole_count(sys, pert)
    failed = [r for r in reports if not r.passed]
    if failed:
        d.add("pole count", "fail", "lim (z - zeta)^tau f(z) vanishes at "
              + ", ".join(str(complex(r.root)) for r in failed))
    else:
        d.add("pole count", "ok", f"{len(reports)} zero(s) of T are genuine poles of f")
    return d
