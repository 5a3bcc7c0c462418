"""Experiment harness: JSON configs, single runs, epsilon sweeps and reports."""

from __future__ import annotations

import csv
import dataclasses
import html
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import energy as en
from . import littlewood_paley as lp
from . import verification
from .initial import make_initial, topography as make_topography
from .integrator import ConfigInvalid, RunConfig, SimulationResult, simulate
from .model import PRESETS, AbcdParams, Classification, validate_params
from .snapshot import read_snapshot, write_snapshot
from .spectral import GridSpec

log = logging.getLogger(__name__)

DEFAULT_LADDER = (0.1, 0.05, 0.025, 0.0125)

_KNOWN_KEYS = {
    "preset", "params", "epsilon", "epsilon_ladder", "grid", "s", "r", "scheme", "dt", "t_end",
    "m", "blow_up", "output_every", "snapshot_every", "seed", "seeds", "initial", "topography",
    "K", "constant_C",
}


@dataclass(frozen=True)
class InitialSpec:
    family: str = "gaussian"
    amplitude: float = 1.0
    sigma: float = 2.0
    k: int = 1
    velocity: float = 0.0
    decay: float = 2.0


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a JSON config can set; defaults match a short BBM-BBM run."""

    quad: tuple = (0.0, 1.0 / 6.0, 0.0, 1.0 / 6.0)
    preset_name: str | None = "bbm-bbm"
    epsilon: float = 0.1
    epsilon_ladder: tuple = DEFAULT_LADDER
    grid: GridSpec = field(default_factory=GridSpec)
    s: float | None = None
    r: float = 2
    scheme: str = "rk4"
    dt: float | None = None
    t_end: float = 10.0
    m: float | None = None
    blow_up_mode: str = "factor"
    blow_up_factor: float = 4.0
    blow_up_cap: float | None = None
    output_every: int = 10
    snapshot_every: int | None = None
    seeds: tuple = (0,)
    initial: InitialSpec = field(default_factory=InitialSpec)
    topography: dict | None = None
    K: float = 8.0
    constant_C: float = 1.0

    def params(self, epsilon: float | None = None) -> AbcdParams:
        return validate_params(*self.quad, self.epsilon if epsilon is None else epsilon)

    def run_config(self, epsilon: float | None = None, seed: int | None = None, t_end: float | None = None) -> RunConfig:
        return RunConfig(
            params=self.params(epsilon),
            grid=self.grid,
            s=self.s,
            r=self.r,
            m=self.m,
            dt=self.dt,
            t_end=self.t_end if t_end is None else t_end,
            scheme=self.scheme,
            blow_up_factor=self.blow_up_factor,
            blow_up_mode=self.blow_up_mode,
            blow_up_cap=self.blow_up_cap,
            output_every=self.output_every,
            snapshot_every=self.snapshot_every,
            seed=self.seeds[0] if seed is None else seed,
            constant_C=self.constant_C,
        )

    def initial_state(self, seed: int):
        i = self.initial
        return make_initial(self.grid, i.family, amplitude=i.amplitude, sigma=i.sigma, k=i.k,
                            velocity=i.velocity, seed=seed, decay=i.decay)

    def bottom(self):
        if self.topography is None:
            return None
        return make_topography(self.grid, **self.topography)


def parse_config(doc: dict, *, preset_override: str | None = None) -> ExperimentConfig:
    unknown = set(doc) - _KNOWN_KEYS
    if unknown:
        raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
    kw = {}
    name = preset_override or doc.get("preset")
    if name is not None and "params" in doc and preset_override is None:
        raise ConfigInvalid("give either 'preset' or 'params', not both")
    if name is not None:
        if name not in PRESETS:
            raise ConfigInvalid(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        kw["quad"], kw["preset_name"] = PRESETS[name], name
    elif "params" in doc:
        q = doc["params"]
        try:
            kw["quad"] = tuple(float(q[k]) for k in "abcd")
        except (KeyError, TypeError, ValueError):
            raise ConfigInvalid("'params' needs numeric a, b, c, d") from None
        kw["preset_name"] = None
    for key in ("epsilon", "s", "r", "dt", "t_end", "m", "K", "constant_C"):
        if doc.get(key) is not None:
            kw[key] = float(doc[key])
    for key in ("scheme",):
        if key in doc:
            kw[key] = doc[key]
    for key in ("output_every", "snapshot_every"):
        if doc.get(key) is not None:
            kw[key] = int(doc[key])
    if "epsilon_ladder" in doc:
        ladder = tuple(float(e) for e in doc["epsilon_ladder"])
        if not ladder or any(not 0 < e <= 1 for e in ladder) or any(b >= a for a, b in zip(ladder, ladder[1:])):
            raise ConfigInvalid(f"epsilon_ladder must be strictly decreasing in (0, 1], got {list(ladder)}")
        kw["epsilon_ladder"] = ladder
    if "grid" in doc:
        try:
            kw["grid"] = GridSpec(**doc["grid"])
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(f"bad grid: {exc}") from None
    bu = doc.get("blow_up") or {}
    if "mode" in bu:
        kw["blow_up_mode"] = bu["mode"]
    if "factor" in bu:
        kw["blow_up_factor"] = float(bu["factor"])
    if bu.get("cap") is not None:
        kw["blow_up_cap"] = float(bu["cap"])
    if "seeds" in doc:
        kw["seeds"] = tuple(int(s) for s in doc["seeds"])
    elif "seed" in doc:
        kw["seeds"] = (int(doc["seed"]),)
    if "initial" in doc:
        try:
            kw["initial"] = InitialSpec(**doc["initial"])
        except TypeError as exc:
            raise ConfigInvalid(f"bad initial spec: {exc}") from None
    topo = doc.get("topography")
    if isinstance(topo, str):
        topo = {"name": topo}
    if topo is not None and topo.get("name") in (None, "flat"):
        topo = None
    kw["topography"] = topo
    cfg = ExperimentConfig(**kw)
    cfg.run_config()  # validate eagerly
    return cfg


def load_config(path, *, preset_override: str | None = None) -> ExperimentConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from None
    return parse_config(doc, preset_override=preset_override)


# ---------------------------------------------------------------------------
# Single runs
# ---------------------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


def run_to_dir(cfg: ExperimentConfig, out, *, epsilon: float | None = None, seed: int | None = None,
               t_end: float | None = None) -> SimulationResult:
    """Simulate and write ``energy.csv``, ``events.jsonl`` and optional snapshots."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    seed = cfg.seeds[0] if seed is None else seed
    rc = cfg.run_config(epsilon, seed, t_end)
    initial = cfg.initial_state(seed)
    with open(out / "energy.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(en.CSV_HEADER)

        def on_report(rep):
            writer.writerow(rep.csv_row())

        def on_snapshot(st):
            write_snapshot(out / f"snapshot_t{st.t:.6f}.bin", st, rc.params)

        res = simulate(rc, initial, topography=cfg.bottom(), store_every=10**12, on_report=on_report,
                       on_snapshot=on_snapshot if cfg.snapshot_every else None)
    if cfg.snapshot_every:
        write_snapshot(out / f"snapshot_t{res.t_final:.6f}.bin", res.trajectory.state(-1), rc.params)
    header = {"event": "config", "params": rc.params.as_dict(), "seed": seed,
              **{k: _jsonable(v) for k, v in res.metadata.items()}}
    with open(out / "events.jsonl", "w") as fh:
        for ev in [header] + res.events:
            fh.write(json.dumps({k: _jsonable(v) for k, v in ev.items()}, sort_keys=True) + "\n")
    return res


# ---------------------------------------------------------------------------
# Epsilon sweep
# ---------------------------------------------------------------------------

SCALING_HEADER = ["epsilon", "seed", "t_end", "T_exist", "eps_T_exist", "censored", "Us0", "threshold", "T_long_bound"]


def refuse_unless_admissible(params: AbcdParams) -> None:
    if params.classification is not Classification.LONG_TIME:
        clauses = "; ".join(params.failed_clauses) or "classification"
        raise ConfigInvalid(
            f"sweep requires LongTimeAdmissible parameters; (a,b,c,d)=({params.a:.6g}, {params.b:.6g}, "
            f"{params.c:.6g}, {params.d:.6g}) is {params.classification.value}: failed {clauses}"
        )


def _sweep_row(args):
    cfg, eps, seed, run_dir = args
    t_end = cfg.K / eps
    res = run_to_dir(cfg, run_dir, epsilon=eps, seed=seed, t_end=t_end)
    censored = res.T_exist is None
    T = math.inf if censored else res.T_exist
    H = res.metadata["H"]
    T_long = en.long_time_bounds(res.Us0, 0.0, H, eps, cfg.constant_C).T_long if res.Us0 > 0 else math.inf
    return {
        "epsilon": eps,
        "seed": seed,
        "t_end": t_end,
        "T_exist": T,
        "eps_T_exist": eps * T,
        "censored": censored,
        "Us0": res.Us0,
        "threshold": res.threshold,
        "T_long_bound": T_long,
        "status": res.status.value,
    }


def sweep_epsilon(cfg: ExperimentConfig, out, *, jobs: int = 1) -> dict:
    """Run the ladder with ``t_end = K / eps`` and write ``scaling.csv``.

    Rows are computed independently (in parallel for ``jobs > 1``) and
    written in ladder order, so the table does not depend on ``jobs``.
    """
    for eps in cfg.epsilon_ladder:
        refuse_unless_admissible(cfg.params(eps))
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    tasks = [(cfg, eps, seed, out / f"eps_{eps:g}_seed_{seed}") for eps in cfg.epsilon_ladder for seed in cfg.seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_row, tasks))
    else:
        rows = [_sweep_row(t) for t in tasks]
    with open(out / "scaling.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCALING_HEADER)
        for row in rows:
            w.writerow([repr(float(row[k])) if k not in ("seed", "censored") else int(row[k]) for k in SCALING_HEADER])
    summary = scaling_summary(rows)
    (out / "scaling_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return {"rows": rows, "summary": summary}


def scaling_summary(rows: list) -> dict:
    vals = [r["eps_T_exist"] for r in rows if not r["censored"]]
    if not vals:
        return {"all_censored": True, "uncensored": 0, "min_eps_T": None, "max_eps_T": None,
                "ratio": None, "flat": True}
    lo, hi = min(vals), max(vals)
    ratio = hi / lo if lo > 0 else math.inf
    return {"all_censored": False, "uncensored": len(vals), "min_eps_T": lo, "max_eps_T": hi,
            "ratio": ratio, "flat": ratio <= 2.0}


# ---------------------------------------------------------------------------
# verify / besov / report
# ---------------------------------------------------------------------------

def verify(suite: str, out=None) -> list[dict]:
    names = verification.SUITES if suite == "all" else (suite,)
    if suite != "all" and suite not in verification.SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {verification.SUITES + ('all',)}")
    reports = []
    for name in names:
        rep = verification.run_suite(name)
        reports.append(rep)
        if out is not None:
            Path(out).mkdir(parents=True, exist_ok=True)
            (Path(out) / f"verify_{name}.json").write_text(json.dumps(rep, indent=2, default=_jsonable) + "\n")
    if suite == "all" and out is not None:
        summary = {"suite": "all", "passed": all(r["passed"] for r in reports),
                   "suites": {r["suite"]: r["passed"] for r in reports}}
        (Path(out) / "verify_all.json").write_text(json.dumps(summary, indent=2) + "\n")
    return reports


def besov(path, s: float, r: float = 2) -> dict:
    """``B^s_{2,r}`` norms of every field stored in a snapshot."""
    header, arrays = read_snapshot(path)
    grid = GridSpec(**header["grid"])
    p = lp.build_partition(grid)
    return {name: lp.besov_norm(p, arr, s, r) for name, arr in arrays.items()}


def _read_energy(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def report(run_dir, out=None) -> Path:
    """Summarize every run below ``run_dir`` into ``summary.csv`` and ``summary.html``."""
    run_dir = Path(run_dir)
    files = sorted(run_dir.rglob("energy.csv")) if run_dir.is_dir() else []
    if not files:
        raise FileNotFoundError(f"no runs found in {run_dir}")
    out = Path(out) if out else run_dir
    out.mkdir(parents=True, exist_ok=True)
    cols = ["run", "status", "t_final", "T_exist", "Us0", "Us_max_ratio", "hamiltonian_drift", "max_curl_res"]
    rows = []
    for f in files:
        recs = _read_energy(f)
        status, T_exist = "unknown", ""
        ev = f.parent / "events.jsonl"
        if ev.exists():
            for line in ev.read_text().splitlines():
                e = json.loads(line)
                if e.get("event") == "exit":
                    status = e["status"]
                    T_exist = "" if e["T_exist"] is None else repr(e["T_exist"])
        Us = [float(r["Us"]) for r in recs]
        ham = [float(r["hamiltonian"]) for r in recs if r["hamiltonian"]]
        drift = repr(max(abs(h - ham[0]) for h in ham) / abs(ham[0])) if ham and ham[0] else ""
        rows.append({
            "run": str(f.parent.relative_to(run_dir)) or ".",
            "status": status,
            "t_final": recs[-1]["t"] if recs else "",
            "T_exist": T_exist,
            "Us0": recs[0]["Us"] if recs else "",
            "Us_max_ratio": repr(max(Us) / Us[0]) if Us and Us[0] else "",
            "hamiltonian_drift": drift,
            "max_curl_res": repr(max(float(r["curl_res"]) for r in recs)) if recs else "",
        })
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    buf = io.StringIO()
    buf.write("<!doctype html>\n<html><head><meta charset='utf-8'><title>abcd runs</title>\n")
    buf.write("<style>table{border-collapse:collapse}td,th{border:1px solid #999;padding:2px 6px}</style>\n")
    buf.write("</head><body>\n<h1>Run summary</h1>\n<table>\n<tr>")
    buf.write("".join(f"<th>{html.escape(c)}</th>" for c in cols) + "</tr>\n")
    for row in rows:
        buf.write("<tr>" + "".join(f"<td>{html.escape(str(row[c]))}</td>" for c in cols) + "</tr>\n")
    buf.write("</table>\n")
    scaling = sorted(run_dir.rglob("scaling.csv"))
    for sc in scaling:
        buf.write(f"<h2>{html.escape(str(sc.relative_to(run_dir)))}</h2>\n<pre>{html.escape(sc.read_text())}</pre>\n")
    buf.write("</body></html>\n")
    (out / "summary.html").write_text(buf.getvalue())
    return out / "summary.csv"


def config_to_doc(cfg: ExperimentConfig) -> dict:
    """Inverse of :func:`parse_config` (useful for writing reproducible configs)."""
    doc = {
        "epsilon": cfg.epsilon,
        "epsilon_ladder": list(cfg.epsilon_ladder),
        "grid": {"n": cfg.grid.n, "N": cfg.grid.N, "L": cfg.grid.L},
        "s": cfg.s,
        "r": cfg.r,
        "scheme": cfg.scheme,
        "dt": cfg.dt,
        "t_end": cfg.t_end,
        "m": cfg.m,
        "blow_up": {"mode": cfg.blow_up_mode, "factor": cfg.blow_up_factor, "cap": cfg.blow_up_cap},
        "output_every": cfg.output_every,
        "snapshot_every": cfg.snapshot_every,
        "seeds": list(cfg.seeds),
        "initial": dataclasses.asdict(cfg.initial),
        "topography": cfg.topography,
        "K": cfg.K,
        "constant_C": cfg.constant_C,
    }
    if cfg.preset_name:
        doc["preset"] = cfg.preset_name
    else:
        doc["params"] = dict(zip("abcd", cfg.quad))
    return doc
