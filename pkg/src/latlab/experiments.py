"""Monte Carlo experiments over random dilations, with CSV reports.

Every experiment is a pure function of its config (including the seed).
Random draws come from streams keyed by (seed, namespace, sample index), so
running the per-sample work on several threads gives the same numbers as a
single-threaded run.
"""

from __future__ import annotations

import dataclasses
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import orbit, zsquare
from .counting import RectWindow, second_moment_over_X
from .densities import DensitySpec, sample_t
from .errors import BallTooLarge, NumZero, SpecError
from .lattice import construct_lattice, dual_lattice, num_of_lattice, shortest_vector_norm
from .oracles import IntegralRegionSpec, admissible_tail_integral
from .spectral import GCurve, TruncationSpec, VCurve

X_STREAM = 1  # namespace of the translation streams (t uses 0)
WORK_CAP = 5 * 10**9  # samples_t * samples_x * lines per count
EXPERIMENTS = ("secondmoment", "gdecay", "orbitclt", "zsquare", "voracle")


def _floats(text) -> tuple:
    if isinstance(text, (tuple, list)):
        return tuple(float(v) for v in text)
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def _ints(text) -> tuple:
    if isinstance(text, (tuple, list)):
        return tuple(int(v) for v in text)
    return tuple(int(v) for v in str(text).split(",") if v.strip())


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int
    lattice: str = "quad:sqrt:2,-sqrt:2"
    a: float = 1.0
    b: float = 1.0
    bigT: float = 100.0
    samples_t: int = 200
    samples_x: int = 200
    kmax: int = 100
    r: tuple = (50.0,)
    dim: int = 2
    theta: str = "rademacher"
    trials: int = 10_000
    k_list: tuple = (0, 1, 2, 3, 4)
    rho: Optional[str] = None  # default: uniform for zsquare, window:0.5 otherwise
    x: float = 0.0
    scheme: str = "iid"
    t_list: tuple = (50.0, 100.0, 200.0, 500.0, 1000.0, 2000.0)
    workers: int = 1
    out: Optional[str] = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise SpecError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        if self.seed is None or int(self.seed) < 0:
            raise SpecError("a nonnegative seed is required")
        self.seed = int(self.seed)
        self.r = _floats(self.r)
        self.k_list = _ints(self.k_list)
        self.t_list = _floats(self.t_list)
        for name in ("samples_t", "samples_x", "kmax", "trials", "workers", "dim"):
            setattr(self, name, int(getattr(self, name)))
            if getattr(self, name) < 1:
                raise SpecError(f"{name} must be positive")
        for name in ("a", "b", "bigT"):
            setattr(self, name, float(getattr(self, name)))
            if not getattr(self, name) > 0:
                raise SpecError(f"{name} must be positive")
        self.x = float(self.x)
        if self.rho is None:
            self.rho = "uniform" if self.experiment == "zsquare" else "window:0.5"
        DensitySpec.parse(self.rho)

    @property
    def density(self) -> DensitySpec:
        return DensitySpec.parse(self.rho)


_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig)}
_ALIASES = {"bigt": "bigT", "k": "k_list", "id": "experiment"}


def parse_config(text: str) -> ExperimentConfig:
    """Parse ``key = value`` lines (keys as CLI flag names; '#' starts a comment)."""
    values = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecError(f"line {n}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        key = _ALIASES.get(key.lower(), key)
        if key not in _FIELDS:
            raise SpecError(f"line {n}: unknown key {key!r}")
        values[key] = value
    if "experiment" not in values:
        raise SpecError("config needs an 'experiment' key")
    if "seed" not in values:
        raise SpecError("config needs a 'seed' key")
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


@dataclass
class MomentReport:
    """Named statistics (value, stderr), metadata, and per-sample rows.

    ``durations`` is kept out of the CSV so reruns produce identical files.
    """

    columns: list
    rows: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    durations: dict = field(default_factory=dict)

    def add_stat(self, name: str, value: float, stderr: float = 0.0):
        if stderr < 0 or math.isnan(stderr):
            raise ValueError("stderr must be >= 0")
        self.stats[name] = (float(value), float(stderr))

    def column(self, name: str) -> np.ndarray:
        j = self.columns.index(name)
        return np.array([row[j] for row in self.rows if len(row) == len(self.columns)], dtype=float)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def format_csv(report: MomentReport) -> str:
    lines = [f"# {k}={_fmt(v)}" for k, v in report.metadata.items()]
    lines += [f"# stat.{k}={_fmt(v)},{_fmt(se)}" for k, (v, se) in report.stats.items()]
    lines.append(",".join(report.columns))
    lines += [",".join(_fmt(v) for v in row) for row in report.rows]
    return "\n".join(lines) + "\n"


def emit_csv(report: MomentReport, path) -> str:
    """Write the report: ``# key=value`` metadata, header, rows (LF, %.17g)."""
    text = format_csv(report)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return text


def read_csv(path):
    """Inverse of emit_csv: (metadata dict of strings, header, rows of strings)."""
    meta, header, rows = {}, None, []
    with open(path, encoding="utf-8") as fh:
        for line in fh.read().splitlines():
            if line.startswith("# "):
                k, v = line[2:].split("=", 1)
                meta[k] = v
            elif header is None:
                header = line.split(",")
            else:
                rows.append(line.split(","))
    return meta, header, rows


def _map(fn, items, workers):
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


def _base_metadata(cfg: ExperimentConfig) -> dict:
    meta = {"experiment": cfg.experiment, "seed": cfg.seed, "lattice": cfg.lattice}
    return meta


def _planar_lattice(cfg):
    L = construct_lattice(cfg.lattice)
    if L.dim != 2:
        raise SpecError("this experiment needs a planar lattice")
    return L


def run_second_moment_experiment(cfg: ExperimentConfig) -> MomentReport:
    """E_X[R^2] / V(dual(L), t) over dilations t ~ rho on [0, bigT]."""
    clock = time.perf_counter()
    L = _planar_lattice(cfg)
    P = RectWindow(cfg.a, cfg.b)
    M = dual_lattice(L)
    lines = 2.0 * cfg.bigT * max(cfg.a, cfg.b) / shortest_vector_norm(L) + 3.0
    if cfg.samples_t * cfg.samples_x * lines > WORK_CAP:
        raise BallTooLarge(f"workload {cfg.samples_t * cfg.samples_x * lines:.3g} exceeds the cap {WORK_CAP:.3g}")
    try:
        vcurve = VCurve(M, cfg.bigT)
    except NumZero as exc:
        raise NumZero(f"{exc}; V is undefined for this lattice, use the zsquare experiment instead") from None
    ts = sample_t(cfg.density, cfg.bigT, cfg.samples_t, cfg.seed)
    V = vcurve(ts)
    if np.any(V <= 0):
        raise ValueError("V(dual(L), t) = 0 for some sampled t; use a window density bounded away from 0")

    def one(i):
        est = second_moment_over_X(L, P, float(ts[i]), cfg.samples_x, cfg.seed, keys=(X_STREAM, i))
        return est.m2

    m2 = np.array(_map(one, range(cfg.samples_t), cfg.workers))
    ratio = m2 / V
    target = 1.0 / (4.0 * math.pi**4 * L.covol**2)
    rep = MomentReport(["t", "V", "m2_over_V"])
    rep.rows = [(float(t), float(v), float(q)) for t, v, q in zip(ts, V, ratio)]
    n = len(ratio)
    mean = math.fsum(ratio) / n
    std = math.sqrt(math.fsum((ratio - mean) ** 2) / (n - 1)) if n > 1 else 0.0
    rep.add_stat("mean_m2_over_V", mean, std / math.sqrt(n))
    rep.add_stat("std_m2_over_V", std)
    rep.add_stat("target", target)
    rep.add_stat("mean_over_target", mean / target, std / math.sqrt(n) / target)
    rep.metadata = _base_metadata(cfg) | {
        "a": cfg.a,
        "b": cfg.b,
        "bigT": cfg.bigT,
        "rho": str(cfg.density),
        "samples_t": cfg.samples_t,
        "samples_x": cfg.samples_x,
    }
    rep.durations["total_s"] = time.perf_counter() - clock
    return rep


def run_g_decay_experiment(cfg: ExperimentConfig) -> MomentReport:
    """G1/V and |G2|/V, |G3|/V, |G4|/V over dilations t ~ rho on [0, bigT]."""
    clock = time.perf_counter()
    L = _planar_lattice(cfg)
    P = RectWindow(cfg.a, cfg.b)
    M = dual_lattice(L)
    trunc = TruncationSpec(cfg.kmax)
    ts = sample_t(cfg.density, cfg.bigT, cfg.samples_t, cfg.seed)
    try:
        curve = GCurve(M, float(np.max(ts)))
    except NumZero as exc:
        raise NumZero(f"{exc}; use the zsquare experiment for this lattice") from None
    sums = _map(lambda i: curve(P, float(ts[i]), trunc), range(cfg.samples_t), cfg.workers)
    if any(s.V <= 0 for s in sums):
        raise ValueError("V(dual(L), t) = 0 for some sampled t; use a window density bounded away from 0")
    cols = ["t", "V", "G1_over_V", "abs_G2_over_V", "abs_G3_over_V", "abs_G4_over_V", "identity_residual", "tail_bound"]
    rep = MomentReport(cols)
    for s in sums:
        rep.rows.append(
            (s.t, s.V, s.G1 / s.V, abs(s.G2) / s.V, abs(s.G3) / s.V, abs(s.G4) / s.V, s.identity_residual(), s.truncation_error)
        )
    n = len(sums)
    for name, vals in (
        ("G1_over_V", [s.G1 / s.V for s in sums]),
        ("abs_G2_over_V", [abs(s.G2) / s.V for s in sums]),
        ("abs_G3_over_V", [abs(s.G3) / s.V for s in sums]),
        ("abs_G4_over_V", [abs(s.G4) / s.V for s in sums]),
    ):
        v = np.array(vals)
        mean = math.fsum(v) / n
        se = math.sqrt(math.fsum((v - mean) ** 2) / (n - 1) / n) if n > 1 else 0.0
        rep.add_stat("mean_" + name, mean, se)
    rep.add_stat("G1_target", M.covol**2 / (4.0 * math.pi**4))
    rep.add_stat("max_identity_residual", max(s.identity_residual() for s in sums))
    rep.metadata = _base_metadata(cfg) | {"a": cfg.a, "b": cfg.b, "bigT": cfg.bigT, "rho": str(cfg.density), "kmax": cfg.kmax}
    rep.durations["total_s"] = time.perf_counter() - clock
    return rep


def run_orbit_experiment(cfg: ExperimentConfig) -> MomentReport:
    """Normalized orbit sums: KS distance to N(0,1) and Berry-Esseen bound per r."""
    clock = time.perf_counter()
    L = construct_lattice(cfg.lattice)
    model = orbit.SignModel(cfg.theta)
    rep = MomentReport(["r", "count", "v_tilde", "ks", "be_bound", "trials", "seed"])
    for r in cfg.r:
        on = orbit.orbit_norms(L, cfg.dim, r)
        st = orbit.orbit_stats(L, cfg.dim, r, model, on=on)
        vals = orbit.simulate_s_tilde(L, cfg.dim, r, model, cfg.trials, cfg.seed, on=on)
        res = orbit.berry_esseen_check(vals, st)
        rep.rows.append((float(r), st.count, st.v_tilde, res.ks_distance, st.be_bound, cfg.trials, cfg.seed))
    rep.metadata = _base_metadata(cfg) | {"dim": cfg.dim, "theta": cfg.theta}
    rep.durations["total_s"] = time.perf_counter() - clock
    return rep


def run_zsquare_experiment(cfg: ExperimentConfig) -> MomentReport:
    """Empirical law of the Z^2 sawtooth against the limit mixture."""
    clock = time.perf_counter()
    res = zsquare.empirical_vs_beta(cfg.x, cfg.bigT, cfg.samples_t, cfg.density, cfg.seed, cfg.k_list, scheme=cfg.scheme)
    rep = MomentReport(["k", "a_k", "empirical", "abs_err"])
    for k in cfg.k_list:
        rep.rows.append((k, zsquare.limit_moment(k, res.y), res.moments[k], res.moment_errors[k]))
        rep.add_stat(f"m{k}", res.moments[k], res.stderr[k])
    rep.rows.append(("ks", res.ks))
    rep.add_stat("ks", res.ks)
    rep.metadata = _base_metadata(cfg) | {
        "x": cfg.x,
        "y": res.y,
        "bigT": cfg.bigT,
        "samples_t": cfg.samples_t,
        "rho": str(cfg.density),
        "scheme": cfg.scheme,
    }
    del rep.metadata["lattice"]
    rep.durations["total_s"] = time.perf_counter() - clock
    return rep


def run_voracle_experiment(cfg: ExperimentConfig) -> MomentReport:
    """V(L, t) against the admissible-region integral with C = Num(L), A = |L|."""
    clock = time.perf_counter()
    L = _planar_lattice(cfg)
    t_max = max(cfg.t_list)
    C = num_of_lattice(L, t_max)
    if C <= 0:
        raise NumZero("Num(L) = 0: V is undefined for this lattice")
    A = max(shortest_vector_norm(L), math.sqrt(2.0 * C))
    vcurve = VCurve(L, t_max)
    rep = MomentReport(["t", "V", "V_over_log_t", "oracle", "V_over_oracle"])
    for t in cfg.t_list:
        v = float(vcurve(t))
        q = admissible_tail_integral(IntegralRegionSpec(A, C, max(t, A))).value
        rep.rows.append((t, v, v / math.log(t), q, v / q if q > 0 else math.nan))
    rep.metadata = _base_metadata(cfg) | {"A": A, "C": C}
    rep.durations["total_s"] = time.perf_counter() - clock
    return rep


RUNNERS = {
    "secondmoment": run_second_moment_experiment,
    "gdecay": run_g_decay_experiment,
    "orbitclt": run_orbit_experiment,
    "zsquare": run_zsquare_experiment,
    "voracle": run_voracle_experiment,
}


def run_experiment(cfg: ExperimentConfig) -> MomentReport:
    rep = RUNNERS[cfg.experiment](cfg)
    if cfg.out:
        emit_csv(rep, cfg.out)
    return rep
