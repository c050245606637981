"""Experiment driver: convergence sweeps in the particle number n, rate
fitting, and result persistence.

A sweep builds the requested initial-state family at each n, evolves it with
the exact 1/n-scaled many-body propagator, evolves the mean-field equation
once, and records the distance between the evolved one-particle reduced
density matrix and its mean-field target, per (n, t).

The CSV schema is bit-exact: header
``n,m,t,trace_dist,hs_dist,op_dist,cross_term,bound_envelope,runtime_s``,
floats as shortest round-trip decimals, UTF-8, LF line endings.  In
single-thread mode (the reproducibility reference) the wall-clock column is
left empty so identical (config, seed) runs produce byte-identical files.
"""

import csv
import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import exp, log, sqrt

import numpy as np

from .combinatorics import admissible_m
from .dynamics import evolve_fock, make_plan
from .errors import ConfigError, ExactRegimeError
from .fock import build_hamiltonian, enumerate_basis, fixed, truncated, weyl_headroom
from .hartree import evolve_hartree
from .modes import ModeSystem
from .rdm import distance, mixed_target, projector, reduced_dm
from .states import (
    SuperpositionSpec,
    coherent_state,
    component_states,
    product_state,
    random_excitation,
    superposition,
    theta_state,
)

CSV_HEADER = [
    "n", "m", "t",
    "trace_dist", "hs_dist", "op_dist",
    "cross_term", "bound_envelope", "runtime_s",
]

_FAMILIES = ("product", "coherent", "theta", "superposition")
_SUPER_KINDS = ("product", "theta", "coherent")


# ---------------------------------------------------------------------------
# configuration


def _parse_complex(x, where):
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(
        isinstance(u, (int, float)) for u in x
    ):
        return complex(x[0], x[1])
    raise ConfigError(f"{where}: expected a number or [re, im] pair, got {x!r}")


def _parse_cvector(xs, where):
    if not isinstance(xs, list) or not xs:
        raise ConfigError(f"{where}: expected a non-empty list")
    return np.array([_parse_complex(x, where) for x in xs], dtype=complex)


def _require_keys(d, allowed, required, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = set(d) - set(allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = set(required) - set(d)
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")


def _parse_mode_system(d):
    _require_keys(
        d,
        allowed=("geometry", "sites", "hopping", "potential", "h", "v"),
        required=("geometry",),
        where="mode_system",
    )
    geom = d["geometry"]
    if geom == "lattice":
        _require_keys(
            d, ("geometry", "sites", "hopping", "potential"),
            ("sites", "potential"), "mode_system",
        )
        pot = d["potential"]
        _require_keys(pot, ("kind", "g", "sigma"), ("kind", "g"), "mode_system.potential")
        if pot["kind"] == "gaussian":
            spec = ("gaussian", float(pot["g"]), float(pot.get("sigma", 1.0)))
        elif pot["kind"] in ("contact", "neighbor"):
            spec = (pot["kind"], float(pot["g"]))
        else:
            raise ConfigError(f"unknown potential kind {pot['kind']!r}")
        return ModeSystem.lattice(
            int(d["sites"]), hopping=float(d.get("hopping", 1.0)), potential=spec
        )
    if geom == "dense":
        _require_keys(d, ("geometry", "h", "v"), ("h", "v"), "mode_system")
        h = np.array([[_parse_complex(x, "mode_system.h") for x in row] for row in d["h"]])
        v = np.array(d["v"], dtype=float)
        return ModeSystem.dense(h, v)
    raise ConfigError(f"unknown geometry {geom!r}")


@dataclass
class MSchedule:
    """Excitation-size schedule: constant m, or round(a ln n) clamped."""

    kind: str
    m: int = 0
    a: float = 0.0

    def value(self, n):
        if self.kind == "constant":
            return self.m
        return max(0, min(int(round(self.a * log(n))), admissible_m(n)))


def _parse_m(x, where, a_cap):
    if isinstance(x, int):
        return MSchedule(kind="constant", m=x)
    if isinstance(x, dict):
        _require_keys(x, ("schedule", "a", "m"), ("schedule",), where)
        if x["schedule"] == "constant":
            return MSchedule(kind="constant", m=int(x.get("m", 0)))
        if x["schedule"] == "log":
            a = float(x["a"])
            if not 0 <= a < a_cap:
                raise ConfigError(f"{where}: log schedule needs 0 <= a < {a_cap}")
            return MSchedule(kind="log", a=a)
    raise ConfigError(f"{where}: expected an integer or a schedule object")


@dataclass
class ComponentSpec:
    phi: np.ndarray
    coeff: complex
    m_schedule: MSchedule = None
    excitation_seed: int = 0


@dataclass
class ExperimentConfig:
    """Parsed, validated experiment description plus its canonical hash."""

    ms: ModeSystem
    family: str
    phi: np.ndarray = None
    m_schedule: MSchedule = None
    excitation_seed: int = 0
    super_kind: str = None
    components: list = field(default_factory=list)
    n_list: list = field(default_factory=list)
    t_list: list = field(default_factory=list)
    hartree_tol: float = 1e-10
    krylov_tol: float = 1e-10
    seed: int = 0
    out_dir: str = "."
    out_format: str = "csv"
    config_hash: str = ""
    raw: dict = field(default_factory=dict)

    @staticmethod
    def from_dict(doc, seed_override=None):
        _require_keys(
            doc,
            allowed=("mode_system", "state", "n_list", "t_list",
                     "tolerances", "seed", "output"),
            required=("mode_system", "state", "n_list", "t_list"),
            where="config",
        )
        ms = _parse_mode_system(doc["mode_system"])
        st = doc["state"]
        _require_keys(
            st,
            allowed=("family", "phi", "m", "excitation_seed", "kind", "components"),
            required=("family",),
            where="state",
        )
        family = st["family"]
        if family not in _FAMILIES:
            raise ConfigError(f"unknown state family {family!r}")

        cfg = ExperimentConfig(ms=ms, family=family)
        if family == "superposition":
            _require_keys(st, ("family", "kind", "components"),
                          ("kind", "components"), "state")
            if st["kind"] not in _SUPER_KINDS:
                raise ConfigError(f"unknown superposition kind {st['kind']!r}")
            cfg.super_kind = st["kind"]
            if not isinstance(st["components"], list) or len(st["components"]) < 2:
                raise ConfigError("superposition needs at least 2 components")
            a_cap = 0.5 if st["kind"] == "theta" else 1.0
            for i, comp in enumerate(st["components"]):
                _require_keys(
                    comp, ("phi", "coeff", "m", "excitation_seed"),
                    ("phi", "coeff"), f"state.components[{i}]",
                )
                cs = ComponentSpec(
                    phi=_parse_cvector(comp["phi"], "component phi"),
                    coeff=_parse_complex(comp["coeff"], "component coeff"),
                    excitation_seed=int(comp.get("excitation_seed", i)),
                )
                if st["kind"] == "theta":
                    cs.m_schedule = _parse_m(
                        comp.get("m", 0), f"state.components[{i}].m", a_cap=0.5
                    )
                cfg.components.append(cs)
        else:
            _require_keys(
                st, ("family", "phi", "m", "excitation_seed"), ("phi",), "state"
            )
            cfg.phi = _parse_cvector(st["phi"], "state.phi")
            if abs(np.linalg.norm(cfg.phi) - 1.0) > 1e-8:
                raise ConfigError("state.phi must be normalized")
            if family == "theta":
                cfg.m_schedule = _parse_m(st.get("m", 1), "state.m", a_cap=1.0)
                cfg.excitation_seed = int(st.get("excitation_seed", 0))
            elif "m" in st or "excitation_seed" in st:
                raise ConfigError(f"family {family!r} takes no excitation data")

        n_list = doc["n_list"]
        if (not isinstance(n_list, list) or len(n_list) < 1
                or any(not isinstance(n, int) or n < 1 for n in n_list)
                or any(b <= a for a, b in zip(n_list, n_list[1:]))):
            raise ConfigError("n_list must be a strictly increasing list of positive ints")
        cfg.n_list = list(n_list)
        t_list = doc["t_list"]
        if not isinstance(t_list, list) or not t_list:
            raise ConfigError("t_list must be a non-empty list of times")
        cfg.t_list = [float(t) for t in t_list]
        if any(t < 0 for t in cfg.t_list):
            raise ConfigError("t_list times must be >= 0")

        tol = doc.get("tolerances", {})
        _require_keys(tol, ("hartree_tol", "krylov_tol"), (), "tolerances")
        cfg.hartree_tol = float(tol.get("hartree_tol", 1e-10))
        cfg.krylov_tol = float(tol.get("krylov_tol", 1e-10))
        cfg.seed = int(doc.get("seed", 0))
        if seed_override is not None:
            cfg.seed = int(seed_override)
        out = doc.get("output", {})
        _require_keys(out, ("dir", "format"), (), "output")
        cfg.out_dir = str(out.get("dir", "."))
        cfg.out_format = str(out.get("format", "csv"))
        if cfg.out_format not in ("csv", "json"):
            raise ConfigError("output.format must be csv or json")

        # validate m against the admissibility cap at every n
        if family == "theta":
            for n in cfg.n_list:
                if cfg.m_schedule.value(n) > admissible_m(n):
                    raise ConfigError(
                        f"m={cfg.m_schedule.value(n)} exceeds admissible bound "
                        f"{admissible_m(n)} at n={n}"
                    )
        if family == "superposition" and cfg.super_kind == "theta":
            for comp in cfg.components:
                for n in cfg.n_list:
                    if comp.m_schedule.value(n) > admissible_m(n):
                        raise ConfigError(
                            f"component m exceeds admissible bound at n={n}"
                        )

        doc_for_hash = dict(doc)
        if seed_override is not None:
            doc_for_hash["seed"] = int(seed_override)
        canonical = json.dumps(doc_for_hash, sort_keys=True, separators=(",", ":"))
        cfg.config_hash = hashlib.sha256(canonical.encode()).hexdigest()[:16]
        cfg.raw = doc_for_hash
        return cfg

    @staticmethod
    def from_json(path, seed_override=None):
        with open(path, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as e:
                raise ConfigError(f"invalid JSON in {path}: {e}") from e
        return ExperimentConfig.from_dict(doc, seed_override=seed_override)


# ---------------------------------------------------------------------------
# reports


@dataclass
class SweepRow:
    n: int
    m: int
    t: float
    trace_dist: float
    hs_dist: float
    op_dist: float
    cross_term: float = None
    bound_envelope: float = None
    runtime_s: float = None
    extras: dict = field(default_factory=dict)


@dataclass
class ConvergenceReport:
    config_hash: str
    family: str
    seed: int
    rows: list
    reproducible: bool = True
    metadata: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict)  # t -> FitResult | "exact" | None

    def rows_at(self, t, tol=1e-12):
        return [r for r in self.rows if abs(r.t - t) <= tol]

    def times(self):
        out = []
        for r in self.rows:
            if not any(abs(r.t - t) <= 1e-12 for t in out):
                out.append(r.t)
        return out

    def attach_fits(self):
        """Record the log-log slope of trace_dist vs n at every time."""
        for t in self.times():
            try:
                self.fits[t] = fit_rate(self, t)
            except ExactRegimeError:
                self.fits[t] = "exact"
            except ValueError:
                self.fits[t] = None
        return self

    def to_csv(self, path):
        def fmt(x):
            return "" if x is None else repr(float(x))

        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in sorted(self.rows, key=lambda r: (r.n, r.t)):
                runtime = None if self.reproducible else r.runtime_s
                w.writerow([
                    str(r.n), str(r.m), repr(float(r.t)),
                    fmt(r.trace_dist), fmt(r.hs_dist), fmt(r.op_dist),
                    fmt(r.cross_term), fmt(r.bound_envelope), fmt(runtime),
                ])

    def to_json(self, path=None):
        def fit_doc(f):
            if f is None or f == "exact":
                return f
            return {"slope": f.slope, "intercept": f.intercept, "r2": f.r2}

        doc = {
            "config_hash": self.config_hash,
            "family": self.family,
            "seed": self.seed,
            "reproducible": self.reproducible,
            "metadata": self.metadata,
            "fits": {repr(float(t)): fit_doc(f) for t, f in self.fits.items()},
            "rows": [
                {
                    "n": r.n, "m": r.m, "t": r.t,
                    "trace_dist": r.trace_dist, "hs_dist": r.hs_dist,
                    "op_dist": r.op_dist, "cross_term": r.cross_term,
                    "bound_envelope": r.bound_envelope,
                    "runtime_s": None if self.reproducible else r.runtime_s,
                    "config_hash": self.config_hash,
                    "extras": r.extras,
                }
                for r in sorted(self.rows, key=lambda r: (r.n, r.t))
            ],
        }
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(doc, fh, indent=1)
        return doc


def report_from_csv(path):
    """Reload a persisted sweep (config hash is not recoverable from CSV)."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ConfigError(f"{path} does not carry the sweep CSV schema")
        for rec in reader:
            def f(key):
                return None if rec[key] == "" else float(rec[key])

            rows.append(SweepRow(
                n=int(rec["n"]), m=int(rec["m"]), t=float(rec["t"]),
                trace_dist=f("trace_dist"), hs_dist=f("hs_dist"),
                op_dist=f("op_dist"), cross_term=f("cross_term"),
                bound_envelope=f("bound_envelope"), runtime_s=f("runtime_s"),
            ))
    return ConvergenceReport(config_hash="", family="", seed=0, rows=rows)


def merge_reports(reports):
    """Concatenate sweeps; mixing different configurations is rejected."""
    hashes = {r.config_hash for r in reports}
    if len(hashes) > 1:
        raise ConfigError(f"refusing to aggregate mixed configs: {sorted(hashes)}")
    base = reports[0]
    rows = [row for r in reports for row in r.rows]
    return ConvergenceReport(
        config_hash=base.config_hash, family=base.family, seed=base.seed,
        rows=rows, reproducible=all(r.reproducible for r in reports),
    )


@dataclass
class FitResult:
    slope: float
    intercept: float
    r2: float


def fit_rate(report, t, zero_floor=0.0):
    """OLS of log(trace_dist) on log(n) at time t.

    Refuses with ExactRegimeError when any distance is at or below
    ``zero_floor`` (the exact-mean-field regime has nothing to fit).
    """
    rows = sorted(report.rows_at(t), key=lambda r: r.n)
    if len(rows) < 3:
        raise ValueError(f"need at least 3 rows at t={t}, have {len(rows)}")
    dists = np.array([r.trace_dist for r in rows], dtype=float)
    if np.any(dists <= zero_floor):
        raise ExactRegimeError(
            f"distances at t={t} are zero within floor {zero_floor}: exact regime"
        )
    x = np.log(np.array([r.n for r in rows], dtype=float))
    y = np.log(dists)
    A = np.stack([x, np.ones_like(x)], axis=1)
    (slope, intercept), res, _rank, _sv = np.linalg.lstsq(A, y, rcond=None)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(res[0]) if len(res) else float(np.sum((y - A @ [slope, intercept]) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return FitResult(slope=float(slope), intercept=float(intercept), r2=float(r2))


# ---------------------------------------------------------------------------
# sweeps


def _hartree_targets(config, phis):
    """Mean-field states at every requested time, one trajectory per phi."""
    grid = sorted(set([0.0] + list(config.t_list)))
    table = []
    for phi in phis:
        traj = evolve_hartree(config.ms, phi, np.array(grid), tol=config.hartree_tol)
        lookup = {t: traj.states[grid.index(t)] for t in config.t_list}
        table.append(lookup)
    return table


def _family_basis(config, n):
    if config.family == "coherent" or (
        config.family == "superposition" and config.super_kind == "coherent"
    ):
        return enumerate_basis(config.ms.d, truncated(weyl_headroom(sqrt(n))))
    return enumerate_basis(config.ms.d, fixed(n))


def _excitation_for(config, m):
    if m == 0:
        return None
    basis = enumerate_basis(config.ms.d, fixed(m))
    return random_excitation(config.phi, m, basis, seed=(config.seed, m))


def _theta_envelope(trace_dist, n, m):
    return trace_dist * sqrt(n) * exp(-m / 2.0) / float((m + 1) ** 7)


def run_convergence_sweep(config: ExperimentConfig, threads=1):
    """Single-family sweep: distance of the evolved reduced density matrix to
    the mean-field projector, per (n, t), plus the rate-envelope column."""
    if config.family not in ("product", "coherent", "theta"):
        raise ConfigError(
            f"convergence sweep takes a single-state family, got {config.family!r}"
        )
    targets = _hartree_targets(config, [config.phi])[0]

    def cell(n):
        t_start = time.perf_counter()
        m = config.m_schedule.value(n) if config.family == "theta" else 0
        basis = _family_basis(config, n)
        plan = make_plan(build_hamiltonian(config.ms, n, basis),
                         tol=config.krylov_tol)
        if config.family == "product":
            state = product_state(config.phi, n, basis)
        elif config.family == "coherent":
            state = coherent_state(config.phi, n, basis)
        else:
            state = theta_state(config.phi, _excitation_for(config, m), n,
                                "creation_polynomial", basis)
        out = []
        for t in config.t_list:
            cell_start = time.perf_counter()
            evolved = evolve_fock(plan, state, t)
            rho = reduced_dm(evolved)
            target = projector(targets[t])
            td = distance(rho, target, "trace")
            hd = distance(rho, target, "hilbert_schmidt")
            od = distance(rho, target, "operator")
            out.append(SweepRow(
                n=n, m=m, t=t, trace_dist=td, hs_dist=hd, op_dist=od,
                cross_term=None, bound_envelope=_theta_envelope(td, n, m),
                runtime_s=time.perf_counter() - cell_start,
            ))
        return out

    sweep_start = time.perf_counter()
    rows = _run_cells(cell, config.n_list, threads)
    report = ConvergenceReport(
        config_hash=config.config_hash, family=config.family, seed=config.seed,
        rows=rows, reproducible=(threads == 1),
        metadata=_metadata(config, threads, time.perf_counter() - sweep_start),
    )
    return report.attach_fits()


def _metadata(config, threads, total_runtime_s):
    import scipy

    from . import __version__

    return {
        "threads": threads,
        "n_list": config.n_list,
        "t_list": config.t_list,
        "versions": {"focklab": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__},
        "total_runtime_s": round(total_runtime_s, 3),
    }


def run_superposition_sweep(config: ExperimentConfig, threads=1):
    """Mixture sweep: distance of the evolved reduced density matrix to the
    weighted mixture of mean-field projectors, with cross-term logging."""
    if config.family != "superposition":
        raise ConfigError("superposition sweep needs family=superposition")
    comps = config.components
    coeffs = np.array([c.coeff for c in comps], dtype=complex)
    weights = np.abs(coeffs) ** 2 / float(np.sum(np.abs(coeffs) ** 2))
    targets = _hartree_targets(config, [c.phi for c in comps])

    def spec_for(n):
        if config.super_kind != "theta":
            return SuperpositionSpec(
                kind=config.super_kind, coeffs=coeffs, phis=[c.phi for c in comps]
            )
        excs = []
        for c in comps:
            m = c.m_schedule.value(n)
            if m == 0:
                excs.append(None)
            else:
                basis = enumerate_basis(config.ms.d, fixed(m))
                excs.append(random_excitation(
                    c.phi, m, basis, seed=(config.seed, c.excitation_seed, m)
                ))
        return SuperpositionSpec(
            kind="theta", coeffs=coeffs, phis=[c.phi for c in comps],
            excitations=excs,
        )

    def cell(n):
        spec = spec_for(n)
        basis = _family_basis(config, n)
        plan = make_plan(build_hamiltonian(config.ms, n, basis),
                         tol=config.krylov_tol)
        state, coeffs_n = superposition(spec, n, basis)
        m_col = max(spec.m_schedule) if config.super_kind == "theta" else 0
        # cross terms are logged as the numerically measured overlaps, so the
        # closed forms (|<phi_i,phi_j>|^n, e^{-n ||dphi||^2/2}) can be checked
        # against them downstream
        members = component_states(spec, n, basis)
        cross = 0.0
        k = len(comps)
        for i in range(k):
            for j in range(i + 1, k):
                cross = max(cross, abs(members[i].inner(members[j])))
        out = []
        for t in config.t_list:
            cell_start = time.perf_counter()
            evolved = evolve_fock(plan, state, t)
            rho = reduced_dm(evolved)
            phi_ts = [targets[i][t] for i in range(k)]
            target = mixed_target(weights, phi_ts)
            td = distance(rho, target, "trace")
            hd = distance(rho, target, "hilbert_schmidt")
            od = distance(rho, target, "operator")
            fitted = _fit_mixture_weights(rho.rho, phi_ts)
            out.append(SweepRow(
                n=n, m=m_col, t=t, trace_dist=td, hs_dist=hd, op_dist=od,
                cross_term=cross, bound_envelope=None,
                runtime_s=time.perf_counter() - cell_start,
                extras={
                    "coeff_weights": [float(abs(c) ** 2) for c in coeffs_n],
                    "fitted_weights": fitted,
                    "target_weights": [float(w) for w in weights],
                },
            ))
        return out

    sweep_start = time.perf_counter()
    rows = _run_cells(cell, config.n_list, threads)
    return ConvergenceReport(
        config_hash=config.config_hash, family="superposition:" + config.super_kind,
        seed=config.seed, rows=rows, reproducible=(threads == 1),
        metadata=_metadata(config, threads, time.perf_counter() - sweep_start),
    )


def _fit_mixture_weights(rho, phi_ts):
    """Least-squares mixture weights of projectors |phi_t^i><phi_t^i| in rho."""
    k = len(phi_ts)
    M = np.empty((k, k))
    b = np.empty(k)
    for i in range(k):
        b[i] = float(np.real(np.vdot(phi_ts[i], rho @ phi_ts[i])))
        for j in range(k):
            M[i, j] = abs(np.vdot(phi_ts[i], phi_ts[j])) ** 2
    try:
        w = np.linalg.solve(M, b)
    except np.linalg.LinAlgError:
        w, *_ = np.linalg.lstsq(M, b, rcond=None)
    return [float(x) for x in w]


def _run_cells(cell, n_list, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            groups = list(pool.map(cell, n_list))
    else:
        groups = [cell(n) for n in n_list]
    rows = [row for grp in groups for row in grp]
    rows.sort(key=lambda r: (r.n, r.t))
    return rows
