"""Experiment configuration, h-sweep orchestration and report files.

This is the only module that touches the file system.  A configuration is a
JSON object whose keys mirror :class:`SimConfig`; unknown keys are rejected.
"""
from __future__ import annotations

import contextlib
import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import conserved
from . import diagnostics as diag
from .dynamics import SIGNS, EvolutionParams, evolve
from .errors import ALError, ConfigError, UnderResolvedError
from .grid import (
    GAMMA_MAX,
    ContinuumField,
    cutoff_frequency,
    sample_initial_data,
    site_count,
    small_h_threshold,
)
from .nls import nls_reference
from .profiles import GaussianProfile, SampledProfile, ZeroProfile

log = logging.getLogger(__name__)

DEFAULT_TOLERANCES: Dict[str, float] = {
    "mass_drift": 1e-8,
    "hamiltonian_drift": 1e-7,
    "h2_drift": 1e-7,
    "g_drift": 1e-6,
    "boundary_mass": 1e-8,
    "suppression_fit": 0.5,
    "convergence_reduction": 0.25,
    "strichartz_spread": 2.0,
}

#: Fraction of the window (measured from the centre) beyond which mass counts as "at the boundary".
BOUNDARY_FRACTION = 0.9

#: Snapshot-density doublings attempted when the Strichartz density check fails.
MAX_DENSITY_DOUBLINGS = 2

_CHANNEL_KEYS = {
    "gaussian": {"amplitude": 1.0, "width": 1.0, "center": 0.0},
    "modulated_gaussian": {"amplitude": 1.0, "width": 1.0, "center": 0.0, "wavenumber": 0.0},
    "file": {"path": None, "dx": None},
}


def _default_init():
    return {
        "psi0": {"kind": "gaussian", "amplitude": 1.0, "width": 1.0, "center": 0.0},
        "phi0": {"kind": "gaussian", "amplitude": 0.5, "width": 1.0, "center": 1.0},
    }


@dataclass(frozen=True)
class SimConfig:
    sign: str = "defocusing"
    gamma: float = 0.5
    gamma_override: bool = False
    T: float = 0.5
    h_list: Tuple[float, ...] = (0.2, 0.1, 0.05, 0.025)
    init: dict = field(default_factory=_default_init)
    L: float = 32.0
    dt_lat: float = 0.05
    snapshots: int = 32
    kappa_list: Tuple[float, ...] = (1.0, 2.0, 4.0)
    delta_list: Tuple[float, ...] = (0.75,)
    R_list: Tuple[float, ...] = (5.0, 10.0)
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    out_dir: str = "out"
    allow_large_h: bool = False
    nls_dx: float = 1.0 / 32.0
    nls_tol: float = 1e-8
    g_stride: int = 8
    base_dir: str = field(default=".", compare=False)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            if f.name == "base_dir":
                continue
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return json.loads(json.dumps(out))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def replace(self, **kw) -> "SimConfig":
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d.update(kw)
        return SimConfig(**d)

    # -- derived ---------------------------------------------------------

    def channel(self, name: str):
        return build_profile(self.init.get(name), self.base_dir)

    def profiles(self):
        return self.channel("psi0"), self.channel("phi0")

    def total_mass(self) -> float:
        return sum(_mass(p, self.L) for p in self.profiles())

    def h0(self) -> float:
        return small_h_threshold(self.total_mass())

    def tolerance(self, name: str) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))

    def validate(self) -> List[str]:
        return _validate(self)


def _mass(profile, L: float) -> float:
    if hasattr(profile, "mass"):
        return float(profile.mass())
    return 0.0


def build_profile(spec, base_dir: str = "."):
    """Profile object for one channel spec (``None`` is the zero channel)."""
    if spec is None:
        return ZeroProfile()
    kind = spec["kind"]
    if kind in ("gaussian", "modulated_gaussian"):
        return GaussianProfile(
            float(spec["amplitude"]), float(spec["width"]), float(spec["center"]),
            float(spec.get("wavenumber", 0.0)),
        )
    if kind == "file":
        path = Path(spec["path"])
        if not path.is_absolute():
            path = Path(base_dir) / path
        values = np.load(path)
        return SampledProfile(float(spec["dx"]), np.asarray(values, dtype=complex))
    raise ConfigError(f"unknown channel kind {kind!r}")


# ---------------------------------------------------------------------------
# loading and validation


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _normalise_channel(name: str, spec, problems: List[str]):
    if spec is None:
        return None
    if not isinstance(spec, dict):
        problems.append(f"init.{name}: expected an object or null")
        return None
    kind = spec.get("kind")
    if kind not in _CHANNEL_KEYS:
        problems.append(f"init.{name}.kind: expected one of {sorted(_CHANNEL_KEYS)}, got {kind!r}")
        return None
    allowed = _CHANNEL_KEYS[kind]
    out = {"kind": kind}
    for key in sorted(set(spec) - {"kind"} - set(allowed)):
        problems.append(f"init.{name}: unknown key {key!r}")
    for key, default in allowed.items():
        v = spec.get(key, default)
        if v is None:
            problems.append(f"init.{name}.{key}: required for kind {kind!r}")
            continue
        if key == "path":
            if not isinstance(v, str):
                problems.append(f"init.{name}.path: expected a string")
                continue
        elif not _is_number(v):
            problems.append(f"init.{name}.{key}: expected a finite number, got {v!r}")
            continue
        out[key] = v if key == "path" else float(v)
    if kind != "file" and out.get("width", 1.0) <= 0:
        problems.append(f"init.{name}.width: must be positive")
    return out


_FLOAT_FIELDS = ("gamma", "T", "L", "dt_lat", "nls_dx", "nls_tol")
_LIST_FIELDS = ("h_list", "kappa_list", "delta_list", "R_list")
_BOOL_FIELDS = ("gamma_override", "allow_large_h")
_INT_FIELDS = ("snapshots", "g_stride")


def config_from_dict(doc: dict, base_dir: str = ".") -> SimConfig:
    """Build and fully validate a configuration; raises :class:`ConfigError` listing every problem."""
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    known = {f.name for f in fields(SimConfig)} - {"base_dir"}
    problems = [f"unknown key {k!r}" for k in sorted(set(doc) - known)]
    kw = {}
    for k, v in doc.items():
        if k not in known:
            continue
        if k in _FLOAT_FIELDS:
            if not _is_number(v):
                problems.append(f"{k}: expected a finite number, got {v!r}")
                continue
            kw[k] = float(v)
        elif k in _LIST_FIELDS:
            if not isinstance(v, list) or not all(_is_number(x) for x in v):
                problems.append(f"{k}: expected a list of numbers")
                continue
            kw[k] = tuple(float(x) for x in v)
        elif k in _BOOL_FIELDS:
            if not isinstance(v, bool):
                problems.append(f"{k}: expected true or false")
                continue
            kw[k] = v
        elif k in _INT_FIELDS:
            if not isinstance(v, int) or isinstance(v, bool):
                problems.append(f"{k}: expected an integer")
                continue
            kw[k] = v
        elif k == "sign":
            kw[k] = v
        elif k == "out_dir":
            if not isinstance(v, str):
                problems.append("out_dir: expected a string")
                continue
            kw[k] = v
        elif k == "tolerances":
            if not isinstance(v, dict):
                problems.append("tolerances: expected an object")
                continue
            tol = dict(DEFAULT_TOLERANCES)
            for name, val in v.items():
                if name not in DEFAULT_TOLERANCES:
                    problems.append(f"tolerances: unknown tolerance {name!r} (known: {', '.join(DEFAULT_TOLERANCES)})")
                elif not _is_number(val) or val <= 0:
                    problems.append(f"tolerances.{name}: expected a positive number")
                else:
                    tol[name] = float(val)
            kw[k] = tol
        elif k == "init":
            if not isinstance(v, dict):
                problems.append("init: expected an object")
                continue
            for key in sorted(set(v) - {"psi0", "phi0"}):
                problems.append(f"init: unknown key {key!r}")
            kw[k] = {c: _normalise_channel(c, v.get(c), problems) for c in ("psi0", "phi0")}
    if problems:
        raise ConfigError(problems)
    cfg = SimConfig(base_dir=base_dir, **kw)
    problems = cfg.validate()
    if problems:
        raise ConfigError(problems)
    return cfg


def _validate(cfg: SimConfig) -> List[str]:
    p: List[str] = []
    if cfg.sign not in SIGNS:
        p.append(f"sign: expected 'focusing' or 'defocusing', got {cfg.sign!r}")
    gmax = math.inf if cfg.gamma_override else GAMMA_MAX
    if not 0 < cfg.gamma <= gmax:
        p.append(
            f"gamma = {cfg.gamma:g} violates 0 < gamma <= 13/18 (the admissible exponent range for N = h^-gamma); "
            f"set gamma_override to lift the upper bound"
        )
    if not cfg.T > 0:
        p.append("T: must be positive")
    if not cfg.L > 0:
        p.append("L: must be positive")
    if not cfg.dt_lat > 0:
        p.append("dt_lat: must be positive")
    if cfg.snapshots < 2:
        p.append("snapshots: need at least 2 per half-horizon")
    if cfg.g_stride < 1:
        p.append("g_stride: must be at least 1")
    if not cfg.nls_tol > 0:
        p.append("nls_tol: must be positive")
    hs = list(cfg.h_list)
    if not hs:
        p.append("h_list: must not be empty")
    if any(h <= 0 for h in hs):
        p.append("h_list: every h must be positive")
    elif any(b >= a for a, b in zip(hs, hs[1:])):
        p.append("h_list: must be strictly decreasing")
    for c in ("psi0", "phi0"):
        spec = cfg.init.get(c) if isinstance(cfg.init, dict) else None
        if spec is not None and spec.get("kind") == "file":
            path = Path(spec["path"])
            if not path.is_absolute():
                path = Path(cfg.base_dir) / path
            if not path.exists():
                p.append(f"init.{c}.path: file {str(path)!r} not found")
    if p:
        return p
    try:
        mass = cfg.total_mass()
    except (OSError, ValueError) as exc:
        return [f"init: cannot build profiles ({exc})"]
    h0 = small_h_threshold(mass)
    if cfg.L > 0:
        for h in hs:
            try:
                site_count(cfg.L, h)
            except ALError as exc:
                p.append(f"h_list: {exc}")
            N = cutoff_frequency(h, cfg.gamma)
            if 2 * N * h >= math.pi:
                p.append(f"h_list: h = {h:g} aliases (2Nh = {2 * N * h:.6g} >= pi with N = h^-gamma)")
            if h > h0 and not cfg.allow_large_h:
                p.append(
                    f"h_list: h = {h:g} exceeds the mass threshold h_0 = min(1, 1/(100 (||psi0||^2 + ||phi0||^2))) "
                    f"= {h0:.6g} (total mass {mass:.6g}); set allow_large_h to run anyway"
                )
        try:
            site_count(cfg.L, cfg.nls_dx)
        except ALError:
            p.append(f"nls_dx: {cfg.nls_dx:g} does not divide the window 2L = {2 * cfg.L:g} into an even count")
        if hs:
            hmax = max(hs)
            for k in cfg.kappa_list:
                if not 0 < k * hmax < math.pi / 2:
                    p.append(f"kappa_list: kappa = {k:g} needs 0 < kappa h < pi/2 for h = {hmax:g}")
        for R in cfg.R_list:
            if not 1 <= R < cfg.L:
                p.append(f"R_list: R = {R:g} must satisfy 1 <= R < L")
    for d in cfg.delta_list:
        if not 0 < d < 1:
            p.append(f"delta_list: delta = {d:g} must lie in (0, 1)")
    return p


def load_config(path) -> SimConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: JSON parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return config_from_dict(doc, base_dir=str(path.parent))


def builtin_config_path(name: str) -> Path:
    """Path to one of the shipped configurations (``default``, ``decoupling``)."""
    ref = resources.files("alcontinuum") / "configs" / f"{name}.json"
    if not ref.is_file():
        raise ConfigError(f"no built-in configuration named {name!r}")
    return Path(str(ref))


# ---------------------------------------------------------------------------
# one mesh size


@contextlib.contextmanager
def _stage(name: str):
    try:
        yield
    except ALError as exc:
        if getattr(exc, "stage", None) is None:
            exc.stage = name
        raise


def _reference_solutions(cfg: SimConfig, K: int):
    """Two-sided reference snapshots ``(psi_ref, phi_ref)`` on the continuum grid."""
    key = (cfg.to_json(), cfg.base_dir, K)
    if key in _REF_CACHE:
        return _REF_CACHE[key]
    J = site_count(cfg.L, cfg.nls_dx)
    x = -cfg.L + cfg.nls_dx * np.arange(J)
    out = []
    for name, orientation in (("psi0", "forward"), ("phi0", "reversed")):
        init = ContinuumField(cfg.nls_dx, cfg.channel(name)(x))
        fwd, _, _ = nls_reference(init, cfg.T, cfg.sign, orientation, K + 1, tol=cfg.nls_tol)
        bwd, _, _ = nls_reference(init, -cfg.T, cfg.sign, orientation, K + 1, tol=cfg.nls_tol)
        out.append([(s.t, s.field) for s in reversed(bwd[1:])] + [(s.t, s.field) for s in fwd])
    _REF_CACHE.clear()
    _REF_CACHE[key] = tuple(out)
    return _REF_CACHE[key]


_REF_CACHE: dict = {}


def _evolve(cfg: SimConfig, a0, h: float, K: int):
    t_lat = cfg.T / h**2
    params = EvolutionParams(
        sign=cfg.sign, dt=cfg.dt_lat, t_final_lat=t_lat, snapshot_stride=t_lat / K,
        two_sided=True, mass_tol=cfg.tolerance("mass_drift"),
    )
    return evolve(a0, params)


def _drift_entry(rep: conserved.DriftReport) -> dict:
    return {"initial": float(rep.values[int(np.argmin(np.abs(rep.times)))]),
            "max_abs": rep.max_abs, "max_rel": rep.max_rel,
            "evaluations": int(rep.values.size)}


def _series(profile: str, parameter, times, values) -> dict:
    return {"profile": profile, "parameter": parameter,
            "t": [float(t) for t in times], "values": [float(v) for v in values]}


def _verdict(name, scope, tolerance, measured, passed, note=None) -> dict:
    out = {"name": name, "scope": scope, "tolerance": tolerance, "measured": measured,
           "passed": None if passed is None else bool(passed)}
    if note:
        out["note"] = note
    return out


def run_single(cfg: SimConfig, h: float) -> dict:
    """Full pipeline for one mesh size; returns the per-h block of the run record."""
    psi0, phi0 = cfg.profiles()
    gmax = math.inf if cfg.gamma_override else GAMMA_MAX
    with _stage("sample_initial_data"):
        a0 = sample_initial_data(psi0, phi0, h, cfg.gamma, cfg.L, gamma_max=gmax,
                                 enforce_small_h=not cfg.allow_large_h)
    n0 = a0.norm()
    K = cfg.snapshots
    for attempt in range(MAX_DENSITY_DOUBLINGS + 1):
        with _stage("evolve"):
            traj = _evolve(cfg, a0, h, K)
        try:
            with _stage("strichartz_norm"):
                l66 = diag.strichartz_norm(traj, 6, 6)
                l4i = diag.strichartz_norm(traj, 4, np.inf)
            break
        except UnderResolvedError:
            if attempt == MAX_DENSITY_DOUBLINGS:
                raise
            log.info("h=%g: doubling snapshot density to %d", h, 2 * K)
            K *= 2
    times = diag.macro_times(traj)
    series: List[dict] = []
    block: dict = {"h": h, "status": "ok"}

    # conserved quantities
    with _stage("conserved"):
        cons = {name: _drift_entry(conserved.drift_report(traj, name)) for name in ("M", "H", "H2")}
        kappa0 = conserved.scan_kappa0(n0**2, h) if n0 > 0 else None
        if kappa0 is None:
            cons["G"] = {"skipped": "zero field"}
        elif a0.M > conserved.MAX_DENSE_SITES:
            cons["G"] = {"skipped": f"{a0.M} sites exceeds the dense gate of {conserved.MAX_DENSE_SITES}"}
        else:
            rep = conserved.drift_report(traj, "G", fn=conserved.g_functional, stride=cfg.g_stride,
                                         kappa=kappa0, h=h)
            cons["G"] = _drift_entry(rep)
            cons["G"]["kappa"] = kappa0
            cons["G"]["quadratic_part_initial"] = conserved.quadratic_g(a0, kappa0, h)

    x = a0.x
    edge = np.abs(x) >= BOUNDARY_FRACTION * cfg.L
    boundary = max((float(np.sum(np.abs(f.values[edge]) ** 2) / max(f.norm() ** 2, 1e-300))
                    for f in traj.fields), default=0.0)

    with _stage("suppression_ratio"):
        suppression = {}
        for d in cfg.delta_list:
            r = conserved.suppression_ratio(traj, d) if n0 > 0 else np.zeros(times.size)
            suppression[repr(d)] = float(np.max(r))
            series.append(_series("suppression", d, times, r))

    with _stage("split_fields"):
        psi_snaps, phi_snaps = diag.split_trajectory(traj)
    norm_psi = np.array([f.norm() for _, f in psi_snaps])
    norm_phi = np.array([f.norm() for _, f in phi_snaps])
    series.append(_series("norm_psi", "", times, norm_psi))
    series.append(_series("norm_phi", "", times, norm_phi))

    with _stage("equicontinuity_profile"):
        equi = {}
        for k in cfg.kappa_list:
            prof = diag.equicontinuity_series(traj, h, k)
            equi[repr(k)] = prof.sup
            series.append(_series("equicontinuity", k, prof.times, prof.values))
    with _stage("tightness_profile"):
        tight = {}
        for R in cfg.R_list:
            prof = diag.tightness_series(traj, h, R)
            tight[repr(R)] = prof.sup
            series.append(_series("tightness", R, prof.times, prof.values))

    cross = {}
    for ch in ("psi", "phi"):
        try:
            prof = diag.cross_term_series(psi_snaps, phi_snaps, h, ch)
            cross[ch] = prof.sup
            series.append(_series(f"cross_{ch}", "", prof.times, prof.values))
        except UnderResolvedError as exc:
            cross[ch] = {"error": str(exc)}

    with _stage("sign_flip_check"):
        flip = max(diag.sign_flip_check(a, b, h, t, cfg.sign, project=True)
                   for (t, a), (_, b) in zip(psi_snaps, phi_snaps))

    with _stage("nls_reference"):
        psi_ref, phi_ref = _reference_solutions(cfg, K)
    with _stage("convergence_error"):
        ep, ef = diag.convergence_series(traj, h, psi_ref, phi_ref)
    series.append(_series("err_psi", "", ep.times, ep.values))
    series.append(_series("err_phi", "", ef.times, ef.values))

    block.update({
        "derived": {
            "M": a0.M, "N": cutoff_frequency(h, cfg.gamma), "t_final_lat": cfg.T / h**2,
            "snapshots_per_side": K, "dt_requested": cfg.dt_lat, "dt_used": traj.dt_used,
            "steps": traj.steps, "refinements": traj.refinements, "initial_norm_sq": n0**2,
        },
        "conserved": cons,
        "boundary_mass": boundary,
        "suppression": suppression,
        "strichartz": {"L6l6": l66, "L4linf": l4i,
                       "L6l6_normalized": l66 / n0 if n0 > 0 else 0.0,
                       "L4linf_normalized": l4i / n0 if n0 > 0 else 0.0},
        "equicontinuity": equi,
        "tightness": tight,
        "cross_term": cross,
        "sign_flip": flip,
        "convergence": {"err_psi": ep.sup, "err_phi": ef.sup},
        "max_norm_psi": float(norm_psi.max()), "max_norm_phi": float(norm_phi.max()),
        "series": series,
    })
    block["verdicts"] = _block_verdicts(cfg, block)
    return block


def _block_verdicts(cfg: SimConfig, block: dict) -> List[dict]:
    scope = f"h={block['h']!r}"
    out = []
    for tol_name, key in (("mass_drift", "M"), ("hamiltonian_drift", "H"), ("h2_drift", "H2"),
                          ("g_drift", "G")):
        entry = block["conserved"][key]
        tol = cfg.tolerance(tol_name)
        if "skipped" in entry:
            out.append(_verdict(tol_name, scope, tol, None, None, f"not evaluated: {entry['skipped']}"))
        else:
            out.append(_verdict(tol_name, scope, tol, entry["max_rel"], entry["max_rel"] <= tol))
    tol = cfg.tolerance("boundary_mass")
    out.append(_verdict("boundary_mass", scope, tol, block["boundary_mass"], block["boundary_mass"] < tol))
    return out


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class RunRecord:
    config: dict
    blocks: List[dict] = field(default_factory=list)
    verdicts: List[dict] = field(default_factory=list)
    partial: bool = False
    timings: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"config": self.config, "partial": self.partial,
                "blocks": self.blocks, "verdicts": self.all_verdicts()}

    def all_verdicts(self) -> List[dict]:
        per_h = [v for b in self.blocks for v in b.get("verdicts", [])]
        return per_h + self.verdicts

    def failed_verdicts(self) -> List[dict]:
        return [v for v in self.all_verdicts() if v["passed"] is False]

    def ok_blocks(self) -> List[dict]:
        return [b for b in self.blocks if b["status"] == "ok"]


def _guarded(cfg: SimConfig, h: float):
    start = time.perf_counter()
    try:
        block = run_single(cfg, h)
    except ALError as exc:
        block = {"h": h, "status": "error",
                 "error": {"stage": getattr(exc, "stage", None), "type": type(exc).__name__,
                           "message": str(exc)}}
    return block, time.perf_counter() - start


def _pool_worker(args):
    cfg, h = args
    return _guarded(cfg, h)


def _strictly_decreasing(vals: Sequence[float]) -> bool:
    return all(b < a for a, b in zip(vals, vals[1:]))


def _suppression_fit(hs, ys, Ns):
    """Minimax single-constant fit of ``y ~ C (hN + h^{1/2})``; returns ``(C, max relative residual)``."""
    g = np.array([h * N + math.sqrt(h) for h, N in zip(hs, Ns)])
    r = np.asarray(ys) / g
    lo, hi = float(r.min()), float(r.max())
    if hi == 0:
        return 0.0, 0.0
    C = 0.5 * (lo + hi)
    return C, float(np.max(np.abs(r / C - 1.0)))


def sweep_verdicts(cfg: SimConfig, blocks: List[dict], partial: bool) -> List[dict]:
    ok = [b for b in blocks if b["status"] == "ok"]
    hs = [b["h"] for b in ok]
    note = "partial: computed over successful blocks only" if partial else None
    out = []
    vacuous = len(ok) < 2

    def add(name, tol, measured, passed):
        if vacuous:
            out.append(_verdict(name, "sweep", tol, measured, None, "vacuous: fewer than two mesh sizes"))
        else:
            out.append(_verdict(name, "sweep", tol, measured, passed, note))

    for ch in ("psi", "phi"):
        errs = [b["convergence"][f"err_{ch}"] for b in ok]
        add(f"convergence_monotone_{ch}", "strictly decreasing in h", errs, _strictly_decreasing(errs))
    tol = cfg.tolerance("convergence_reduction")
    for ch in ("psi", "phi"):
        errs = [b["convergence"][f"err_{ch}"] for b in ok]
        ratio = errs[-1] / errs[0] if ok and errs[0] > 0 else None
        add(f"convergence_reduction_{ch}", tol, ratio, ratio is not None and ratio <= tol)
    tol = cfg.tolerance("strichartz_spread")
    for key in ("L6l6_normalized", "L4linf_normalized"):
        vals = [b["strichartz"][key] for b in ok]
        spread = max(vals) / min(vals) if ok and min(vals) > 0 else None
        add(f"strichartz_spread_{key.split('_')[0]}", tol, spread, spread is not None and spread < tol)
    tol = cfg.tolerance("suppression_fit")
    for d in cfg.delta_list:
        ys = [b["suppression"][repr(d)] for b in ok]
        Ns = [b["derived"]["N"] for b in ok]
        C, resid = _suppression_fit(hs, ys, Ns) if ok else (None, None)
        add(f"suppression_fit_delta={d!r}", tol, {"C": C, "max_relative_residual": resid},
            resid is not None and resid <= tol)
    cross = [b["cross_term"]["psi"] for b in ok]
    if all(isinstance(c, float) for c in cross):
        add("cross_term_monotone", "strictly decreasing in h", cross, _strictly_decreasing(cross))
    else:
        out.append(_verdict("cross_term_monotone", "sweep", "strictly decreasing in h", None, None,
                            "not evaluated: cross term unavailable for some h"))
    if cfg.init.get("psi0") is None:
        vals = [b["max_norm_psi"] for b in ok]
        add("decoupling", "max_t ||psi^h|| strictly decreasing in h", vals, _strictly_decreasing(vals))
    return out


def run_sweep(cfg: SimConfig, jobs: int = 1, only_h: Optional[Sequence[float]] = None) -> RunRecord:
    """Run every mesh size (optionally filtered) and compute the cross-h verdicts."""
    hs = list(cfg.h_list)
    if only_h:
        wanted = [float(x) for x in only_h]
        hs = [h for h in hs if any(abs(h - w) <= 1e-12 * max(h, 1.0) for w in wanted)]
        if not hs:
            raise ConfigError(f"--only-h {wanted} matches nothing in h_list {list(cfg.h_list)}")
    if jobs and jobs > 1 and len(hs) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(hs))) as pool:
            results = list(pool.map(_pool_worker, [(cfg, h) for h in hs]))
    else:
        results = [_guarded(cfg, h) for h in hs]
    order = sorted(range(len(hs)), key=lambda i: -hs[i])
    blocks = [results[i][0] for i in order]
    timings = {repr(hs[i]): results[i][1] for i in order}
    partial = any(b["status"] != "ok" for b in blocks)
    rec = RunRecord(cfg.to_dict(), blocks, [], partial, timings)
    rec.verdicts = sweep_verdicts(cfg, blocks, partial)
    return rec


# ---------------------------------------------------------------------------
# reports


def _fmt(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _write_csv(path: Path, header: List[str], rows: List[List[str]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def emit_reports(record: RunRecord, out_dir) -> List[Path]:
    """Write record.json, convergence.csv, conserved.csv, profiles.csv (and timings.json)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []

    p = out / "record.json"
    p.write_text(json.dumps(_clean(record.to_dict()), indent=2, allow_nan=False) + "\n")
    paths.append(p)

    ok = record.ok_blocks()
    rows = []
    for i, b in enumerate(ok):
        row = [_fmt(b["h"]), _fmt(b["convergence"]["err_psi"]), _fmt(b["convergence"]["err_phi"])]
        for ch in ("err_psi", "err_phi"):
            if i + 1 < len(ok):
                a, c = b["convergence"][ch], ok[i + 1]["convergence"][ch]
                row.append(_fmt(math.log2(a / c)) if a > 0 and c > 0 else "")
            else:
                row.append("")
        rows.append(row)
    p = out / "convergence.csv"
    _write_csv(p, ["h", "err_psi", "err_phi", "order_psi", "order_phi"], rows)
    paths.append(p)

    rows = []
    for b in ok:
        for name in ("M", "H", "H2", "G"):
            entry = b["conserved"][name]
            rows.append([_fmt(b["h"]), name, _fmt(entry.get("max_rel"))])
    p = out / "conserved.csv"
    _write_csv(p, ["h", "functional", "max_rel_drift"], rows)
    paths.append(p)

    rows = []
    for b in ok:
        for s in b["series"]:
            par = "" if s["parameter"] == "" else _fmt(s["parameter"])
            for t, v in zip(s["t"], s["values"]):
                rows.append([_fmt(b["h"]), s["profile"], par, _fmt(t), _fmt(v)])
    p = out / "profiles.csv"
    _write_csv(p, ["h", "profile", "parameter", "t", "value"], rows)
    paths.append(p)

    p = out / "timings.json"
    p.write_text(json.dumps({"wall_clock_seconds": record.timings}, indent=2) + "\n")
    paths.append(p)
    return paths


# ---------------------------------------------------------------------------
# check verb


def derived_quantities(cfg: SimConfig) -> List[dict]:
    """Per-h quantities reported by ``check``: N, M, lattice horizon, step counts, memory."""
    out = []
    J_ref = site_count(cfg.L, cfg.nls_dx)
    for h in cfg.h_list:
        M = site_count(cfg.L, h)
        N = cutoff_frequency(h, cfg.gamma)
        t_lat = cfg.T / h**2
        stride = t_lat / cfg.snapshots
        steps = 2 * cfg.snapshots * max(1, math.ceil(stride / cfg.dt_lat - 1e-9))
        n_snap = 2 * cfg.snapshots + 1
        mem = 16 * n_snap * (M + 2 * 4 * M) + 16 * 2 * n_snap * J_ref
        if M <= conserved.MAX_DENSE_SITES:
            mem += 16 * 4 * M * M
        out.append({"h": h, "N": N, "2Nh": 2 * N * h, "M": M, "h0": cfg.h0(),
                    "t_final_lat": t_lat, "dt": cfg.dt_lat, "steps_estimate": steps,
                    "memory_bytes_estimate": mem})
    return out
