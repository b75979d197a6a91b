"""Experiment orchestration: configs, initial data, sweeps, persistence.

A campaign is declared in a flat INI file (sections ``experiment .. grid .. ic
.. run .. fit .. output``); every run directory receives the exact resolved
configuration and a manifest carrying its hash, so outputs are reproducible
and resumable.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import json
import math
import os
import time as _time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from . import fldio
from .errors import DivergedError
from .grid import Grid, ScalarField, Space, VectorField
from .ns25d import CSV_COLUMNS, SliceStackState, Trajectory, energy_ledger, run
from .ns3d import CoupledRemainderRun, two_route_check

__all__ = [
    "CampaignSpec",
    "SweepManifest",
    "make_initial_data",
    "run_sweep",
    "run_decay_experiment",
    "run_wiegner_monitor",
    "order_of_convergence",
    "persist",
    "resume",
    "verify_suite",
]

ALLOWED_EPS = (0.5, 0.25, 0.125, 0.0625)


def _parse_length(text: str) -> float:
    """Floats with an optional ``pi`` suffix: ``2pi`` -> 6.2831...."""
    s = text.strip().lower().replace(" ", "")
    if s.endswith("pi"):
        head = s[:-2].rstrip("*")
        factor = float(head) if head else 1.0
        return factor * math.pi
    return float(s)


@dataclass
class CampaignSpec:
    """Declarative description of one experiment."""

    kind: str = "verify"  # decay25d | remainder_sweep | wiegner_monitor | verify
    seed: int = 0
    n_h: int = 64
    n_v: int = 32
    L_h: float = 2.0 * math.pi
    L_v: float = 2.0 * math.pi
    ic: dict = field(default_factory=lambda: {"kind": "taylor_green", "profile": "sin"})
    eps_list: tuple[float, ...] = (0.25,)
    delta: float = 0.5
    T: float = 0.1
    dt: float = 1e-3
    t_end: float = 1.0
    sample_every: int = 10
    dealias_vertical: bool = False
    track_identities: bool = True
    workers: int = 1
    fit_window: tuple[float, float] | None = None
    out_dir: str = "runs/out"

    def __post_init__(self) -> None:
        if self.kind not in ("decay25d", "remainder_sweep", "wiegner_monitor", "verify"):
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        for e in self.eps_list:
            if e != 0.0 and e not in ALLOWED_EPS:
                raise ValueError(f"eps {e} outside the commensurate set {ALLOWED_EPS}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.dt <= 0 or self.t_end <= 0 or self.T <= 0:
            raise ValueError("times must be positive")

    # -- config file plumbing ------------------------------------------------

    @classmethod
    def from_file(cls, path: str | Path, overrides: list[str] | None = None) -> "CampaignSpec":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"config file not found: {path}")
        cp = configparser.ConfigParser()
        cp.read(path)
        for item in overrides or []:
            if "=" not in item or "." not in item.split("=", 1)[0]:
                raise ValueError(f"override must look like section.key=value: {item!r}")
            key, value = item.split("=", 1)
            section, name = key.split(".", 1)
            if not cp.has_section(section):
                cp.add_section(section)
            cp.set(section.strip(), name.strip(), value.strip())
        return cls.from_parser(cp)

    @classmethod
    def from_parser(cls, cp: configparser.ConfigParser) -> "CampaignSpec":
        known = {
            "experiment": {"kind", "seed"},
            "grid": {"n_h", "n_v", "l_h", "l_v"},
            "ic": {"kind", "profile", "amplitude", "spectrum_delta", "band_lo",
                   "band_hi", "z_modes"},
            "run": {"eps", "dt", "t_end", "sample_every", "delta", "t",
                    "dealias_vertical", "track_identities", "workers"},
            "fit": {"window_lo", "window_hi"},
            "output": {"dir"},
        }
        for section in cp.sections():
            if section not in known:
                raise ValueError(f"unknown config section [{section}]")
            for key in cp[section]:
                if key not in known[section]:
                    raise ValueError(f"unknown config key {section}.{key}")
        kw: dict = {}
        if cp.has_section("experiment"):
            kw["kind"] = cp.get("experiment", "kind", fallback="verify")
            kw["seed"] = cp.getint("experiment", "seed", fallback=0)
        if cp.has_section("grid"):
            kw["n_h"] = cp.getint("grid", "n_h", fallback=64)
            kw["n_v"] = cp.getint("grid", "n_v", fallback=32)
            kw["L_h"] = _parse_length(cp.get("grid", "L_h", fallback="2pi"))
            kw["L_v"] = _parse_length(cp.get("grid", "L_v", fallback="2pi"))
        if cp.has_section("ic"):
            ic = {"kind": cp.get("ic", "kind", fallback="taylor_green")}
            for key, cast in (
                ("profile", str),
                ("amplitude", float),
                ("spectrum_delta", float),
                ("band_lo", int),
                ("band_hi", int),
                ("z_modes", int),
            ):
                if cp.has_option("ic", key):
                    ic[key] = cast(cp.get("ic", key))
            kw["ic"] = ic
        if cp.has_section("run"):
            if cp.has_option("run", "eps"):
                kw["eps_list"] = tuple(
                    float(tok) for tok in cp.get("run", "eps").split(",") if tok.strip()
                )
            kw["dt"] = cp.getfloat("run", "dt", fallback=1e-3)
            kw["t_end"] = cp.getfloat("run", "t_end", fallback=1.0)
            kw["sample_every"] = cp.getint("run", "sample_every", fallback=10)
            kw["delta"] = cp.getfloat("run", "delta", fallback=0.5)
            kw["T"] = cp.getfloat("run", "T", fallback=0.1)
            kw["dealias_vertical"] = cp.getboolean("run", "dealias_vertical", fallback=False)
            kw["track_identities"] = cp.getboolean("run", "track_identities", fallback=True)
            kw["workers"] = cp.getint("run", "workers", fallback=1)
        if cp.has_section("fit"):
            kw["fit_window"] = (
                cp.getfloat("fit", "window_lo"),
                cp.getfloat("fit", "window_hi"),
            )
        if cp.has_section("output"):
            kw["out_dir"] = cp.get("output", "dir", fallback="runs/out")
        return cls(**kw)

    def to_flat_dict(self) -> dict:
        d = asdict(self)
        d["eps_list"] = list(self.eps_list)
        d["fit_window"] = list(self.fit_window) if self.fit_window else None
        return d

    def config_hash(self) -> str:
        payload = json.dumps(self.to_flat_dict(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]

    def grid(self) -> Grid:
        return Grid(n_h=self.n_h, n_v=self.n_v, L_h=self.L_h, L_v=self.L_v)

    def write_resolved(self, path: str | Path) -> None:
        cp = configparser.ConfigParser()
        cp["experiment"] = {"kind": self.kind, "seed": str(self.seed)}
        cp["grid"] = {
            "n_h": str(self.n_h),
            "n_v": str(self.n_v),
            "L_h": repr(self.L_h),
            "L_v": repr(self.L_v),
        }
        cp["ic"] = {k: str(v) for k, v in self.ic.items()}
        cp["run"] = {
            "eps": ",".join(repr(e) for e in self.eps_list),
            "dt": repr(self.dt),
            "t_end": repr(self.t_end),
            "sample_every": str(self.sample_every),
            "delta": repr(self.delta),
            "T": repr(self.T),
            "dealias_vertical": str(self.dealias_vertical),
            "track_identities": str(self.track_identities),
            "workers": str(self.workers),
        }
        if self.fit_window:
            cp["fit"] = {
                "window_lo": repr(self.fit_window[0]),
                "window_hi": repr(self.fit_window[1]),
            }
        cp["output"] = {"dir": self.out_dir}
        with open(path, "w") as fh:
            cp.write(fh)


# ---------------------------------------------------------------------------
# initial-data library


def _profile_fn(name: str):
    if name in ("one", "const", "1"):
        return lambda z: np.ones_like(z)
    if name == "sin":
        return np.sin
    if name == "cos":
        return np.cos
    raise ValueError(f"unknown vertical profile {name!r}")


def make_initial_data(descriptor: dict, grid: Grid) -> VectorField:
    """Horizontal initial velocity from a descriptor; always built from a
    stream function, hence divergence-free with zero horizontal mean per slice.
    """
    kind = descriptor.get("kind")
    amp = float(descriptor.get("amplitude", 1.0))
    if kind == "taylor_green":
        gz = _profile_fn(descriptor.get("profile", "one"))
        scale = 2.0 * math.pi / grid.L_v

        def u1(x1, x2, x3):
            return amp * np.cos(x1 * 2 * math.pi / grid.L_h) * np.sin(
                x2 * 2 * math.pi / grid.L_h
            ) * gz(scale * x3)

        def u2(x1, x2, x3):
            return -amp * np.sin(x1 * 2 * math.pi / grid.L_h) * np.cos(
                x2 * 2 * math.pi / grid.L_h
            ) * gz(scale * x3)

        return VectorField.from_functions(grid, u1, u2)
    if kind == "separable":
        # stream function psi = sum_a sin(m1 x1 + m2 x2); u = (-d2 psi, d1 psi)
        modes = descriptor.get("modes", [(1, 1, 1.0)])
        gz = _profile_fn(descriptor.get("profile", "sin"))
        scale_h = 2.0 * math.pi / grid.L_h
        scale_v = 2.0 * math.pi / grid.L_v
        x1, x2, x3 = grid.coords()
        u1 = np.zeros(grid.shape)
        u2 = np.zeros(grid.shape)
        for m1, m2, a in modes:
            if m1 == 0 and m2 == 0:
                raise ValueError("stream mode (0,0) violates the zero-mean contract")
            c = np.cos(scale_h * (m1 * x1 + m2 * x2))
            u1 += -a * scale_h * m2 * c
            u2 += a * scale_h * m1 * c
        prof = gz(scale_v * x3)
        return VectorField.from_arrays(
            grid, Space.REAL, amp * u1 * prof, amp * u2 * prof
        )
    if kind == "random":
        return _random_ic(descriptor, grid)
    raise ValueError(f"unknown initial-data kind {kind!r}")


def _random_ic(descriptor: dict, grid: Grid) -> VectorField:
    """Seeded band-limited data with a tunable infrared spectrum.

    ``spectrum_delta`` sets the horizontal power law ``|uhat|^2 ~ |xi|^(2d-2)``
    so the heat-flow proxy of order ``-d`` plateaus; ``band`` restricts the
    integer mode annulus; ``z_modes`` adds that many low vertical modes.
    """
    seed = int(descriptor.get("seed", 0))
    d = float(descriptor.get("spectrum_delta", 0.5))
    lo = int(descriptor.get("band_lo", 1))
    hi = int(descriptor.get("band_hi", max(2, grid.n_h // 4)))
    zm = int(descriptor.get("z_modes", 0))
    amp = float(descriptor.get("amplitude", 1.0))
    rng = np.random.default_rng(seed)
    ih = np.fft.fftfreq(grid.n_h, 1.0 / grid.n_h)
    I1, I2 = np.meshgrid(ih, ih, indexing="ij")
    ring = np.sqrt(I1**2 + I2**2)
    band = (ring >= lo) & (ring <= hi)
    # stream modes: |psi_hat| ~ |xi|^(d-2) gives |u_hat| ~ |xi|^(d-1)
    scale_h = 2.0 * math.pi / grid.L_h
    with np.errstate(divide="ignore"):
        envelope = np.where(band, (scale_h * np.maximum(ring, 1e-12)) ** (d - 2.0), 0.0)
    phases = rng.uniform(0.0, 2.0 * math.pi, size=(grid.n_h, grid.n_h))
    coef = envelope * np.exp(1j * phases)
    # Hermitian-symmetrize so the stream function is real
    mirrored = np.conj(np.roll(np.flip(coef, axis=(0, 1)), (1, 1), axis=(0, 1)))
    coef = 0.5 * (coef + mirrored)
    psi_hat = np.zeros(grid.shape, dtype=np.complex128)
    if zm > 0 and grid.n_v > 1:
        weights = rng.uniform(0.5, 1.0, size=zm)
        phases_z = rng.uniform(0.0, 2.0 * math.pi, size=zm)
        psi_hat[:, :, 0] = coef
        for m, (wz, ph) in enumerate(zip(weights, phases_z), start=1):
            cz = 0.5 * wz * np.exp(1j * ph)
            psi_hat[:, :, m % grid.n_v] += coef * cz
            psi_hat[:, :, (-m) % grid.n_v] += coef * np.conj(cz)
    else:
        psi_hat[:, :, :] = coef[:, :, None]
    k1 = grid.k1
    k2 = grid.k2
    u1_hat = -1j * k2 * psi_hat
    u2_hat = 1j * k1 * psi_hat
    u1 = grid.ifftn(u1_hat).real
    u2 = grid.ifftn(u2_hat).real
    peak = max(np.abs(u1).max(), np.abs(u2).max(), 1e-300)
    return VectorField.from_arrays(
        grid, Space.REAL, amp * u1 / peak, amp * u2 / peak
    )


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepManifest:
    """Per-eps records of the forcing and remainder scaling experiment."""

    config: dict
    config_hash: str
    entries: dict = field(default_factory=dict)  # keyed by repr(eps)
    slope_forcing: float | None = None
    slope_forcing_stderr: float | None = None
    slope_remainder: float | None = None
    flags: list[str] = field(default_factory=list)

    def complete(self, eps_list) -> bool:
        return all(repr(e) in self.entries for e in eps_list) and all(
            self.entries[repr(e)].get("status") == "ok" for e in eps_list
        )

    def to_json(self) -> dict:
        return {
            "config": self.config,
            "config_hash": self.config_hash,
            "entries": self.entries,
            "slope_forcing": self.slope_forcing,
            "slope_forcing_stderr": self.slope_forcing_stderr,
            "slope_remainder": self.slope_remainder,
            "flags": self.flags,
        }

    @classmethod
    def from_json(cls, d: dict) -> "SweepManifest":
        return cls(
            config=d["config"],
            config_hash=d["config_hash"],
            entries=d["entries"],
            slope_forcing=d.get("slope_forcing"),
            slope_forcing_stderr=d.get("slope_forcing_stderr"),
            slope_remainder=d.get("slope_remainder"),
            flags=list(d.get("flags", [])),
        )


def write_csv(path: str | Path, rows: list[dict], columns: list[str] | None = None) -> None:
    if not rows:
        columns = columns or []
    cols = columns or list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=cols, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def _sweep_one(spec_dict: dict, eps: float) -> dict:
    spec = CampaignSpec(**{**spec_dict, "eps_list": (eps,),
                           "fit_window": tuple(spec_dict["fit_window"])
                           if spec_dict.get("fit_window") else None})
    grid = spec.grid()
    ic_descr = dict(spec.ic)
    ic_descr.setdefault("seed", spec.seed)
    u0 = make_initial_data(ic_descr, grid)
    t0 = _time.perf_counter()
    state0 = SliceStackState.from_velocity(u0, eps)
    coupled = CoupledRemainderRun(
        state0, eps, spec.dt, spec.dealias_vertical, track_identities=True
    )
    n_steps = int(round(spec.t_end / spec.dt))
    rows = [coupled.row()]
    sup_r = 0.0
    for i in range(n_steps):
        coupled.advance()
        if (i + 1) % spec.sample_every == 0 or i + 1 == n_steps:
            row = coupled.row()
            rows.append(row)
            sup_r = max(sup_r, row["r_h_half"])
    aux = diag.aux_constants(u0, spec.delta, eps)
    runtime = _time.perf_counter() - t0
    return {
        "status": "ok",
        "eps": eps,
        "f_l2t_h_minus_half": math.sqrt(coupled.int_f2),
        "sup_r_h_half": sup_r,
        "int_gradr_h_half": coupled.int_r_h32,
        "n_uapp": coupled.stepper25.acc.snapshot()["n_uapp_integral"],
        "U0": aux.U0,
        "runtime_s": runtime,
        "rows": rows,
    }


def order_of_convergence(values: dict) -> tuple[float, float]:
    """Log-log least-squares slope of ``value`` against ``eps`` with stderr."""
    eps = np.asarray(sorted(values.keys()), dtype=float)
    v = np.asarray([values[e] for e in eps], dtype=float)
    if eps.size < 3:
        raise ValueError("need at least 3 points for a convergence order")
    if np.any(v <= 0):
        raise ValueError("convergence fit requires positive values")
    x = np.log(eps)
    y = np.log(v)
    n = x.size
    A = np.vstack([x, np.ones(n)]).T
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    slope = float(coef[0])
    if n > 2:
        ss = float(res[0]) if res.size else float(np.sum((y - A @ coef) ** 2))
        var = ss / (n - 2) / float(np.sum((x - x.mean()) ** 2))
        stderr = math.sqrt(var)
    else:
        stderr = 0.0
    return slope, stderr


def run_sweep(spec: CampaignSpec, only_eps: list[float] | None = None,
              manifest: SweepManifest | None = None) -> SweepManifest:
    """Run the scaling sweep over ``spec.eps_list``; failures are recorded
    per entry and do not abort the sweep."""
    if manifest is None:
        manifest = SweepManifest(config=spec.to_flat_dict(), config_hash=spec.config_hash())
    todo = [e for e in (only_eps if only_eps is not None else spec.eps_list)]
    spec_dict = spec.to_flat_dict()
    results: dict[float, dict] = {}
    if spec.workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=min(spec.workers, len(todo))) as ex:
            futs = {e: ex.submit(_sweep_one, spec_dict, e) for e in todo}
            for e, fut in futs.items():
                try:
                    results[e] = fut.result()
                except (DivergedError, Exception) as exc:  # noqa: BLE001
                    results[e] = {"status": "failed", "eps": e, "error": str(exc)}
    else:
        for e in todo:
            try:
                results[e] = _sweep_one(spec_dict, e)
            except (DivergedError, Exception) as exc:  # noqa: BLE001
                results[e] = {"status": "failed", "eps": e, "error": str(exc)}
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for e, entry in results.items():
        rows = entry.pop("rows", None)
        if rows:
            write_csv(out / f"remainder_eps_{e!r}.csv", rows)
        manifest.entries[repr(e)] = entry
    ok = {
        float(k): v for k, v in manifest.entries.items() if v.get("status") == "ok"
    }
    f_vals = {e: v["f_l2t_h_minus_half"] for e, v in ok.items()}
    r_vals = {e: v["sup_r_h_half"] for e, v in ok.items()}
    manifest.flags = [f for f in manifest.flags if f not in ("degenerate", "exact")]
    if any(v <= 1e-14 for v in f_vals.values()):
        manifest.flags.append("degenerate")
    elif len(f_vals) >= 3:
        s, se = order_of_convergence(f_vals)
        manifest.slope_forcing, manifest.slope_forcing_stderr = s, se
    if ok and all(v <= 1e-10 for v in r_vals.values()):
        manifest.flags.append("exact")
    elif len(r_vals) >= 3 and all(v > 0 for v in r_vals.values()):
        manifest.slope_remainder = order_of_convergence(r_vals)[0]
    return manifest


def persist(manifest: SweepManifest, out_dir: str | Path, spec: CampaignSpec | None = None) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    if spec is not None:
        spec.write_resolved(out / "resolved_config.cfg")
    return path


def resume(out_dir: str | Path, spec: CampaignSpec) -> SweepManifest:
    """Complete a previously persisted sweep; only missing/failed eps run."""
    path = Path(out_dir) / "manifest.json"
    if not path.exists():
        raise FileNotFoundError(f"no manifest to resume in {out_dir}")
    with open(path) as fh:
        manifest = SweepManifest.from_json(json.load(fh))
    if manifest.config_hash != spec.config_hash():
        raise ValueError(
            "config hash mismatch: refusing to resume "
            f"({manifest.config_hash} on disk vs {spec.config_hash()} requested)"
        )
    missing = [
        e
        for e in spec.eps_list
        if manifest.entries.get(repr(e), {}).get("status") != "ok"
    ]
    if missing:
        manifest = run_sweep(spec, only_eps=missing, manifest=manifest)
    persist(manifest, out_dir, spec)
    return manifest


# ---------------------------------------------------------------------------
# other experiment kinds


def run_decay_experiment(spec: CampaignSpec) -> dict:
    """Long-window decay run with a power-law fit of the slice-max energy."""
    grid = spec.grid()
    ic_descr = dict(spec.ic)
    ic_descr.setdefault("seed", spec.seed)
    u0 = make_initial_data(ic_descr, grid)
    eps = spec.eps_list[0]
    state0 = SliceStackState.from_velocity(u0, eps)
    traj = run(
        state0,
        spec.t_end,
        spec.dt,
        sample_every=spec.sample_every,
        store_states=False,
        track_identities=spec.track_identities,
        dealias_vertical=spec.dealias_vertical,
    )
    window = spec.fit_window or (5.0, 0.25 * (spec.L_h / (2 * math.pi)) ** 2)
    values = traj.series("linf_v_l2_h") ** 2
    fit = diag.fit_decay(traj.times, values, window)
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "decay_timeseries.csv", traj.rows, CSV_COLUMNS)
    result = {
        "exponent": fit.exponent,
        "prefactor": fit.prefactor,
        "r2": fit.r2,
        "window": list(window),
        "config_hash": spec.config_hash(),
    }
    with open(out / "decay_fit.json", "w") as fh:
        json.dump(result, fh, indent=2, sort_keys=True)
        fh.write("\n")
    spec.write_resolved(out / "resolved_config.cfg")
    return result


def run_wiegner_monitor(spec: CampaignSpec) -> dict:
    """Trajectory plus frequency-split monitor reports for both schedules."""
    grid = spec.grid()
    ic_descr = dict(spec.ic)
    ic_descr.setdefault("seed", spec.seed)
    u0 = make_initial_data(ic_descr, grid)
    eps = spec.eps_list[0]
    state0 = SliceStackState.from_velocity(u0, eps)
    traj = run(
        state0,
        spec.t_end,
        spec.dt,
        sample_every=spec.sample_every,
        store_states=True,
        track_identities=True,
        dealias_vertical=spec.dealias_vertical,
    )
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary: dict = {"config_hash": spec.config_hash(), "reports": {}}
    for kind in ("LogCube", "PolyDelta"):
        for which in ("velocity", "vorticity"):
            rep = diag.wiegner_check(traj, which, kind, spec.T, spec.delta)
            name = f"wiegner_{kind}_{which}"
            write_csv(out / f"{name}.csv", rep.to_rows())
            summary["reports"][name] = rep.summary()
    low = diag.lowfreq_check(traj, "LogCube", spec.T, spec.delta)
    summary["reports"]["lowfreq"] = low.summary()
    with open(out / "wiegner_summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_csv(out / "timeseries.csv", traj.rows, CSV_COLUMNS)
    spec.write_resolved(out / "resolved_config.cfg")
    return summary


# ---------------------------------------------------------------------------
# verify battery (used by the CLI and smoke-checked in the test suite)


def verify_suite(quick: bool = True) -> list[tuple[str, bool, str]]:
    """Invariant battery; returns (name, passed, detail) triples."""
    from . import operators as ops

    results: list[tuple[str, bool, str]] = []

    def check(name: str, passed: bool, detail: str) -> None:
        results.append((name, bool(passed), detail))

    n = 32 if quick else 64
    t_end = 0.5 if quick else 1.0
    g = Grid(n_h=n, n_v=4)
    u0 = make_initial_data({"kind": "taylor_green", "profile": "one"}, g)
    st = SliceStackState.from_velocity(u0, eps=0.25)
    traj = run(st, t_end, 1e-3, sample_every=50)
    w0 = st.omega.data
    w_exact = w0 * math.exp(-2.0 * t_end)
    w_num = traj.states[-1].omega.data
    err = np.linalg.norm(w_num - w_exact) / np.linalg.norm(w_exact)
    check("taylor-green decay", err <= 1e-6, f"rel err {err:.2e}")

    ledger = energy_ledger(traj)
    check(
        "energy identity",
        ledger.max_residual() <= 1e-6,
        f"max rel residual {ledger.max_residual():.2e}",
    )

    gr = Grid(n_h=n, n_v=8)
    u0r = make_initial_data(
        {"kind": "random", "seed": 11, "band_lo": 1, "band_hi": 6, "z_modes": 2,
         "amplitude": 0.8}, gr,
    )
    str0 = SliceStackState.from_velocity(u0r, eps=0.25)
    trr = run(str0, t_end, 1e-3, sample_every=50)
    mono_ok = True
    for col in ("linf_v_l2_h", "l2_v_l2_h", "omega_linf_v_l2_h", "omega_l2_v_l2_h"):
        vals = trr.series(col)
        if np.any(vals[1:] > vals[:-1] * (1.0 + 1e-10)):
            mono_ok = False
    check("maximum principles", mono_ok, "slice norms nonincreasing")

    ledr = energy_ledger(trr)
    check(
        "per-slice balances",
        ledr.max_slice_residual() <= 1e-6,
        f"max slice residual {ledr.max_slice_residual():.2e}",
    )

    rng = np.random.default_rng(3)
    proj_ok, detail = True, ""
    for _ in range(5 if quick else 20):
        gg = Grid(n_h=16, n_v=4)
        v = VectorField.from_arrays(
            gg, Space.REAL, *(rng.standard_normal(gg.shape) for _ in range(2))
        )
        p1 = ops.leray_h(v)
        p2 = ops.leray_h(p1)
        d = max(
            np.abs(p2[i].data - p1[i].data).max()
            / max(np.abs(p1[i].data).max(), 1e-30)
            for i in range(2)
        )
        dv = ops.div_check(p1)
        if d > 1e-12 or dv > 1e-10:
            proj_ok, detail = False, f"idempotence {d:.1e}, div {dv:.1e}"
    check("leray projector", proj_ok, detail or "idempotent, divergence-free")

    f = ScalarField(Grid(16, 4), Space.REAL, rng.standard_normal((16, 16, 4)))
    par = abs(f.l2() - f.to_spectral().l2()) / f.l2()
    check("parseval", par <= 1e-12, f"rel gap {par:.1e}")

    h1 = ops.heat_semigroup(ops.heat_semigroup(f, 0.3), 0.2)
    h2 = ops.heat_semigroup(f, 0.5)
    gap = np.abs(h1.data - h2.data).max() / max(np.abs(h2.data).max(), 1e-30)
    check("heat semigroup law", gap <= 1e-12, f"rel gap {gap:.1e}")

    lp = ops.lowpass(f, 3.0)
    lp2 = ops.lowpass(lp, 3.0)
    proj = np.array_equal(lp.to_spectral().data, lp2.to_spectral().data)
    contract = lp.l2() <= f.l2()
    check("lowpass projection laws", proj and contract, "idempotent, contractive")

    return results
