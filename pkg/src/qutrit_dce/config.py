"""Run configuration: JSON loading, validation, and the built-in figure presets.

A configuration is a JSON object with these sections (all optional except
``model``)::

    {
      "model": {"d1": 0.464, "d2": 0.106, "g01": 0.05, ...},   # or e1/e2
      "drive": {"eps1": 0, "eps2": 0.1, "phi1": 0, "phi2": 0, "eta": 3.0037},
      "dissipation": {"kappa": 5e-6, "gamma01": 5e-5, ...},
      "space": {"n_max": 30},
      "grid": {"t1": 1.2e5, "dt": null, "stride": null, "sample_dt": 50,
               "steps_per_period": null},
      "mode": "schrodinger",          # or "effective", "lindblad", or a list
      "J": 3,
      "initial": "bare",              # or "ground"
      "k_max": 10,
      "rotating_cutoff": 0.1,
      "scan": {"span": 0.02, "points": 11, "horizon": 1e5, "workers": 1},
      "outputs": {"prefix": "run", "snapshots": ["peak"]},
      "meta": {...}                   # free-form, echoed only
    }

``drive.eta`` may be the string ``"resonant"``: it is then replaced by the
exact ground-branch transition frequency Lambda_J - Lambda_0 of the
configured model and truncation.  Unknown keys are rejected.
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, fields

from .dynamics import DissipationRates, TimeGrid
from .errors import ValidationError
from .model import Drive, HilbertSpace, ModelParams, bare_hamiltonian
from .resonance import predict_eta
from .spectrum import diagonalize

MODES = ("schrodinger", "effective", "lindblad")

_MODEL_KEYS = {f.name for f in fields(ModelParams)} | {"d1", "d2"}
_DRIVE_KEYS = {f.name for f in fields(Drive)}
_DISSIPATION_KEYS = {f.name for f in fields(DissipationRates)}
_SECTIONS = {
    "model": _MODEL_KEYS,
    "drive": _DRIVE_KEYS,
    "dissipation": _DISSIPATION_KEYS,
    "space": {"n_max"},
    "grid": {"t1", "dt", "stride", "sample_dt", "steps_per_period"},
    "scan": {"span", "points", "horizon", "workers"},
    "outputs": {"prefix", "snapshots"},
}
_SCALARS = {"mode", "J", "initial", "k_max", "rotating_cutoff", "meta"}

_FIG_COUPLINGS = {"g01": 0.05, "g12": 0.06, "g02": 0.03, "c01": 1, "c12": 1, "c02": 1}
_FIG_RELATIVE_EPS2 = 0.07


def _fig_preset(d1, d2, J, eta_printed, t1, mode, dissipation=None, sample_dt=50.0,
                steps_per_period=None):
    e2 = ModelParams.from_detunings(d1, d2).e2
    cfg = {
        "model": {"omega": 1.0, "d1": d1, "d2": d2, **_FIG_COUPLINGS},
        "drive": {"eps1": 0.0, "eps2": _FIG_RELATIVE_EPS2 * e2, "phi1": 0.0, "phi2": 0.0,
                  "eta": "resonant"},
        "space": {"n_max": 30},
        "grid": {"t1": t1, "sample_dt": sample_dt, "steps_per_period": steps_per_period},
        "mode": mode,
        "J": J,
        "initial": "bare",
        "outputs": {"snapshots": ["peak"]},
        "meta": {"eta_printed": eta_printed, "eps2_over_e2": _FIG_RELATIVE_EPS2},
    }
    if dissipation:
        cfg["dissipation"] = dissipation
    return cfg


def _fig3_dissipation():
    g01 = _FIG_COUPLINGS["g01"]
    gamma = 1e-3 * g01
    return {"kappa": 1e-4 * g01, "gamma01": gamma, "gamma02": gamma, "gamma12": gamma,
            "gphi1": gamma, "gphi2": gamma}


PRESETS = {
    "fig1": _fig_preset(0.464, 0.106, 3, 3.0037, 1.2e5, "schrodinger"),
    "fig2": _fig_preset(0.362, 0.51, 1, 0.9978, 1.8e5, "schrodinger"),
    "fig3": _fig_preset(0.24, -0.132, 3, 3.0269, 1.2e4, ["schrodinger", "lindblad"],
                        dissipation=_fig3_dissipation(), sample_dt=20.0, steps_per_period=212),
}


def preset(name):
    if name not in PRESETS:
        raise ValidationError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    cfg = copy.deepcopy(PRESETS[name])
    cfg["outputs"]["prefix"] = name
    return cfg


def load_json(path):
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not valid JSON ({exc})") from exc


def _number(section, key, value, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{section}.{key} must be a number, got {value!r}")
    if integer and int(value) != value:
        raise ValidationError(f"{section}.{key} must be an integer, got {value!r}")
    if not math.isfinite(value):
        raise ValidationError(f"{section}.{key} must be finite")
    return int(value) if integer else float(value)


def _check_keys(cfg):
    if not isinstance(cfg, dict):
        raise ValidationError("configuration must be a JSON object")
    for key, value in cfg.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ValidationError(f"section {key!r} must be an object")
            unknown = set(value) - _SECTIONS[key]
            if unknown:
                raise ValidationError(
                    f"unknown key(s) {sorted(unknown)} in section {key!r}; allowed: {sorted(_SECTIONS[key])}"
                )
        elif key not in _SCALARS:
            raise ValidationError(f"unknown top-level key {key!r}")
    if "model" not in cfg:
        raise ValidationError("configuration needs a 'model' section")


@dataclass
class RunConfig:
    """Validated run description built from a JSON-compatible dict."""

    raw: dict
    params: ModelParams
    drive: Drive
    space: HilbertSpace
    dissipation: DissipationRates | None
    modes: tuple
    J: int
    initial: str
    k_max: int | None
    rotating_cutoff: float
    t1: float
    dt: float | None
    stride: int | None
    sample_dt: float | None
    steps_per_period: int | None
    scan: dict
    prefix: str
    snapshots: list

    @classmethod
    def from_dict(cls, cfg, overrides=None):
        """Validate ``cfg``; ``overrides`` may set eta, n_max and t1."""
        cfg = copy.deepcopy(cfg)
        _check_keys(cfg)
        overrides = overrides or {}
        if overrides.get("n_max") is not None:
            cfg.setdefault("space", {})["n_max"] = overrides["n_max"]
        if overrides.get("t1") is not None:
            cfg.setdefault("grid", {})["t1"] = overrides["t1"]
        if overrides.get("eta") is not None:
            cfg.setdefault("drive", {})["eta"] = overrides["eta"]

        model = dict(cfg["model"])
        if ("d1" in model or "d2" in model) and ("e1" in model or "e2" in model):
            raise ValidationError("model: give either detunings d1, d2 or energies e1, e2, not both")
        for k, v in model.items():
            model[k] = _number("model", k, v, integer=k.startswith("c"))
        if "d1" in model or "d2" in model:
            if not ("d1" in model and "d2" in model):
                raise ValidationError("model: d1 and d2 must be given together")
            params = ModelParams.from_detunings(**model)
        else:
            params = ModelParams(**model)

        n_max = _number("space", "n_max", cfg.get("space", {}).get("n_max", 30), integer=True)
        space = HilbertSpace(n_max)

        J = cfg.get("J", 3)
        if J not in (1, 3):
            raise ValidationError(f"J must be 1 or 3, got {J!r}")

        drive_cfg = dict(cfg.setdefault("drive", {}))
        eta = drive_cfg.get("eta", 1.0)
        if eta == "resonant":
            eta = predict_eta(diagonalize(bare_hamiltonian(params, space)), J)
            # written back so a dumped config reloads to the same run
            cfg["drive"]["eta"] = eta
            cfg.setdefault("meta", {})["eta_source"] = f"resonant, J={J}"
        drive_cfg["eta"] = _number("drive", "eta", eta)
        for k in _DRIVE_KEYS - {"eta"}:
            if k in drive_cfg:
                drive_cfg[k] = _number("drive", k, drive_cfg[k])
        drive = Drive(**drive_cfg)

        dissipation = None
        if "dissipation" in cfg:
            dissipation = DissipationRates(
                **{k: _number("dissipation", k, v) for k, v in cfg["dissipation"].items()}
            )

        mode = cfg.get("mode", "schrodinger")
        modes = tuple([mode] if isinstance(mode, str) else mode)
        for m in modes:
            if m not in MODES:
                raise ValidationError(f"mode {m!r} not one of {MODES}")
        if "lindblad" in modes and dissipation is None:
            raise ValidationError("mode 'lindblad' needs a 'dissipation' section")

        initial = cfg.get("initial", "bare")
        if initial not in ("bare", "ground"):
            raise ValidationError(f"initial must be 'bare' or 'ground', got {initial!r}")

        k_max = cfg.get("k_max")
        if k_max is not None:
            k_max = _number("k_max", "k_max", k_max, integer=True)

        grid = cfg.get("grid", {})
        t1 = _number("grid", "t1", grid.get("t1", 1e3))
        if t1 <= 0:
            raise ValidationError("grid.t1 must be positive")
        dt = grid.get("dt")
        dt = None if dt is None else _number("grid", "dt", dt)
        stride = grid.get("stride")
        stride = None if stride is None else _number("grid", "stride", stride, integer=True)
        sample_dt = grid.get("sample_dt")
        sample_dt = None if sample_dt is None else _number("grid", "sample_dt", sample_dt)
        spp = grid.get("steps_per_period")
        spp = None if spp is None else _number("grid", "steps_per_period", spp, integer=True)
        if dt is not None and spp is not None:
            raise ValidationError("grid: give dt or steps_per_period, not both")

        scan = {"span": 0.02, "points": 11, "horizon": 1e5, "workers": 1}
        for k, v in cfg.get("scan", {}).items():
            scan[k] = _number("scan", k, v, integer=k in ("points", "workers"))

        outputs = cfg.get("outputs", {})
        prefix = str(outputs.get("prefix", "run"))
        snapshots = list(outputs.get("snapshots", []))
        for s in snapshots:
            if s != "peak":
                _number("outputs", "snapshots", s)

        cutoff = _number("rotating_cutoff", "rotating_cutoff", cfg.get("rotating_cutoff", 0.1))
        return cls(raw=cfg, params=params, drive=drive, space=space, dissipation=dissipation,
                   modes=modes, J=J, initial=initial, k_max=k_max, rotating_cutoff=cutoff,
                   t1=t1, dt=dt, stride=stride, sample_dt=sample_dt, steps_per_period=spp,
                   scan=scan, prefix=prefix,
                   snapshots=snapshots)

    def time_grid(self):
        if self.dt is not None:
            stride = self.stride or max(1, int(round((self.sample_dt or self.dt) / self.dt)))
            return TimeGrid(t1=self.t1, dt=self.dt, stride=stride)
        return TimeGrid.for_drive(self.drive, self.space, self.t1, sample_dt=self.sample_dt,
                                  omega=self.params.omega, steps_per_period=self.steps_per_period)

    def to_json(self):
        return json.dumps(self.raw, indent=2, sort_keys=True)
