"""Run configuration: strict JSON parsing, initial-data builders, presets.

Configs are flat JSON documents. Parsing is strict: unknown keys are
rejected, constraint violations name the offending field, and p + beta >= 2
is enforced up front because the smoothing envelope is meaningless below it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .mesh import DensityField, Potential, WeightedMesh
from .operators import BoundaryCondition

CHECK_NAMES = ("mass", "contraction", "comparison", "envelope", "dissipation",
               "ab", "barrier", "scaling", "cascade")

INITIAL_KINDS = ("constant", "gaussian_bump", "indicator", "peaked")

_DEFAULTS = {
    "potential": {"kind": "gaussian", "params": []},
    "R": 8.0,
    "n": 512,
    "beta": 1.0,
    "p": 2.0,
    "c_eq": "1/(1+beta)",
    "scheme": "explicit_euler",
    "cfl_safety": 0.2,
    "dt_max": 1e-2,
    "newton_tol": 1e-11,
    "newton_max_iter": 50,
    "bc": {"kind": "zero_flux"},
    "initial": {"kind": "gaussian_bump", "center": 1.0, "width": 0.25, "mass": 1.0},
    "initial2": None,
    "T": 10.0,
    "output_times": {"count": 41},
    "checks": ["mass"],
    "barrier_ball": {"center": 0.0, "radius": 1.0},
    "cascade_levels": 4,
    "seed": 0,
}


def _fail(path, msg):
    raise ConfigError(f"{path}: {msg}")


def _need_number(doc, key, path, positive=False):
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(f"{path}{key}", f"expected a number, got {v!r}")
    v = float(v)
    if positive and v <= 0:
        _fail(f"{path}{key}", f"must be positive, got {v}")
    return v


def _check_keys(doc, allowed, path):
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        _fail(f"{path}{unknown[0]}", "unknown key (strict parsing)")


@dataclass(frozen=True)
class RunConfig:
    """Validated scenario description; see parse_config for the schema."""

    potential: Potential
    R: float
    n: int
    beta: float
    p: float
    c_eq: float
    scheme: str
    cfl_safety: float
    dt_max: float
    newton_tol: float
    newton_max_iter: int
    bc: BoundaryCondition
    initial: dict
    initial2: dict | None
    T: float
    output_times_spec: dict
    checks: tuple
    barrier_ball: dict
    cascade_levels: int
    seed: int

    def resolve_output_times(self):
        """Concrete snapshot times for this run (always including 0)."""
        spec = self.output_times_spec
        if "times" in spec:
            times = np.asarray(spec["times"], dtype=float)
        else:
            times = np.linspace(0.0, self.T, int(spec["count"]))
        if times[0] > 0.0:
            times = np.concatenate([[0.0], times])
        return times


def _parse_potential(doc):
    _check_keys(doc, ("kind", "params"), "potential.")
    kind = doc.get("kind", "gaussian")
    params = doc.get("params", [])
    if not isinstance(params, list):
        _fail("potential.params", f"expected a list, got {params!r}")
    try:
        return Potential(kind, tuple(params))
    except Exception as err:
        _fail("potential", str(err))


def _parse_bc(doc):
    _check_keys(doc, ("kind", "value"), "bc.")
    kind = doc.get("kind", "zero_flux")
    value = doc.get("value", 0.0)
    try:
        return BoundaryCondition(kind, value)
    except Exception as err:
        _fail("bc", str(err))


def _parse_initial(doc, path):
    if not isinstance(doc, dict):
        _fail(path, f"expected an object, got {doc!r}")
    kind = doc.get("kind")
    if kind not in INITIAL_KINDS:
        _fail(f"{path}.kind", f"must be one of {INITIAL_KINDS}, got {kind!r}")
    allowed = {
        "constant": ("kind", "value"),
        "gaussian_bump": ("kind", "center", "width", "mass", "floor"),
        "indicator": ("kind", "interval", "mass"),
        "peaked": ("kind", "mass", "sharpness"),
    }[kind]
    _check_keys(doc, allowed, f"{path}.")
    out = dict(doc)
    if kind == "constant":
        v = _need_number(out, "value", f"{path}.") if "value" in out else 1.0
        if v < 0:
            _fail(f"{path}.value", f"must be >= 0, got {v}")
        out["value"] = v
    elif kind == "gaussian_bump":
        out.setdefault("center", 0.0)
        out.setdefault("floor", 0.0)
        for key, positive in (("width", True), ("mass", True), ("center", False),
                              ("floor", False)):
            out[key] = _need_number(out, key, f"{path}.", positive=positive)
        if out["floor"] < 0:
            _fail(f"{path}.floor", f"must be >= 0, got {out['floor']}")
        if out["floor"] >= out["mass"]:
            _fail(f"{path}.floor", "floor mass must stay below the total mass")
    elif kind == "indicator":
        iv = out.get("interval")
        if (not isinstance(iv, list) or len(iv) != 2
                or not all(isinstance(v, (int, float)) for v in iv)
                or iv[0] >= iv[1]):
            _fail(f"{path}.interval", f"expected [a, b] with a < b, got {iv!r}")
        out["interval"] = [float(iv[0]), float(iv[1])]
        out["mass"] = _need_number(out, "mass", f"{path}.", positive=True)
    else:
        out["mass"] = _need_number(out, "mass", f"{path}.", positive=True)
        out.setdefault("sharpness", 1e3)
        out["sharpness"] = _need_number(out, "sharpness", f"{path}.", positive=True)
    return out


def _parse_output_times(doc, T):
    _check_keys(doc, ("count", "times"), "output_times.")
    if ("count" in doc) == ("times" in doc):
        _fail("output_times", "give exactly one of 'count' or 'times'")
    if "count" in doc:
        c = doc["count"]
        if not isinstance(c, int) or isinstance(c, bool) or c < 2:
            _fail("output_times.count", f"expected an integer >= 2, got {c!r}")
        return {"count": c}
    times = doc["times"]
    if not isinstance(times, list) or not times:
        _fail("output_times.times", f"expected a nonempty list, got {times!r}")
    arr = np.asarray(times, dtype=float)
    if np.any(np.diff(arr) <= 0):
        _fail("output_times.times", "times must be strictly increasing")
    if arr[0] < 0 or arr[-1] > T:
        _fail("output_times.times", f"times must lie in [0, {T}]")
    return {"times": [float(t) for t in arr]}


def parse_config(text: str) -> RunConfig:
    """Parse a JSON config document into a validated RunConfig."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"not valid JSON: {err}") from err
    if not isinstance(doc, dict):
        raise ConfigError(f"top level must be an object, got {type(doc).__name__}")
    _check_keys(doc, _DEFAULTS, "")
    merged = {**_DEFAULTS, **doc}

    beta = _need_number(merged, "beta", "", positive=True)
    p = _need_number(merged, "p", "", positive=True)
    if p <= 1:
        _fail("p", f"must exceed 1, got {p}")
    if p + beta < 2:
        _fail("p", f"smoothing decay needs p + beta >= 2, got p + beta = {p + beta}")

    c_eq_doc = merged["c_eq"]
    if c_eq_doc == "1/(1+beta)":
        c_eq = 1.0 / (1.0 + beta)
    elif c_eq_doc in (1, 1.0):
        c_eq = 1.0
    elif isinstance(c_eq_doc, (int, float)) and not isinstance(c_eq_doc, bool) \
            and math.isclose(float(c_eq_doc), 1.0 / (1.0 + beta), rel_tol=1e-12):
        c_eq = 1.0 / (1.0 + beta)
    else:
        _fail("c_eq", f"must be 1 or \"1/(1+beta)\", got {c_eq_doc!r}")

    scheme = merged["scheme"]
    if scheme not in ("explicit_euler", "implicit_euler"):
        _fail("scheme", f"must be explicit_euler or implicit_euler, got {scheme!r}")

    n = merged["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        _fail("n", f"expected an integer >= 2, got {n!r}")
    nmi = merged["newton_max_iter"]
    if not isinstance(nmi, int) or isinstance(nmi, bool) or nmi < 1:
        _fail("newton_max_iter", f"expected a positive integer, got {nmi!r}")
    levels = merged["cascade_levels"]
    if not isinstance(levels, int) or isinstance(levels, bool) or levels < 2:
        _fail("cascade_levels", f"expected an integer >= 2, got {levels!r}")
    seed = merged["seed"]
    if not isinstance(seed, int) or isinstance(seed, bool):
        _fail("seed", f"expected an integer, got {seed!r}")

    checks = merged["checks"]
    if not isinstance(checks, list):
        _fail("checks", f"expected a list, got {checks!r}")
    for c in checks:
        if c not in CHECK_NAMES:
            _fail("checks", f"unknown check {c!r}; valid: {CHECK_NAMES}")

    ball = merged["barrier_ball"]
    if not isinstance(ball, dict):
        _fail("barrier_ball", f"expected an object, got {ball!r}")
    _check_keys(ball, ("center", "radius"), "barrier_ball.")
    ball = {"center": float(ball.get("center", 0.0)),
            "radius": float(ball.get("radius", 1.0))}
    if ball["radius"] <= 0:
        _fail("barrier_ball.radius", f"must be positive, got {ball['radius']}")

    T = _need_number(merged, "T", "", positive=True)
    initial2 = merged["initial2"]
    if "contraction" in checks and initial2 is None:
        _fail("initial2", "the contraction check needs a second initial datum")

    cfg = RunConfig(
        potential=_parse_potential(merged["potential"]),
        R=_need_number(merged, "R", "", positive=True),
        n=n,
        beta=beta,
        p=p,
        c_eq=c_eq,
        scheme=scheme,
        cfl_safety=_need_number(merged, "cfl_safety", "", positive=True),
        dt_max=_need_number(merged, "dt_max", "", positive=True),
        newton_tol=_need_number(merged, "newton_tol", "", positive=True),
        newton_max_iter=nmi,
        bc=_parse_bc(merged["bc"]),
        initial=_parse_initial(merged["initial"], "initial"),
        initial2=None if initial2 is None else _parse_initial(initial2, "initial2"),
        T=T,
        output_times_spec=_parse_output_times(merged["output_times"], T),
        checks=tuple(checks),
        barrier_ball=ball,
        cascade_levels=levels,
        seed=seed,
    )
    return cfg


def parse_config_file(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def build_initial(spec: dict, mesh: WeightedMesh) -> DensityField:
    """Realize an initial-data spec on a mesh, renormalized to its mass."""
    kind = spec["kind"]
    x = mesh.centers
    if kind == "constant":
        return DensityField(np.full(mesh.n_cells, spec["value"]))
    if kind == "gaussian_bump":
        shape = np.exp(-0.5 * ((x - spec["center"]) / spec["width"]) ** 2)
        floor = spec.get("floor", 0.0)
        bump_mass = spec["mass"] - floor  # the flat part carries mass floor * 1
        values = floor + shape * (bump_mass / mesh.integrate(shape))
        return DensityField(values)
    if kind == "indicator":
        a, b = spec["interval"]
        shape = ((x >= a) & (x <= b)).astype(float)
        total = mesh.integrate(shape)
        if total == 0.0:
            raise ConfigError(f"initial.interval [{a}, {b}] contains no mesh cells")
        return DensityField(shape * (spec["mass"] / total))
    # peaked: one-cell spike placed so its height approximates the sharpness
    target = spec["mass"] / spec["sharpness"]
    cell_masses = mesh.h * mesh.cell_weights
    j = int(np.argmin(np.abs(np.log(cell_masses) - np.log(target))))
    values = np.zeros(mesh.n_cells)
    values[j] = spec["mass"] / cell_masses[j]
    return DensityField(values)


_PRESETS = {
    "gaussian_reference": (
        "gaussian weight, unit-mass bump, T=20: mass + envelope certificates",
        {
            "potential": {"kind": "gaussian", "params": []},
            "R": 8.0, "n": 512, "beta": 1.0, "p": 2.0,
            "T": 20.0,
            "initial": {"kind": "gaussian_bump", "center": 1.0, "width": 0.25,
                        "mass": 1.0},
            "output_times": {"count": 41},
            "checks": ["mass", "envelope"],
        },
    ),
    "subexp_alpha1": (
        "subexponential weight exp(-(x^2+delta^2)^(1/2)): envelope at small gap",
        {
            "potential": {"kind": "smoothed_power", "params": [1.0, 1e-2]},
            "R": 10.0, "n": 512, "beta": 1.0, "p": 2.0,
            "T": 20.0,
            "initial": {"kind": "gaussian_bump", "center": 1.0, "width": 0.25,
                        "mass": 1.0},
            "output_times": {"count": 41},
            "checks": ["mass", "envelope"],
        },
    ),
    "double_well": (
        "double-well weight exp(-(x^2-1)^2/4): envelope across a barrier",
        {
            "potential": {"kind": "double_well", "params": [1.0]},
            "R": 4.0, "n": 512, "beta": 1.0, "p": 2.0,
            "T": 20.0,
            "initial": {"kind": "gaussian_bump", "center": 1.0, "width": 0.25,
                        "mass": 1.0},
            "output_times": {"count": 41},
            "checks": ["mass", "envelope"],
        },
    ),
    "peaked_L1_only": (
        "unit-mass spike with sup ~ 1e3: data-independent bound and late rate",
        {
            "potential": {"kind": "gaussian", "params": []},
            "R": 8.0, "n": 512, "beta": 1.0, "p": 2.0,
            "T": 20.0,
            "initial": {"kind": "peaked", "mass": 1.0, "sharpness": 1e3},
            "output_times": {"count": 81},
            "checks": ["mass", "envelope"],
        },
    ),
    "contraction_pair": (
        "two separated bumps, same dynamics: weighted-L1 distance contraction",
        {
            "potential": {"kind": "gaussian", "params": []},
            "R": 8.0, "n": 512, "beta": 1.0, "p": 2.0,
            "T": 5.0,
            "initial": {"kind": "gaussian_bump", "center": -1.0, "width": 0.5,
                        "mass": 1.0},
            "initial2": {"kind": "gaussian_bump", "center": 1.5, "width": 0.7,
                         "mass": 1.2},
            "output_times": {"count": 26},
            "checks": ["contraction"],
        },
    ),
    "cascade_demo": (
        "monotone family of wall-value problems g_i = 2^-i on a gaussian weight",
        {
            "potential": {"kind": "gaussian", "params": []},
            "R": 4.0, "n": 256, "beta": 1.0, "p": 2.0,
            "T": 0.5,
            "bc": {"kind": "dirichlet", "value": 0.5},
            "initial": {"kind": "gaussian_bump", "center": 0.0, "width": 0.5,
                        "mass": 0.2},
            "output_times": {"count": 11},
            "cascade_levels": 4,
            "checks": ["cascade"],
        },
    ),
}


def list_presets():
    """Preset names with one-line descriptions, alphabetically."""
    return [(name, _PRESETS[name][0]) for name in sorted(_PRESETS)]


def preset_config(name: str) -> RunConfig:
    """Parse a named preset into a RunConfig."""
    if name not in _PRESETS:
        known = ", ".join(sorted(_PRESETS))
        raise ConfigError(f"unknown preset {name!r}; available: {known}")
    return parse_config(json.dumps(_PRESETS[name][1]))
