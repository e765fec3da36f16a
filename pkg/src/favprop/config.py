"""Experiment configuration: TOML in, validated :class:`ExperimentConfig` out.

A configuration names one or more ensembles and a list of metrics to run on
them::

    experiment_name = "demo"
    master_seed = 42
    trials = 1000
    m_values = [16, 64]

    [ensembles.main]
    L = 4
    K = 2
    gain_model = "iid-complex-gaussian"
    geometry = { kind = "uniform-linear", M = 16, spacing = 0.5 }

    [[metrics]]
    name = "fp"
    kind = "mean_z"
    ensemble = "main"
    checks = [{ type = "zero-mean" }]

Angles are radians; ``aoas_deg`` is accepted and converted on parsing.
Complex numbers are written as strings (``"1+2j"``) or ``[re, im]`` pairs.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import tomli
import tomli_w

from .channels import (COUNTEREXAMPLE, COUNTEREXAMPLE_COUPLED, FIXED_AOA, ChannelEnsemble,
                       UserFactor)
from .convergence import SyntheticZEnsemble
from .errors import ConfigurationError
from .geometry import ArrayGeometry

METRIC_KINDS = {
    # kind: allowed check types
    "mean_z": {"zero-mean", "equals", "decreasing", "slope-at-most"},
    "cross_term": {"equals", "slope-at-most", "decreasing"},
    "tail_prob": {"at-least", "equals"},
    "bound_rhs": {"imag-significant", "equals"},
    "cross_terms": {"diagonal-unit"},
    "normalization": {"passes"},
    "decomposition": {"consistent", "diag-zero-mean"},
    "counterexample_audit": {"violation"},
    "complex_ordering": {"lhs-nonreal"},
    "cosine": {"matches"},
}
SWEEP_KINDS = ("mean_z", "cross_term", "tail_prob", "bound_rhs")

_TOP_KEYS = {"experiment_name", "master_seed", "trials", "m_values", "eps",
             "ensembles", "metrics", "output", "description"}
_ENSEMBLE_KEYS = {"type", "L", "K", "gain_model", "coupling", "aoa_model", "aoas", "aoas_deg",
                  "variance", "path_factors", "user_factor", "shared_power", "gains",
                  "gain_distribution", "gain_scale", "geometry", "values"}


def parse_complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ValueError(f"complex pair must have two entries, got {x!r}")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, str):
        return complex(x.replace(" ", ""))
    return complex(x)


@dataclass
class ExperimentConfig:
    experiment_name: str
    master_seed: int
    trials: int
    ensembles: dict
    metrics: list
    m_values: list = field(default_factory=list)
    eps: list = field(default_factory=lambda: [0.5])
    output: dict = field(default_factory=dict)
    description: str = ""

    def to_dict(self) -> dict:
        out = {"experiment_name": self.experiment_name, "master_seed": self.master_seed,
               "trials": self.trials}
        if self.description:
            out["description"] = self.description
        if self.m_values:
            out["m_values"] = list(self.m_values)
        out["eps"] = list(self.eps)
        if self.output:
            out["output"] = dict(self.output)
        out["ensembles"] = self.ensembles
        out["metrics"] = self.metrics
        return out

    def digest(self) -> str:
        return hashlib.sha256(serialize_config(self).encode()).hexdigest()

    def build_ensemble(self, name: str):
        return build_ensemble(self.ensembles[name])


def serialize_config(config: ExperimentConfig) -> str:
    return tomli_w.dumps(config.to_dict())


def _geometry(spec: dict) -> ArrayGeometry:
    spec = dict(spec)
    kind = spec.pop("kind", "uniform-linear")
    M = spec.pop("M", spec.pop("element_count", None))
    spacing = spec.pop("spacing", 0.5)
    shape = spec.pop("shape", None)
    positions = spec.pop("positions", None)
    if spec:
        raise ConfigurationError(f"unknown geometry keys: {sorted(spec)}")
    if isinstance(spacing, list):
        spacing = tuple(float(s) for s in spacing)
    if M is None and shape is not None:
        M = int(shape[0]) * int(shape[1])
    if M is None and positions is not None:
        M = len(positions)
    if M is None:
        raise ConfigurationError("geometry needs M")
    return ArrayGeometry(
        kind=kind, element_count=M, spacing=spacing,
        shape=None if shape is None else tuple(int(v) for v in shape),
        positions=None if positions is None else tuple(tuple(float(c) for c in p)
                                                       for p in positions))


def build_ensemble(spec: dict):
    """Construct an ensemble object from its config table."""
    spec = dict(spec)
    if spec.get("type", "channel") == "synthetic":
        values = tuple(parse_complex(v) for v in spec.get("values", [1.0, -1.0]))
        return SyntheticZEnsemble(values, spec.get("name", "synthetic"), int(spec.get("K", 2)))
    geometry = _geometry(spec.get("geometry", {"M": 1}))
    aoas = spec.get("aoas")
    if aoas is None and "aoas_deg" in spec:
        aoas = [math.radians(a) for a in spec["aoas_deg"]]
    gain_model = spec.get("gain_model", "iid-complex-gaussian")
    coupling = spec.get("coupling",
                        COUNTEREXAMPLE_COUPLED if gain_model == COUNTEREXAMPLE else "independent")
    uf = spec.get("user_factor", {})
    if isinstance(uf, str):
        uf = {"kind": uf}
    user_factor = UserFactor(uf.get("kind", "complex-gaussian"), float(uf.get("scale", 1.0)),
                             parse_complex(uf.get("offset", 0)))
    pf = spec.get("path_factors")
    gains = spec.get("gains")
    return ChannelEnsemble(
        geometry=geometry,
        L=spec.get("L", 1),
        K=spec.get("K", 2),
        gain_model=gain_model,
        coupling=coupling,
        aoa_model=spec.get("aoa_model", FIXED_AOA if aoas is not None else "uniform"),
        aoas=None if aoas is None else tuple(float(a) for a in aoas),
        variance=float(spec.get("variance", 1.0)),
        path_factors=None if pf is None else tuple(parse_complex(a) for a in pf),
        user_factor=user_factor,
        shared_power=float(spec.get("shared_power", 1.0)),
        gains=None if gains is None else tuple(tuple(parse_complex(x) for x in row)
                                               for row in gains),
        gain_distribution=spec.get("gain_distribution", "complex-gaussian"),
        gain_scale=float(spec.get("gain_scale", 1.0)),
        name=spec.get("name", ""),
    )


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _validate_ensemble(name: str, spec, errors: list):
    path = f"ensembles.{name}"
    if not isinstance(spec, dict):
        errors.append((path, "must be a table"))
        return
    unknown = set(spec) - _ENSEMBLE_KEYS - {"name"}
    for key in sorted(unknown):
        errors.append((f"{path}.{key}", "unknown key"))
    if spec.get("type", "channel") not in ("channel", "synthetic"):
        errors.append((f"{path}.type", f"unknown ensemble type {spec.get('type')!r}"))
        return
    if spec.get("type") == "synthetic":
        try:
            build_ensemble(spec)
        except (ValueError, TypeError) as exc:
            errors.append((f"{path}.values", str(exc)))
        return
    try:
        _geometry(spec.get("geometry", {"M": 1}))
    except (ConfigurationError, ValueError, TypeError) as exc:
        errors.append((f"{path}.geometry", str(exc)))
        spec = dict(spec, geometry={"M": 1})
    try:
        build_ensemble(spec)
    except ConfigurationError as exc:
        if exc.errors:
            errors.extend((f"{path}.{p}", m) for p, m in exc.errors)
        else:
            errors.append((path, str(exc)))
    except (ValueError, TypeError) as exc:
        errors.append((path, str(exc)))


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate; every problem is reported, not just the first."""
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigurationError(f"malformed config: {exc}", [("<document>", str(exc))])
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> ExperimentConfig:
    errors: list[tuple[str, str]] = []
    for key in sorted(set(raw) - _TOP_KEYS):
        errors.append((key, "unknown key"))

    name = raw.get("experiment_name")
    if not isinstance(name, str) or not name:
        errors.append(("experiment_name", "missing or empty"))
    seed = raw.get("master_seed")
    if seed is None:
        errors.append(("master_seed", "missing (wall-clock seeding is not allowed)"))
    elif not _is_int(seed) or not 0 <= seed < 2 ** 64:
        errors.append(("master_seed", "must be a 64-bit unsigned integer"))
    trials = raw.get("trials")
    if not _is_int(trials) or trials < 2:
        errors.append(("trials", "must be an integer >= 2"))
    m_values = raw.get("m_values", [])
    if not isinstance(m_values, list) or not all(_is_int(m) and m >= 1 for m in m_values):
        errors.append(("m_values", "must be a list of positive integers"))
    elif any(b <= a for a, b in zip(m_values, m_values[1:])):
        errors.append(("m_values", "must be strictly increasing"))
    eps = raw.get("eps", [0.5])
    if not isinstance(eps, list) or not all(isinstance(e, (int, float)) and e > 0 for e in eps):
        errors.append(("eps", "must be a list of positive numbers"))

    ensembles = raw.get("ensembles", {})
    if not isinstance(ensembles, dict):
        errors.append(("ensembles", "must be a table of named ensembles"))
        ensembles = {}
    for ename, spec in ensembles.items():
        _validate_ensemble(ename, spec, errors)

    metrics = raw.get("metrics", [])
    if not isinstance(metrics, list) or not metrics:
        errors.append(("metrics", "at least one metric is required"))
        metrics = []
    seen = set()
    for n, metric in enumerate(metrics):
        path = f"metrics[{n}]"
        if not isinstance(metric, dict):
            errors.append((path, "must be a table"))
            continue
        mname = metric.get("name")
        if not isinstance(mname, str) or not mname:
            errors.append((f"{path}.name", "missing"))
        elif mname in seen:
            errors.append((f"{path}.name", f"duplicate metric name {mname!r}"))
        seen.add(mname)
        kind = metric.get("kind")
        if kind not in METRIC_KINDS:
            errors.append((f"{path}.kind", f"unknown metric kind {kind!r}"))
            continue
        if kind != "cosine":
            ens = metric.get("ensemble")
            if ens not in ensembles:
                errors.append((f"{path}.ensemble", f"unknown ensemble {ens!r}"))
        mt = metric.get("trials", trials)
        if not _is_int(mt) or mt < 2:
            errors.append((f"{path}.trials", "must be an integer >= 2"))
        mv = metric.get("m_values")
        if mv is not None and (not isinstance(mv, list) or not all(_is_int(m) and m >= 1 for m in mv)
                               or any(b <= a for a, b in zip(mv, mv[1:]))):
            errors.append((f"{path}.m_values", "must be strictly increasing positive integers"))
        if kind in SWEEP_KINDS and not (mv or m_values):
            errors.append((f"{path}.m_values", "sweep metrics need m_values"))
        for c, check in enumerate(metric.get("checks", [])):
            ctype = check.get("type") if isinstance(check, dict) else None
            if ctype not in METRIC_KINDS[kind]:
                errors.append((f"{path}.checks[{c}].type",
                               f"check {ctype!r} is not defined for metric kind {kind!r}"))
        if kind == "cosine":
            for c, case in enumerate(metric.get("cases", [])):
                if not isinstance(case, dict) or "a" not in case or "b" not in case:
                    errors.append((f"{path}.cases[{c}]", "needs vectors a and b"))

    if errors:
        summary = "; ".join(f"{p}: {m}" for p, m in errors)
        raise ConfigurationError(f"invalid config: {summary}", errors)
    return ExperimentConfig(
        experiment_name=name, master_seed=seed, trials=trials, ensembles=ensembles,
        metrics=metrics, m_values=list(m_values), eps=list(eps),
        output=dict(raw.get("output", {})), description=raw.get("description", ""))
