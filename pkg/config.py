"""
Scenario configuration: a single strict JSON document parsed into a ScenarioConfig.

Unknown keys are rejected and every problem found is reported together in one
ConfigValidationError. `to_dict()` re-emits the canonical document, so parse -> emit -> parse
gives back an equal config.
"""
import hashlib
import json
import math
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Tuple, Union

from errors import ConfigValidationError, DomainError
from models import (
    BoundsReading,
    CurvatureProfile,
    ModelKind,
    PhysicalConstants,
    ProfileKind,
    QuantumModel,
    ThermoParams,
)


# ============================================
# FIELD TABLES
# ============================================

# field -> (type tag, default); a default of REQUIRED means the key must be present
REQUIRED = object()

MODEL_FIELDS = {
    "kind": ("str", REQUIRED),
    "n": ("int", 2),
    "level_spacing": ("float", 1.0),
    "base_energy": ("float", 0.0),
    "tilt": ("float", 0.0),
    "gauge_rates": ("floats", None),
    "beta_coupling": ("float", 0.0),
    "cone_angle": ("float", math.pi / 2),
    "field_strength": ("float", 1.0),
}

PROFILE_FIELDS = {
    "kind": ("str", REQUIRED),
    "r_base": ("float", 0.0),
    "amplitude": ("float", 0.0),
    "rate": ("float", 0.0),
    "period": ("float", 1.0),
    "center": ("float", 0.0),
    "width": ("float", 1.0),
    "t_min": ("float?", None),
    "t_max": ("float?", None),
    "point": ("floats", None),
}

THERMO_FIELDS = {
    "beta": ("float?", None),
    "temperature": ("float?", None),
    "k_b": ("float", 1.0),
    "gamma_scale": ("float", 1.0),
}

CONSTANTS_FIELDS = {
    "G": ("float", 1.0),
    "c": ("float", 1.0),
    "hbar": ("float", 1.0),
    "k_b": ("float", 1.0),
    "planck_length": ("float", 1.0),
    "dimension": ("int", 4),
    "kappa": ("float?", None),
}

RUN_FIELDS = {
    "t0": ("float", 0.0),
    "t1": ("float", REQUIRED),
    "steps": ("int", REQUIRED),
    "j0": ("index", "auto"),
    "bounds": ("str", "u"),
    "fd_step": ("float?", None),
    "omega": ("float?", None),
    "gap_floor": ("float", 1e-9),
    "fidelity_threshold": ("float", 0.99),
    "path_samples": ("int", 201),
}

OUTPUT_FIELDS = {
    "dir": ("str", "out"),
    "format": ("str", "json"),
    "trajectory": ("bool", True),
    "curvature_path": ("bool", True),
}

SWEEP_FIELDS = {
    "parameter": ("str", REQUIRED),
    "values": ("floats", REQUIRED),
}

REDUCTION_FIELDS = {
    "n": ("int", REQUIRED),
    "L_start": ("bigint", 0),
    "count": ("int", REQUIRED),
    "stride": ("int", 1),
    "workers": ("int", 1),
    "sensitivity_L": ("bigint?", None),
    "radius": ("int", 5),
    "correspondence": ("str", "matched"),
    "samples": ("int", 50),
    "offset_multiple": ("int", 0),
    "seed": ("int", 0),
}

SECTIONS = {
    "model": MODEL_FIELDS,
    "profile": PROFILE_FIELDS,
    "thermo": THERMO_FIELDS,
    "constants": CONSTANTS_FIELDS,
    "run": RUN_FIELDS,
    "outputs": OUTPUT_FIELDS,
    "sweep": SWEEP_FIELDS,
    "reduction": REDUCTION_FIELDS,
}
OPTIONAL_SECTIONS = {"constants", "outputs", "sweep", "reduction"}
TOP_LEVEL_KEYS = {"name", *SECTIONS}

# sections whose float fields may be swept
SWEEPABLE_SECTIONS = ("model", "profile", "thermo", "constants", "run")

CORRESPONDENCE_MODES = ("matched", "independent", "none")
OUTPUT_FORMATS = ("json", "csv")


# ============================================
# SPEC DATACLASSES
# ============================================

@dataclass(frozen=True)
class RunSpec:
    t0: float
    t1: float
    steps: int
    j0: Union[int, str] = "auto"
    bounds: BoundsReading = BoundsReading.U
    fd_step: Optional[float] = None
    omega: Optional[float] = None
    gap_floor: float = 1e-9
    fidelity_threshold: float = 0.99
    path_samples: int = 201


@dataclass(frozen=True)
class OutputSpec:
    dir: str = "out"
    format: str = "json"
    trajectory: bool = True
    curvature_path: bool = True


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: Tuple[float, ...]


@dataclass(frozen=True)
class ReductionSpec:
    n: int
    count: int
    L_start: int = 0
    stride: int = 1
    workers: int = 1
    sensitivity_L: Optional[int] = None
    radius: int = 5
    correspondence: str = "matched"
    samples: int = 50
    offset_multiple: int = 0
    seed: int = 0


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    model: QuantumModel
    profile: CurvatureProfile
    thermo: ThermoParams
    constants: PhysicalConstants
    run: RunSpec
    outputs: OutputSpec
    sweep: Optional[SweepSpec] = None
    reduction: Optional[ReductionSpec] = None

    # ----- emission -----

    def to_dict(self) -> Dict[str, Any]:
        """Canonical JSON-ready document."""
        m, p, th, c = self.model, self.profile, self.thermo, self.constants
        document: Dict[str, Any] = {
            "name": self.name,
            "model": {
                "kind": m.kind.value,
                "n": m.n,
                "level_spacing": m.level_spacing,
                "base_energy": m.base_energy,
                "tilt": m.tilt,
                "gauge_rates": list(m.gauge_rates),
                "beta_coupling": m.beta_coupling,
                "cone_angle": m.cone_angle,
                "field_strength": m.field_strength,
            },
            "profile": {
                "kind": p.kind.value,
                "r_base": p.r_base,
                "amplitude": p.amplitude,
                "rate": p.rate,
                "period": p.period,
                "center": p.center,
                "width": p.width,
                "t_min": p.t_min if math.isfinite(p.t_min) else None,
                "t_max": p.t_max if math.isfinite(p.t_max) else None,
                "point": list(p.point),
            },
            "thermo": {"beta": th.beta, "k_b": th.k_b, "gamma_scale": th.gamma_scale},
            "constants": {
                "G": c.G,
                "c": c.c,
                "hbar": c.hbar,
                "k_b": c.k_b,
                "planck_length": c.planck_length,
                "dimension": c.dimension,
                "kappa": c.kappa_override,
            },
            "run": {
                "t0": self.run.t0,
                "t1": self.run.t1,
                "steps": self.run.steps,
                "j0": self.run.j0,
                "bounds": self.run.bounds.value,
                "fd_step": self.run.fd_step,
                "omega": self.run.omega,
                "gap_floor": self.run.gap_floor,
                "fidelity_threshold": self.run.fidelity_threshold,
                "path_samples": self.run.path_samples,
            },
            "outputs": {
                "dir": self.outputs.dir,
                "format": self.outputs.format,
                "trajectory": self.outputs.trajectory,
                "curvature_path": self.outputs.curvature_path,
            },
        }
        if self.sweep is not None:
            document["sweep"] = {
                "parameter": self.sweep.parameter,
                "values": list(self.sweep.values),
            }
        if self.reduction is not None:
            r = self.reduction
            document["reduction"] = {
                "n": r.n,
                "L_start": r.L_start,
                "count": r.count,
                "stride": r.stride,
                "workers": r.workers,
                "sensitivity_L": r.sensitivity_L,
                "radius": r.radius,
                "correspondence": r.correspondence,
                "samples": r.samples,
                "offset_multiple": r.offset_multiple,
                "seed": r.seed,
            }
        return document

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()

    # ----- derivation -----

    def with_override(self, parameter: str, value: float) -> "ScenarioConfig":
        """Copy with one dotted `section.key` float replaced, validated like a fresh parse."""
        section, _, key = parameter.partition(".")
        document = self.to_dict()
        if section == "thermo" and key == "temperature":
            document["thermo"].pop("beta")
        elif section not in document or key not in document[section]:
            raise ConfigValidationError([f"{parameter}: unknown parameter"])
        document[section][key] = value
        document.pop("sweep", None)
        return parse_config(document)

    def with_outputs(self, **changes) -> "ScenarioConfig":
        return replace(self, outputs=replace(self.outputs, **changes))


# ============================================
# PARSING
# ============================================

def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _coerce(tag: str, value: Any) -> Tuple[bool, Any]:
    """Return (ok, cleaned value) for one field of the given type tag."""
    if tag.endswith("?"):
        if value is None:
            return True, None
        tag = tag[:-1]
    if tag == "str":
        return isinstance(value, str), value
    if tag == "bool":
        return isinstance(value, bool), value
    if tag == "int":
        return isinstance(value, int) and not isinstance(value, bool), value
    if tag == "float":
        if not _is_number(value) or not math.isfinite(value):
            return False, value
        return True, float(value)
    if tag == "floats":
        if value is None:
            return True, None
        if not isinstance(value, list) or not all(
            _is_number(v) and math.isfinite(v) for v in value
        ):
            return False, value
        return True, tuple(float(v) for v in value)
    if tag == "bigint":
        # big scales may also be written as decimal strings
        if isinstance(value, str) and value.strip().isdigit():
            return True, int(value)
        return isinstance(value, int) and not isinstance(value, bool), value
    if tag == "index":
        if value == "auto":
            return True, value
        return isinstance(value, int) and not isinstance(value, bool), value
    raise KeyError(tag)


def _check_section(
    name: str, raw: Any, fields: Dict[str, Tuple[str, Any]], problems: List[str]
) -> Dict[str, Any]:
    if not isinstance(raw, dict):
        problems.append(f"{name}: expected an object")
        return {}
    cleaned: Dict[str, Any] = {}
    for key in sorted(set(raw) - set(fields)):
        problems.append(f"{name}.{key}: unknown key")
    for key, (tag, default) in fields.items():
        if key not in raw:
            if default is REQUIRED:
                problems.append(f"{name}.{key}: missing required key")
            else:
                cleaned[key] = default
            continue
        ok, value = _coerce(tag, raw[key])
        if ok:
            cleaned[key] = value
        else:
            problems.append(f"{name}.{key}: expected {tag}, got {raw[key]!r}")
    return cleaned


def _build(label: str, problems: List[str], factory, *args, **kwargs):
    try:
        return factory(*args, **kwargs)
    except DomainError as exc:
        problems.append(f"{label}: {exc}")
    except ValueError as exc:
        problems.append(f"{label}: {exc}")
    return None


def _enum(label: str, enum_cls, value, problems: List[str]):
    try:
        return enum_cls(value)
    except ValueError:
        choices = ", ".join(member.value for member in enum_cls)
        problems.append(f"{label}: {value!r} is not one of {choices}")
        return None


def parse_config(document: Any) -> ScenarioConfig:
    """Validate a decoded JSON document and build a ScenarioConfig."""
    problems: List[str] = []
    if not isinstance(document, dict):
        raise ConfigValidationError(["document: expected a JSON object"])

    for key in sorted(set(document) - TOP_LEVEL_KEYS):
        problems.append(f"{key}: unknown key")
    name = document.get("name", "scenario")
    if not isinstance(name, str) or not name:
        problems.append("name: expected a non-empty string")

    sections: Dict[str, Dict[str, Any]] = {}
    for section, fields in SECTIONS.items():
        if section not in document:
            if section not in OPTIONAL_SECTIONS:
                problems.append(f"{section}: missing required section")
            continue
        sections[section] = _check_section(section, document[section], fields, problems)

    model = _parse_model(sections.get("model"), problems)
    profile = _parse_profile(sections.get("profile"), problems)
    thermo = _parse_thermo(sections.get("thermo"), problems)
    constants = _parse_constants(sections.get("constants", _defaults(CONSTANTS_FIELDS)), problems)
    run = _parse_run(sections.get("run"), model, problems)
    outputs = _parse_outputs(sections.get("outputs", _defaults(OUTPUT_FIELDS)), problems)
    sweep = _parse_sweep(sections.get("sweep"), problems) if "sweep" in document else None
    reduction = (
        _parse_reduction(sections.get("reduction"), problems) if "reduction" in document else None
    )

    if problems:
        raise ConfigValidationError(problems)
    return ScenarioConfig(
        name=name,
        model=model,
        profile=profile,
        thermo=thermo,
        constants=constants,
        run=run,
        outputs=outputs,
        sweep=sweep,
        reduction=reduction,
    )


def load_config(path: str) -> ScenarioConfig:
    """Read a UTF-8 JSON scenario file."""
    try:
        with open(path, encoding="utf-8") as handle:
            document = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ConfigValidationError([f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})"])
    except OSError as exc:
        raise ConfigValidationError([f"{path}: cannot read ({exc.strerror})"])
    return parse_config(document)


def _complete(raw: Optional[Dict[str, Any]], fields: Dict[str, Tuple[str, Any]]) -> bool:
    """True when every field survived type checking (problems were recorded otherwise)."""
    return raw is not None and set(raw) == set(fields)


def _defaults(fields: Dict[str, Tuple[str, Any]]) -> Dict[str, Any]:
    return {key: default for key, (_, default) in fields.items()}


def _parse_model(raw: Optional[Dict[str, Any]], problems: List[str]) -> Optional[QuantumModel]:
    if not _complete(raw, MODEL_FIELDS):
        return None
    kind = _enum("model.kind", ModelKind, raw["kind"], problems)
    if kind is None:
        return None
    return _build(
        "model",
        problems,
        QuantumModel,
        kind=kind,
        n=raw["n"],
        level_spacing=raw["level_spacing"],
        base_energy=raw["base_energy"],
        tilt=raw["tilt"],
        gauge_rates=raw["gauge_rates"] or (),
        beta_coupling=raw["beta_coupling"],
        cone_angle=raw["cone_angle"],
        field_strength=raw["field_strength"],
    )


def _parse_profile(
    raw: Optional[Dict[str, Any]], problems: List[str]
) -> Optional[CurvatureProfile]:
    if not _complete(raw, PROFILE_FIELDS):
        return None
    kind = _enum("profile.kind", ProfileKind, raw["kind"], problems)
    if kind is None:
        return None
    return _build(
        "profile",
        problems,
        CurvatureProfile,
        kind=kind,
        r_base=raw["r_base"],
        amplitude=raw["amplitude"],
        rate=raw["rate"],
        period=raw["period"],
        center=raw["center"],
        width=raw["width"],
        t_min=-math.inf if raw["t_min"] is None else raw["t_min"],
        t_max=math.inf if raw["t_max"] is None else raw["t_max"],
        point=raw["point"] or (0.0,),
    )


def _parse_thermo(raw: Optional[Dict[str, Any]], problems: List[str]) -> Optional[ThermoParams]:
    if not _complete(raw, THERMO_FIELDS):
        return None
    beta, temperature = raw.get("beta"), raw.get("temperature")
    if (beta is None) == (temperature is None):
        problems.append("thermo: give exactly one of beta or temperature")
        return None
    if beta is not None:
        return _build(
            "thermo", problems, ThermoParams,
            beta=beta, k_b=raw["k_b"], gamma_scale=raw["gamma_scale"],
        )
    return _build(
        "thermo", problems, ThermoParams.from_temperature,
        temperature, k_b=raw["k_b"], gamma_scale=raw["gamma_scale"],
    )


def _parse_constants(raw: Dict[str, Any], problems: List[str]) -> Optional[PhysicalConstants]:
    if not _complete(raw, CONSTANTS_FIELDS):
        return None
    return _build(
        "constants",
        problems,
        PhysicalConstants,
        G=raw["G"],
        c=raw["c"],
        hbar=raw["hbar"],
        k_b=raw["k_b"],
        planck_length=raw["planck_length"],
        dimension=raw["dimension"],
        kappa_override=raw["kappa"],
    )


def _parse_run(
    raw: Optional[Dict[str, Any]], model: Optional[QuantumModel], problems: List[str]
) -> Optional[RunSpec]:
    if not _complete(raw, RUN_FIELDS):
        return None
    bounds = _enum("run.bounds", BoundsReading, raw["bounds"], problems)
    if raw["t1"] < raw["t0"]:
        problems.append(f"run.t1: must be >= t0 ({raw['t0']}), got {raw['t1']}")
    if raw["steps"] < 10:
        problems.append(f"run.steps: must be >= 10, got {raw['steps']}")
    j0 = raw["j0"]
    if j0 != "auto" and model is not None and not 0 <= j0 < model.n:
        problems.append(f"run.j0: index {j0} outside [0, {model.n})")
    if raw["fd_step"] is not None and raw["fd_step"] <= 0:
        problems.append("run.fd_step: must be positive")
    if raw["gap_floor"] <= 0:
        problems.append("run.gap_floor: must be positive")
    if not 0 < raw["fidelity_threshold"] <= 1:
        problems.append("run.fidelity_threshold: must lie in (0, 1]")
    if raw["path_samples"] < 2:
        problems.append("run.path_samples: must be >= 2")
    if bounds is None:
        return None
    return RunSpec(
        t0=raw["t0"],
        t1=raw["t1"],
        steps=raw["steps"],
        j0=j0,
        bounds=bounds,
        fd_step=raw["fd_step"],
        omega=raw["omega"],
        gap_floor=raw["gap_floor"],
        fidelity_threshold=raw["fidelity_threshold"],
        path_samples=raw["path_samples"],
    )


def _parse_outputs(raw: Dict[str, Any], problems: List[str]) -> Optional[OutputSpec]:
    if not _complete(raw, OUTPUT_FIELDS):
        return None
    if raw.get("format") not in OUTPUT_FORMATS:
        problems.append(f"outputs.format: {raw.get('format')!r} is not one of json, csv")
    if not raw.get("dir"):
        problems.append("outputs.dir: must be a non-empty path")
    return OutputSpec(
        dir=raw.get("dir") or "out",
        format=raw.get("format", "json"),
        trajectory=raw.get("trajectory", True),
        curvature_path=raw.get("curvature_path", True),
    )


def _parse_sweep(raw: Optional[Dict[str, Any]], problems: List[str]) -> Optional[SweepSpec]:
    if not _complete(raw, SWEEP_FIELDS):
        return None
    parameter, values = raw["parameter"], raw["values"] or ()
    section, _, key = parameter.partition(".")
    fields = SECTIONS.get(section, {}) if section in SWEEPABLE_SECTIONS else {}
    if key not in fields or fields[key][0] not in ("float", "float?"):
        problems.append(f"sweep.parameter: {parameter!r} is not a sweepable numeric key")
    if len(values) < 2:
        problems.append(f"sweep.values: need at least 2 finite values, got {len(values)}")
    return SweepSpec(parameter=parameter, values=tuple(values))


def _parse_reduction(
    raw: Optional[Dict[str, Any]], problems: List[str]
) -> Optional[ReductionSpec]:
    if not _complete(raw, REDUCTION_FIELDS):
        return None
    if raw["n"] < 1:
        problems.append(f"reduction.n: must be >= 1, got {raw['n']}")
    if raw["L_start"] < 0:
        problems.append("reduction.L_start: must be >= 0")
    if raw["sensitivity_L"] is not None and raw["sensitivity_L"] < 0:
        problems.append("reduction.sensitivity_L: must be >= 0")
    if raw["count"] < 10 * max(raw["n"], 1):
        problems.append(f"reduction.count: must be >= 10·n = {10 * raw['n']}")
    for key in ("stride", "workers", "radius", "samples"):
        if raw[key] < 1:
            problems.append(f"reduction.{key}: must be >= 1")
    if raw["offset_multiple"] < 0:
        problems.append("reduction.offset_multiple: must be >= 0")
    if raw["correspondence"] not in CORRESPONDENCE_MODES:
        problems.append(
            f"reduction.correspondence: {raw['correspondence']!r} is not one of "
            + ", ".join(CORRESPONDENCE_MODES)
        )
    return ReductionSpec(**raw)
