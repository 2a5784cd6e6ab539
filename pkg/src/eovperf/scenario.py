"""Scenario files: one pipeline deployment described as a YAML document.

Every dimensional field carries its unit in the key name, e.g. ``alpha_ms``,
``beta_mbps`` or ``tx_size_kb``; any of the listed suffixes is accepted and the
value is converted once, at load time, to seconds, bits and bits/second.
1 KB is 8192 bits and 1 Mbps is 10**6 bit/s.

A ``preset`` supplies network, transaction size and disk-kind defaults for the
two reference clusters; service rates are never preset and must be given.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import yaml

from .comm import VARIANTS, LinkParams
from .errors import ParseError, ValidationError
from .phases import DiskParams, ExecuteParams, OrderParams, ValidateParams
from .queueing import VariationPair

UNITS = {
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6},
    "size": {"bits": 1.0, "bytes": 8.0, "kb": 8192.0, "mb": 8192.0 * 1024},
    "bandwidth": {"bps": 1.0, "kbps": 1e3, "mbps": 1e6, "gbps": 1e9},
}
# Units used when writing a scenario back out; they make the round trip exact.
CANONICAL = {"time": "s", "size": "bits", "bandwidth": "bps"}

# field -> (kind, required, default)
SCHEMA: dict[str, dict[str, tuple[str, bool, object]]] = {
    "workload": {
        "clients": ("int", True, None),
        "rate_per_client": ("float", True, None),
        "tx_size": ("size", True, None),
    },
    "execute": {
        "cores": ("int", True, None),
        "mu_core": ("float", True, None),
        "alpha": ("time", True, None),
        "beta": ("bandwidth", True, None),
        "alpha_back": ("time", False, None),
        "beta_back": ("bandwidth", False, None),
    },
    "order": {
        "osns": ("int", True, None),
        "mu_order": ("float", True, None),
        "batch_timeout": ("time", True, None),
        "batch_size": ("int", True, None),
        "alpha": ("time", True, None),
        "beta_c2l": ("bandwidth", True, None),
        "beta_l2f": ("bandwidth", True, None),
        "alpha_l2f": ("time", False, None),
        "cv_arrival": ("float", False, 1.0),
        "cv_service": ("float", False, 0.0),
    },
    "validate": {
        "disk": ("str", False, None),
        "iops": ("float", False, None),
        "seek": ("time", False, 0.0),
        "write_per_io": ("size", False, None),
        "mu": ("float", False, None),
        "alpha": ("time", True, None),
        "beta": ("bandwidth", True, None),
        "cv_arrival": ("float", False, 1.0),
        "cv_service": ("float", False, 0.0),
    },
}

TOP_LEVEL = {"name", "preset", "comm_variant", "sweep", *SCHEMA}

_NETWORK = {"alpha_ms": 10}
PRESETS: dict[str, dict] = {
    "local-1gbps": {
        "workload": {"tx_size_kb": 3},
        "execute": {**_NETWORK, "beta_gbps": 1},
        "order": {**_NETWORK, "beta_c2l_gbps": 1, "beta_l2f_gbps": 1},
        "validate": {**_NETWORK, "beta_gbps": 1, "disk": "hdd"},
    },
    "cloud-10gbps": {
        "workload": {"tx_size_kb": 3},
        "execute": {**_NETWORK, "beta_gbps": 10},
        "order": {**_NETWORK, "beta_c2l_gbps": 10, "beta_l2f_gbps": 10},
        "validate": {**_NETWORK, "beta_gbps": 10, "disk": "ssd"},
    },
}

SWEEP_ALIASES = {
    "c": "c",
    "cores": "c",
    "k": "k",
    "osns": "k",
    "lambda": "lambda",
    "load": "lambda",
    "batch_size": "batch_size",
}


@dataclass(frozen=True)
class Workload:
    """``clients`` Poisson clients each submitting ``rate_per_client`` tx/s of ``m`` bits."""

    clients: int
    rate_per_client: float
    m: float

    def __post_init__(self):
        if int(self.clients) != self.clients or self.clients < 1:
            raise ValueError(f"clients must be a positive integer, got {self.clients!r}")
        if not (math.isfinite(self.rate_per_client) and self.rate_per_client > 0):
            raise ValueError(f"rate_per_client must be > 0, got {self.rate_per_client!r}")
        if not self.m > 0:
            raise ValueError(f"tx_size must be > 0, got {self.m!r}")

    @property
    def offered_load(self) -> float:
        return self.clients * self.rate_per_client


@dataclass(frozen=True)
class Sweep:
    param: str
    values: tuple

    def __post_init__(self):
        if self.param not in ("c", "k", "lambda", "batch_size"):
            raise ValueError(f"cannot sweep {self.param!r}")
        if not self.values:
            raise ValueError("sweep needs at least one value")


@dataclass(frozen=True)
class ScenarioConfig:
    workload: Workload
    execute: ExecuteParams
    order: OrderParams
    validate: ValidateParams
    name: str = "scenario"
    preset: str | None = None
    comm_variant: str = "load"
    sweep: Sweep | None = None

    @property
    def offered_load(self) -> float:
        return self.workload.offered_load

    @property
    def m(self) -> float:
        return self.workload.m

    def with_param(self, param: str, value) -> ScenarioConfig:
        """Copy with one sweepable parameter changed (and no sweep attached)."""
        param = SWEEP_ALIASES.get(param, param)
        out = replace(self, sweep=None)
        if param == "c":
            return replace(out, execute=replace(self.execute, c=int(value)))
        if param == "k":
            return replace(out, order=replace(self.order, k=int(value)))
        if param == "batch_size":
            return replace(out, order=replace(self.order, batch_size=int(value)))
        if param == "lambda":
            rate = float(value) / self.workload.clients
            return replace(out, workload=replace(self.workload, rate_per_client=rate))
        raise ValueError(f"unknown sweep parameter {param!r}")

    @classmethod
    def from_dict(cls, data: dict, lines: dict | None = None) -> ScenarioConfig:
        return _build(data, lines or {})

    def to_dict(self) -> dict:
        return _to_dict(self)


# --- parsing -----------------------------------------------------------------


def _line_map(text: str) -> dict[tuple, int]:
    """Map key paths to 1-based line numbers."""
    out: dict[tuple, int] = {}

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                key = (*path, k.value)
                out[key] = k.start_mark.line + 1
                walk(v, key)

    root = yaml.compose(text)
    if root is not None:
        walk(root, ())
    return out


def _split_unit(key: str, kind: str) -> tuple[str, float] | None:
    for suffix, factor in UNITS[kind].items():
        if key.endswith("_" + suffix):
            return key[: -len(suffix) - 1], factor
    return None


def _section(name: str, raw: dict, lines: dict) -> dict:
    schema = SCHEMA[name]
    if not isinstance(raw, dict):
        raise ValidationError(f"section {name!r} must be a mapping", field=name)
    values: dict[str, object] = {}
    for key, value in raw.items():
        line = lines.get((name, key))
        base, factor, kind = key, 1.0, None
        if key in schema:
            kind = schema[key][0]
            if kind in UNITS:
                raise ParseError(f"{kind} field needs a unit suffix, e.g. {key}_{CANONICAL[kind]}", line, f"{name}.{key}")
        else:
            for fname, (fkind, _, _) in schema.items():
                if fkind in UNITS:
                    split = _split_unit(key, fkind)
                    if split and split[0] == fname:
                        base, factor, kind = fname, split[1], fkind
                        break
        if kind is None:
            raise ValidationError(f"unknown field {name}.{key}" + (f" (line {line})" if line else ""), field=f"{name}.{key}")
        if base in values:
            raise ValidationError(f"{name}.{base} given more than once", field=f"{name}.{base}")
        if kind == "str":
            values[base] = str(value).lower()
            continue
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"expected a number, got {value!r}", line, f"{name}.{key}")
        if kind == "int":
            if int(value) != value:
                raise ParseError(f"expected an integer, got {value!r}", line, f"{name}.{key}")
            values[base] = int(value)
        else:
            values[base] = float(value) * factor
    for fname, (_, required, default) in schema.items():
        if fname not in values:
            if required:
                raise ValidationError(f"missing required field {name}.{fname}", field=f"{name}.{fname}")
            values[fname] = default
    return values


def _merge(base: dict, over: dict) -> dict:
    """Deep-merge ``over`` onto ``base``; explicit keys replace any unit variant."""
    out = copy.deepcopy(base)
    for key, value in over.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            section = out[key]
            for k in value:
                for kind, units in UNITS.items():
                    for suffix in units:
                        if k.endswith("_" + suffix):
                            stem = k[: -len(suffix) - 1]
                            for other in list(section):
                                if other.startswith(stem + "_") and other[len(stem) + 1 :] in units:
                                    del section[other]
            section.update(value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _wrap(section: str, build):
    try:
        return build()
    except (ValidationError, ParseError):
        raise
    except (ValueError, TypeError) as exc:
        raise ValidationError(f"{section}: {exc}", field=section) from None


def _build(data: dict, lines: dict) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ParseError("scenario must be a mapping at top level")
    unknown = set(data) - TOP_LEVEL
    if unknown:
        raise ValidationError(f"unknown top-level field(s): {', '.join(sorted(unknown))}", field=sorted(unknown)[0])
    preset = data.get("preset")
    if preset is not None:
        if preset not in PRESETS:
            raise ValidationError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}", field="preset")
        data = _merge(PRESETS[preset], data)
    for name in SCHEMA:
        if name not in data:
            raise ValidationError(f"missing section {name!r}", field=name)

    wl = _section("workload", data["workload"], lines)
    ex = _section("execute", data["execute"], lines)
    od = _section("order", data["order"], lines)
    va = _section("validate", data["validate"], lines)
    m = wl["tx_size"]

    workload = _wrap("workload", lambda: Workload(wl["clients"], wl["rate_per_client"], m))

    def build_execute():
        back = None
        if ex["alpha_back"] is not None or ex["beta_back"] is not None:
            back = LinkParams(
                ex["alpha"] if ex["alpha_back"] is None else ex["alpha_back"],
                ex["beta"] if ex["beta_back"] is None else ex["beta_back"],
            )
        return ExecuteParams(ex["cores"], ex["mu_core"], LinkParams(ex["alpha"], ex["beta"]), m, link_back=back)

    def build_order():
        k = od["osns"]
        if k % 2 == 0:
            raise ValidationError(f"order.osns: k must be odd, got {k}", field="order.osns")
        alpha_l2f = od["alpha"] if od["alpha_l2f"] is None else od["alpha_l2f"]
        return OrderParams(
            k=k,
            mu_order=od["mu_order"],
            link_c2l=LinkParams(od["alpha"], od["beta_c2l"]),
            link_l2f=LinkParams(alpha_l2f, od["beta_l2f"], max(1, k - 1)),
            batch_timeout=od["batch_timeout"],
            batch_size=od["batch_size"],
            m=m,
            var=VariationPair(od["cv_arrival"], od["cv_service"]),
        )

    def build_validate():
        disk = None
        if va["disk"] is not None:
            for req in ("iops", "write_per_io"):
                if va[req] is None:
                    raise ValidationError(f"missing required field validate.{req} for a disk", field=f"validate.{req}")
            disk = DiskParams(va["disk"], va["iops"], va["write_per_io"], va["seek"])
        elif va["mu"] is None:
            raise ValidationError("missing required field validate.mu (or disk parameters)", field="validate.mu")
        return ValidateParams(
            link=LinkParams(va["alpha"], va["beta"]),
            m=m,
            disk=disk,
            var=VariationPair(va["cv_arrival"], va["cv_service"]),
            mu=va["mu"],
        )

    execute = _wrap("execute", build_execute)
    order = _wrap("order", build_order)
    validate = _wrap("validate", build_validate)

    variant = data.get("comm_variant", "load")
    if variant not in VARIANTS:
        raise ValidationError(f"comm_variant must be one of {VARIANTS}", field="comm_variant")

    sweep = None
    if data.get("sweep") is not None:
        raw = data["sweep"]
        if not isinstance(raw, dict) or "param" not in raw or "values" not in raw:
            raise ValidationError("sweep needs 'param' and 'values'", field="sweep")
        param = SWEEP_ALIASES.get(str(raw["param"]))
        if param is None:
            raise ValidationError(f"cannot sweep {raw['param']!r}; choose from c, k, lambda, batch_size", field="sweep.param")
        sweep = _wrap("sweep", lambda: Sweep(param, tuple(raw["values"])))

    return ScenarioConfig(
        workload=workload,
        execute=execute,
        order=order,
        validate=validate,
        name=str(data.get("name", "scenario")),
        preset=preset,
        comm_variant=variant,
        sweep=sweep,
    )


def parse_scenario(text: str) -> ScenarioConfig:
    try:
        data = yaml.safe_load(text)
        lines = _line_map(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ParseError(str(getattr(exc, "problem", exc)), line) from None
    return _build(data, lines)


def shipped_scenarios() -> list[str]:
    files = resources.files("eovperf") / "scenarios"
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".yaml"))


def load_scenario(path) -> ScenarioConfig:
    """Load a scenario file, or a shipped scenario by bare name (e.g. ``desk-default``)."""
    p = Path(path)
    if p.exists():
        return parse_scenario(p.read_text())
    shipped = resources.files("eovperf") / "scenarios" / f"{path}.yaml"
    if shipped.is_file():
        return parse_scenario(shipped.read_text())
    raise FileNotFoundError(f"no scenario file {path!r} (shipped: {', '.join(shipped_scenarios())})")


# --- writing -----------------------------------------------------------------


def _to_dict(s: ScenarioConfig) -> dict:
    ex, od, va = s.execute, s.order, s.validate
    out: dict = {"name": s.name}
    if s.preset is not None:
        out["preset"] = s.preset
    out["comm_variant"] = s.comm_variant
    out["workload"] = {
        "clients": s.workload.clients,
        "rate_per_client": s.workload.rate_per_client,
        "tx_size_bits": s.workload.m,
    }
    out["execute"] = {
        "cores": ex.c,
        "mu_core": ex.mu_core,
        "alpha_s": ex.link.alpha,
        "beta_bps": ex.link.beta,
    }
    if ex.link_back is not None:
        out["execute"]["alpha_back_s"] = ex.link_back.alpha
        out["execute"]["beta_back_bps"] = ex.link_back.beta
    out["order"] = {
        "osns": od.k,
        "mu_order": od.mu_order,
        "batch_timeout_s": od.batch_timeout,
        "batch_size": od.batch_size,
        "alpha_s": od.link_c2l.alpha,
        "beta_c2l_bps": od.link_c2l.beta,
        "beta_l2f_bps": od.link_l2f.beta,
        "alpha_l2f_s": od.link_l2f.alpha,
        "cv_arrival": od.var.cv_a,
        "cv_service": od.var.cv_s,
    }
    v = {"alpha_s": va.link.alpha, "beta_bps": va.link.beta, "cv_arrival": va.var.cv_a, "cv_service": va.var.cv_s}
    if va.disk is not None:
        v.update(disk=va.disk.kind, iops=va.disk.iops, seek_s=va.disk.seek, write_per_io_bits=va.disk.d)
    if va.mu is not None:
        v["mu"] = va.mu
    out["validate"] = v
    if s.sweep is not None:
        out["sweep"] = {"param": s.sweep.param, "values": list(s.sweep.values)}
    return out


def dump_scenario(s: ScenarioConfig) -> str:
    return yaml.safe_dump(_to_dict(s), sort_keys=False)


def write_scenario(s: ScenarioConfig, path) -> None:
    Path(path).write_text(dump_scenario(s))
