"""JSON formats for channel specs, auxiliary laws and simulation configs.

Spec schema::

    {
      "name": "optional label",
      "alphabets": {"A": ["0"], "X": ["0", "1"], "S1": [...], "S2": [...], "Y1": [...], "Y2": [...]},
      "state_kernel_order": [["A"], ["S1", "S2"]],
      "state_kernel": <nested array, row-major in the declared order>,
      "main_kernel_order": [["S1", "S2", "X"], ["Y1", "Y2"]],
      "main_kernel": <nested array>,
      "distortion": {"1": {"estimates": [...], "d": [[...]]}, "2": "hamming"},
      "d_max": 1.0
    }

Kernel orders may list the axes in any permutation; arrays are transposed
to the canonical layout on load. A missing alphabet defaults to the single
symbol ``"0"``. A distortion entry may carry its own ``d_max``; otherwise
the top-level value applies.
"""

from dataclasses import asdict, dataclass, field
import json
from pathlib import Path
import time
from typing import Optional

import numpy as np

from ._validation import UsageError
from .channel import ROLES, AuxDist, ChannelSpec, DistortionSpec
from .prob import Alphabet

__all__ = [
    "FormatError",
    "spec_from_dict",
    "spec_to_dict",
    "load_spec",
    "dump_spec",
    "aux_from_dict",
    "aux_to_dict",
    "load_aux",
    "dump_aux",
    "load_sim_config",
    "sim_config_to_dict",
    "to_jsonable",
    "dumps",
    "RunManifest",
]

STATE_ORDER = (("A",), ("S1", "S2"))
MAIN_ORDER = (("S1", "S2", "X"), ("Y1", "Y2"))


class FormatError(UsageError):
    """Unreadable or structurally malformed input file."""


def _array(value, what):
    try:
        arr = np.array(value, dtype=float)
    except (ValueError, TypeError) as exc:
        raise FormatError(f"{what}: not a rectangular numeric array ({exc})") from None
    return arr


def _axes(order, canonical, what):
    try:
        flat = [str(a) for part in order for a in part]
    except TypeError:
        raise FormatError(f"{what}: order must be a list of two axis lists") from None
    want = [a for part in canonical for a in part]
    if sorted(flat) != sorted(want) or len(flat) != len(set(flat)):
        raise FormatError(f"{what}: order must name exactly the axes {want}, got {flat}")
    if [set(p) for p in order] != [set(p) for p in canonical]:
        raise FormatError(f"{what}: conditioning and outcome axes must be {canonical}")
    return flat, want


def _kernel(doc, key, canonical):
    if key not in doc:
        raise FormatError(f"missing field {key!r}")
    arr = _array(doc[key], key)
    declared, want = _axes(doc.get(f"{key}_order", [list(p) for p in canonical]), canonical, f"{key}_order")
    if arr.ndim != len(declared):
        raise FormatError(f"{key}: expected {len(declared)} dimensions, got {arr.ndim}")
    return arr.transpose([declared.index(a) for a in want])


def _distortion(entry, state, d_max, which):
    if entry is None or entry == "hamming":
        dist = DistortionSpec.hamming(state)
        return DistortionSpec(dist.state, dist.estimate, dist.d, d_max if d_max is not None else 1.0)
    if not isinstance(entry, dict) or "d" not in entry:
        raise FormatError(f"distortion {which}: expected 'hamming' or an object with 'd'")
    d = _array(entry["d"], f"distortion {which}")
    if d.ndim != 2:
        raise FormatError(f"distortion {which}: 'd' must be a matrix")
    symbols = entry.get("estimates") or [str(i) for i in range(d.shape[1])]
    estimate = Alphabet(state.name + "_hat", [str(s) for s in symbols])
    local = entry.get("d_max", d_max)
    if local is None:
        raise FormatError(f"distortion {which}: d_max is required")
    return DistortionSpec(state, estimate, d, float(local))


def spec_from_dict(doc) -> ChannelSpec:
    """Build a :class:`ChannelSpec` from the JSON schema above.

    Structural problems raise :class:`FormatError`; numeric problems
    (row sums, negative entries, sizes) are left to ``validate``.
    """
    if not isinstance(doc, dict):
        raise FormatError("spec must be a JSON object")
    names = doc.get("alphabets", {})
    if not isinstance(names, dict):
        raise FormatError("'alphabets' must be an object")
    alph = {}
    for role in ROLES:
        symbols = names.get(role, ["0"])
        if not isinstance(symbols, list) or not symbols:
            raise FormatError(f"alphabet {role} must be a non-empty array")
        try:
            alph[role] = Alphabet(role, [str(s) for s in symbols])
        except ValueError as exc:
            raise FormatError(f"alphabet {role}: {exc}") from None
    d_max = doc.get("d_max")
    dist = doc.get("distortion", {})
    if not isinstance(dist, dict):
        raise FormatError("'distortion' must be an object")
    return ChannelSpec(
        *(alph[r] for r in ROLES),
        _kernel(doc, "state_kernel", STATE_ORDER),
        _kernel(doc, "main_kernel", MAIN_ORDER),
        _distortion(dist.get("1"), alph["S1"], d_max, 1),
        _distortion(dist.get("2"), alph["S2"], d_max, 2),
        name=str(doc.get("name", "")),
    )


def spec_to_dict(spec: ChannelSpec):
    def dist(d: DistortionSpec):
        return {"estimates": list(d.estimate.symbols), "d": d.d.tolist(), "d_max": d.d_max}

    return {
        "name": spec.name,
        "alphabets": {r: list(getattr(spec, r).symbols) for r in ROLES},
        "state_kernel_order": [list(p) for p in STATE_ORDER],
        "state_kernel": spec.state_kernel.tolist(),
        "main_kernel_order": [list(p) for p in MAIN_ORDER],
        "main_kernel": spec.main_kernel.tolist(),
        "distortion": {"1": dist(spec.dist1), "2": dist(spec.dist2)},
        "d_max": spec.d_max,
    }


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None


def load_spec(path) -> ChannelSpec:
    return spec_from_dict(_read_json(path))


def dump_spec(spec: ChannelSpec, path):
    Path(path).write_text(dumps(spec_to_dict(spec)), encoding="utf-8")


def aux_from_dict(spec: ChannelSpec, doc) -> AuxDist:
    """``{"V": [symbols], "order": ["V", "A", "X"], "p_vax": nested}``; ``order`` is optional."""
    if not isinstance(doc, dict) or "p_vax" not in doc:
        raise FormatError("aux must be an object with 'p_vax'")
    arr = _array(doc["p_vax"], "p_vax")
    order = [str(a) for a in doc.get("order", ["V", "A", "X"])]
    if sorted(order) != ["A", "V", "X"] or arr.ndim != 3:
        raise FormatError("p_vax must be 3-D over a permutation of (V, A, X)")
    arr = arr.transpose([order.index(a) for a in ("V", "A", "X")])
    symbols = doc.get("V") or [str(i) for i in range(arr.shape[0])]
    if len(symbols) != arr.shape[0]:
        raise FormatError("length of 'V' does not match p_vax")
    if arr.shape[1:] != (spec.A.size, spec.X.size):
        raise FormatError(f"p_vax (A, X) axes {arr.shape[1:]} do not match the channel spec")
    return AuxDist.from_mass(spec, arr, V=Alphabet("V", [str(s) for s in symbols]))


def aux_to_dict(aux: AuxDist):
    return {"V": list(aux.V.symbols), "order": ["V", "A", "X"], "p_vax": aux.mass.tolist()}


def load_aux(spec: ChannelSpec, path) -> AuxDist:
    return aux_from_dict(spec, _read_json(path))


def dump_aux(aux: AuxDist, path):
    Path(path).write_text(dumps(aux_to_dict(aux)), encoding="utf-8")


def _inline_or_path(value, base, what):
    if isinstance(value, str):
        p = Path(value)
        return _read_json(p if p.is_absolute() else base / p)
    if isinstance(value, dict):
        return value
    raise FormatError(f"'{what}' must be an object or a path")


def load_sim_config(path, **overrides):
    """Read a simulation config.

    Fields: ``spec`` and ``aux`` (inline objects or paths relative to the
    config file), ``n``, ``bins`` or ``rates``, ``trials``, ``master_seed``,
    ``exact_secrecy``, ``f_mode``. Non-``None`` keyword overrides replace
    file values.
    """
    from .osrb import SimConfig

    path = Path(path)
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise FormatError("sim config must be a JSON object")
    doc.update({k: v for k, v in overrides.items() if v is not None})
    spec = spec_from_dict(_inline_or_path(doc.get("spec"), path.parent, "spec"))
    aux = aux_from_dict(spec, _inline_or_path(doc.get("aux"), path.parent, "aux"))
    if "n" not in doc:
        raise FormatError("sim config needs 'n'")
    kwargs = {
        k: doc[k] for k in ("trials", "master_seed", "exact_secrecy", "f_mode", "n_jobs") if k in doc
    }
    if "bins" in doc:
        return SimConfig(spec, aux, int(doc["n"]), tuple(int(b) for b in doc["bins"]), **kwargs)
    if "rates" in doc:
        return SimConfig.from_rates(spec, aux, int(doc["n"]), doc["rates"], **kwargs)
    raise FormatError("sim config needs 'bins' or 'rates'")


def sim_config_to_dict(config):
    return {
        "spec": spec_to_dict(config.spec),
        "aux": aux_to_dict(config.aux),
        "n": config.n,
        "bins": list(config.bins),
        "trials": config.trials,
        "master_seed": config.master_seed,
        "exact_secrecy": config.exact_secrecy,
        "f_mode": config.f_mode,
    }


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and tuples to plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def dumps(obj):
    """Deterministic JSON text: sorted keys, shortest round-trip floats."""
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


@dataclass
class RunManifest:
    """Provenance block written at the head of every output file."""

    command: str
    inputs: list
    params: dict
    output: Optional[str] = None
    seed: Optional[int] = None
    version: str = ""
    wall_time: float = 0.0
    _start: float = field(default_factory=time.perf_counter, repr=False)

    def finish(self):
        self.wall_time = round(time.perf_counter() - self._start, 6)
        return self

    def as_dict(self):
        d = asdict(self)
        d.pop("_start")
        return d
