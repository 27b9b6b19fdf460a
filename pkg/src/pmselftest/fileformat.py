"""JSON scenario and result files.

Complex entries are stored as ``[re, im]`` pairs and floats with ``repr``
precision; non-finite floats become the strings ``"inf"``, ``"-inf"`` and
``"nan"``. Output is key-sorted so equal content gives byte-identical files.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .config import Tolerances
from .qmat import SymOp

SCENARIO_FORMAT = "pmselftest-scenario"
RESULT_FORMAT = "pmselftest-result"


class ScenarioError(ValueError):
    """Malformed scenario file; ``field`` names the offending entry."""

    def __init__(self, field_path: str, message: str):
        super().__init__(f"{field_path}: {message}")
        self.field = field_path


# --------------------------------------------------------------------------
# encoding


def _float(x: float) -> float | str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def encode(obj: Any) -> Any:
    """Convert numbers, arrays, dataclasses and containers to JSON-ready values."""
    if isinstance(obj, SymOp):
        return {"unitary": encode(obj.unitary), "conjugate": obj.conjugate}
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {f.name: encode(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        for name in ("feasible", "passed"):
            if hasattr(type(obj), name) and isinstance(getattr(type(obj), name), property):
                out[name] = encode(getattr(obj, name))
        return out
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return encode_complex(obj)
        return [encode(v) for v in obj.tolist()] if obj.ndim else encode(obj.item())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_float(obj.real), _float(obj.imag)]
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    return obj


def encode_complex(a) -> Any:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return [_float(a.real), _float(a.imag)]
    return [encode_complex(v) for v in a]


def _num(x: Any, where: str) -> float:
    if isinstance(x, str) and x in ("inf", "-inf", "nan"):
        return float(x)
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ScenarioError(where, f"expected a number, got {x!r}")
    return float(x)


def decode_complex(data: Any, where: str) -> np.ndarray:
    """Inverse of :func:`encode_complex`; a leaf is a ``[re, im]`` pair."""
    if not isinstance(data, list):
        raise ScenarioError(where, "expected a list of [re, im] pairs")
    if len(data) == 2 and all(not isinstance(v, list) for v in data):
        return np.array(complex(_num(data[0], where), _num(data[1], where)))
    if not data:
        raise ScenarioError(where, "empty array")
    parts = [decode_complex(v, f"{where}[{i}]") for i, v in enumerate(data)]
    if len({p.shape for p in parts}) != 1:
        raise ScenarioError(where, "ragged array")
    return np.stack(parts)


def dumps(obj: Any) -> str:
    return json.dumps(encode(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def digest(obj: Any) -> str:
    return hashlib.sha256(json.dumps(encode(obj), sort_keys=True, separators=(",", ":")).encode()).hexdigest()


# --------------------------------------------------------------------------
# scenario files


@dataclass
class Scenario:
    dimension: int
    states: list[np.ndarray]
    weights: list[float] | None = None
    reference: list[np.ndarray] | None = None
    n_targets: int | None = None
    povms: list[list[np.ndarray]] | None = None
    behavior: np.ndarray | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    def tolerances(self) -> Tolerances:
        overrides = self.metadata.get("tolerances", {})
        try:
            return dataclasses.replace(Tolerances(), **{k: float(v) for k, v in overrides.items()})
        except TypeError as exc:
            raise ScenarioError("metadata.tolerances", str(exc)) from None

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "format": SCENARIO_FORMAT,
            "dimension": self.dimension,
            "states": [encode_complex(s) for s in self.states],
            "metadata": encode(self.metadata),
        }
        if self.weights is not None:
            out["weights"] = encode(list(self.weights))
        if self.reference is not None:
            out["reference"] = [encode_complex(s) for s in self.reference]
        if self.n_targets is not None:
            out["n_targets"] = self.n_targets
        if self.povms is not None:
            out["povms"] = [[encode_complex(m) for m in p] for p in self.povms]
        if self.behavior is not None:
            out["behavior"] = encode(np.asarray(self.behavior, dtype=float))
        return out


def _state_list(data: Any, where: str, dim: int) -> list[np.ndarray]:
    if not isinstance(data, list) or not data:
        raise ScenarioError(where, "expected a nonempty list of states")
    out = []
    for i, s in enumerate(data):
        a = decode_complex(s, f"{where}[{i}]")
        if a.shape not in ((dim,), (dim, dim)):
            raise ScenarioError(f"{where}[{i}]", f"shape {a.shape} does not match dimension {dim}")
        out.append(a)
    return out


def scenario_from_json(data: Any) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("<root>", "expected a JSON object")
    if data.get("format", SCENARIO_FORMAT) != SCENARIO_FORMAT:
        raise ScenarioError("format", f"expected {SCENARIO_FORMAT!r}")
    dim = data.get("dimension")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 2:
        raise ScenarioError("dimension", "expected an integer >= 2")
    if "states" not in data:
        raise ScenarioError("states", "missing")
    states = _state_list(data["states"], "states", dim)
    weights = None
    if data.get("weights") is not None:
        w = data["weights"]
        if not isinstance(w, list) or len(w) != len(states):
            raise ScenarioError("weights", f"expected {len(states)} numbers")
        weights = [_num(v, f"weights[{i}]") for i, v in enumerate(w)]
    reference = _state_list(data["reference"], "reference", dim) if data.get("reference") is not None else None
    n_targets = data.get("n_targets")
    if n_targets is not None and (not isinstance(n_targets, int) or n_targets < 0):
        raise ScenarioError("n_targets", "expected a nonnegative integer")
    povms = None
    if data.get("povms") is not None:
        if not isinstance(data["povms"], list):
            raise ScenarioError("povms", "expected a list of POVMs")
        povms = []
        for j, p in enumerate(data["povms"]):
            if not isinstance(p, list) or not p:
                raise ScenarioError(f"povms[{j}]", "expected a nonempty list of matrices")
            elems = []
            for b, m in enumerate(p):
                a = decode_complex(m, f"povms[{j}][{b}]")
                if a.shape != (dim, dim):
                    raise ScenarioError(f"povms[{j}][{b}]", f"expected a {dim}x{dim} matrix")
                elems.append(a)
            povms.append(elems)
    behavior = None
    if data.get("behavior") is not None:
        try:
            behavior = np.array([[[_num(v, "behavior") for v in row] for row in plane] for plane in data["behavior"]])
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError("behavior", "expected an X x Y x B array of numbers") from None
    metadata = data.get("metadata", {})
    if not isinstance(metadata, dict):
        raise ScenarioError("metadata", "expected an object")
    scen = Scenario(dim, states, weights, reference, n_targets, povms, behavior, metadata)
    scen.tolerances()
    return scen


def read_scenario(path: str | Path) -> Scenario:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno}", exc.msg) from None
    return scenario_from_json(data)


def write_scenario(path: str | Path, scen: Scenario) -> None:
    Path(path).write_text(dumps(scen.to_json()))


# --------------------------------------------------------------------------
# result files


def result_document(command: str, inputs: Any, results: Any) -> dict[str, Any]:
    return {"format": RESULT_FORMAT, "command": command, "inputs_digest": digest(inputs), "results": encode(results)}


def write_result(path: str | Path, doc: dict[str, Any]) -> None:
    Path(path).write_text(dumps(doc))


def read_result(path: str | Path) -> dict[str, Any]:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != RESULT_FORMAT:
        raise ScenarioError("format", f"expected {RESULT_FORMAT!r}")
    return doc
