"""JSON helpers: complex numbers travel as [re, im] pairs."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np


def encode(obj):
    """Recursively convert numpy / complex values into JSON-friendly lists."""
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return encode(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def decode_complex(x):
    """Inverse of ``encode`` for (nested lists of) [re, im] pairs."""
    a = np.asarray(x, dtype=float)
    if a.shape and a.shape[-1] == 2:
        return a[..., 0] + 1j * a[..., 1]
    raise ValueError("expected trailing [re, im] pairs")


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(encode(obj), indent=2, sort_keys=True) + "\n")


def bundled_model_path(name: str) -> Path:
    return Path(str(resources.files("turingcl") / "models" / name))


def load_model(path):
    """Read a model file and return (FourierSymbol, NonlinearitySpec)."""
    from .amplitude import NonlinearitySpec
    from .spectral import FourierSymbol

    p = Path(path)
    if not p.exists() and not p.is_absolute():
        cand = bundled_model_path(p.name)
        if cand.exists():
            p = cand
    data = json.loads(p.read_text())
    sym = FourierSymbol.from_dict(data)
    spec = NonlinearitySpec.from_dict(data["nonlinearity"], sym.n)
    return sym, spec


def write_model(path, sym, spec, extra: dict | None = None) -> None:
    d = sym.to_dict()
    d["nonlinearity"] = spec.to_dict()
    if extra:
        d.update(extra)
    Path(path).write_text(json.dumps(d, indent=2) + "\n")
