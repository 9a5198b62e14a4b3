"""JSON documents for symbols and CSV helpers for artifacts.

Explicit finite symbols are stored as::

    {"dims": [d_0, ...], "blocks": [[[re, im], ...], ...], "multiplicity": [...]}

with each block flattened row-major.  Built-in generators are stored as
``{"generator": name, "params": {...}}``.  Floats go through ``repr`` so an
explicit symbol survives a store/load cycle bit for bit.
"""

from __future__ import annotations

import json

import numpy as np

from .anharmonic import AnharmonicSpec, anharmonic_symbol
from .core import MatrixSymbol
from .errors import InvalidParameterError
from .generators import (
    beta_family,
    so3_schrodinger_symbol,
    su2_laplacian_power_symbol,
    torus_multiplier_symbol,
)
from .tensor import TensorSymbol


def _torus(params):
    family = params.get("beta", "inv-sqrt-quadratic")
    fn = beta_family(family)
    n = int(params.get("n", 1))
    radius = int(params.get("radius", 0))
    return torus_multiplier_symbol(lambda j: fn(j if n == 1 else np.sqrt(np.sum(np.square(j)))),
                                   n=n, radius=radius)


def _anharmonic(params):
    params = dict(params)
    count = int(params.pop("count", 40))
    return anharmonic_symbol(AnharmonicSpec(**params), count)


GENERATORS = {
    "su2-laplacian": lambda p: su2_laplacian_power_symbol(float(p["alpha"])),
    "so3-schrodinger": lambda p: so3_schrodinger_symbol(float(p["gamma"])),
    "torus-multiplier": _torus,
    "anharmonic": _anharmonic,
}


def make_generator(name: str, params: dict | None = None) -> MatrixSymbol:
    if name not in GENERATORS:
        raise InvalidParameterError(f"unknown generator {name!r}; known: {sorted(GENERATORS)}")
    try:
        sym = GENERATORS[name](params or {})
    except (KeyError, TypeError) as exc:
        raise InvalidParameterError(f"bad parameters for generator {name!r}: {exc}") from exc
    sym.source = {"generator": name, "params": dict(params or {})}
    return sym


def symbol_to_doc(s: MatrixSymbol) -> dict:
    source = getattr(s, "source", None)
    if source is not None:
        return source
    if not s.partition.is_finite:
        raise InvalidParameterError("only finite or generator-built symbols can be serialized")
    n = s.partition.size
    blocks = []
    for l in range(n):
        b = s.block(l).reshape(-1)
        blocks.append([[float(z.real), float(z.imag)] for z in b])
    doc = {"dims": [s.partition.dim(l) for l in range(n)], "blocks": blocks}
    mult = [s.multiplicity(l) for l in range(n)]
    if any(m != 1 for m in mult):
        doc["multiplicity"] = mult
    return doc


def _block_from_doc(raw, d, l):
    arr = np.asarray(raw, dtype=float)
    if arr.ndim == 2 and arr.shape == (d * d, 2):
        z = arr[:, 0] + 1j * arr[:, 1]
        return z.reshape(d, d)
    if arr.ndim == 3 and arr.shape == (d, d, 2):
        return arr[..., 0] + 1j * arr[..., 1]
    raise InvalidParameterError(f"block {l} has shape {arr.shape}, expected {d}x{d} [re, im] pairs")


def symbol_from_doc(doc: dict) -> MatrixSymbol:
    if "generator" in doc:
        return make_generator(doc["generator"], doc.get("params", {}))
    try:
        dims = [int(d) for d in doc["dims"]]
        raw_blocks = doc["blocks"]
    except (KeyError, TypeError) as exc:
        raise InvalidParameterError(f"malformed symbol document: {exc}") from exc
    if len(dims) != len(raw_blocks):
        raise InvalidParameterError("dims and blocks have different lengths")
    blocks = [_block_from_doc(b, d, l) for l, (b, d) in enumerate(zip(raw_blocks, dims))]
    return MatrixSymbol.explicit(blocks, multiplicity=doc.get("multiplicity"))


def tensor_to_doc(ts: TensorSymbol) -> list:
    return [symbol_to_doc(f) for f in ts.factors]


def tensor_from_doc(doc: list) -> TensorSymbol:
    return TensorSymbol([symbol_from_doc(d) for d in doc])


def dumps(obj) -> str:
    return json.dumps(obj, indent=2)


def load_symbol(path) -> MatrixSymbol:
    with open(path) as fh:
        doc = json.load(fh)
    if isinstance(doc, list):
        raise InvalidParameterError("file holds a tensor symbol; use load_tensor")
    return symbol_from_doc(doc)


def load_tensor(path) -> TensorSymbol:
    with open(path) as fh:
        return tensor_from_doc(json.load(fh))


def dump_symbol(s: MatrixSymbol, path):
    with open(path, "w") as fh:
        fh.write(dumps(symbol_to_doc(s)))


def fmt(x) -> str:
    """Full-precision decimal for CSV cells."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def csv_text(header, rows, preamble=()) -> str:
    lines = [f"# {p}" for p in preamble]
    lines.append(",".join(header))
    lines.extend(",".join(fmt(c) for c in row) for row in rows)
    return "\n".join(lines) + "\n"
