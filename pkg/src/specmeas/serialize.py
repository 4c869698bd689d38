"""File formats shared across the repository.

All documents are JSON.  Matrices are stored as {rows, cols, data} with data
a flat row-major list of [re, im] pairs; Python's float serialization is
shortest-round-trip, so values survive a round trip losslessly.
"""

from __future__ import annotations

import json

import numpy as np

from .algebra import VonNeumannAlgebra, bicommutant
from .errors import InvalidDocument
from .linalg import as_matrix
from .measure import DiscreteSpace, SpectralMeasure
from .nnsm import NonNegSpectralMeasure


def matrix_to_doc(a: np.ndarray) -> dict:
    a = as_matrix(a)
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in a.reshape(-1)],
    }


def matrix_from_doc(doc: dict) -> np.ndarray:
    try:
        rows, cols, data = int(doc["rows"]), int(doc["cols"]), doc["data"]
    except (KeyError, TypeError) as exc:
        raise InvalidDocument(f"malformed matrix document: {exc}") from exc
    if rows < 1 or cols < 1 or len(data) != rows * cols:
        raise InvalidDocument("matrix document shape/data mismatch")
    flat = np.array([complex(re, im) for re, im in data], dtype=np.complex128)
    if not np.all(np.isfinite(flat)):
        raise InvalidDocument("matrix document has non-finite entries")
    return flat.reshape(rows, cols)


def space_to_doc(space: DiscreteSpace) -> dict:
    if space.is_finite:
        return {"kind": "finite", "labels": list(space.labels)}
    return {"kind": "countable", "horizon": space.horizon}


def space_from_doc(doc: dict) -> DiscreteSpace:
    kind = doc.get("kind")
    if kind == "finite":
        return DiscreteSpace(labels=tuple(doc["labels"]))
    if kind == "countable":
        return DiscreteSpace(horizon=int(doc["horizon"]))
    raise InvalidDocument(f"unknown space kind {kind!r}")


def measure_to_doc(e: SpectralMeasure) -> dict:
    return {
        "space": space_to_doc(e.space),
        "atoms": [
            [x, matrix_to_doc(p)]
            for x, p in sorted(e.atoms.items(), key=lambda kv: repr(kv[0]))
        ],
        "total": matrix_to_doc(e.total),
    }


def measure_from_doc(doc: dict):
    """Load a spectral measure; returns (measure, worst invariant residual)."""
    try:
        space = space_from_doc(doc["space"])
        atoms = {_label(x): matrix_from_doc(m) for x, m in doc["atoms"]}
        total = matrix_from_doc(doc["total"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidDocument(f"malformed measure document: {exc}") from exc
    e = SpectralMeasure(space=space, atoms=atoms, total=total)
    return e, e.validate()


def _label(x):
    # JSON round-trips tuples as lists; labels must stay hashable.
    return tuple(x) if isinstance(x, list) else x


def algebra_to_doc(w: VonNeumannAlgebra) -> dict:
    return {
        "ambient_dim": w.ambient_dim,
        "generators": [matrix_to_doc(b) for b in w.basis],
    }


def algebra_from_doc(doc: dict) -> VonNeumannAlgebra:
    try:
        dim = int(doc["ambient_dim"])
        gens = [matrix_from_doc(m) for m in doc["generators"]]
    except (KeyError, TypeError) as exc:
        raise InvalidDocument(f"malformed algebra document: {exc}") from exc
    return bicommutant(gens, dim)


def nnsm_to_doc(m: NonNegSpectralMeasure) -> dict:
    return {
        "space": space_to_doc(m.space),
        "w1": {
            "ambient_dim": m.w1.ambient_dim,
            "basis": [matrix_to_doc(b) for b in m.w1.basis],
        },
        "target_dim": m.target_dim,
        "atom_maps": [
            [x, [matrix_to_doc(img) for img in imgs]]
            for x, imgs in sorted(m.atom_images.items(), key=lambda kv: repr(kv[0]))
        ],
    }


def nnsm_from_doc(doc: dict):
    """Load an NNSM; returns (measure, worst compression residual)."""
    try:
        space = space_from_doc(doc["space"])
        w1 = VonNeumannAlgebra(
            ambient_dim=int(doc["w1"]["ambient_dim"]),
            basis=tuple(matrix_from_doc(m) for m in doc["w1"]["basis"]),
        )
        target_dim = int(doc["target_dim"])
        atom_images = {
            _label(x): np.stack([matrix_from_doc(img) for img in imgs])
            for x, imgs in doc["atom_maps"]
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidDocument(f"malformed NNSM document: {exc}") from exc
    m = NonNegSpectralMeasure(
        space=space, w1=w1, target_dim=target_dim, atom_images=atom_images
    )
    e_id = m.measure_for(m.w1.identity())
    return m, e_id.validate()


def block_model_to_doc(model) -> dict:
    from .blocks import BlockModel  # noqa: F401  (type reference)

    prefix = list(model.block_dims)
    gens = []
    for name in sorted(model.generators):
        rule = getattr(model.generators[name], "rule_doc", None)
        if rule is None:
            raise InvalidDocument(
                f"generator {name!r} has no named rule; cannot serialize"
            )
        gens.append({"name": name, **rule})
    return {
        "horizon": model.horizon,
        "block_dims": {"prefix": prefix, "repeat": prefix[-1]},
        "generators": gens,
        "w": algebra_to_doc(model.w) if model.w is not None else None,
    }


def block_model_from_doc(doc: dict):
    from .blocks import BlockModel

    try:
        horizon = int(doc["horizon"])
        dims_doc = doc["block_dims"]
        prefix = [int(d) for d in dims_doc["prefix"]]
        repeat = int(dims_doc["repeat"])
        dims = tuple((prefix + [repeat] * horizon)[:horizon])
        gens = {
            g["name"]: generator_rule(g) for g in doc["generators"]
        }
        w = algebra_from_doc(doc["w"]) if doc.get("w") else None
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidDocument(f"malformed block-model document: {exc}") from exc
    return BlockModel(
        space=DiscreteSpace(horizon=horizon),
        block_dims=dims,
        generators=gens,
        w=w,
    )


def generator_rule(doc: dict):
    """Named generator-value primitives: poly, exp-index, bounded-const."""
    kind = doc.get("kind")
    if kind == "poly":
        coeffs = [complex(re, im) for re, im in doc["coeffs"]]

        def f(n: int) -> complex:
            return sum(c * n**j for j, c in enumerate(coeffs))

        rule = {"kind": "poly", "coeffs": doc["coeffs"]}
    elif kind == "exp-index":
        rate = float(doc["rate"])

        def f(n: int) -> complex:
            return complex(np.exp(rate * n))

        rule = {"kind": "exp-index", "rate": rate}
    elif kind == "bounded-const":
        value = complex(doc["value"][0], doc["value"][1])

        def f(n: int) -> complex:
            return value

        rule = {"kind": "bounded-const", "value": doc["value"]}
    else:
        raise InvalidDocument(f"unknown generator rule {kind!r}")
    f.rule_doc = rule
    return f


def dump(doc: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load(path) -> dict:
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidDocument(f"not valid JSON: {exc}") from exc
