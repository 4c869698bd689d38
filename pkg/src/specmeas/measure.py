"""Discrete Borel spaces and projection-valued spectral measures.

Spaces are finite label sets or a countable index set with an explicit
truncation horizon.  Every measure is purely atomic; compact sets are exactly
the finite subsets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimMismatch, SpaceMismatch, UnboundedOnSet
from .linalg import adjoint, frob_norm, require_square
from .tolerances import TAU_MEAS, TAU_PROJ


@dataclass(frozen=True)
class DiscreteSpace:
    """Finite or countable discrete space.

    Finite spaces carry explicit labels.  Countable spaces are indexed by the
    non-negative integers and iterate up to ``horizon``; all limits handled
    by callers are monotone in the horizon.
    """

    labels: tuple | None = None
    horizon: int | None = None

    def __post_init__(self):
        if (self.labels is None) == (self.horizon is None):
            raise ValueError("exactly one of labels / horizon must be given")
        if self.labels is not None and len(set(self.labels)) != len(self.labels):
            raise ValueError("labels must be distinct")

    @property
    def is_finite(self) -> bool:
        return self.labels is not None

    def points(self):
        if self.is_finite:
            return list(self.labels)
        return list(range(self.horizon))

    def __contains__(self, label) -> bool:
        if self.is_finite:
            return label in self.labels
        return isinstance(label, (int, np.integer)) and label >= 0


@dataclass(frozen=True)
class BorelSet:
    """Finite subset, or cofinite complement of one (countable spaces)."""

    space: DiscreteSpace
    members: frozenset
    cofinite: bool = False

    def __post_init__(self):
        for x in self.members:
            if x not in self.space:
                raise SpaceMismatch(f"label {x!r} not in the space")
        if self.cofinite and self.space.is_finite:
            raise SpaceMismatch("cofinite sets only exist over countable spaces")

    def __contains__(self, label) -> bool:
        inside = label in self.members
        return (not inside) if self.cofinite else inside

    def intersect(self, other: "BorelSet") -> "BorelSet":
        _same_space(self, other)
        if not self.cofinite and not other.cofinite:
            return BorelSet(self.space, self.members & other.members)
        if self.cofinite and other.cofinite:
            return BorelSet(self.space, self.members | other.members, cofinite=True)
        fin, cof = (self, other) if not self.cofinite else (other, self)
        return BorelSet(self.space, fin.members - cof.members)

    def union(self, other: "BorelSet") -> "BorelSet":
        _same_space(self, other)
        if not self.cofinite and not other.cofinite:
            return BorelSet(self.space, self.members | other.members)
        if self.cofinite and other.cofinite:
            return BorelSet(self.space, self.members & other.members, cofinite=True)
        fin, cof = (self, other) if not self.cofinite else (other, self)
        return BorelSet(self.space, cof.members - fin.members, cofinite=True)

    def complement(self) -> "BorelSet":
        if self.space.is_finite:
            rest = frozenset(self.space.labels) - self.members
            return BorelSet(self.space, rest)
        return BorelSet(self.space, self.members, cofinite=not self.cofinite)


def _same_space(a: BorelSet, b: BorelSet) -> None:
    if a.space != b.space:
        raise SpaceMismatch("Borel sets over different spaces")


def borel(space: DiscreteSpace, members) -> BorelSet:
    return BorelSet(space, frozenset(members))


def whole_space(space: DiscreteSpace) -> BorelSet:
    if space.is_finite:
        return BorelSet(space, frozenset(space.labels))
    return BorelSet(space, frozenset(), cofinite=True)


@dataclass(frozen=True)
class SpectralMeasure:
    """Projection-valued measure on a discrete space.

    ``total`` is E(X), stored explicitly: compressions E_P of a non-negative
    spectral measure have totals that vary with P (E_0 = 0), so E(X) is not
    forced to be the identity.
    """

    space: DiscreteSpace
    atoms: dict = field(default_factory=dict)  # label -> projection ndarray
    total: np.ndarray = None

    def __post_init__(self):
        for x, p in self.atoms.items():
            if x not in self.space:
                raise SpaceMismatch(f"atom label {x!r} not in the space")
            require_square(p)
        if self.total is None:
            object.__setattr__(self, "total", self._atom_sum())

    @property
    def dim(self) -> int:
        return self.total.shape[0]

    def _atom_sum(self) -> np.ndarray:
        if not self.atoms:
            raise ValueError("measure needs at least one atom or an explicit total")
        d = next(iter(self.atoms.values())).shape[0]
        out = np.zeros((d, d), dtype=np.complex128)
        for p in self.atoms.values():
            out += p
        return out

    def atom(self, label) -> np.ndarray:
        p = self.atoms.get(label)
        if p is None:
            return np.zeros((self.dim, self.dim), dtype=np.complex128)
        return p

    def validate(self) -> float:
        """Worst invariant residual: projections, orthogonality, total."""
        worst = 0.0
        labels = sorted(self.atoms, key=repr)
        for i, x in enumerate(labels):
            p = self.atoms[x]
            worst = max(worst, frob_norm(p @ p - p), frob_norm(p - adjoint(p)))
            for y in labels[:i]:
                worst = max(worst, frob_norm(p @ self.atoms[y]))
        worst = max(worst, frob_norm(self.total @ self.total - self.total))
        if self.space.is_finite:
            worst = max(worst, frob_norm(self._atom_sum() - self.total))
        else:
            # partial sums monotone and dominated by the total
            gap = self.total - self._atom_sum()
            worst = max(worst, max(0.0, -float(np.linalg.eigvalsh(
                (gap + adjoint(gap)) / 2.0)[0])))
        return worst


def evaluate(e: SpectralMeasure, delta: BorelSet) -> np.ndarray:
    """E(Delta) = sum of atoms in Delta (cofinite: total minus complement)."""
    if delta.space != e.space:
        raise SpaceMismatch("set over a different space")
    if delta.cofinite:
        out = e.total.copy()
        for x in delta.members:
            out -= e.atom(x)
        return out
    out = np.zeros((e.dim, e.dim), dtype=np.complex128)
    for x in delta.members:
        out += e.atom(x)
    return out


def integrate_bounded(e: SpectralMeasure, f, delta: BorelSet) -> np.ndarray:
    """Sum of f(x) E_x over Delta.

    For cofinite Delta the sum runs over the stored atoms (the measure is
    finitely supported at desk scale); f must be finite on every atom hit.
    """
    if delta.space != e.space:
        raise SpaceMismatch("set over a different space")
    out = np.zeros((e.dim, e.dim), dtype=np.complex128)
    for x, p in e.atoms.items():
        if x in delta:
            fx = complex(f(x))
            if not np.isfinite(fx):
                raise UnboundedOnSet(f"f({x!r}) is not finite")
            out += fx * p
    return out


def scalar_measure(e: SpectralMeasure, h1: np.ndarray, h2: np.ndarray,
                   delta: BorelSet) -> complex:
    """E_{h1,h2}(Delta) = <E(Delta) h1, h2>."""
    h1 = np.asarray(h1, dtype=np.complex128).reshape(-1)
    h2 = np.asarray(h2, dtype=np.complex128).reshape(-1)
    if h1.shape[0] != e.dim or h2.shape[0] != e.dim:
        raise DimMismatch(f"vectors must have dim {e.dim}")
    return complex(np.vdot(h2, evaluate(e, delta) @ h1))


def support(e: SpectralMeasure, tol: float = TAU_PROJ) -> BorelSet:
    labels = [x for x, p in e.atoms.items() if frob_norm(p) > tol]
    return BorelSet(e.space, frozenset(labels))


def support_vector(e: SpectralMeasure, h: np.ndarray,
                   tol: float = TAU_PROJ) -> BorelSet:
    h = np.asarray(h, dtype=np.complex128).reshape(-1)
    if h.shape[0] != e.dim:
        raise DimMismatch(f"vector must have dim {e.dim}")
    bound = tol * float(np.vdot(h, h).real + 1e-300)
    labels = [
        x for x, p in e.atoms.items()
        if float(np.vdot(h, p @ h).real) > bound
    ]
    return BorelSet(e.space, frozenset(labels))


@dataclass(frozen=True)
class RegularityReport:
    horizon: int
    total_mass: float
    sup_over_truncations: float
    deficit: float
    regular: bool


def check_regularity(e: SpectralMeasure, h: np.ndarray,
                     horizon: int) -> RegularityReport:
    """Compare sup over finite truncations of E_{h,h} with the total mass."""
    if e.space.is_finite:
        raise SpaceMismatch("regularity checks run on countable spaces")
    h = np.asarray(h, dtype=np.complex128).reshape(-1)
    total_mass = float(np.vdot(h, e.total @ h).real)
    sup = 0.0
    running = 0.0
    for n in range(horizon):
        running += float(np.vdot(h, e.atom(n) @ h).real)
        sup = max(sup, running)
    deficit = total_mass - sup
    norm2 = float(np.vdot(h, h).real)
    return RegularityReport(
        horizon=horizon,
        total_mass=total_mass,
        sup_over_truncations=sup,
        deficit=deficit,
        regular=deficit <= TAU_MEAS * (1.0 + norm2),
    )
