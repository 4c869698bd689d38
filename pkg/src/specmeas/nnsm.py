"""Non-negative spectral measures and bounded integration.

An NNSM assigns to every atom x of a discrete space a linear map
Phi_x: W1 -> B(K), stored through the images of W1's trace-orthonormal basis.
Compressions M_P(Delta) = M(Delta)(P) are spectral measures, and the product
rule M_P(D1) M_Q(D2) = M_{PQ}(D1 n D2) ties the family together.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    ProjectionFamily,
    VonNeumannAlgebra,
    decompose_over_family,
    limiting_sequence,
    linear_extend,
)
from .errors import AlgebraMismatch, InfiniteSet, NotSpanning
from .linalg import adjoint, frob_norm, require_square, star_decompose
from .measure import BorelSet, DiscreteSpace, SpectralMeasure, borel, support
from .tolerances import TAU_EXT, TAU_LIM, TAU_PROJ, TAU_RECON


@dataclass(frozen=True)
class NonNegSpectralMeasure:
    """Atomic non-negative spectral measure M: Bor(X) -> B(W1, B(K)).

    ``atom_images[x]`` is an array of shape (dim W1, k, k): the image under
    Phi_x of each basis element of W1.  Phi_x on a general A is then a plain
    contraction against A's coordinates.
    """

    space: DiscreteSpace
    w1: VonNeumannAlgebra
    target_dim: int
    atom_images: dict = field(default_factory=dict)

    def __post_init__(self):
        for x, imgs in self.atom_images.items():
            if imgs.shape != (self.w1.dim, self.target_dim, self.target_dim):
                raise AlgebraMismatch(
                    f"atom {x!r} images have shape {imgs.shape}"
                )

    def apply(self, label, a: np.ndarray) -> np.ndarray:
        """Phi_x(A) for A in W1."""
        coeffs = self.w1.coefficients(require_square(a))
        imgs = self.atom_images.get(label)
        if imgs is None:
            return np.zeros((self.target_dim, self.target_dim), dtype=np.complex128)
        return np.tensordot(coeffs, imgs, axes=(0, 0))

    def measure_for(self, p: np.ndarray) -> SpectralMeasure:
        """The compression M_P as a SpectralMeasure."""
        atoms = {x: self.apply(x, p) for x in self.atom_images}
        total = sum(
            atoms.values(),
            np.zeros((self.target_dim, self.target_dim), dtype=np.complex128),
        )
        return SpectralMeasure(space=self.space, atoms=atoms, total=total)

    def m_a(self, a: np.ndarray, delta: BorelSet) -> np.ndarray:
        """M_A(Delta) = sum over atoms in Delta of Phi_x(A)."""
        out = np.zeros((self.target_dim, self.target_dim), dtype=np.complex128)
        for x in self.atom_images:
            if x in delta:
                out += self.apply(x, a)
        return out

    def total_of_identity(self) -> np.ndarray:
        out = np.zeros((self.target_dim, self.target_dim), dtype=np.complex128)
        for x in self.atom_images:
            out += self.apply(x, self.w1.identity())
        return out

    @property
    def normalized(self) -> bool:
        eye = np.eye(self.target_dim)
        return frob_norm(self.total_of_identity() - eye) <= TAU_RECON * (
            1.0 + self.target_dim
        )

    def support(self) -> BorelSet:
        return support(self.measure_for(self.w1.identity()))


@dataclass(frozen=True)
class OperatorField:
    """Finite sum of terms f_i (x) A_i with f_i scalar and A_i in W1."""

    terms: tuple  # of (callable, ndarray)

    def __add__(self, other: "OperatorField") -> "OperatorField":
        return OperatorField(terms=self.terms + other.terms)

    def scale(self, lam: complex) -> "OperatorField":
        return OperatorField(
            terms=tuple((_scaled(f, lam), a) for f, a in self.terms)
        )

    def product(self, other: "OperatorField") -> "OperatorField":
        out = []
        for f, a in self.terms:
            for g, b in other.terms:
                out.append((_pointwise_product(f, g), a @ b))
        return OperatorField(terms=tuple(out))

    def star(self) -> "OperatorField":
        return OperatorField(
            terms=tuple((_conjugated(f), adjoint(a)) for f, a in self.terms)
        )

    def value(self, x) -> np.ndarray:
        """f_F(x): the W1-valued value of the field at an atom."""
        d = self.terms[0][1].shape[0]
        out = np.zeros((d, d), dtype=np.complex128)
        for f, a in self.terms:
            out += complex(f(x)) * a
        return out


def _scaled(f, lam):
    return lambda x: lam * f(x)


def _pointwise_product(f, g):
    return lambda x: f(x) * g(x)


def _conjugated(f):
    return lambda x: np.conj(f(x))


def indicator(delta: BorelSet):
    return lambda x: 1.0 if x in delta else 0.0


@dataclass(frozen=True)
class FamilyMeasures:
    """A projection family together with the spectral measures E_P."""

    family: ProjectionFamily
    measures: tuple  # of SpectralMeasure, aligned with family.members

    def __post_init__(self):
        if len(self.measures) != len(self.family.members):
            raise AlgebraMismatch("one measure per family member required")

    def extend_at(self, a: np.ndarray, delta: BorelSet) -> np.ndarray:
        """E_A(Delta) by linear extension over the family (exact route)."""
        from .measure import evaluate

        assignment = [evaluate(e, delta) for e in self.measures]
        return linear_extend(self.family, assignment, a)


@dataclass(frozen=True)
class CheckEntry:
    name: str
    residual: float
    tol: float
    passed: bool
    flags: tuple = ()


@dataclass(frozen=True)
class CheckReport:
    entries: tuple

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def worst_residual(self) -> float:
        return max((e.residual for e in self.entries), default=0.0)


def _entry(name, residual, tol, flags=()) -> CheckEntry:
    return CheckEntry(
        name=name, residual=float(residual), tol=float(tol),
        passed=bool(residual <= tol), flags=tuple(flags),
    )


def _random_sets(space: DiscreteSpace, rng: np.random.Generator, count: int):
    pts = space.points()
    out = []
    for _ in range(count):
        mask = rng.random(len(pts)) < 0.5
        out.append(borel(space, [p for p, m in zip(pts, mask) if m]))
    return out


def check_nnsm(
    m: NonNegSpectralMeasure,
    family: ProjectionFamily,
    set_pairs: int = 8,
    seed: int = 0,
) -> CheckReport:
    """Validate the defining identity of an NNSM against a projection family.

    Per projection: the compression must be a spectral measure (orthogonal
    idempotent atoms).  Per sampled (P, Q, D1, D2): the product rule.
    """
    if family.algebra.ambient_dim != m.w1.ambient_dim:
        raise AlgebraMismatch("family lives in a different algebra")
    rng = np.random.default_rng(seed)
    entries = []
    for i, p in enumerate(family.members):
        e_p = m.measure_for(p)
        entries.append(_entry(
            f"spectral-measure[P{i}]", e_p.validate(),
            TAU_RECON * (1.0 + frob_norm(e_p.total)),
        ))
    sets = _random_sets(m.space, rng, 2 * set_pairs)
    from .measure import evaluate

    for t in range(set_pairs):
        i = int(rng.integers(len(family.members)))
        j = int(rng.integers(len(family.members)))
        p, q = family.members[i], family.members[j]
        d1, d2 = sets[2 * t], sets[2 * t + 1]
        lhs = evaluate(m.measure_for(p), d1) @ evaluate(m.measure_for(q), d2)
        rhs = m.m_a(p @ q, d1.intersect(d2))
        scale = 1.0 + max(frob_norm(lhs), frob_norm(rhs))
        entries.append(_entry(
            f"product-rule[P{i},P{j},pair{t}]", frob_norm(lhs - rhs),
            TAU_RECON * scale,
        ))
    return CheckReport(entries=tuple(entries))


def condition1_check(
    fam: FamilyMeasures, trials: int = 16, seed: int = 0
) -> CheckReport:
    """Linear relations among projections must transfer to the measures.

    Seeded random combinations T = sum lambda_i P_i are re-expressed over a
    pivoted spanning subset; the two coefficient vectors must induce the same
    measure values on every atom.
    """
    from .measure import evaluate

    family = fam.family
    if not family.spans_algebra:
        raise NotSpanning("condition (1) checks need a spanning family")
    rng = np.random.default_rng(seed)
    space = fam.measures[0].space
    deltas = _random_sets(space, rng, trials)
    entries = []
    for t in range(trials):
        lam = rng.standard_normal(len(family.members))
        target = sum(
            c * p for c, p in zip(lam, family.members)
        )
        mu = decompose_over_family(family, target)
        delta = deltas[t]
        lhs = sum(
            c * evaluate(e, delta) for c, e in zip(lam, fam.measures)
        )
        rhs = sum(
            c * evaluate(e, delta) for c, e in zip(mu, fam.measures)
        )
        scale = 1.0 + max(frob_norm(lhs), frob_norm(rhs))
        entries.append(_entry(
            f"condition1[trial{t}]", frob_norm(lhs - rhs), TAU_EXT * scale,
        ))
    return CheckReport(entries=tuple(entries))


@dataclass(frozen=True)
class Condition2Report:
    per_set: tuple  # of (set description, witnessed k_Delta)
    passed: bool = True

    @property
    def worst_bound(self) -> float:
        return max((k for _, k in self.per_set), default=0.0)


def condition2_check(fam: FamilyMeasures, deltas: list[BorelSet]) -> Condition2Report:
    """Witness the uniform bound k_Delta = sup_P ||E_P(Delta)|| per set."""
    from .linalg import op_norm
    from .measure import evaluate

    per_set = []
    for i, delta in enumerate(deltas):
        k = max(
            (op_norm(evaluate(e, delta)) for e in fam.measures), default=0.0
        )
        per_set.append((f"delta{i}", float(k)))
    return Condition2Report(per_set=tuple(per_set))


@dataclass(frozen=True)
class Condition3Report:
    residual_by_ell: tuple  # of (ell, residual)
    fitted_rate: float
    passed: bool

    @property
    def final_residual(self) -> float:
        return self.residual_by_ell[-1][1]


def condition3_check(
    fam: FamilyMeasures,
    p: np.ndarray,
    q: np.ndarray,
    d1: BorelSet,
    d2: BorelSet,
    ell_max: int = 64,
) -> Condition3Report:
    """Limiting-sequence route to the product rule.

    PQ is split into four positive parts; at each ell the Riemann sum of
    linear-extension values over D1 n D2 is compared with E_P(D1) E_Q(D2).
    Passes when the ell_max residual is <= c/ell_max with c = 10*(1+dim)
    and the log-log decay rate is recorded.
    """
    from .measure import evaluate

    family = fam.family
    i_p = _family_index(family, p)
    i_q = _family_index(family, q)
    lhs = evaluate(fam.measures[i_p], d1) @ evaluate(fam.measures[i_q], d2)
    inter = d1.intersect(d2)
    parts = star_decompose(p @ q)
    seqs = [limiting_sequence(part, ell_max=ell_max) for part in parts]
    signs = [1.0, -1.0, 1.0j, -1.0j]
    residuals = []
    ells = sorted({1, 2, 4, 8, 16, 32, ell_max, ell_max // 2} - {0})
    k = fam.measures[0].total.shape[0]
    for ell in ells:
        rhs = np.zeros((k, k), dtype=np.complex128)
        for sign, seq in zip(signs, seqs):
            for zeta, r_proj in seq.term(ell):
                rhs += sign * zeta * fam.extend_at(r_proj, inter)
        residuals.append((ell, frob_norm(lhs - rhs)))
    dim = family.algebra.ambient_dim
    bound = 10.0 * (1.0 + dim) / ell_max
    final = residuals[-1][1]
    rate = _fit_decay_rate(residuals)
    return Condition3Report(
        residual_by_ell=tuple(residuals),
        fitted_rate=rate,
        passed=final <= bound,
    )


def _family_index(family: ProjectionFamily, p: np.ndarray) -> int:
    for i, member in enumerate(family.members):
        if member.shape == p.shape and frob_norm(member - p) <= TAU_PROJ:
            return i
    raise NotSpanning("projection is not a family member")


def _fit_decay_rate(residuals) -> float:
    """Slope of -log(residual) vs log(ell); inf when already at round-off."""
    pts = [(ell, r) for ell, r in residuals if r > 1e-12]
    if len(pts) < 2:
        return float("inf")
    xs = np.log([ell for ell, _ in pts])
    ys = np.log([r for _, r in pts])
    slope = np.polyfit(xs, ys, 1)[0]
    return float(-slope)


def assemble_from_family(
    fam: FamilyMeasures, w1: VonNeumannAlgebra
) -> NonNegSpectralMeasure:
    """Build the unique NNSM with M_P = E_P over a spanning family.

    Phi_x is the linear extension of P -> E_P({x}) evaluated on each basis
    element of W1; condition (1) certifies well-definedness (a violation
    surfaces as InconsistentAssignment inside linear_extend).
    """
    family = fam.family
    if not family.spans_algebra:
        raise NotSpanning("assembly needs a spanning family")
    space = fam.measures[0].space
    k = fam.measures[0].total.shape[0]
    labels = set()
    for e in fam.measures:
        labels.update(e.atoms.keys())
    atom_images = {}
    for x in sorted(labels, key=repr):
        assignment = [e.atom(x) for e in fam.measures]
        imgs = np.stack(
            [linear_extend(family, assignment, b) for b in w1.basis]
        )
        atom_images[x] = imgs
    m = NonNegSpectralMeasure(
        space=space, w1=w1, target_dim=k, atom_images=atom_images
    )
    # round trip on the family itself
    for i, p in enumerate(family.members):
        for x in labels:
            got = m.apply(x, p)
            want = fam.measures[i].atom(x)
            if frob_norm(got - want) > TAU_EXT * (1.0 + frob_norm(want)):
                raise NotSpanning(
                    f"reassembly misses E_P({x!r}) by {frob_norm(got - want):.3e}"
                )
    return m


def extension_by_limit(
    fam: FamilyMeasures,
    a: np.ndarray,
    delta: BorelSet,
    ell: int = 4096,
    zeta_rule: str = "right",
) -> np.ndarray:
    """E_A(Delta) as the limiting-sequence value at a large ell.

    For positive A this realizes lim_l E_{S_l(A)}(Delta); the companion exact
    value is FamilyMeasures.extend_at, and the two agree within TAU_LIM.
    """
    seq = limiting_sequence(a, ell_max=1, zeta_rule=zeta_rule)
    k = fam.measures[0].total.shape[0]
    out = np.zeros((k, k), dtype=np.complex128)
    for zeta, r_proj in seq.term(ell):
        out += zeta * fam.extend_at(r_proj, delta)
    return out


def integrate(
    m: NonNegSpectralMeasure, field_: OperatorField, delta: BorelSet
) -> np.ndarray:
    """Integral of an operator field: sum_i sum_{x in Delta} f_i(x) Phi_x(A_i)."""
    if delta.cofinite:
        raise InfiniteSet("bounded integration needs a finite set")
    out = np.zeros((m.target_dim, m.target_dim), dtype=np.complex128)
    for f, a in field_.terms:
        coeffs = m.w1.coefficients(a)
        for x, imgs in m.atom_images.items():
            if x in delta:
                out += complex(f(x)) * np.tensordot(coeffs, imgs, axes=(0, 0))
    return out


def positivity_deficit(m: NonNegSpectralMeasure, a: np.ndarray) -> float:
    """Most negative eigenvalue over atoms of Phi_x(A) for positive A."""
    worst = 0.0
    for x in m.atom_images:
        val = m.apply(x, a)
        val = (val + adjoint(val)) / 2.0
        lo = float(np.linalg.eigvalsh(val)[0])
        worst = min(worst, lo)
    return -worst


def support_nnsm(m: NonNegSpectralMeasure) -> BorelSet:
    return m.support()
