"""Seeded scenarios and the four verification pipelines.

Scenarios are generated oracle-first: a ground-truth measure is built, the
representation is induced by integration against it, and the pipeline must
reconstruct the measure from the representation alone.  Reports carry every
residual; a failing stage never aborts the pipeline.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import blocks
from .algebra import (
    ProjectionFamily,
    bicommutant,
    joint_diagonalize,
    sample_projections,
)
from .errors import CapExceeded, SpecmeasError
from .linalg import (
    adjoint,
    frob_norm,
    op_norm,
    random_hermitian,
    random_unitary,
)
from .measure import (
    DiscreteSpace,
    SpectralMeasure,
    borel,
    support,
    whole_space,
)
from .nnsm import (
    CheckEntry,
    FamilyMeasures,
    NonNegSpectralMeasure,
    OperatorField,
    assemble_from_family,
    condition1_check,
    condition2_check,
    condition3_check,
    integrate,
)
from .tolerances import TAU_EXT, TAU_RECON

MAX_H_DIM = 4
MAX_K_DIM = 16
MAX_SPACE = 8
MAX_HORIZON = 64


@dataclass(frozen=True)
class Caps:
    h_dim: int = MAX_H_DIM
    k_dim: int = MAX_K_DIM
    space: int = 6
    horizon: int = 32

    def __post_init__(self):
        if self.h_dim > MAX_H_DIM:
            raise CapExceeded(f"dim H cap {self.h_dim} > {MAX_H_DIM}")
        if self.k_dim > MAX_K_DIM:
            raise CapExceeded(f"dim K cap {self.k_dim} > {MAX_K_DIM}")
        if self.space > MAX_SPACE:
            raise CapExceeded(f"|X| cap {self.space} > {MAX_SPACE}")
        if self.horizon > MAX_HORIZON:
            raise CapExceeded(f"horizon cap {self.horizon} > {MAX_HORIZON}")
        if min(self.h_dim, self.k_dim, self.space, self.horizon) < 1:
            raise CapExceeded("caps must be positive")


@dataclass(frozen=True)
class Scenario:
    """Deterministic test case: the oracle plus the induced representation."""

    kind: str  # "A" | "B" | "Cprime" | "D"
    seed: int
    dims: tuple
    space: DiscreteSpace
    payload: dict = field(default_factory=dict)
    fault: str | None = None

    @property
    def scenario_id(self) -> str:
        tag = f"{self.kind}-{self.seed}"
        return tag if self.fault is None else f"{tag}-fault:{self.fault}"


@dataclass(frozen=True)
class VerificationReport:
    scenario: str
    checks: tuple  # of CheckEntry
    wall_ms: int = 0
    schema: int = 1

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def worst_residual(self) -> float:
        return max((c.residual for c in self.checks), default=0.0)

    def to_doc(self) -> dict:
        return {
            "schema": self.schema,
            "scenario": self.scenario,
            "checks": [
                {
                    "name": c.name,
                    "residual": float(c.residual),
                    "tol": float(c.tol),
                    "pass": bool(c.passed),
                    "flags": list(c.flags),
                }
                for c in self.checks
            ],
            "pass": self.passed,
            "wall_ms": int(self.wall_ms),
        }


def _entry(name, residual, tol, flags=()) -> CheckEntry:
    return CheckEntry(
        name=name, residual=float(residual), tol=float(tol),
        passed=bool(residual <= tol), flags=tuple(flags),
    )


def _bool_entry(name, ok: bool, flags=()) -> CheckEntry:
    return CheckEntry(
        name=name, residual=0.0 if ok else 1.0, tol=0.5,
        passed=bool(ok), flags=tuple(flags),
    )


# ---------------------------------------------------------------------------
# scenario generation


def gen_scenario(kind: str, seed: int, caps: Caps = Caps()) -> Scenario:
    rng = np.random.default_rng(seed)
    if kind == "A":
        return _gen_a(seed, rng, caps)
    if kind == "B":
        return _gen_b(seed, rng, caps)
    if kind == "Cprime":
        return _gen_c(seed, rng, caps, with_algebra=False)
    if kind == "D":
        return _gen_c(seed, rng, caps, with_algebra=True)
    raise ValueError(f"unknown scenario kind {kind!r}")


def _gen_a(seed, rng, caps) -> Scenario:
    d = int(rng.integers(1, caps.h_dim + 1))
    n_gen = int(rng.integers(1, 4))
    n_pts = int(rng.integers(1, min(d, caps.space) + 1))
    u = random_unitary(rng, d)
    # each coordinate belongs to one of n_pts characters; every character
    # gets at least one coordinate and a distinct joint value tuple
    owner = list(range(n_pts)) + [
        int(rng.integers(n_pts)) for _ in range(d - n_pts)
    ]
    values = _distinct_tuples(rng, n_pts, n_gen)
    images = {}
    for g in range(n_gen):
        diag = np.array([values[owner[i]][g] for i in range(d)])
        images[f"b{g}"] = u @ np.diag(diag) @ adjoint(u)
    space = DiscreteSpace(labels=tuple(range(n_pts)))
    return Scenario(
        kind="A", seed=seed, dims=(d,), space=space,
        payload={"images": images, "values": values},
    )


def _distinct_tuples(rng, n_pts, n_gen):
    values = []
    while len(values) < n_pts:
        tup = tuple(
            complex(rng.integers(-3, 4), rng.integers(-3, 4))
            for _ in range(n_gen)
        )
        if all(max(abs(a - b) for a, b in zip(tup, v)) > 0.5 for v in values):
            values.append(tup)
    return values


def _gen_b(seed, rng, caps) -> Scenario:
    h = int(rng.integers(1, caps.h_dim + 1))
    n_atoms = int(rng.integers(1, min(caps.space, caps.k_dim // h) + 1))
    k = h * n_atoms
    # W1 is either the full matrix algebra or a maximal abelian one
    if h > 1 and rng.integers(2):
        gens = [random_hermitian(rng, h), random_hermitian(rng, h)]
    else:
        gens = [random_hermitian(rng, h)]
    w1 = bicommutant(gens, h)
    u = random_unitary(rng, k)
    space = DiscreteSpace(labels=tuple(range(n_atoms)))
    atom_images = {}
    for x in range(n_atoms):
        d_x = np.zeros((n_atoms, n_atoms), dtype=np.complex128)
        d_x[x, x] = 1.0
        atom_images[x] = np.stack(
            [u @ np.kron(b, d_x) @ adjoint(u) for b in w1.basis]
        )
    oracle = NonNegSpectralMeasure(
        space=space, w1=w1, target_dim=k, atom_images=atom_images
    )
    return Scenario(
        kind="B", seed=seed, dims=(h, k), space=space,
        payload={"oracle": oracle},
    )


def _gen_c(seed, rng, caps, with_algebra: bool) -> Scenario:
    horizon = int(rng.integers(8, caps.horizon + 1))
    from .serialize import generator_rule

    n_gen = int(rng.integers(1, 3))
    gens = {}
    for g in range(n_gen):
        kind_pick = int(rng.integers(3))
        if kind_pick == 0:
            coeffs = [[float(rng.integers(-2, 3)), 0.0] for _ in range(3)]
            gens[f"g{g}"] = generator_rule({"kind": "poly", "coeffs": coeffs})
        elif kind_pick == 1:
            gens[f"g{g}"] = generator_rule(
                {"kind": "exp-index", "rate": -float(rng.uniform(0.1, 1.0))}
            )
        else:
            gens[f"g{g}"] = generator_rule(
                {"kind": "bounded-const",
                 "value": [float(rng.integers(-2, 3)), float(rng.integers(-2, 3))]}
            )
    if with_algebra:
        dim = int(rng.integers(2, 4))
        w = bicommutant(
            [random_hermitian(rng, dim), random_hermitian(rng, dim)], dim
        )
        block_dims = (dim,) * horizon
    else:
        w = None
        block_dims = (1,) * horizon
    model = blocks.BlockModel(
        space=DiscreteSpace(horizon=horizon),
        block_dims=block_dims,
        generators=gens,
        w=w,
    )
    kind = "D" if with_algebra else "Cprime"
    return Scenario(
        kind=kind, seed=seed, dims=block_dims, space=model.space,
        payload={"model": model},
    )


def number_operator_scenario(horizon: int = 32) -> Scenario:
    """The canonical diagonal model: one generator f(k) = k."""
    from .serialize import generator_rule

    model = blocks.BlockModel(
        space=DiscreteSpace(horizon=horizon),
        block_dims=(1,) * horizon,
        generators={"num": generator_rule(
            {"kind": "poly", "coeffs": [[0.0, 0.0], [1.0, 0.0]]})},
    )
    return Scenario(
        kind="Cprime", seed=-1, dims=(1,) * horizon, space=model.space,
        payload={"model": model},
    )


# ---------------------------------------------------------------------------
# fault injection


FAULT_CLASSES = (
    "non-idempotent-projection",
    "broken-condition1",
    "non-normal-block",
    "denormalized-m",
)


def inject_fault(scenario: Scenario, fault: str, magnitude: float = 1e-3) -> Scenario:
    """Corrupt a scenario so a named check must catch it."""
    rng = np.random.default_rng(scenario.seed ^ 0x5EED)
    if fault in ("non-idempotent-projection", "denormalized-m"):
        oracle: NonNegSpectralMeasure = scenario.payload["oracle"]
        x = scenario.space.points()[int(rng.integers(len(scenario.space.points())))]
        imgs = {k: v.copy() for k, v in oracle.atom_images.items()}
        if fault == "denormalized-m":
            imgs[x] = (1.0 + magnitude) * imgs[x]
        else:
            bump = magnitude * np.eye(oracle.target_dim)
            imgs[x] = np.stack([img + bump for img in imgs[x]])
        bad = NonNegSpectralMeasure(
            space=oracle.space, w1=oracle.w1, target_dim=oracle.target_dim,
            atom_images=imgs,
        )
        return Scenario(
            kind=scenario.kind, seed=scenario.seed, dims=scenario.dims,
            space=scenario.space, payload={"oracle": bad}, fault=fault,
        )
    if fault == "broken-condition1":
        # the compressions themselves get corrupted after derivation, no
        # linear Phi_x can express the fault; record the directive only
        payload = dict(scenario.payload)
        payload["measure_bump"] = magnitude
        return Scenario(
            kind=scenario.kind, seed=scenario.seed, dims=scenario.dims,
            space=scenario.space, payload=payload, fault=fault,
        )
    if fault == "non-normal-block":
        model: blocks.BlockModel = scenario.payload["model"]
        n_bad = int(rng.integers(model.horizon))
        payload = dict(scenario.payload)
        payload["field"] = _non_normal_field(model, n_bad, magnitude)
        return Scenario(
            kind=scenario.kind, seed=scenario.seed, dims=scenario.dims,
            space=scenario.space, payload=payload, fault=fault,
        )
    raise ValueError(f"unknown fault class {fault!r}")


def _non_normal_field(model, n_bad, magnitude):
    if model.w is None:
        raise ValueError("non-normal block faults need a matrix block model")
    dim = model.w.ambient_dim
    nil = np.zeros((dim, dim), dtype=np.complex128)
    nil[0, 1] = magnitude

    def spike(n, n_bad=n_bad):
        return 1.0 if n == n_bad else 0.0

    # the bare nilpotent spike keeps the non-normality visible against the
    # scale-aware residual regardless of the generators' growth
    return blocks.UnboundedField(terms=((spike, nil),))


# ---------------------------------------------------------------------------
# *-polynomial helpers (kind A / Cprime test sets)


def _star_monomials(names, rng, count, degree=3):
    """Deterministic test set: generators, pairwise products, adjoints, and
    ``count`` random monomial combinations up to the given degree."""
    base = [((n, False),) for n in names]
    base += [((n, True),) for n in names]
    base += [((a, False), (b, False)) for a in names for b in names]
    out = [(1.0 + 0.0j, m) for m in base]
    for _ in range(count):
        deg = int(rng.integers(1, degree + 1))
        mono = tuple(
            (names[int(rng.integers(len(names)))], bool(rng.integers(2)))
            for _ in range(deg)
        )
        coeff = complex(rng.standard_normal(), rng.standard_normal())
        out.append((coeff, mono))
    return out


def _monomial_on_matrices(images, coeff, mono, dim):
    out = coeff * np.eye(dim, dtype=np.complex128)
    for name, conj in mono:
        m = images[name]
        out = out @ (adjoint(m) if conj else m)
    return out


def _monomial_on_values(values, coeff, mono, names):
    out = coeff
    for name, conj in mono:
        v = values[names.index(name)]
        out *= np.conj(v) if conj else v
    return out


# ---------------------------------------------------------------------------
# pipelines


def verify_theorem_a(scenario: Scenario) -> VerificationReport:
    """Bounded commutative case: ρ(b) = ∫ f_b dE for a constructed E."""
    t0 = time.perf_counter()
    images: dict = scenario.payload["images"]
    names = sorted(images)
    d = images[names[0]].shape[0]
    checks: list[CheckEntry] = []
    rng = np.random.default_rng(scenario.seed + 1)
    try:
        atlas = joint_diagonalize([images[n] for n in names])
    except SpecmeasError as exc:
        checks.append(_bool_entry(f"diagonalize[{type(exc).__name__}]", False))
        return _finish(scenario, checks, t0)
    # (i) representation on the *-polynomial test set
    for t, (coeff, mono) in enumerate(_star_monomials(names, rng, count=6)):
        lhs = _monomial_on_matrices(images, coeff, mono, d)
        rhs = np.zeros((d, d), dtype=np.complex128)
        for vals, proj in atlas.points:
            rhs += _monomial_on_values(vals, coeff, mono, names) * proj
        checks.append(_entry(
            f"represent[poly{t}]", frob_norm(lhs - rhs),
            TAU_RECON * (1.0 + frob_norm(lhs)),
        ))
    # (ii) atoms lie in the generated algebra
    w = bicommutant([images[n] for n in names], d)
    for i, (_, proj) in enumerate(atlas.points):
        checks.append(_entry(
            f"atom-membership[{i}]", w.membership_residual(proj), TAU_RECON,
        ))
    # (iii) uniqueness: a permuted independent reconstruction must agree
    order = list(rng.permutation(len(atlas.points)))
    for i, j in enumerate(order):
        vals_i, proj_i = atlas.points[j]
        match = [p for v, p in atlas.points
                 if max(abs(a - b) for a, b in zip(v, vals_i)) < 1e-6]
        resid = frob_norm(match[0] - proj_i) if match else 1.0
        checks.append(_entry(f"uniqueness[atom{i}]", resid, TAU_EXT))
    return _finish(scenario, checks, t0)


def _derive_family_measures(
    rho, oracle: NonNegSpectralMeasure, seed: int, n: int = 10
) -> FamilyMeasures:
    """E_P from the representation alone: E_P({x}) = ρ(1_x ⊗ P)."""
    fam = sample_projections(oracle.w1, n=n, seed=seed)
    space = oracle.space
    measures = []
    for p in fam.members:
        atoms = {x: rho(_indicator_field(space, x, p)) for x in space.points()}
        total = sum(atoms.values(),
                    np.zeros((oracle.target_dim,) * 2, dtype=np.complex128))
        measures.append(SpectralMeasure(space=space, atoms=atoms, total=total))
    return FamilyMeasures(family=fam, measures=tuple(measures))


def _indicator_field(space, x, a) -> OperatorField:
    return OperatorField(terms=((lambda y, x=x: 1.0 if y == x else 0.0, a),))


def verify_theorem_b(scenario: Scenario) -> VerificationReport:
    """Bounded 𝒲₁-valued case: reconstruct M from ρ and round-trip it."""
    t0 = time.perf_counter()
    oracle: NonNegSpectralMeasure = scenario.payload["oracle"]
    whole = whole_space(oracle.space)

    def rho(field_: OperatorField) -> np.ndarray:
        return integrate(oracle, field_, whole)

    checks: list[CheckEntry] = []
    rng = np.random.default_rng(scenario.seed + 2)
    # (1)+(2): compressions from ρ, each a spectral measure
    fm = _derive_family_measures(rho, oracle, seed=scenario.seed + 3)
    for i, e_p in enumerate(fm.measures):
        checks.append(_entry(
            f"compression[P{i}]", e_p.validate(),
            TAU_RECON * (1.0 + frob_norm(e_p.total)),
        ))
    # (3) support containment in supp(E_id)
    id_idx = _identity_index(fm.family)
    supp_id = support(fm.measures[id_idx]).members
    for i, e_p in enumerate(fm.measures):
        ok = support(e_p).members <= supp_id
        checks.append(_bool_entry(f"support-containment[P{i}]", ok))
    # (4) assemble M; (round trip vs the oracle atom maps)
    try:
        rebuilt = assemble_from_family(fm, oracle.w1)
    except SpecmeasError as exc:
        checks.append(_bool_entry(f"assemble[{type(exc).__name__}]", False))
        return _finish(scenario, checks, t0)
    for x in oracle.space.points():
        want = oracle.atom_images.get(x)
        got = rebuilt.atom_images.get(x)
        if want is None or got is None:
            checks.append(_bool_entry(f"reconstruction[{x}]", want is got))
            continue
        resid = max(
            frob_norm(g - w) for g, w in zip(got, want)
        )
        checks.append(_entry(
            f"reconstruction[{x}]", resid, 1e-7 * (1.0 + frob_norm(want[0])),
        ))
    # (5) normalization
    checks.append(_entry(
        "normalization",
        frob_norm(rebuilt.total_of_identity() - np.eye(rebuilt.target_dim)),
        TAU_RECON * (1.0 + rebuilt.target_dim),
    ))
    # (6) representation on random fields
    for t in range(20):
        field_ = _random_field(rng, oracle)
        lhs = rho(field_)
        rhs = integrate(rebuilt, field_, whole)
        checks.append(_entry(
            f"represent[F{t}]", frob_norm(lhs - rhs),
            TAU_RECON * (1.0 + frob_norm(lhs)),
        ))
    # (7) boundedness witness for rho_b
    for t in range(5):
        fvals = {x: complex(rng.standard_normal(), rng.standard_normal())
                 for x in oracle.space.points()}
        b = lambda x, fv=fvals: fv[x]
        a = oracle.w1.random_hermitian_element(rng)
        rho_b_a = rho(OperatorField(terms=((b, a),)))
        rho_b_id = rho(OperatorField(terms=((b, oracle.w1.identity()),)))
        bound = op_norm(rho_b_id) * op_norm(a)
        excess = op_norm(rho_b_a) - bound
        checks.append(_entry(
            f"rho_b-bound[{t}]", max(0.0, excess), TAU_RECON * (1.0 + bound),
        ))
    return _finish(scenario, checks, t0)


def _identity_index(fam: ProjectionFamily) -> int:
    eye = np.eye(fam.algebra.ambient_dim)
    for i, p in enumerate(fam.members):
        if frob_norm(p - eye) <= 1e-10:
            return i
    raise SpecmeasError("family lacks the identity")


def _random_field(rng, m: NonNegSpectralMeasure) -> OperatorField:
    terms = []
    for _ in range(int(rng.integers(1, 4))):
        fvals = {x: complex(rng.standard_normal(), rng.standard_normal())
                 for x in m.space.points()}
        a = m.w1.random_hermitian_element(rng)
        terms.append((lambda y, fv=fvals: fv[y], a))
    return OperatorField(terms=tuple(terms))


def verify_theorem_c(scenario: Scenario) -> VerificationReport:
    """Unbounded commutative case on a scalar block model."""
    t0 = time.perf_counter()
    model: blocks.BlockModel = scenario.payload["model"]
    checks: list[CheckEntry] = []
    rng = np.random.default_rng(scenario.seed + 4)
    names = sorted(model.generators)
    # (i) integrability: blockwise normality per generator
    field_list = [_generator_field(model, n) for n in names]
    for i, f in enumerate(field_list):
        rep = blocks.integrability_check(model, f)
        checks.append(_bool_entry(
            f"integrable[field{i};block{rep.worst_block}]", rep.passed,
        ))
    # (ii) density of the compactly dominated domain
    for eps in (1e-4, 1e-10):
        coeffs = {n: np.full(model.block_dim(n), 0.5 ** n) for n in range(model.horizon)}
        member, tail = _truncate_to_eps(coeffs, eps)
        checks.append(_entry(f"density[eps={eps:g}]", tail, eps))
        k = borel(model.space, member.support)
        rep = blocks.d_alpha_check(member, model, k, probes=8,
                                   seed=scenario.seed + 5)
        checks.append(_bool_entry(
            f"density-witness-certified[eps={eps:g}]", rep.status == "certified",
            flags=rep.flags,
        ))
    # (iii) exact representation on finitely supported vectors
    for t in range(6):
        x = _random_domain_vector(rng, model)
        poly = blocks._random_star_polynomial(rng, names, degree=3)
        f = blocks._poly_evaluator(model, poly)
        lhs = blocks.rho_apply(model, f, _unit_coeff(model), x)
        ok, rhs = blocks.spectral_integral_apply(f, model, x)
        resid = lhs.sub(rhs).norm() if ok else 1.0
        checks.append(_entry(
            f"represent[x{t}]", resid, 1e-12 * (1.0 + lhs.norm()),
        ))
    # (iv) compact support of E_{x,x} inside the membership witness
    for t in range(4):
        x = _random_domain_vector(rng, model)
        member, witness = blocks.d0_membership(x)
        k = borel(model.space, witness)
        rep = blocks.d_alpha_check(x, model, k, probes=4, seed=scenario.seed + 6)
        ok = member and rep.status == "certified" and x.support <= k.members
        checks.append(_bool_entry(f"compact-support[x{t}]", ok, flags=rep.flags))
    return _finish(scenario, checks, t0)


def _generator_field(model, name) -> blocks.UnboundedField:
    coeff = _unit_coeff(model)
    return blocks.UnboundedField(terms=((model.generators[name], coeff),))


def _unit_coeff(model):
    return model.w.identity() if model.w is not None else 1.0 + 0.0j


def _truncate_to_eps(coeffs, eps):
    for horizon in range(1, len(coeffs) + 1):
        member, tail = blocks.truncate_to_horizon(coeffs, None, horizon)
        if tail <= eps:
            return member, tail
    return blocks.truncate_to_horizon(coeffs, None, len(coeffs))


def _random_domain_vector(rng, model, supp=3) -> blocks.DomainVector:
    picks = rng.choice(model.horizon, size=min(supp, model.horizon), replace=False)
    comps = {}
    for n in picks:
        d = model.block_dim(int(n))
        comps[int(n)] = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return blocks.DomainVector(comps)


def verify_theorem_d(scenario: Scenario) -> VerificationReport:
    """Unbounded 𝒲-valued case on a matrix block model."""
    t0 = time.perf_counter()
    model: blocks.BlockModel = scenario.payload["model"]
    checks: list[CheckEntry] = []
    rng = np.random.default_rng(scenario.seed + 7)
    names = sorted(model.generators)
    if model.w is None:
        # the W = scalars reduction: delegate wholesale to the C' pipeline
        rep = verify_theorem_c(scenario)
        return VerificationReport(
            scenario=scenario.scenario_id, checks=rep.checks, wall_ms=rep.wall_ms,
        )
    dim = model.w.ambient_dim
    # (1) rho_P integrability per sampled projection
    fam = sample_projections(model.w, n=6, seed=scenario.seed + 8)
    fields = scenario.payload.get("field")
    if fields is not None:
        rep = blocks.integrability_check(model, fields)
        checks.append(_bool_entry(
            f"integrable[injected;block{rep.worst_block}]", rep.passed,
        ))
    for i, p in enumerate(fam.members):
        f = blocks.UnboundedField(terms=((model.generators[names[0]], p),))
        rep = blocks.integrability_check(model, f)
        checks.append(_bool_entry(f"integrable[P{i}]", rep.passed))
    # (2) the blockwise compression E_P has atoms acting as P per block;
    # cross-block orthogonality is structural, so the atom laws remain
    for i, p in enumerate(fam.members):
        worst = max(frob_norm(p @ p - p), frob_norm(p - adjoint(p)))
        checks.append(_entry(f"compression[P{i}]", worst, TAU_RECON))
    # (3) support containment for certified vectors
    for t in range(3):
        x = _random_domain_vector(rng, model)
        _, witness = blocks.d0_membership(x)
        k = borel(model.space, witness)
        y = blocks.truncation_projection(model, k, x)
        checks.append(_entry(
            f"support-containment[x{t}]", x.sub(y).norm(), 1e-12,
        ))
    # (5) representation check on D0
    for t in range(6):
        x = _random_domain_vector(rng, model)
        field_ = _random_unbounded_field(rng, model)
        lhs = _rho_field(model, field_, x)
        rhs = blocks.i_m_apply(field_, model, x)
        checks.append(_entry(
            f"represent[x{t}]", lhs.sub(rhs).norm(),
            1e-12 * (1.0 + lhs.norm()),
        ))
    # (6) domain inclusion: ||rho(b (x) A)x|| <= ||A|| ||rho(b (x) id)x||
    for t in range(4):
        x = _random_domain_vector(rng, model)
        g = model.generators[names[int(rng.integers(len(names)))]]
        a = model.w.random_hermitian_element(rng)
        lhs = blocks.rho_apply(model, g, a, x).norm()
        rhs = op_norm(a) * blocks.rho_apply(model, g, model.w.identity(), x).norm()
        checks.append(_entry(
            f"domain-inclusion[{t}]", max(0.0, lhs - rhs),
            TAU_RECON * (1.0 + rhs),
        ))
    # (7) blockwise functional boundedness witness
    for t in range(4):
        x = _random_domain_vector(rng, model)
        y = _random_domain_vector(rng, model)
        g = model.generators[names[0]]
        a = model.w.random_hermitian_element(rng)
        val = abs(blocks.rho_apply(model, g, a, x).inner(y))
        bound = op_norm(a) * blocks.rho_apply(
            model, g, model.w.identity(), x).norm() * y.norm()
        checks.append(_entry(
            f"functional-bound[{t}]", max(0.0, val - bound),
            TAU_RECON * (1.0 + bound),
        ))
    return _finish(scenario, checks, t0)


def _random_unbounded_field(rng, model) -> blocks.UnboundedField:
    names = sorted(model.generators)
    terms = []
    for _ in range(int(rng.integers(1, 3))):
        g = model.generators[names[int(rng.integers(len(names)))]]
        if model.w is not None:
            dim = model.w.ambient_dim
            a = (rng.standard_normal((dim, dim))
                 + 1j * rng.standard_normal((dim, dim)))
        else:
            a = complex(rng.standard_normal(), rng.standard_normal())
        terms.append((g, a))
    return blocks.UnboundedField(terms=tuple(terms))


def _rho_field(model, field_, x):
    out = blocks.DomainVector({})
    for f, a in field_.terms:
        out = out.add(blocks.rho_apply(model, f, a, x))
    return out


def _finish(scenario, checks, t0) -> VerificationReport:
    wall = int(round(1000.0 * (time.perf_counter() - t0)))
    return VerificationReport(
        scenario=scenario.scenario_id, checks=tuple(checks), wall_ms=wall,
    )


VERIFIERS = {
    "A": verify_theorem_a,
    "B": verify_theorem_b,
    "Cprime": verify_theorem_c,
    "D": verify_theorem_d,
}


def run_scenario(kind: str, seed: int, caps: Caps = Caps()) -> VerificationReport:
    return VERIFIERS[kind](gen_scenario(kind, seed, caps))


def run_suite(
    kind: str, seed: int, count: int, caps: Caps = Caps(), jobs: int = 1
) -> list[VerificationReport]:
    """Independent scenarios seed..seed+count-1, reports sorted by id."""
    seeds = list(range(seed, seed + count))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(
                lambda s: run_scenario(kind, s, caps), seeds
            ))
    else:
        reports = [run_scenario(kind, s, caps) for s in seeds]
    return sorted(reports, key=lambda r: r.scenario)


def characterization_reports(
    scenario: Scenario, tuples: int = 4
) -> list[VerificationReport]:
    """Conditions (1)-(3) on a kind-B oracle family, one report per facet."""
    oracle: NonNegSpectralMeasure = scenario.payload["oracle"]
    fam = sample_projections(oracle.w1, n=10, seed=scenario.seed + 9)
    fm = FamilyMeasures(
        family=fam,
        measures=tuple(oracle.measure_for(p) for p in fam.members),
    )
    rng = np.random.default_rng(scenario.seed + 10)
    checks: list[CheckEntry] = []
    rep1 = condition1_check(fm, trials=8, seed=scenario.seed + 11)
    for e in rep1.entries:
        checks.append(e)
    deltas = _some_sets(oracle.space, rng, 4)
    rep2 = condition2_check(fm, deltas)
    for name, k in rep2.per_set:
        checks.append(_entry(f"condition2[{name}]", k, 1.0 + 1e-9))
    for t in range(tuples):
        p = fam.members[int(rng.integers(len(fam.members)))]
        q = fam.members[int(rng.integers(len(fam.members)))]
        d1, d2 = _some_sets(oracle.space, rng, 2)
        rep3 = condition3_check(fm, p, q, d1, d2, ell_max=64)
        checks.append(_bool_entry(
            f"condition3[tuple{t};rate={rep3.fitted_rate:.2f}]",
            rep3.passed and (rep3.fitted_rate >= 0.8),
        ))
    return [VerificationReport(
        scenario=f"{scenario.scenario_id}-conditions", checks=tuple(checks),
    )]


def _some_sets(space, rng, count):
    pts = space.points()
    out = []
    for _ in range(count):
        mask = rng.random(len(pts)) < 0.5
        out.append(borel(space, [p for p, m in zip(pts, mask) if m]))
    return out


def fault_report(fault: str, seed: int, caps: Caps = Caps()) -> VerificationReport:
    """Inject one fault class and report whether a named check caught it."""
    if fault not in FAULT_CLASSES:
        raise ValueError(f"unknown fault class {fault!r}")
    if fault == "non-normal-block":
        base = gen_scenario("D", seed, caps)
        bad = inject_fault(base, fault)
        model = bad.payload["model"]
        rep = blocks.integrability_check(model, bad.payload["field"])
        detected = not rep.passed
        detail = f"integrable[injected;block{rep.worst_block}]"
    elif fault == "broken-condition1":
        base = _gen_b_nondegenerate(seed, caps)
        bad = inject_fault(base, fault)
        oracle: NonNegSpectralMeasure = bad.payload["oracle"]
        fam = sample_projections(oracle.w1, n=10, seed=seed + 9)
        # adjoin complements: the relations P + (id - P) - id = 0 bind the
        # identity, so a bump on E_id must surface as a condition-1 violation
        eye = np.eye(oracle.w1.ambient_dim, dtype=np.complex128)
        aug = fam.members + tuple(eye - p for p in fam.members[2:])
        fam = ProjectionFamily(
            algebra=fam.algebra, members=aug, spans_algebra=True,
        )
        measures = [oracle.measure_for(p) for p in fam.members]
        idx = _identity_index(fam)
        bump = bad.payload["measure_bump"]
        atoms = dict(measures[idx].atoms)
        lbl = sorted(atoms, key=repr)[0]
        atoms[lbl] = atoms[lbl] + bump * np.eye(oracle.target_dim)
        measures[idx] = SpectralMeasure(
            space=oracle.space, atoms=atoms, total=measures[idx].total,
        )
        fm = FamilyMeasures(family=fam, measures=tuple(measures))
        rep = condition1_check(fm, trials=24, seed=seed + 13)
        detected = not rep.passed
        detail = "condition1"
    else:
        base = gen_scenario("B", seed, caps)
        bad = inject_fault(base, fault)
        rep = verify_theorem_b(bad)
        detected = not rep.passed
        detail = "theorem-b-pipeline"
    return VerificationReport(
        scenario=f"fault:{fault}-{seed}",
        checks=(_bool_entry(f"fault-detected[{detail}]", detected),),
    )


def _gen_b_nondegenerate(seed: int, caps: Caps) -> Scenario:
    # scalar W1 has unique decompositions, so condition (1) is vacuous there;
    # walk deterministic sub-seeds until the algebra has dim >= 2
    for j in range(64):
        sc = gen_scenario("B", (seed << 6) + j, caps)
        if sc.dims[0] >= 2:
            return sc
    raise SpecmeasError("could not generate a nondegenerate kind-B scenario")


def check_measure_file(path) -> VerificationReport:
    """Validate a serialized spectral measure or NNSM document."""
    from .errors import InvalidDocument
    from .serialize import load, measure_from_doc, nnsm_from_doc

    checks: list[CheckEntry] = []
    try:
        doc = load(path)
        if "atom_maps" in doc:
            _, resid = nnsm_from_doc(doc)
            kind = "nnsm"
        else:
            _, resid = measure_from_doc(doc)
            kind = "spectral-measure"
        checks.append(_entry(
            f"{kind}-invariants", resid, TAU_RECON * 10.0,
        ))
    except (InvalidDocument, KeyError, TypeError) as exc:
        checks.append(_bool_entry(f"document[{type(exc).__name__}]", False))
    return VerificationReport(scenario=f"check-measure:{path}", checks=tuple(checks))
