"""Blockwise-countable model of the unbounded theory.

The Hilbert space is a countable direct sum of finite blocks; finitely
supported vectors form the dense domain.  Algebra generators act diagonally:
the image of b (x) A on block n is f_b(n) * A, where f_b is the generator's
scalar value function.  Closures are never materialized; every operator is
evaluated on finitely supported vectors, where all sums are finite and exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import VonNeumannAlgebra, limiting_sequence
from .errors import DimMismatch, ShapeMismatch
from .linalg import (
    adjoint,
    frob_norm,
    positive_negative_parts,
    require_square,
)
from .measure import BorelSet, DiscreteSpace, borel
from .tolerances import TAU_LIM, TAU_RECON


@dataclass(frozen=True)
class BlockModel:
    """Countable block-diagonal carrier for unbounded representations.

    ``generators`` maps a generator name to a callable n -> complex.  When
    ``w`` is present all blocks share its ambient dimension and b (x) A acts
    blockwise as f_b(n) * A; when it is None the model is scalar and block
    dimensions may vary.
    """

    space: DiscreteSpace
    block_dims: tuple
    generators: dict  # name -> callable int -> complex
    w: VonNeumannAlgebra | None = None

    def __post_init__(self):
        if self.space.is_finite:
            raise ShapeMismatch("block models live over countable spaces")
        if len(self.block_dims) != self.space.horizon:
            raise ShapeMismatch("one block dimension per point up to the horizon")
        if any(d < 1 for d in self.block_dims):
            raise ShapeMismatch("block dimensions must be >= 1")
        if self.w is not None:
            if any(d != self.w.ambient_dim for d in self.block_dims):
                raise ShapeMismatch(
                    "with a nontrivial algebra all blocks share its dimension"
                )

    @property
    def horizon(self) -> int:
        return self.space.horizon

    def block_dim(self, n: int) -> int:
        return self.block_dims[n]

    def generator_value(self, name: str, n: int) -> complex:
        return complex(self.generators[name](n))


@dataclass(frozen=True)
class DomainVector:
    """Finitely supported vector: per supported block, a dense component."""

    components: dict  # block index -> ndarray

    def __post_init__(self):
        clean = {
            n: np.asarray(v, dtype=np.complex128).reshape(-1)
            for n, v in self.components.items()
            if np.linalg.norm(v) > 0.0
        }
        object.__setattr__(self, "components", clean)

    @property
    def support(self) -> frozenset:
        return frozenset(self.components)

    def component(self, n: int, dim: int) -> np.ndarray:
        v = self.components.get(n)
        if v is None:
            return np.zeros(dim, dtype=np.complex128)
        return v

    def norm(self) -> float:
        return float(
            np.sqrt(sum(np.vdot(v, v).real for v in self.components.values()))
        )

    def scale(self, lam: complex) -> "DomainVector":
        return DomainVector({n: lam * v for n, v in self.components.items()})

    def add(self, other: "DomainVector") -> "DomainVector":
        out = dict(self.components)
        for n, v in other.components.items():
            if n in out:
                if out[n].shape != v.shape:
                    raise DimMismatch(f"block {n} dims differ")
                out[n] = out[n] + v
            else:
                out[n] = v
        return DomainVector(out)

    def sub(self, other: "DomainVector") -> "DomainVector":
        return self.add(other.scale(-1.0))

    def inner(self, other: "DomainVector") -> complex:
        """<self, other> summed over common blocks."""
        total = 0.0 + 0.0j
        for n, v in self.components.items():
            u = other.components.get(n)
            if u is not None:
                total += np.vdot(u, v)  # conjugates u
        return complex(total)


def basis_vector(n: int, dim: int, slot: int = 0) -> DomainVector:
    v = np.zeros(dim, dtype=np.complex128)
    v[slot] = 1.0
    return DomainVector({n: v})


@dataclass(frozen=True)
class UnboundedField:
    """Finite sum of terms f (x) A with f a function of the block index.

    A is an ndarray for matrix-algebra models, or a complex scalar for
    scalar models.  Boundedness over the space is intensional: values are
    only ever needed on finite supports.
    """

    terms: tuple  # of (callable, ndarray | complex)

    def star(self) -> "UnboundedField":
        out = []
        for f, a in self.terms:
            a_star = adjoint(a) if isinstance(a, np.ndarray) else np.conj(a)
            out.append((_conj(f), a_star))
        return UnboundedField(terms=tuple(out))

    def product(self, other: "UnboundedField") -> "UnboundedField":
        out = []
        for f, a in self.terms:
            for g, b in other.terms:
                ab = a @ b if isinstance(a, np.ndarray) else a * b
                out.append((_times(f, g), ab))
        return UnboundedField(terms=tuple(out))

    def combine(self, alpha: complex, other: "UnboundedField",
                beta: complex) -> "UnboundedField":
        left = tuple((_scaled(f, alpha), a) for f, a in self.terms)
        right = tuple((_scaled(g, beta), b) for g, b in other.terms)
        return UnboundedField(terms=left + right)

    def block_action(self, n: int, dim: int) -> np.ndarray:
        """The matrix by which the field acts on block n."""
        out = np.zeros((dim, dim), dtype=np.complex128)
        for f, a in self.terms:
            fa = complex(f(n))
            if isinstance(a, np.ndarray):
                out += fa * a
            else:
                out += fa * a * np.eye(dim)
        return out

    def boundedness_certificate(self, horizon: int) -> tuple:
        """Per term: sup of |f| over the queried horizon."""
        return tuple(
            max(abs(complex(f(n))) for n in range(horizon))
            for f, _ in self.terms
        )


def _conj(f):
    return lambda n: np.conj(f(n))


def _times(f, g):
    return lambda n: f(n) * g(n)


def _scaled(f, lam):
    return lambda n: lam * f(n)


def bounding_sequence(model: BlockModel, fs: list, n: int) -> BorelSet:
    """Delta_n = {k <= horizon : |f_j(k)| <= n for all j}.

    Evaluated up to the model horizon; the sets increase in n and exhaust
    the space since every f is finite pointwise.
    """
    members = [
        k for k in range(model.horizon)
        if all(abs(complex(f(k))) <= n for f in fs)
    ]
    return borel(model.space, members)


def spectral_integral_apply(f, model: BlockModel, x: DomainVector,
                            atom=None) -> tuple[bool, DomainVector]:
    """Apply the spectral integral of f to a finitely supported vector.

    ``atom`` optionally maps a block index to the projection E({n}) acting
    within the block (default: the identity, the canonical blockwise
    resolution).  Finitely supported vectors are always in the domain.
    """
    out = {}
    for n, v in x.components.items():
        fn = complex(f(n))
        if atom is None:
            out[n] = fn * v
        else:
            out[n] = fn * (atom(n) @ v)
    return True, DomainVector(out)


def d0_membership(x: DomainVector) -> tuple[bool, frozenset]:
    """Membership in D0 with the support as the compact witness.

    In the blockwise model D0 is exactly the set of finitely supported
    vectors, so every DomainVector is a member.
    """
    return True, x.support


def truncate_to_horizon(coeffs, dims, horizon: int) -> tuple[DomainVector, float]:
    """D0 density witness: truncate target block coefficients at a horizon.

    ``coeffs`` maps block index -> component array for an (infinitely
    supported) target; returns the member and the discarded tail mass.
    """
    kept = {n: v for n, v in coeffs.items() if n < horizon}
    tail = sum(
        float(np.vdot(np.asarray(v), np.asarray(v)).real)
        for n, v in coeffs.items() if n >= horizon
    )
    return DomainVector(kept), float(np.sqrt(tail))


def rho_apply(model: BlockModel, f, a, x: DomainVector) -> DomainVector:
    """rho(b (x) A) x: block n of the result is f(n) * A x_n (exact)."""
    out = {}
    for n, v in x.components.items():
        fn = complex(f(n))
        if isinstance(a, np.ndarray):
            out[n] = fn * (a @ v)
        else:
            out[n] = fn * a * v
    return DomainVector(out)


@dataclass(frozen=True)
class PsiCertificate:
    """Limiting-sequence convergence evidence for a preintegral value."""

    residual_by_ell: tuple  # of (ell, residual against the exact value)
    converged: bool


def psi_apply(
    f, a, model: BlockModel, x: DomainVector, certify: bool = False
):
    """Preintegral psi(f, A) x on a finitely supported vector.

    A is split into four positive parts; each positive part has a finite
    spectral decomposition sum lambda_k P_k and psi(f, B) x is the exact sum
    of lambda_k f(n) P_k x_n.  The value equals the direct blockwise action.
    With ``certify`` the limiting-sequence route psi(f, S_l(B)) x is
    evaluated at growing l and its approach to the exact value is reported.
    """
    if not isinstance(a, np.ndarray):
        return _maybe_certified(rho_apply(model, f, a, x), f, a, model, x, certify)
    a = require_square(a)
    re = (a + adjoint(a)) / 2.0
    im = (a - adjoint(a)) / 2.0j
    parts = []
    for h, unit in ((re, 1.0), (im, 1.0j)):
        plus, minus = positive_negative_parts(h)
        parts.append((plus, unit))
        parts.append((minus, -unit))
    result = DomainVector({})
    for b_part, sign in parts:
        if frob_norm(b_part) == 0.0:
            continue
        # exact finite spectral decomposition
        from .linalg import eig_hermitian

        for lam, proj in eig_hermitian(b_part).pairs:
            if lam == 0.0:
                continue
            result = result.add(
                rho_apply(model, f, proj, x).scale(sign * lam)
            )
    if not certify:
        return result
    return result, _limit_certificate(f, a, model, x, result)


def _maybe_certified(value, f, a, model, x, certify):
    if not certify:
        return value
    cert = PsiCertificate(residual_by_ell=((1, 0.0),), converged=True)
    return value, cert


def _limit_certificate(f, a, model, x, exact: DomainVector) -> PsiCertificate:
    """Evaluate psi via S_l for the four positive parts of A at a few l."""
    re = (a + adjoint(a)) / 2.0
    im = (a - adjoint(a)) / 2.0j
    parts = []
    for h, unit in ((re, 1.0), (im, 1.0j)):
        plus, minus = positive_negative_parts(h)
        parts.append((plus, unit))
        parts.append((minus, -unit))
    seqs = [
        (limiting_sequence(b, ell_max=1), sign)
        for b, sign in parts if frob_norm(b) > 0.0
    ]
    residuals = []
    scale = 1.0 + exact.norm()
    for ell in (4, 64, 1 << 20):
        approx = DomainVector({})
        for seq, sign in seqs:
            for zeta, r_proj in seq.term(ell):
                approx = approx.add(
                    rho_apply(model, f, r_proj, x).scale(sign * zeta)
                )
        residuals.append((ell, approx.sub(exact).norm() / scale))
    return PsiCertificate(
        residual_by_ell=tuple(residuals),
        converged=residuals[-1][1] <= TAU_LIM,
    )


def i_m_apply(field_: UnboundedField, model: BlockModel,
              x: DomainVector) -> DomainVector:
    """Integral of a field applied on D0: termwise preintegral sum.

    The closure agrees with the preintegral on finitely supported vectors,
    so this is the closure's action there.
    """
    out = DomainVector({})
    for f, a in field_.terms:
        out = out.add(psi_apply(f, a, model, x))
    return out


def adjoint_on_d0(field_: UnboundedField, model: BlockModel,
                  x: DomainVector) -> DomainVector:
    """Action of the integral of F* (conjugate functions, adjoint operators)."""
    return i_m_apply(field_.star(), model, x)


def truncation_projection(model: BlockModel, k: BorelSet,
                          x: DomainVector) -> DomainVector:
    """M(K)(id) x: keep blocks inside K."""
    return DomainVector(
        {n: v for n, v in x.components.items() if n in k}
    )


@dataclass(frozen=True)
class DAlphaReport:
    certified: bool
    probe_residuals: tuple  # of (probe name, max(0, ||rho(b)x|| - alpha_K(b)||x||))
    status: str  # "certified" | "sampled-pass" | "fail"
    flags: tuple = ()

    @property
    def passed(self) -> bool:
        return self.status != "fail"


def d_alpha_check(
    x: DomainVector,
    model: BlockModel,
    k: BorelSet,
    probes: int = 20,
    seed: int = 0,
) -> DAlphaReport:
    """Membership test for the compactly-dominated vectors D_{alpha_K}.

    SUFFICIENT: support(x) inside K certifies membership exactly, since
    blockwise ||rho(b) x||^2 = sum |f_b(n)|^2 ||x_n||^2 is dominated by
    sup_{n in K} |f_b(n)|^2 ||x||^2.  NECESSARY (sampled): the inequality is
    probed on random *-polynomials in the generators.
    """
    rng = np.random.default_rng(seed)
    certified = bool(x.support) and all(n in k for n in x.support)
    if not x.support:
        certified = True  # the zero vector is trivially a member
    names = sorted(model.generators)
    norm_x = x.norm()
    k_points = [n for n in range(model.horizon) if n in k]
    residuals = []
    for t in range(probes):
        poly = _random_star_polynomial(rng, names, degree=2)
        f = _poly_evaluator(model, poly)
        y = rho_apply(model, f, 1.0 + 0.0j, x) if model.w is None else \
            rho_apply(model, f, model.w.identity(), x)
        alpha = max((abs(f(n)) for n in k_points), default=0.0)
        excess = y.norm() - alpha * norm_x
        residuals.append((f"probe{t}", max(0.0, float(excess))))
    tol = TAU_RECON * (1.0 + norm_x)
    sampled_pass = all(r <= tol for _, r in residuals)
    if certified and sampled_pass:
        status = "certified"
    elif sampled_pass:
        status = "sampled-pass"
    else:
        status = "fail"
    return DAlphaReport(
        certified=certified,
        probe_residuals=tuple(residuals),
        status=status,
        flags=("sampled-necessity",),
    )


def _random_star_polynomial(rng: np.random.Generator, names, degree: int):
    """Random *-polynomial: list of (coeff, ((name, conj?) ...)) monomials."""
    monomials = []
    for _ in range(int(rng.integers(1, 4))):
        deg = int(rng.integers(0, degree + 1))
        factors = tuple(
            (names[int(rng.integers(len(names)))], bool(rng.integers(2)))
            for _ in range(deg)
        ) if names else ()
        coeff = complex(rng.standard_normal(), rng.standard_normal())
        monomials.append((coeff, factors))
    return monomials


def _poly_evaluator(model: BlockModel, monomials):
    def f(n: int) -> complex:
        total = 0.0 + 0.0j
        for coeff, factors in monomials:
            term = coeff
            for name, conj in factors:
                v = model.generator_value(name, n)
                term *= np.conj(v) if conj else v
            total += term
        return total

    return f


@dataclass(frozen=True)
class IntegrabilityReport:
    worst_block: int
    worst_residual: float
    passed: bool


def integrability_check(
    model: BlockModel, field_: UnboundedField, horizon: int | None = None
) -> IntegrabilityReport:
    """Blockwise normality of the field's action (integrability proxy)."""
    horizon = model.horizon if horizon is None else min(horizon, model.horizon)
    worst_block, worst = 0, 0.0
    passed = True
    for n in range(horizon):
        b = field_.block_action(n, model.block_dim(n))
        comm = b @ adjoint(b) - adjoint(b) @ b
        scale = 1.0 + frob_norm(b) ** 2
        resid = frob_norm(comm) / scale
        if resid > worst:
            worst_block, worst = n, resid
        if resid > TAU_RECON:
            passed = False
    return IntegrabilityReport(
        worst_block=worst_block, worst_residual=worst, passed=passed
    )
