"""Finite-dimensional von Neumann algebras as concrete matrix *-subalgebras.

Provides bicommutant closure, projection enumeration/sampling, linear
extension from projection families, limiting sequences of hermitian
operators, and joint diagonalization of commuting normal matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InconsistentAssignment,
    NotAbelian,
    NotCommuting,
    NotInSpan,
    NotNormal,
    ShapeMismatch,
    TooLarge,
)
from .linalg import (
    adjoint,
    as_matrix,
    eig_hermitian,
    frob_norm,
    is_projection,
    op_norm,
    random_hermitian,
    require_hermitian,
    require_square,
)
from .tolerances import DELTA_CLUSTER, TAU_ALG, TAU_EXT


def _vec(a: np.ndarray) -> np.ndarray:
    return a.reshape(-1)


def _null_space(a: np.ndarray, cutoff: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (columns) of the null space of a.

    The cutoff is absolute; callers normalize their constraint rows so that
    genuine constraints have singular values of order one while round-off
    noise stays many orders below the cutoff.
    """
    if a.shape[0] < a.shape[1]:
        # pad with zero rows so the thin SVD still returns every right
        # singular vector; a full SVD of a tall stack is far too costly
        a = np.vstack([a, np.zeros((a.shape[1] - a.shape[0], a.shape[1]))])
    _, s, vh = np.linalg.svd(a, full_matrices=False)
    rank = int(np.sum(s > cutoff))
    return adjoint(vh)[:, rank:]


@dataclass(frozen=True)
class VonNeumannAlgebra:
    """*-closed unital matrix algebra with a trace-orthonormal basis.

    The basis is orthonormal with respect to <A,B> = tr(B* A), so projecting
    onto the span is a single inner-product pass.
    """

    ambient_dim: int
    basis: tuple[np.ndarray, ...]
    contains_identity: bool = True

    @property
    def dim(self) -> int:
        return len(self.basis)

    def coefficients(self, a: np.ndarray, tol: float = TAU_ALG) -> np.ndarray:
        """Coordinates of ``a`` in the basis; raises NotInSpan beyond ``tol``."""
        a = require_square(a)
        if a.shape[0] != self.ambient_dim:
            raise ShapeMismatch(
                f"expected dim {self.ambient_dim}, got {a.shape[0]}"
            )
        coeffs = np.array([np.vdot(_vec(b), _vec(a)) for b in self.basis])
        resid = self.membership_residual(a, coeffs)
        if resid > tol * (1.0 + frob_norm(a)):
            raise NotInSpan(f"membership residual {resid:.3e}")
        return coeffs

    def membership_residual(self, a: np.ndarray, coeffs=None) -> float:
        if coeffs is None:
            coeffs = np.array([np.vdot(_vec(b), _vec(a)) for b in self.basis])
        proj = sum(c * b for c, b in zip(coeffs, self.basis))
        return frob_norm(a - proj)

    def contains(self, a: np.ndarray, tol: float = TAU_ALG) -> bool:
        return self.membership_residual(as_matrix(a)) <= tol * (1.0 + frob_norm(a))

    def is_abelian(self, tol: float = TAU_ALG) -> bool:
        for i, a in enumerate(self.basis):
            for b in self.basis[:i]:
                if frob_norm(a @ b - b @ a) > tol:
                    return False
        return True

    def random_hermitian_element(self, rng: np.random.Generator) -> np.ndarray:
        coeffs = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        a = sum(c * b for c, b in zip(coeffs, self.basis))
        return (a + adjoint(a)) / 2.0

    def identity(self) -> np.ndarray:
        return np.eye(self.ambient_dim, dtype=np.complex128)

    def closure_residual(self) -> float:
        """Worst residual of span closure under product, adjoint, identity."""
        worst = 0.0
        for a in self.basis:
            worst = max(worst, self.membership_residual(adjoint(a)))
            for b in self.basis:
                worst = max(worst, self.membership_residual(a @ b))
        if self.contains_identity:
            worst = max(worst, self.membership_residual(self.identity()))
        return worst


def _span_to_algebra(vecs: np.ndarray, dim: int) -> VonNeumannAlgebra:
    """Build an algebra from an orthonormal set of vectorized matrices."""
    basis = tuple(vecs[:, j].reshape(dim, dim) for j in range(vecs.shape[1]))
    return VonNeumannAlgebra(ambient_dim=dim, basis=basis)


def commutant_of_matrices(mats: list[np.ndarray], dim: int) -> VonNeumannAlgebra:
    """Commutant {X : XS = SX for all S in mats and their adjoints}."""
    mats = [require_square(m) for m in mats]
    for m in mats:
        if m.shape[0] != dim:
            raise ShapeMismatch(f"generator dim {m.shape[0]} != ambient {dim}")
    eye = np.eye(dim)
    rows = []
    for s in mats:
        norm = frob_norm(s)
        if norm <= 1e-300:
            continue
        for t in (s / norm, adjoint(s) / norm):
            # vec(XT - TX) in row-major layout; unit-normalized so that
            # genuine constraints have O(1) singular values
            rows.append(np.kron(eye, t.T) - np.kron(t, eye))
    if rows:
        constraint = np.vstack(rows)
        null = _null_space(constraint)
    else:
        null = np.eye(dim * dim, dtype=np.complex128)
    return _span_to_algebra(null, dim)


def commutant(w: VonNeumannAlgebra) -> VonNeumannAlgebra:
    return commutant_of_matrices(list(w.basis), w.ambient_dim)


def bicommutant(generators: list[np.ndarray], ambient_dim: int) -> VonNeumannAlgebra:
    """The von Neumann algebra generated by ``generators``: {gens}''."""
    first = commutant_of_matrices(list(generators), ambient_dim)
    return commutant(first)


@dataclass(frozen=True)
class ProjectionFamily:
    """A list of hermitian projections verified inside an algebra."""

    algebra: VonNeumannAlgebra
    members: tuple[np.ndarray, ...]
    spans_algebra: bool = False

    def __len__(self) -> int:
        return len(self.members)

    def validate(self) -> float:
        worst = 0.0
        for p in self.members:
            worst = max(worst, frob_norm(p @ p - p), frob_norm(p - adjoint(p)))
            worst = max(worst, self.algebra.membership_residual(p))
        if self.spans_algebra:
            worst = max(worst, self.span_deficit())
        return worst

    def span_deficit(self) -> float:
        """Worst distance from an algebra basis element to the member span."""
        if not self.members:
            return math.inf
        cols = np.stack([_vec(p) for p in self.members], axis=1)
        worst = 0.0
        for b in self.algebra.basis:
            target = _vec(b)
            coeffs, *_ = np.linalg.lstsq(cols, target, rcond=None)
            worst = max(worst, float(np.linalg.norm(cols @ coeffs - target)))
        return worst


def enumerate_projections_abelian(w: VonNeumannAlgebra) -> ProjectionFamily:
    """All 2^m projections of an abelian algebra with m minimal projections."""
    if not w.is_abelian():
        raise NotAbelian("algebra basis does not pairwise commute")
    atlas = joint_diagonalize(list(w.basis), ambient_dim=w.ambient_dim)
    minimal = [p for _, p in atlas.points]
    m = len(minimal)
    if m > 16:
        raise TooLarge(f"{m} minimal projections; 2^{m} exceeds enumeration cap")
    members = []
    for mask in range(2**m):
        p = np.zeros((w.ambient_dim, w.ambient_dim), dtype=np.complex128)
        for i in range(m):
            if mask & (1 << i):
                p = p + minimal[i]
        members.append(p)
    return ProjectionFamily(algebra=w, members=tuple(members), spans_algebra=True)


def sample_projections(
    w: VonNeumannAlgebra, n: int, seed: int
) -> ProjectionFamily:
    """Seeded sample of spectral projections of random hermitian elements.

    Always includes 0 and the identity; keeps sampling until the members span
    the algebra when a spanning set of projections exists (or a retry cap is
    hit).  Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    d = w.ambient_dim
    members: list[np.ndarray] = [np.zeros((d, d), dtype=np.complex128)]
    if w.contains_identity:
        members.append(w.identity())
    attempts = 0
    while len(members) < n + 2 or not _spans(members, w):
        attempts += 1
        if attempts > 8 * (n + w.dim) + 64:
            break
        h = w.random_hermitian_element(rng)
        dec = eig_hermitian(h)
        lo, hi = dec.eigenvalues[0], dec.eigenvalues[-1]
        t = rng.uniform(lo, hi) if hi > lo else lo
        p = sum(
            (pr for lam, pr in dec.pairs if lam >= t),
            np.zeros((d, d), dtype=np.complex128),
        )
        if is_projection(p):
            members.append(p)
    return ProjectionFamily(
        algebra=w, members=tuple(members), spans_algebra=_spans(members, w)
    )


def _spans(members: list[np.ndarray], w: VonNeumannAlgebra) -> bool:
    fam = ProjectionFamily(algebra=w, members=tuple(members))
    return fam.span_deficit() <= TAU_ALG


def decompose_over_family(
    family: ProjectionFamily, a: np.ndarray, tol: float = TAU_ALG
) -> np.ndarray:
    """Least-squares coordinates of ``a`` over the family members."""
    cols = np.stack([_vec(p) for p in family.members], axis=1)
    target = _vec(require_square(a))
    coeffs, *_ = np.linalg.lstsq(cols, target, rcond=None)
    resid = float(np.linalg.norm(cols @ coeffs - target))
    if resid > tol * (1.0 + frob_norm(a)):
        raise NotInSpan(f"decomposition residual {resid:.3e}")
    return coeffs


def _pivot_decompose(family: ProjectionFamily, a: np.ndarray) -> np.ndarray:
    """A second, independent decomposition over a pivoted independent subset."""
    cols = np.stack([_vec(p) for p in family.members], axis=1)
    # Greedy pivoting: grow an independent subset in member order.
    chosen: list[int] = []
    for j in range(cols.shape[1]):
        trial = cols[:, chosen + [j]]
        if np.linalg.matrix_rank(trial, tol=1e-10) > len(chosen):
            chosen.append(j)
    sub = cols[:, chosen]
    coeffs, *_ = np.linalg.lstsq(sub, _vec(a), rcond=None)
    full = np.zeros(cols.shape[1], dtype=np.complex128)
    for c, j in zip(coeffs, chosen):
        full[j] = c
    return full


def linear_extend(
    family: ProjectionFamily,
    assignment: list[np.ndarray],
    a: np.ndarray,
    tol: float = TAU_EXT,
) -> np.ndarray:
    """Extend P_i -> assignment[i] linearly to ``a`` in the family's span.

    Two independent decompositions of ``a`` are compared; a disagreement
    beyond ``tol`` means the assignment violates the linear-relation
    condition and InconsistentAssignment is raised.
    """
    if len(assignment) != len(family.members):
        raise ShapeMismatch("assignment length != family size")
    # Every linear relation among the members must be respected by the
    # assignment, including relations no decomposition of ``a`` touches.
    cols = np.stack([_vec(p) for p in family.members], axis=1)
    for v in _null_space(cols).T:
        viol = sum(c * x for c, x in zip(v, assignment))
        scale = 1.0 + max(frob_norm(x) for x in assignment)
        if frob_norm(viol) > tol * scale:
            raise InconsistentAssignment(
                f"assignment breaks a member relation by {frob_norm(viol):.3e}"
            )
    c1 = decompose_over_family(family, a)
    c2 = _pivot_decompose(family, a)
    out1 = sum(c * x for c, x in zip(c1, assignment))
    out2 = sum(c * x for c, x in zip(c2, assignment))
    scale = 1.0 + max(frob_norm(out1), frob_norm(out2))
    if frob_norm(out1 - out2) > tol * scale:
        raise InconsistentAssignment(
            f"two decompositions disagree by {frob_norm(out1 - out2):.3e}"
        )
    return out1


@dataclass(frozen=True)
class LimitingSequence:
    """Riemann-sum approximants S_l of a hermitian operator.

    Partitions are nested dyadic refinements of [a-1, b] where [a, b] covers
    the spectrum.  zeta is the right endpoint of each cell by default ("mid"
    picks midpoints).  Cells with a vanishing resolution increment are not
    stored; the number of stored terms is at most the number of distinct
    eigenvalues.
    """

    source: np.ndarray
    interval: tuple[float, float]
    zeta_rule: str = "right"
    _dec: "object" = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self._dec is None:
            object.__setattr__(self, "_dec", eig_hermitian(self.source))

    @property
    def span(self) -> float:
        a, b = self.interval
        return b - (a - 1.0)

    def refinement_level(self, ell: int) -> int:
        """Dyadic level: mesh <= min(1/ell, span) and strictly below 1."""
        target = min(1.0 / ell, 1.0)
        r = max(1, math.ceil(math.log2(self.span / target)))
        while self.span / 2**r >= target:
            r += 1
        return r

    def mesh(self, ell: int) -> float:
        return self.span / 2 ** self.refinement_level(ell)

    def term(self, ell: int) -> list[tuple[float, np.ndarray]]:
        """The (zeta, R) cells of S_l with nonzero resolution increment."""
        a, _ = self.interval
        mesh = self.mesh(ell)
        ncells = 2 ** self.refinement_level(ell)
        cells: dict[int, list] = {}
        for lam, proj in self._dec.pairs:
            # cell j covers (a-1 + (j-1)*mesh, a-1 + j*mesh]
            j = int(math.ceil((lam - (a - 1.0)) / mesh - 1e-12))
            j = min(max(j, 1), ncells)
            cells.setdefault(j, []).append(proj)
        out = []
        for j in sorted(cells):
            right = (a - 1.0) + j * mesh
            zeta = right if self.zeta_rule == "right" else right - mesh / 2.0
            r_proj = sum(cells[j])
            out.append((zeta, r_proj))
        return out

    def approximant(self, ell: int) -> np.ndarray:
        n = self.source.shape[0]
        s = np.zeros((n, n), dtype=np.complex128)
        for zeta, r_proj in self.term(ell):
            s += zeta * r_proj
        return s

    def error(self, ell: int) -> float:
        return op_norm(self.source - self.approximant(ell))


def limiting_sequence(
    a: np.ndarray, ell_max: int = 64, zeta_rule: str = "right"
) -> LimitingSequence:
    """Limiting sequence of a hermitian matrix, valid for every ell >= 1."""
    a = require_hermitian(a)
    dec = eig_hermitian(a)
    lo, hi = dec.eigenvalues[0], dec.eigenvalues[-1]
    seq = LimitingSequence(
        source=a, interval=(float(lo), float(hi)), zeta_rule=zeta_rule, _dec=dec
    )
    # The 1/ell bound is structural for the right-endpoint rule; verify the
    # stored range anyway and refuse silently wrong constructions.
    for ell in (1, ell_max):
        if seq.error(ell) > 1.0 / ell + 1e-12 * (1.0 + abs(hi)):
            raise AssertionError("limiting sequence failed its 1/ell bound")
    return seq


@dataclass(frozen=True)
class CharacterAtlas:
    """Joint eigenstructure of commuting normals.

    Each point is (values, projection): one complex value per generator and
    the joint eigenprojection.  Projections are mutually orthogonal and sum
    to the identity; distinct points have distinct value tuples.
    """

    points: tuple[tuple[tuple[complex, ...], np.ndarray], ...]

    @property
    def dim(self) -> int:
        return self.points[0][1].shape[0]

    def reconstruct(self, gen_index: int) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for values, proj in self.points:
            out += values[gen_index] * proj
        return out


def _split_by_hermitian(
    blocks: list[np.ndarray], h: np.ndarray, gap: float
) -> list[np.ndarray]:
    """Refine orthonormal column blocks by eigenspaces of h restricted."""
    new_blocks = []
    for v in blocks:
        if v.shape[1] == 1:
            new_blocks.append(v)
            continue
        b = adjoint(v) @ h @ v
        b = (b + adjoint(b)) / 2.0
        vals, vecs = np.linalg.eigh(b)
        i = 0
        while i < len(vals):
            j = i + 1
            while j < len(vals) and vals[j] - vals[j - 1] < gap:
                j += 1
            new_blocks.append(v @ vecs[:, i:j])
            i = j
    return new_blocks


def joint_diagonalize(
    normals: list[np.ndarray],
    ambient_dim: int | None = None,
    tol: float = TAU_ALG,
) -> CharacterAtlas:
    """Joint eigenprojections and eigenvalue tuples of commuting normals.

    Splits the space recursively by the hermitian and antihermitian parts of
    each generator, which realizes the refinement deterministically.
    """
    normals = [require_square(n) for n in normals]
    if not normals:
        if ambient_dim is None:
            raise ShapeMismatch("ambient_dim required for an empty generator list")
        return CharacterAtlas(
            points=(((), np.eye(ambient_dim, dtype=np.complex128)),)
        )
    n_dim = normals[0].shape[0]
    if ambient_dim is not None and ambient_dim != n_dim:
        raise ShapeMismatch("ambient_dim disagrees with generator shape")
    scale = 1.0 + max(op_norm(m) for m in normals)
    for i, a in enumerate(normals):
        if frob_norm(a @ adjoint(a) - adjoint(a) @ a) > tol * scale**2:
            raise NotNormal(f"generator {i} is not normal")
        for k, b in enumerate(normals[:i]):
            if frob_norm(a @ b - b @ a) > tol * scale**2:
                raise NotCommuting(f"generators {k} and {i} do not commute")
            if frob_norm(a @ adjoint(b) - adjoint(b) @ a) > tol * scale**2:
                raise NotCommuting(f"generator {i} vs adjoint of {k}")
    gap = DELTA_CLUSTER * scale
    blocks = [np.eye(n_dim, dtype=np.complex128)]
    for m in normals:
        re = (m + adjoint(m)) / 2.0
        im = (m - adjoint(m)) / 2.0j
        blocks = _split_by_hermitian(blocks, re, gap)
        blocks = _split_by_hermitian(blocks, im, gap)
    raw = []
    for v in blocks:
        values = []
        for m in normals:
            b = adjoint(v) @ m @ v
            values.append(complex(np.trace(b)) / v.shape[1])
        raw.append((tuple(values), v))
    # Merge blocks whose value tuples coincide (within the cluster gap).
    merged: list[tuple[tuple[complex, ...], list[np.ndarray]]] = []
    for values, v in raw:
        for mv, vs in merged:
            if all(abs(a - b) < gap for a, b in zip(values, mv)):
                vs.append(v)
                break
        else:
            merged.append((values, [v]))
    points = []
    for values, vs in merged:
        v = np.hstack(vs)
        proj = v @ adjoint(v)
        points.append((values, (proj + adjoint(proj)) / 2.0))
    points.sort(key=lambda it: tuple((z.real, z.imag) for z in it[0]))
    return CharacterAtlas(points=tuple(points))
