import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specmeas import algebra, blocks, linalg, measure


def number_model(horizon: int = 32) -> blocks.BlockModel:
    """Scalar model with the coordinate generator n (number operator)."""
    return blocks.BlockModel(
        space=measure.DiscreteSpace(horizon=horizon),
        block_dims=(1,) * horizon,
        generators={"num": lambda n: float(n)},
    )


def matrix_model(horizon: int = 16, dim: int = 2, seed: int = 0):
    rng = np.random.default_rng(seed)
    gens = [linalg.random_hermitian(rng, dim)]
    w = algebra.bicommutant(gens, dim)
    model = blocks.BlockModel(
        space=measure.DiscreteSpace(horizon=horizon),
        block_dims=(dim,) * horizon,
        generators={"num": lambda n: float(n), "decay": lambda n: 0.5**n},
        w=w,
    )
    return model, rng


def random_vector(rng, model: blocks.BlockModel, supp=3) -> blocks.DomainVector:
    comps = {}
    for n in rng.choice(model.horizon, size=min(supp, model.horizon), replace=False):
        d = model.block_dim(int(n))
        comps[int(n)] = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return blocks.DomainVector(comps)


def test_domain_vector_arithmetic():
    x = blocks.basis_vector(0, 1)
    y = blocks.basis_vector(3, 1)
    z = x.add(y.scale(2.0))
    assert z.norm() == pytest.approx(np.sqrt(5.0))
    assert z.sub(x).norm() == pytest.approx(2.0)
    assert z.inner(x) == pytest.approx(1.0)
    # zero components are dropped
    assert x.sub(x).support == frozenset()


def test_number_operator_action():
    model = number_model()
    x = blocks.DomainVector({0: np.array([1.0]), 5: np.array([2.0])})
    y = blocks.rho_apply(model, model.generators["num"], 1.0, x)
    # block 0 is killed, block 5 picks up the factor 5
    assert y.support == frozenset({5})
    assert y.component(5, 1)[0] == pytest.approx(10.0)


def test_spectral_integral_and_d0():
    model = number_model()
    x = blocks.DomainVector({2: np.array([1.0]), 7: np.array([1.0])})
    ok, y = blocks.spectral_integral_apply(lambda n: n * n, model, x)
    assert ok
    assert y.component(2, 1)[0] == pytest.approx(4.0)
    assert y.component(7, 1)[0] == pytest.approx(49.0)
    member, witness = blocks.d0_membership(x)
    assert member and witness == frozenset({2, 7})


def test_truncate_to_horizon_density():
    # geometric tail: truncation converges in norm
    coeffs = {n: np.array([0.5**n]) for n in range(40)}
    member, tail = blocks.truncate_to_horizon(coeffs, None, horizon=20)
    assert member.support == frozenset(range(20))
    exact_tail = np.sqrt(sum(0.25**n for n in range(20, 40)))
    assert tail == pytest.approx(exact_tail)
    assert tail <= 1e-5


def test_bounding_sequence_monotone():
    model = number_model(horizon=20)
    fs = [model.generators["num"]]
    d3 = blocks.bounding_sequence(model, fs, 3)
    d7 = blocks.bounding_sequence(model, fs, 7)
    assert d3.members == frozenset(range(4))
    assert d7.members == frozenset(range(8))
    assert d3.members <= d7.members


def test_psi_scalar_matches_rho():
    model = number_model()
    x = blocks.DomainVector({1: np.array([1.0]), 4: np.array([1.0j])})
    f = model.generators["num"]
    got = blocks.psi_apply(f, 2.0 + 0.0j, model, x)
    want = blocks.rho_apply(model, f, 2.0 + 0.0j, x)
    assert got.sub(want).norm() <= 1e-14


def test_psi_matrix_exact_and_certified():
    model, rng = matrix_model(seed=3)
    x = random_vector(rng, model)
    a = linalg.random_complex(rng, 2, 2)
    f = model.generators["decay"]
    got, cert = blocks.psi_apply(f, a, model, x, certify=True)
    want = blocks.rho_apply(model, f, a, x)
    assert got.sub(want).norm() <= 1e-12 * (1 + want.norm())
    assert cert.converged
    # limiting-sequence residuals shrink with ell
    rs = [r for _, r in cert.residual_by_ell]
    assert rs[-1] <= 1e-5


def test_i_m_linearity_and_star():
    model, rng = matrix_model(seed=4)
    x = random_vector(rng, model)
    y = random_vector(rng, model)
    a = linalg.random_complex(rng, 2, 2)
    b = linalg.random_complex(rng, 2, 2)
    ff = blocks.UnboundedField(terms=((model.generators["num"], a),))
    gg = blocks.UnboundedField(terms=((model.generators["decay"], b),))
    combo = ff.combine(2.0, gg, -1.0j)
    lhs = blocks.i_m_apply(combo, model, x)
    rhs = blocks.i_m_apply(ff, model, x).scale(2.0).add(
        blocks.i_m_apply(gg, model, x).scale(-1.0j))
    assert lhs.sub(rhs).norm() <= 1e-10 * (1 + rhs.norm())
    # adjoint law <I(F)x, y> = <x, I(F*)y>
    lhs_ip = blocks.i_m_apply(ff, model, x).inner(y)
    rhs_ip = x.inner(blocks.adjoint_on_d0(ff, model, y))
    assert abs(lhs_ip - rhs_ip) <= 1e-10 * (1 + abs(rhs_ip))


def test_i_m_product_on_d0():
    model, rng = matrix_model(seed=5)
    x = random_vector(rng, model)
    a = linalg.random_complex(rng, 2, 2)
    b = linalg.random_complex(rng, 2, 2)
    ff = blocks.UnboundedField(terms=((model.generators["num"], a),))
    gg = blocks.UnboundedField(terms=((model.generators["decay"], b),))
    lhs = blocks.i_m_apply(ff.product(gg), model, x)
    rhs = blocks.i_m_apply(ff, model, blocks.i_m_apply(gg, model, x))
    assert lhs.sub(rhs).norm() <= 1e-9 * (1 + rhs.norm())


def test_truncation_projection():
    model = number_model()
    x = blocks.DomainVector({1: np.array([1.0]), 9: np.array([1.0])})
    k = measure.borel(model.space, range(5))
    y = blocks.truncation_projection(model, k, x)
    assert y.support == frozenset({1})


def test_d_alpha_certified_inside_k():
    model = number_model()
    k = measure.borel(model.space, range(10))
    x = blocks.DomainVector({2: np.array([1.0]), 8: np.array([1.0])})
    rep = blocks.d_alpha_check(x, model, k)
    assert rep.status == "certified"
    assert "sampled-necessity" in rep.flags


def test_d_alpha_fails_outside_k():
    model = number_model()
    k = measure.borel(model.space, range(3))
    # mass at block 20 where |num| = 20 > alpha_K = 2: some probe must exceed
    x = blocks.DomainVector({20: np.array([1.0])})
    rep = blocks.d_alpha_check(x, model, k, probes=40)
    assert rep.status == "fail"
    assert not rep.passed


def test_integrability_check():
    model, rng = matrix_model(seed=6)
    # hermitian coefficient: blockwise normal
    h = linalg.random_hermitian(rng, 2)
    good = blocks.UnboundedField(terms=((model.generators["num"], h),))
    assert blocks.integrability_check(model, good).passed
    bad = blocks.UnboundedField(
        terms=((model.generators["num"], np.array([[0, 1], [0, 0]], dtype=complex)),)
    )
    rep = blocks.integrability_check(model, bad)
    assert not rep.passed


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_psi_additive_in_operator(seed):
    model, rng = matrix_model(seed=seed)
    x = random_vector(rng, model)
    a = linalg.random_complex(rng, 2, 2)
    b = linalg.random_complex(rng, 2, 2)
    f = model.generators["decay"]
    lhs = blocks.psi_apply(f, a + b, model, x)
    rhs = blocks.psi_apply(f, a, model, x).add(blocks.psi_apply(f, b, model, x))
    assert lhs.sub(rhs).norm() <= 1e-9 * (1 + rhs.norm())


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(1, 31))
def test_domain_inclusion_bound(seed, n):
    # ||rho(b (x) A) x|| <= ||A||_op * ||rho(b) x|| blockwise
    model, rng = matrix_model(horizon=32, seed=seed)
    x = blocks.DomainVector({int(n): rng.standard_normal(2) + 0j})
    a = linalg.random_complex(rng, 2, 2)
    f = model.generators["num"]
    lhs = blocks.rho_apply(model, f, a, x).norm()
    rhs = linalg.op_norm(a) * blocks.rho_apply(model, f, model.w.identity(), x).norm()
    assert lhs <= rhs + 1e-9 * (1 + rhs)
