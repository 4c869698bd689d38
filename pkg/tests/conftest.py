import numpy as np

from specmeas import algebra, linalg, measure, nnsm


def tensor_model(seed: int, h_dim: int = 2, n_atoms: int = 3, unitary: bool = True):
    """NNSM on a finite space via Phi_x(A) = U (A (x) D_x) U*.

    The D_x are diagonal projections partitioning C^{n_atoms}, so the model
    is normalized by construction and every compression is a genuine
    spectral measure.
    """
    rng = np.random.default_rng(seed)
    w1 = algebra.bicommutant([linalg.random_hermitian(rng, h_dim)], h_dim)
    while w1.dim < h_dim * h_dim:
        w1 = algebra.bicommutant(
            [linalg.random_hermitian(rng, h_dim), linalg.random_hermitian(rng, h_dim)],
            h_dim,
        )
    k = h_dim * n_atoms
    u = linalg.random_unitary(rng, k) if unitary else np.eye(k, dtype=complex)
    space = measure.DiscreteSpace(labels=tuple(range(n_atoms)))
    atom_images = {}
    for x in range(n_atoms):
        d_x = np.zeros((n_atoms, n_atoms), dtype=complex)
        d_x[x, x] = 1.0
        imgs = np.stack(
            [u @ np.kron(b, d_x) @ linalg.adjoint(u) for b in w1.basis]
        )
        atom_images[x] = imgs
    m = nnsm.NonNegSpectralMeasure(
        space=space, w1=w1, target_dim=k, atom_images=atom_images
    )
    return m, u, rng
