"""Central numerical tolerances.

All equality checks in the library are relative: a residual r against a
reference of size s passes when r <= tol * (1 + s).  That keeps every check
scale-invariant (A and 1e6*A behave identically).
"""

TAU_HERM = 1e-10    # hermiticity residual, Frobenius, relative
TAU_PROJ = 1e-8     # idempotency / orthogonality of projections
TAU_RECON = 1e-8    # reconstruction residuals (spectral sums, products)
TAU_EIG = 1e-9      # eigenvalue accuracy, relative to 1 + op norm
DELTA_CLUSTER = 1e-7  # eigenvalue clustering gap, relative to 1 + op norm
TAU_PSD = 1e-9      # allowed negative slack on eigenvalues of psd matrices
TAU_ALG = 1e-8      # algebra membership / closure residuals
TAU_EXT = 1e-7      # linear-extension well-definedness disagreement
TAU_MEAS = 1e-9     # measure regularity deficit
TAU_LIM = 1e-5      # limiting-sequence limit agreement
