from typing import Tuple

import numpy as np

# systems with condition number above 1 / SINGULAR_RTOL count as singular
SINGULAR_RTOL = 1e-12


def solve_batched(matrices: np.ndarray, rhs: np.ndarray, rtol: float = SINGULAR_RTOL) -> Tuple[np.ndarray, np.ndarray]:
    """
    Solve a stack of small dense systems with np.linalg.solve

    LAPACK factors every matrix of the stack on its own, so a solution does
    not depend on which other systems share the batch. Singular or
    ill-conditioned systems are swapped for the identity before solving and
    get a zero solution.

    Args:
        matrices: Array of shape (B, n, n)
        rhs: Array of shape (B, n)
        rtol: Inverse of the largest accepted condition number

    Returns:
        (solutions of shape (B, n), boolean mask of singular systems)
    """
    a = np.array(matrices, dtype=float)
    b = np.array(rhs, dtype=float)
    batch, n = b.shape
    if batch == 0:
        return np.zeros_like(b), np.zeros(0, dtype=bool)
    singular = ~np.all(np.isfinite(a.reshape(batch, -1)), axis=1)
    a[singular] = np.eye(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        condition = np.linalg.cond(a)
    singular |= ~(condition * rtol < 1.0)
    a[singular] = np.eye(n)
    b[singular] = 0.0
    try:
        x = np.linalg.solve(a, b[..., None])[..., 0]
    except np.linalg.LinAlgError:
        x = np.zeros_like(b)
        for row in range(batch):
            try:
                x[row] = np.linalg.solve(a[row], b[row])
            except np.linalg.LinAlgError:
                singular[row] = True
    x[singular] = 0.0
    return x, singular
