"""Pure-numpy implementations of the pairwise kernel operations.

Mirrors the compiled extension in ``_ext.pyx``; selected automatically when
the extension is unavailable (or when MORPHOFLOW_FORCE_FALLBACK is set).
Queries are processed in chunks to bound the size of the (chunk, n) pairwise
temporaries.
"""

import numpy as np

_CHUNK = 1024


def _kappa(t):
    return (1.0 + t + 2.0 * t * t / 15.0 + t**3 / 15.0) * np.exp(-t)


def _dkappa_over_t(t):
    # kappa'(t)/t = -exp(-t) (11 - t + t^2)/15, smooth through t = 0
    return -np.exp(-t) * (11.0 - t + t * t) / 15.0


def gram(points, sigma):
    """Kernel Gram matrix G[i, j] = kappa(|x_i - x_j| / sigma)."""
    points = np.asarray(points, dtype=np.float64)
    diff = points[:, None, :] - points[None, :, :]
    t = np.sqrt(diff[..., 0] ** 2 + diff[..., 1] ** 2) / sigma
    return _kappa(t)


def eval_field(points, momenta, queries, sigma):
    """Evaluate v(q) = sum_i kappa(|q - x_i|/sigma) a_i and its Jacobian.

    Returns (values, jacobians) of shapes (m, 2) and (m, 2, 2) with
    jacobians[q] = sum_i a_i outer grad_q kappa(|q - x_i|/sigma).
    """
    points = np.asarray(points, dtype=np.float64)
    momenta = np.asarray(momenta, dtype=np.float64)
    queries = np.asarray(queries, dtype=np.float64)
    m = queries.shape[0]
    values = np.empty((m, 2))
    jac = np.empty((m, 2, 2))
    inv_s2 = 1.0 / (sigma * sigma)
    for lo in range(0, m, _CHUNK):
        q = queries[lo : lo + _CHUNK]
        diff = q[:, None, :] - points[None, :, :]  # (c, n, 2)
        t = np.sqrt(diff[..., 0] ** 2 + diff[..., 1] ** 2) / sigma
        values[lo : lo + _CHUNK] = _kappa(t) @ momenta
        g = diff * (_dkappa_over_t(t) * inv_s2)[..., None]  # (c, n, 2)
        jac[lo : lo + _CHUNK] = np.einsum("cnr,cnd->crd", np.broadcast_to(
            momenta[None, :, :], g.shape), g)
    return values, jac


def grad_tensor(points, queries, sigma):
    """Gradients of the scalar kernel sections at the query points.

    Returns g of shape (2, m, n) with g[d, q, i] the d-component of
    grad_q kappa(|q - x_i|/sigma); component planes are C-contiguous.
    """
    points = np.asarray(points, dtype=np.float64)
    queries = np.asarray(queries, dtype=np.float64)
    m, n = queries.shape[0], points.shape[0]
    out = np.empty((2, m, n))
    inv_s2 = 1.0 / (sigma * sigma)
    for lo in range(0, m, _CHUNK):
        q = queries[lo : lo + _CHUNK]
        diff = q[:, None, :] - points[None, :, :]
        t = np.sqrt(diff[..., 0] ** 2 + diff[..., 1] ** 2) / sigma
        h = _dkappa_over_t(t) * inv_s2
        out[0, lo : lo + _CHUNK] = diff[..., 0] * h
        out[1, lo : lo + _CHUNK] = diff[..., 1] * h
    return out
