"""Pure-Python SGD epochs. Reference twin of ``_kernels.pyx``.

Both modules expose the same two functions and update their array arguments
in place. Callers guarantee C-contiguous float64/int64 inputs and that every
sample's class (and at least one other class) owns a prototype.
"""

import numpy as np


def glvq_epoch(X, y, order, W, wlabels, omegas, omega_idx, lr_w, lr_m, learn_metric):
    """One pass of GLVQ-family updates over ``X[order]``.

    ``omegas[omega_idx[j]]`` is the metric factor of prototype ``j``: a single
    identity for GLVQ, one shared factor for GMLVQ, one per prototype for LGMLVQ.
    """
    for i in order:
        x = X[i]
        same = wlabels == y[i]
        diff = x - W
        z = np.einsum("jab,jb->ja", omegas[omega_idx], diff)
        d = np.einsum("ja,ja->j", z, z)
        jp = int(np.flatnonzero(same)[np.argmin(d[same])])
        jm = int(np.flatnonzero(~same)[np.argmin(d[~same])])
        dp, dm = d[jp], d[jm]
        s = dp + dm
        if s <= 0.0:
            continue
        xi_p = 2.0 * dm / (s * s)
        xi_m = 2.0 * dp / (s * s)
        op, om = omegas[omega_idx[jp]], omegas[omega_idx[jm]]
        step_p = 2.0 * xi_p * (op.T @ z[jp])
        step_m = 2.0 * xi_m * (om.T @ z[jm])
        if learn_metric:
            grad_p = 2.0 * xi_p * np.outer(z[jp], diff[jp])
            grad_m = -2.0 * xi_m * np.outer(z[jm], diff[jm])
        W[jp] += lr_w * step_p
        W[jm] -= lr_w * step_m
        if learn_metric:
            omegas[omega_idx[jp]] -= lr_m * grad_p
            omegas[omega_idx[jm]] -= lr_m * grad_m


def rslvq_epoch(X, y, order, W, wlabels, sigma, lr):
    """One pass of gradient ascent on ``log p(y | x, W)`` over ``X[order]``."""
    s2 = sigma * sigma
    for i in order:
        same = wlabels == y[i]
        diff = X[i] - W
        a = -np.einsum("ja,ja->j", diff, diff) / (2.0 * s2)
        p = np.exp(a - a.max())
        p /= p.sum()
        a_y = np.where(same, a, -np.inf)
        py = np.exp(a_y - a_y.max())
        py /= py.sum()
        W += (lr / s2) * (py - p)[:, None] * diff
