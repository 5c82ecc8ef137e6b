"""Independent reference computations used by the tests.

Nothing here calls into the code paths it checks: basis rows, observation
projections and Gaussian densities are written out from their definitions.
"""
import math

import numpy as np


def rbf_row(t, n_basis, width):
    centers = [j / (n_basis - 1) for j in range(n_basis)]
    act = [math.exp(-((t - c) ** 2) / (2 * width**2)) for c in centers]
    s = sum(act)
    return np.array([a / s for a in act])


def gaussian_density_log(x, mean, cov):
    d = x.shape[0]
    r = x - mean
    sign, logdet = np.linalg.slogdet(cov)
    assert sign > 0
    return -0.5 * (r @ np.linalg.inv(cov) @ r + logdet + d * math.log(2 * math.pi))


def brute_force_responsibilities(mix, obs, t):
    """Per-component responsibilities from the explicit marginal-density formula."""
    k_basis = mix.basis.n_basis
    phi = rbf_row(t, k_basis, mix.basis.h)
    dh = mix.human_dim
    logs = []
    for comp in mix.components:
        # projected mean and covariance written out coordinate by coordinate
        m = np.array([phi @ comp.mean[d * k_basis:(d + 1) * k_basis] for d in range(dh)])
        s = np.empty((dh, dh))
        for i in range(dh):
            for j in range(dh):
                block = comp.cov[i * k_basis:(i + 1) * k_basis, j * k_basis:(j + 1) * k_basis]
                s[i, j] = phi @ block @ phi
        s += mix.basis.obs_noise * np.eye(dh)
        logs.append(math.log(comp.prior) + gaussian_density_log(np.asarray(obs, float), m, s))
    logs = np.array(logs)
    w = np.exp(logs - logs.max())
    return w / w.sum()
