"""Brute-force Casimir energy, written without the package.

Three nested uniform trapezoid rules and nothing else: the in-plane integral
over the whole zone [-pi, pi)^2 (no symmetry folding, no domain splitting),
the continuum q_z integral on M equispaced nodes over [0, 2 pi), and the
literal discrete sum over n = 1 .. 2 N_z.  The per-q_perp difference of sum
and integral is formed before the in-plane accumulation.
"""
import math

import numpy as np


def mode_constants(J, K_e, K_h, S, sigma, alpha):
    A2 = (1 + alpha**2) * (J**2 + sigma * K_h * J / 2)
    delta2 = K_e * (2 * J + K_e) + K_h * (J - sigma * J + K_e)
    D2 = J**2 + sigma * K_h * J + K_h**2 / 4
    C = J + K_e + K_h / 2
    return A2, delta2 - D2 * alpha**2, C, 2 * S / (1 + alpha**2)


def brute_casimir(material, alpha, n_z, n_perp=1024, n_kz=2048, sigmas=(1, -1)):
    """E_Cas per surface unit cell (meV) for a dict-like ``material``."""
    J, K_e, K_h, S = (material[k] for k in ("J", "K_e", "K_h", "S"))
    q = -math.pi + 2 * math.pi * np.arange(n_perp) / n_perp
    lat = 4 * np.sin(q / 2) ** 2  # 2(1 - cos q)
    qz_sum = math.pi * np.arange(1, 2 * n_z + 1) / n_z
    qz_int = 2 * math.pi * np.arange(n_kz) / n_kz
    total_re, total_im = [], []
    for sigma in sigmas:
        A2, gap, C, pref = mode_constants(J, K_e, K_h, S, sigma, alpha)
        w_sum = A2 * 4 * np.sin(qz_sum / 2) ** 2
        w_int = A2 * 4 * np.sin(qz_int / 2) ** 2
        # the -i alpha C term enters 2 N_z times with weight 1/4 in the sum
        # and with weight N_z/2 in the integral
        shift = pref * -1j * alpha * C * (0.25 * len(qz_sum) - 0.5 * n_z)
        for i in range(n_perp):
            e2_perp = A2 * (lat[i] + lat) + gap
            re_s, im_s = _principal_root_sums(e2_perp, w_sum)
            re_i, im_i = _principal_root_sums(e2_perp, w_int)
            per_q_re = pref * (0.25 * re_s - 0.5 * n_z * re_i / n_kz)
            per_q_im = pref * (0.25 * im_s - 0.5 * n_z * im_i / n_kz)
            total_re.append(math.fsum(per_q_re) + shift.real)
            total_im.append(math.fsum(per_q_im) + shift.imag)
    norm = n_perp * n_perp
    return complex(math.fsum(total_re) / norm, math.fsum(total_im) / norm)


def _principal_root_sums(e2_perp, w):
    """Row sums of the principal sqrt(e2_perp + w) as (real, imaginary) parts.

    For real x the principal root is sqrt(max(x, 0)) + i sqrt(max(-x, 0)).
    """
    x = e2_perp[:, None] + w[None, :]
    re = np.sqrt(np.maximum(x, 0.0)).sum(axis=1)
    if x.min() >= 0:
        return re, np.zeros_like(re)
    im = np.sqrt(np.maximum(-x, 0.0)).sum(axis=1)
    return re, im
