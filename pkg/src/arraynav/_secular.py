"""Rank-one-downdate eigensolver for the nulled-CAF grid.

Per grid cell the interference Gram is G(l) - m m^H / L_c, a rank-one downdate
of a Doppler-independent matrix. In the eigenbasis of G(l) (one 8x8
eigendecomposition per code phase, shared by all Doppler bins) the problem
becomes diag(lam) - rho q q^T with real nonnegative q, whose eigenvalues are
the roots of the secular equation f(mu) = 1 - rho * sum_i q_i^2 / (lam_i - mu)
bracketed by the interlacing property. Eigenvector mass on the matched-filter
vector follows from (w_j^T q)^2 = (sum_i q_i^2/(lam_i - mu_j))^2 /
(sum_i q_i^2/(lam_i - mu_j)^2), so no eigenvectors are ever formed.
"""

import numba
import numpy as np


@numba.njit(cache=True, fastmath=True)
def _top_split(lam, q2, rho, null_dim, scale):
    """Sum of the top null_dim eigenvalues of diag(lam) - rho*q q^T and of the
    squared projections of q onto their eigenvectors. lam must be descending."""
    b = lam.shape[0]
    tiny = 1e-14 * scale if scale > 0.0 else 1e-300
    top_sum = 0.0
    proj_sum = 0.0
    for j in range(null_dim):
        if j + 1 < b:
            lo = lam[j + 1]
        else:
            total = 0.0
            for i in range(b):
                total += q2[i]
            lo = lam[b - 1] - rho * total
        hi = lam[j]
        if hi - lo < tiny:
            # Deflated interval: eigenvalue pinned at lam_j, eigenvector ~ e_j.
            top_sum += hi
            proj_sum += q2[j]
            continue
        a, c = lo, hi
        mu = 0.5 * (a + c)
        for _ in range(60):
            f = 1.0
            fp = 0.0
            for i in range(b):
                d = lam[i] - mu
                if -tiny < d < tiny:
                    d = tiny if d >= 0.0 else -tiny
                t = q2[i] / d
                f -= rho * t
                fp -= rho * t / d
            if f > 0.0:
                a = mu
            else:
                c = mu
            step = f / fp if fp != 0.0 else 0.0
            mu_next = mu - step
            if mu_next <= a or mu_next >= c:
                mu_next = 0.5 * (a + c)
            if abs(mu_next - mu) <= 1e-13 * (abs(mu) + scale):
                mu = mu_next
                break
            mu = mu_next
        top_sum += mu
        s1 = 0.0
        s2 = 0.0
        for i in range(b):
            d = lam[i] - mu
            if -tiny < d < tiny:
                d = tiny if d >= 0.0 else -tiny
            s1 += q2[i] / d
            s2 += q2[i] / (d * d)
        if s2 > 0.0:
            proj_sum += s1 * s1 / s2
    return top_sum, proj_sum


@numba.njit(cache=True)
def nulled_caf_kernel(lam, q2, m2, tr_g, rho, null_dim, out):
    """Fill out[l, f] with the nulled CAF over a (code phase x Doppler) grid.

    lam: (L, B) descending eigenvalues of G(l); q2: (L, F, B) squared moduli of
    the matched filter in each G(l) eigenbasis; m2: (L, F) matched-filter
    energies; tr_g: (L,) Gram traces; rho = 1/L_c.
    """
    n_l, n_f = out.shape
    for il in range(n_l):
        scale = lam[il, 0] if lam[il, 0] > 0.0 else 0.0
        for jf in range(n_f):
            top_sum, proj_sum = _top_split(lam[il], q2[il, jf], rho, null_dim, scale)
            num = m2[il, jf] - proj_sum
            if num < 0.0:
                num = 0.0
            den = tr_g[il] - m2[il, jf] * rho - top_sum + num * rho
            out[il, jf] = num / den if den > 1e-300 else 0.0
