"""Hot numerical kernels, written so the same source runs either as plain
NumPy/Python or compiled by numba (see backend.load_kernels).

Everything here works on bare arrays: no package types cross this boundary.
Rates are in NATS throughout (callers convert to bits), and channels are
expected pre-scaled so the noise power is 1 (SINRs are invariant under that
normalization and it keeps the subproblem well conditioned).

Channels carry a leading sample axis: shape (S, ...) with S = 1 for a plain
instantaneous design, S > 1 for sample-average (robust) designs against an
estimation-error distribution.  Per-user rates are averaged across samples
and a shared stream's decodable cap is the min over users of those averages,
matching the ergodic evaluation convention.

Stream-plan tables (dec / intf / elig / owner / priv_of) are documented in
streams.py.  The precoder subproblem is the convex quadratic program in the
precoder columns and the shared-rate splits, solved by a log-barrier Newton
method; the WMMSE driver alternates per-sample MMSE equalizer and weight
updates with that subproblem and is monotone in the (sample-averaged)
weighted sum rate by construction - a non-improving update is rejected and
ends the loop.
"""
import numpy as np

# Names compiled by the numba backend (numba resolves callees lazily at
# first call, so the order is cosmetic).
_JIT_EXPORTS = [
    "build_phi",
    "effective",
    "products",
    "products_stack",
    "rate_table_nats",
    "rate_table_mean_nats",
    "stream_caps_nats",
    "wsr_greedy_nats",
    "ris_objective_nats",
    "ris_fd_grad",
    "_qp_constraint_values",
    "_qp_point_value",
    "qp_precoder_step",
    "mmse_equalizers_stack",
    "wmmse_solve",
    "ergodic_table_nats",
]

_QP_GAP_TOL = 1e-8
_QP_BARRIER_MU = 30.0
_QP_NEWTON_TOL = 1e-9
_QP_MAX_NEWTON = 25
# Shared streams whose surrogate cap is below this (nats) are frozen for the
# iteration; the rate given up is orders below every acceptance tolerance,
# and keeping them would put a near-active constraint in the barrier.
_DEAD_STREAM_FLOOR = 1e-7
# Warm-start margins: fractions of budget / cap left slack so the first
# Newton systems stay well conditioned.
_QP_POWER_MARGIN = 1e-3
_QP_ALLOC_MARGIN = 0.5


def build_phi(kind, sizes, params, n_ris, m):
    """Per-RIS reflection matrices from the flat parameter vector.

    kind 0: diagonal of unit-modulus phases (params are angles).
    kind 1: block-diagonal Cayley map (jX+I)^{-1}(jX-I) of real symmetric
            blocks given by stacked upper-triangular entries.
    """
    phi = np.zeros((n_ris, m, m), dtype=np.complex128)
    if kind == 0:
        for l in range(n_ris):
            for i in range(m):
                phi[l, i, i] = np.exp(1j * params[l * m + i])
        return phi
    per = 0
    for s in range(sizes.shape[0]):
        per += sizes[s] * (sizes[s] + 1) // 2
    for l in range(n_ris):
        off_p = l * per
        off_m = 0
        for s in range(sizes.shape[0]):
            ms = sizes[s]
            x = np.zeros((ms, ms))
            idx = 0
            for r in range(ms):
                for c in range(r, ms):
                    x[r, c] = params[off_p + idx]
                    x[c, r] = x[r, c]
                    idx += 1
            jx = 1j * x
            a = jx + np.eye(ms, dtype=np.complex128)
            b = jx - np.eye(ms, dtype=np.complex128)
            phi[l, off_m:off_m + ms, off_m:off_m + ms] = np.linalg.solve(a, b)
            off_p += ms * (ms + 1) // 2
            off_m += ms
    return phi


def effective(H_d, H_r, g_herm, phi):
    """Composite channels H_d + G^H Phi^H H_r with block-diagonal Phi.

    g_herm is G^H (precomputed by callers: it is constant across the many
    evaluations of one optimization).
    """
    n_ris = phi.shape[0]
    if n_ris == 0 or H_r.shape[0] == 0:
        return H_d.copy()
    m = phi.shape[1]
    w = np.empty_like(H_r)
    for l in range(n_ris):
        w[l * m:(l + 1) * m, :] = (
            np.ascontiguousarray(np.conj(phi[l]).T) @ H_r[l * m:(l + 1) * m, :]
        )
    return H_d + g_herm @ w


def products(V, P):
    """S[k, i] = v_k^H p_i for all users and streams."""
    return np.conj(V).T @ P


def products_stack(V_s, P):
    """Per-sample products: (S, K, n_s)."""
    n_smp = V_s.shape[0]
    k_users = V_s.shape[2]
    n_s = P.shape[1]
    out = np.empty((n_smp, k_users, n_s), dtype=np.complex128)
    for s in range(n_smp):
        out[s] = np.conj(V_s[s]).T @ P
    return out


def rate_table_nats(S, dec, intf):
    """Decode rates ln(1 + SINR) at unit noise; zero where not decoded."""
    k_users, n_s = S.shape
    sp = np.abs(S) ** 2
    rates = np.zeros((k_users, n_s))
    for k in range(k_users):
        for i in range(n_s):
            if not dec[k, i]:
                continue
            interf = 0.0
            for j in range(n_s):
                if intf[k, i, j]:
                    interf += sp[k, j]
            rates[k, i] = np.log(1.0 + sp[k, i] / (interf + 1.0))
    return rates


def rate_table_mean_nats(S_stack, dec, intf):
    """Sample-averaged decode-rate table."""
    n_smp = S_stack.shape[0]
    acc = rate_table_nats(S_stack[0], dec, intf)
    for s in range(1, n_smp):
        acc += rate_table_nats(S_stack[s], dec, intf)
    return acc / n_smp


def stream_caps_nats(rates, dec):
    """Decodable rate per stream: min over its decoders."""
    k_users, n_s = rates.shape
    caps = np.zeros(n_s)
    for i in range(n_s):
        first = True
        for k in range(k_users):
            if dec[k, i]:
                if first or rates[k, i] < caps[i]:
                    caps[i] = rates[k, i]
                    first = False
    return caps


def wsr_greedy_nats(rates, u, dec, elig, priv_of, owner):
    """Weighted sum rate with each shared stream's cap granted to its
    highest-weight eligible user (the value is tie-invariant)."""
    k_users, n_s = rates.shape
    caps = stream_caps_nats(rates, dec)
    wsr = 0.0
    for i in range(n_s):
        if owner[i] >= 0 or caps[i] <= 0.0:
            continue
        best = -1.0
        for k in range(k_users):
            if elig[i, k] and u[k] > best:
                best = u[k]
        if best > 0.0:
            wsr += best * caps[i]
    for k in range(k_users):
        if priv_of[k] >= 0:
            wsr += u[k] * rates[k, priv_of[k]]
    return wsr


def ris_objective_nats(
    params, kind, sizes, n_ris, m, H_d_s, H_r_s, g_herm_s, P, u, dec, intf,
    elig, priv_of, owner,
):
    """Greedy-split weighted sum rate as a function of the RIS parameters
    (precoders fixed), averaged over the channel samples."""
    phi = build_phi(kind, sizes, params, n_ris, m)
    n_smp = H_d_s.shape[0]
    v0 = effective(H_d_s[0], H_r_s[0], g_herm_s[0], phi)
    acc = rate_table_nats(products(v0, P), dec, intf)
    for s in range(1, n_smp):
        v = effective(H_d_s[s], H_r_s[s], g_herm_s[s], phi)
        acc += rate_table_nats(products(v, P), dec, intf)
    return wsr_greedy_nats(acc / n_smp, u, dec, elig, priv_of, owner)


def ris_fd_grad(
    params, step, kind, sizes, n_ris, m, H_d_s, H_r_s, g_herm_s, P, u, dec,
    intf, elig, priv_of, owner,
):
    """Central finite-difference gradient of ris_objective_nats."""
    n_p = params.shape[0]
    grad = np.zeros(n_p)
    work = params.copy()
    for p in range(n_p):
        orig = work[p]
        work[p] = orig + step
        f_hi = ris_objective_nats(
            work, kind, sizes, n_ris, m, H_d_s, H_r_s, g_herm_s, P, u, dec,
            intf, elig, priv_of, owner,
        )
        work[p] = orig - step
        f_lo = ris_objective_nats(
            work, kind, sizes, n_ris, m, H_d_s, H_r_s, g_herm_s, P, u, dec,
            intf, elig, priv_of, owner,
        )
        work[p] = orig
        grad[p] = (f_hi - f_lo) / (2.0 * step)
    return grad


# ---------------------------------------------------------------------------
# Precoder subproblem (log-barrier Newton on precoders + shared-rate splits)
# ---------------------------------------------------------------------------


def _qp_constraint_values(
    Z, d, n_s, V_s, g_re, g_im, w_mse, intf,
    cc_stream, cc_user, av_stream, ap_row, budgets,
):
    """Values of all inequality constraints at Z (all must be < 0).

    Order: shared-rate cap constraints (sample-averaged surrogates), per-AP
    power, split nonnegativity.
    """
    n_smp, n_tx, k_users = V_s.shape
    n_cc = cc_stream.shape[0]
    n_av = av_stream.shape[0]
    n_ap = budgets.shape[0]
    vals = np.empty(n_cc + n_ap + n_av)

    P = np.empty((n_tx, n_s), dtype=np.complex128)
    for j in range(n_s):
        for r in range(n_tx):
            P[r, j] = Z[j * d + r] + 1j * Z[j * d + n_tx + r]
    S = products_stack(V_s, P)
    sp = np.abs(S) ** 2

    for c in range(n_cc):
        i = cc_stream[c]
        k = cc_user[c]
        xi_bar = 0.0
        for s in range(n_smp):
            quad = sp[s, k, i]
            for j in range(n_s):
                if intf[k, i, j]:
                    quad += sp[s, k, j]
            re_gs = (
                g_re[s, k, i] * S[s, k, i].real - g_im[s, k, i] * S[s, k, i].imag
            )
            eps = (
                (g_re[s, k, i] ** 2 + g_im[s, k, i] ** 2) * (quad + 1.0)
                - 2.0 * re_gs + 1.0
            )
            xi_bar += w_mse[s, k, i] * eps - np.log(w_mse[s, k, i])
        xi_bar /= n_smp
        asum = 0.0
        for t in range(n_av):
            if av_stream[t] == i:
                asum += Z[n_s * d + t]
        vals[c] = xi_bar - 1.0 + asum

    for n in range(n_ap):
        pw = 0.0
        for j in range(n_s):
            for r in range(n_tx):
                if ap_row[r] == n:
                    pw += Z[j * d + r] ** 2 + Z[j * d + n_tx + r] ** 2
        vals[n_cc + n] = pw - budgets[n]

    for t in range(n_av):
        vals[n_cc + n_ap + t] = -Z[n_s * d + t]
    return vals


def _qp_point_value(
    Z, t_barrier, d, n_s, V_s, g_re, g_im, w_mse, u, intf, priv_of,
    cc_stream, cc_user, av_stream, av_user, ap_row, budgets,
):
    """(barrier objective, strictly-feasible flag, raw objective) at Z."""
    n_smp, n_tx, k_users = V_s.shape
    P = np.empty((n_tx, n_s), dtype=np.complex128)
    for j in range(n_s):
        for r in range(n_tx):
            P[r, j] = Z[j * d + r] + 1j * Z[j * d + n_tx + r]
    S = products_stack(V_s, P)
    sp = np.abs(S) ** 2

    f0 = 0.0
    for k in range(k_users):
        i = priv_of[k]
        if i < 0:
            continue
        acc = 0.0
        for s in range(n_smp):
            quad = sp[s, k, i]
            for j in range(n_s):
                if intf[k, i, j]:
                    quad += sp[s, k, j]
            re_gs = (
                g_re[s, k, i] * S[s, k, i].real - g_im[s, k, i] * S[s, k, i].imag
            )
            eps = (
                (g_re[s, k, i] ** 2 + g_im[s, k, i] ** 2) * (quad + 1.0)
                - 2.0 * re_gs + 1.0
            )
            acc += w_mse[s, k, i] * eps
        f0 += u[k] * acc / n_smp
    for t in range(av_stream.shape[0]):
        f0 -= u[av_user[t]] * Z[n_s * d + t]

    vals = _qp_constraint_values(
        Z, d, n_s, V_s, g_re, g_im, w_mse, intf,
        cc_stream, cc_user, av_stream, ap_row, budgets,
    )
    barrier = 0.0
    for c in range(vals.shape[0]):
        if vals[c] >= 0.0:
            return 0.0, False, f0
        barrier -= np.log(-vals[c])
    return t_barrier * f0 + barrier, True, f0


def qp_precoder_step(
    V_s, g_re, g_im, w_mse, u, dec, intf, priv_of, owner, elig,
    ap_row, budgets, P_prev,
):
    """One convex precoder/split update with equalizers and weights fixed.

    Returns the new precoder matrix.  The warm start is the previous
    precoder shrunk strictly inside the power budgets, with each live shared
    stream's split started at an interior equal division of its surrogate
    cap; shared streams whose surrogate cap is ~0 are frozen (their split
    stays 0 and their cap constraints are dropped - the true problem puts no
    constraint on the precoder once the split is zero).
    """
    n_smp, n_tx, k_users = V_s.shape
    n_s = P_prev.shape[1]
    n_ap = budgets.shape[0]
    d = 2 * n_tx

    # Strictly feasible precoder start.
    shrink = 1.0
    for n in range(n_ap):
        pw = 0.0
        for j in range(n_s):
            for r in range(n_tx):
                if ap_row[r] == n:
                    pw += P_prev[r, j].real ** 2 + P_prev[r, j].imag ** 2
        if pw > 0.0:
            lim = np.sqrt(budgets[n] * (1.0 - _QP_POWER_MARGIN) / pw)
            if lim < shrink:
                shrink = lim
    P0 = P_prev * shrink
    S0 = products_stack(V_s, P0)
    sp0 = np.abs(S0) ** 2

    # Sample-averaged surrogate caps at the warm start; freeze dead streams.
    m_cap = np.zeros(n_s)
    live = np.zeros(n_s, dtype=np.bool_)
    for i in range(n_s):
        if owner[i] >= 0:
            continue
        cap = 1e30
        any_dec = False
        for k in range(k_users):
            if not dec[k, i]:
                continue
            any_dec = True
            xi_bar = 0.0
            for s in range(n_smp):
                quad = sp0[s, k, i]
                for j in range(n_s):
                    if intf[k, i, j]:
                        quad += sp0[s, k, j]
                re_gs = (
                    g_re[s, k, i] * S0[s, k, i].real
                    - g_im[s, k, i] * S0[s, k, i].imag
                )
                eps = (
                    (g_re[s, k, i] ** 2 + g_im[s, k, i] ** 2) * (quad + 1.0)
                    - 2.0 * re_gs + 1.0
                )
                xi_bar += w_mse[s, k, i] * eps - np.log(w_mse[s, k, i])
            r_hat = 1.0 - xi_bar / n_smp
            if r_hat < cap:
                cap = r_hat
        any_elig = False
        for k in range(k_users):
            if elig[i, k]:
                any_elig = True
        if any_dec and any_elig and cap > _DEAD_STREAM_FLOOR:
            m_cap[i] = cap
            live[i] = True

    # Enumerate split variables and cap constraints for live streams.
    n_av = 0
    n_cc = 0
    for i in range(n_s):
        if not live[i]:
            continue
        for k in range(k_users):
            if elig[i, k]:
                n_av += 1
            if dec[k, i]:
                n_cc += 1
    av_stream = np.empty(n_av, dtype=np.int64)
    av_user = np.empty(n_av, dtype=np.int64)
    cc_stream = np.empty(n_cc, dtype=np.int64)
    cc_user = np.empty(n_cc, dtype=np.int64)
    t = 0
    c = 0
    for i in range(n_s):
        if not live[i]:
            continue
        for k in range(k_users):
            if elig[i, k]:
                av_stream[t] = i
                av_user[t] = k
                t += 1
            if dec[k, i]:
                cc_stream[c] = i
                cc_user[c] = k
                c += 1

    nz = n_s * d + n_av
    Z = np.zeros(nz)
    for j in range(n_s):
        for r in range(n_tx):
            Z[j * d + r] = P0[r, j].real
            Z[j * d + n_tx + r] = P0[r, j].imag
    for i in range(n_s):
        if not live[i]:
            continue
        n_i = 0
        for t in range(n_av):
            if av_stream[t] == i:
                n_i += 1
        for t in range(n_av):
            if av_stream[t] == i:
                Z[n_s * d + t] = (1.0 - _QP_ALLOC_MARGIN) * m_cap[i] / n_i

    # Rank-2 factors of |v_k^H p|^2 in real coordinates, per sample.
    b1 = np.empty((n_smp, k_users, d))
    b2 = np.empty((n_smp, k_users, d))
    for s in range(n_smp):
        for k in range(k_users):
            for r in range(n_tx):
                b1[s, k, r] = V_s[s, r, k].real
                b1[s, k, n_tx + r] = V_s[s, r, k].imag
                b2[s, k, r] = -V_s[s, r, k].imag
                b2[s, k, n_tx + r] = V_s[s, r, k].real
    C = np.empty((n_smp, k_users, d, d))
    for s in range(n_smp):
        for k in range(k_users):
            for p in range(d):
                for q in range(d):
                    C[s, k, p, q] = (
                        b1[s, k, p] * b1[s, k, q] + b2[s, k, p] * b2[s, k, q]
                    )

    n_con = n_cc + n_ap + n_av
    phi0, ok0, f0_start = _qp_point_value(
        Z, 1.0, d, n_s, V_s, g_re, g_im, w_mse, u, intf, priv_of,
        cc_stream, cc_user, av_stream, av_user, ap_row, budgets,
    )
    if not ok0:
        # Warm start should always be interior; bail out conservatively.
        return P_prev.copy()
    scale = 1.0 + abs(f0_start)
    Z_start = Z.copy()

    grad = np.zeros(nz)
    hess = np.zeros((nz, nz))
    gvec = np.zeros(nz)
    inv_smp = 1.0 / n_smp
    t_barrier = 1.0
    while True:
        for _newton in range(_QP_MAX_NEWTON):
            for p in range(nz):
                grad[p] = 0.0
                for q in range(nz):
                    hess[p, q] = 0.0

            P = np.empty((n_tx, n_s), dtype=np.complex128)
            for j in range(n_s):
                for r in range(n_tx):
                    P[r, j] = Z[j * d + r] + 1j * Z[j * d + n_tx + r]
            S = products_stack(V_s, P)
            sr = S.real
            si = S.imag

            # Objective: averaged private-stream surrogate MSEs plus the
            # linear split gain.
            for k in range(k_users):
                i = priv_of[k]
                if i < 0:
                    continue
                for s in range(n_smp):
                    coef = t_barrier * u[k] * inv_smp * w_mse[s, k, i] * (
                        g_re[s, k, i] ** 2 + g_im[s, k, i] ** 2
                    )
                    for j in range(n_s):
                        if j == i or intf[k, i, j]:
                            for p in range(d):
                                grad[j * d + p] += 2.0 * coef * (
                                    sr[s, k, j] * b1[s, k, p]
                                    + si[s, k, j] * b2[s, k, p]
                                )
                            for p in range(d):
                                for q in range(d):
                                    hess[j * d + p, j * d + q] += (
                                        2.0 * coef * C[s, k, p, q]
                                    )
                    lin = t_barrier * u[k] * inv_smp * w_mse[s, k, i]
                    for p in range(d):
                        grad[i * d + p] -= 2.0 * lin * (
                            g_re[s, k, i] * b1[s, k, p]
                            - g_im[s, k, i] * b2[s, k, p]
                        )
            for t in range(n_av):
                grad[n_s * d + t] -= t_barrier * u[av_user[t]]

            vals = _qp_constraint_values(
                Z, d, n_s, V_s, g_re, g_im, w_mse, intf,
                cc_stream, cc_user, av_stream, ap_row, budgets,
            )

            # Shared-rate cap constraints (averaged surrogates).
            for cci in range(n_cc):
                i = cc_stream[cci]
                k = cc_user[cci]
                fc = vals[cci]
                inv = 1.0 / (-fc)
                for p in range(nz):
                    gvec[p] = 0.0
                for s in range(n_smp):
                    wg2 = inv_smp * w_mse[s, k, i] * (
                        g_re[s, k, i] ** 2 + g_im[s, k, i] ** 2
                    )
                    for j in range(n_s):
                        if j == i or intf[k, i, j]:
                            for p in range(d):
                                gvec[j * d + p] += 2.0 * wg2 * (
                                    sr[s, k, j] * b1[s, k, p]
                                    + si[s, k, j] * b2[s, k, p]
                                )
                            for p in range(d):
                                for q in range(d):
                                    hess[j * d + p, j * d + q] += (
                                        2.0 * wg2 * inv * C[s, k, p, q]
                                    )
                    wlin = inv_smp * w_mse[s, k, i]
                    for p in range(d):
                        gvec[i * d + p] -= 2.0 * wlin * (
                            g_re[s, k, i] * b1[s, k, p]
                            - g_im[s, k, i] * b2[s, k, p]
                        )
                for t in range(n_av):
                    if av_stream[t] == i:
                        gvec[n_s * d + t] = 1.0
                for p in range(nz):
                    grad[p] += gvec[p] * inv
                for p in range(nz):
                    gp = gvec[p] * inv
                    if gp != 0.0:
                        for q in range(nz):
                            hess[p, q] += gp * gvec[q] * inv

            # Per-AP power constraints.
            for n in range(n_ap):
                fc = vals[n_cc + n]
                inv = 1.0 / (-fc)
                for p in range(nz):
                    gvec[p] = 0.0
                for j in range(n_s):
                    for r in range(n_tx):
                        if ap_row[r] == n:
                            gvec[j * d + r] = 2.0 * Z[j * d + r]
                            gvec[j * d + n_tx + r] = 2.0 * Z[j * d + n_tx + r]
                            hess[j * d + r, j * d + r] += 2.0 * inv
                            hess[j * d + n_tx + r, j * d + n_tx + r] += 2.0 * inv
                for p in range(nz):
                    grad[p] += gvec[p] * inv
                for p in range(nz):
                    gp = gvec[p] * inv
                    if gp != 0.0:
                        for q in range(nz):
                            hess[p, q] += gp * gvec[q] * inv

            # Split nonnegativity.
            for t in range(n_av):
                a = Z[n_s * d + t]
                grad[n_s * d + t] -= 1.0 / a
                hess[n_s * d + t, n_s * d + t] += 1.0 / (a * a)

            # Relative ridge caps the condition number; directions stay
            # descent directions for the (convex) barrier objective.
            max_diag = 1e-300
            for p in range(nz):
                if hess[p, p] > max_diag:
                    max_diag = hess[p, p]
            for p in range(nz):
                hess[p, p] += 1e-13 * max_diag + 1e-12

            dz = np.linalg.solve(hess, -grad)
            finite = True
            for p in range(nz):
                if not np.isfinite(dz[p]):
                    finite = False
            if not finite:
                break
            decrement = 0.0
            for p in range(nz):
                decrement -= grad[p] * dz[p]
            if decrement / 2.0 < _QP_NEWTON_TOL:
                break

            phi_cur, _, _ = _qp_point_value(
                Z, t_barrier, d, n_s, V_s, g_re, g_im, w_mse, u, intf,
                priv_of, cc_stream, cc_user, av_stream, av_user, ap_row,
                budgets,
            )
            step = 1.0
            accepted = False
            for _ls in range(60):
                Z_try = Z + step * dz
                phi_try, feas, _ = _qp_point_value(
                    Z_try, t_barrier, d, n_s, V_s, g_re, g_im, w_mse, u,
                    intf, priv_of, cc_stream, cc_user, av_stream, av_user,
                    ap_row, budgets,
                )
                if feas and phi_try <= phi_cur - 0.25 * step * decrement:
                    Z = Z_try
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                break

        if n_con / t_barrier < _QP_GAP_TOL * scale:
            break
        t_barrier *= _QP_BARRIER_MU

    # Safeguard: never report a surrogate point worse than the warm start.
    _, _, f0_end = _qp_point_value(
        Z, 1.0, d, n_s, V_s, g_re, g_im, w_mse, u, intf, priv_of,
        cc_stream, cc_user, av_stream, av_user, ap_row, budgets,
    )
    if f0_end > f0_start:
        Z = Z_start
    P_out = np.empty((n_tx, n_s), dtype=np.complex128)
    for j in range(n_s):
        for r in range(n_tx):
            P_out[r, j] = Z[j * d + r] + 1j * Z[j * d + n_tx + r]
    return P_out


def mmse_equalizers_stack(S_stack, dec, intf):
    """Per (sample, user, decoded stream): MMSE equalizer split into re/im
    and the MSE weight 1/eps; plus the sample-averaged rate table."""
    n_smp, k_users, n_s = S_stack.shape
    sp = np.abs(S_stack) ** 2
    g_re = np.zeros((n_smp, k_users, n_s))
    g_im = np.zeros((n_smp, k_users, n_s))
    w_mse = np.ones((n_smp, k_users, n_s))
    rates = np.zeros((k_users, n_s))
    for s in range(n_smp):
        for k in range(k_users):
            for i in range(n_s):
                if not dec[k, i]:
                    continue
                interf = 0.0
                for j in range(n_s):
                    if intf[k, i, j]:
                        interf += sp[s, k, j]
                total = sp[s, k, i] + interf + 1.0
                g = np.conj(S_stack[s, k, i]) / total
                g_re[s, k, i] = g.real
                g_im[s, k, i] = g.imag
                w_mse[s, k, i] = total / (interf + 1.0)
                rates[k, i] += np.log(total / (interf + 1.0))
    return g_re, g_im, w_mse, rates / n_smp


def wmmse_solve(
    V_s, u, dec, intf, priv_of, owner, elig, ap_row, budgets, P0,
    max_iters, rel_tol,
):
    """Alternate per-sample MMSE updates with the convex precoder/split
    subproblem on the sample-averaged surrogate.

    Returns (P, trace, n_trace, converged) with trace the greedy weighted
    sum rate (nats, averaged over samples) after the initial point and each
    accepted update; it is nondecreasing because a non-improving update is
    rejected and ends the loop.
    """
    P = P0.copy()
    S = products_stack(V_s, P)
    rates = rate_table_mean_nats(S, dec, intf)
    wsr = wsr_greedy_nats(rates, u, dec, elig, priv_of, owner)
    trace = np.empty(max_iters + 1)
    trace[0] = wsr
    n_trace = 1
    converged = False
    for _it in range(max_iters):
        g_re, g_im, w_mse, _ = mmse_equalizers_stack(S, dec, intf)
        P_new = qp_precoder_step(
            V_s, g_re, g_im, w_mse, u, dec, intf, priv_of, owner, elig,
            ap_row, budgets, P,
        )
        S_new = products_stack(V_s, P_new)
        rates = rate_table_mean_nats(S_new, dec, intf)
        wsr_new = wsr_greedy_nats(rates, u, dec, elig, priv_of, owner)
        if wsr_new < wsr - 1e-12 * (1.0 + abs(wsr)):
            converged = True
            break
        P = P_new
        S = S_new
        trace[n_trace] = wsr_new
        n_trace += 1
        if abs(wsr_new - wsr) <= rel_tol * max(abs(wsr), 1e-12):
            wsr = wsr_new
            converged = True
            break
        wsr = wsr_new
    return P, trace, n_trace, converged


def ergodic_table_nats(H_d, H_r, g_herm, phi, P, dec, intf, e_d, e_r, e_gh):
    """Mean decode-rate table over pre-drawn channel perturbations.

    e_d/e_r/e_gh stack per-sample additive errors for H_d, H_r, and G^H
    (already scaled by the error standard deviation).
    """
    n_samples = e_d.shape[0]
    k_users = H_d.shape[1]
    n_s = P.shape[1]
    acc = np.zeros((k_users, n_s))
    for s in range(n_samples):
        V = effective(H_d + e_d[s], H_r + e_r[s], g_herm + e_gh[s], phi)
        S = products(V, P)
        acc += rate_table_nats(S, dec, intf)
    return acc / n_samples
