"""Per-path scan kernels.

Every kernel walks one path's row arrays (times, cont, jump) once.  Bounded
variation paths (sigma == 0) are treated exactly: barrier engagement times
inside a drift segment are solved in closed form, and discounted regulator
accruals use the exact integral of e^{-q t} over the engaged part.  With
sigma > 0 the continuous part is lumped at row right endpoints; crossing
diagnostics then use Brownian-bridge probabilities with one uniform per row
(upper barrier tested first, lower on the conditional residual), so crossing
TIMES are attributed to row right endpoints while the crossing indicator is
grid-bias corrected.

Coupled kernels evolve both states in one pass and accumulate the regulator
difference series directly; subtracting separately accumulated trajectories
would drift by ~1e-11 over 1e4 events, an order above the pathwise bands
these series are checked against.
"""
import math

import numpy as np
from numba import njit

_OPTS = dict(cache=True, nogil=True)


@njit(**_OPTS)
def reflect_rows(times, cont, jump, x, a, d, is_bv):
    """Doubly reflected surplus on [0, a].

    Returns (m, t, U, L, R, dLa, dRa): m rows; row 0 is the time-0 state after
    the initial lump; dLa/dRa are the atomic parts of each row's regulator
    increments (the remainder accrued uniformly over the preceding interval,
    which extra rows emitted at engagement times make exact)."""
    n = times.size
    cap = 2 * n + 4
    t_o = np.empty(cap)
    u_o = np.empty(cap)
    l_o = np.empty(cap)
    r_o = np.empty(cap)
    la_o = np.empty(cap)
    ra_o = np.empty(cap)
    u = x
    L = 0.0
    R = 0.0
    la = 0.0
    ra = 0.0
    if x > a:
        la = x - a
        L = la
        u = a
    elif x < 0.0:
        ra = -x
        R = ra
        u = 0.0
    t_o[0] = 0.0
    u_o[0] = u
    l_o[0] = L
    r_o[0] = R
    la_o[0] = la
    ra_o[0] = ra
    m = 1
    tp = 0.0
    for i in range(n):
        t = times[i]
        la = 0.0
        ra = 0.0
        if is_bv:
            dt = t - tp
            if d > 0.0:
                w = u + d * dt
                if w > a:
                    if u < a:
                        th = tp + (a - u) / d
                        if th > tp and th < t:
                            t_o[m] = th
                            u_o[m] = a
                            l_o[m] = L
                            r_o[m] = R
                            la_o[m] = 0.0
                            ra_o[m] = 0.0
                            m += 1
                    L += w - a
                    u = a
                else:
                    u = w
            elif d < 0.0:
                w = u + d * dt
                if w < 0.0:
                    if u > 0.0:
                        th = tp + u / (-d)
                        if th > tp and th < t:
                            t_o[m] = th
                            u_o[m] = 0.0
                            l_o[m] = L
                            r_o[m] = R
                            la_o[m] = 0.0
                            ra_o[m] = 0.0
                            m += 1
                    R += -w
                    u = 0.0
                else:
                    u = w
        else:
            w = u + cont[i]
            if w > a:
                la = w - a
                L += la
                u = a
            elif w < 0.0:
                ra = -w
                R += ra
                u = 0.0
            else:
                u = w
        j = jump[i]
        if j != 0.0:
            w = u + j
            if w > a:
                la += w - a
                L += w - a
                u = a
            elif w < 0.0:
                ra += -w
                R += -w
                u = 0.0
            else:
                u = w
        t_o[m] = t
        u_o[m] = u
        l_o[m] = L
        r_o[m] = R
        la_o[m] = la
        ra_o[m] = ra
        m += 1
        tp = t
    return m, t_o, u_o, l_o, r_o, la_o, ra_o


@njit(**_OPTS)
def zero_policy_rows(times, cont, jump, x, d):
    """Pay every increase, inject every decrease; surplus pinned at 0.

    Bounded variation only: drift accrues to one regulator continuously,
    jumps are atoms."""
    n = times.size
    t_o = np.empty(n + 1)
    l_o = np.empty(n + 1)
    r_o = np.empty(n + 1)
    la_o = np.empty(n + 1)
    ra_o = np.empty(n + 1)
    L = x if x > 0.0 else 0.0
    R = -x if x < 0.0 else 0.0
    t_o[0] = 0.0
    l_o[0] = L
    r_o[0] = R
    la_o[0] = L
    ra_o[0] = R
    tp = 0.0
    for i in range(n):
        t = times[i]
        dt = t - tp
        if d > 0.0:
            L += d * dt
        elif d < 0.0:
            R += -d * dt
        la = 0.0
        ra = 0.0
        j = jump[i]
        if j > 0.0:
            la = j
            L += j
        elif j < 0.0:
            ra = -j
            R += ra
        t_o[i + 1] = t
        l_o[i + 1] = L
        r_o[i + 1] = R
        la_o[i + 1] = la
        ra_o[i + 1] = ra
        tp = t
    return t_o, l_o, r_o, la_o, ra_o


@njit(**_OPTS)
def reflect_above_rows(times, cont, jump, x, a, d, is_bv):
    """Reflection from above at a: Y = X - max(sup X - a, 0), row values."""
    n = times.size
    y_o = np.empty(n + 1)
    y = x if x < a else a
    y_o[0] = y
    tp = 0.0
    for i in range(n):
        t = times[i]
        if is_bv:
            y = y + d * (t - tp)
        else:
            y = y + cont[i]
        if y > a:
            y = a
        j = jump[i]
        if j != 0.0:
            y = y + j
            if y > a:
                y = a
        y_o[i + 1] = y
        tp = t
    return y_o


@njit(**_OPTS)
def npv_kernel(times, cont, jump, x, a, d, is_bv, q, tail_t0):
    """Discounted regulator totals (vL, vR) for the doubly reflected surplus,
    plus undiscounted regulator mass on [tail_t0, horizon] for truncation
    diagnostics."""
    n = times.size
    vL = x - a if x > a else 0.0
    vR = -x if x < 0.0 else 0.0
    u = x
    if x > a:
        u = a
    elif x < 0.0:
        u = 0.0
    tl = 0.0
    tr = 0.0
    tp = 0.0
    for i in range(n):
        t = times[i]
        if is_bv:
            dt = t - tp
            if d > 0.0:
                w = u + d * dt
                if w > a:
                    th = tp if u >= a else tp + (a - u) / d
                    vL += d * (math.exp(-q * th) - math.exp(-q * t)) / q
                    if t > tail_t0:
                        s0 = th if th > tail_t0 else tail_t0
                        tl += d * (t - s0)
                    u = a
                else:
                    u = w
            elif d < 0.0:
                w = u + d * dt
                if w < 0.0:
                    th = tp if u <= 0.0 else tp + u / (-d)
                    vR += (-d) * (math.exp(-q * th) - math.exp(-q * t)) / q
                    if t > tail_t0:
                        s0 = th if th > tail_t0 else tail_t0
                        tr += (-d) * (t - s0)
                    u = 0.0
                else:
                    u = w
        else:
            w = u + cont[i]
            if w > a:
                vL += (w - a) * math.exp(-q * t)
                if t >= tail_t0:
                    tl += w - a
                u = a
            elif w < 0.0:
                vR += (-w) * math.exp(-q * t)
                if t >= tail_t0:
                    tr += -w
                u = 0.0
            else:
                u = w
        j = jump[i]
        if j != 0.0:
            w = u + j
            if w > a:
                vL += (w - a) * math.exp(-q * t)
                if t >= tail_t0:
                    tl += w - a
                u = a
            elif w < 0.0:
                vR += (-w) * math.exp(-q * t)
                if t >= tail_t0:
                    tr += -w
                u = 0.0
            else:
                u = w
        tp = t
    return vL, vR, tl, tr


@njit(**_OPTS)
def zero_policy_npv(times, cont, jump, x, d, q, T, tail_t0):
    """Discounted (vL, vR) and tail mass under the pay-everything policy."""
    vL = x if x > 0.0 else 0.0
    vR = -x if x < 0.0 else 0.0
    disc_T = math.exp(-q * T)
    disc_tail = math.exp(-q * tail_t0)
    tl = 0.0
    tr = 0.0
    if d > 0.0:
        vL += d * (1.0 - disc_T) / q
        tl += d * (T - tail_t0)
    elif d < 0.0:
        vR += (-d) * (1.0 - disc_T) / q
        tr += (-d) * (T - tail_t0)
    for i in range(times.size):
        j = jump[i]
        if j != 0.0:
            t = times[i]
            if j > 0.0:
                vL += j * math.exp(-q * t)
                if t >= tail_t0:
                    tl += j
            else:
                vR += (-j) * math.exp(-q * t)
                if t >= tail_t0:
                    tr += -j
    return vL, vR, tl, tr


@njit(**_OPTS)
def exit_kernel(times, cont, jump, bru, u0, tp0, a, sigma, d, is_bv):
    """Scan rows for the first strict exit of the free surplus from [0, a],
    entering with state u0 at time tp0 (block continuation).

    Returns (tau, side, u_end): side +1 above a, -1 below 0, 0 no exit in
    these rows (tau = -1, u_end the carried state)."""
    u = u0
    tp = tp0
    s2 = sigma * sigma
    for i in range(times.size):
        t = times[i]
        if is_bv:
            dt = t - tp
            w = u + d * dt
            if d > 0.0 and w > a:
                return tp + (a - u) / d, 1, u
            if d < 0.0 and w < 0.0:
                return tp + u / (-d), -1, u
            u = w
        else:
            w = u + cont[i]
            dt = t - tp
            den = s2 * dt
            eu = -2.0 * (a - u) * (a - w) / den
            pu = 1.0 if eu >= 0.0 else math.exp(eu)
            uu = bru[i]
            if uu < pu:
                return t, 1, u
            el = -2.0 * u * w / den
            pl = 1.0 if el >= 0.0 else math.exp(el)
            if (uu - pu) / (1.0 - pu) < pl:
                return t, -1, u
            u = w
        j = jump[i]
        if j != 0.0:
            u = u + j
            if u > a:
                return t, 1, u
            if u < 0.0:
                return t, -1, u
        tp = t
    return -1.0, 0, u


@njit(**_OPTS)
def drawdown_kernel(times, cont, jump, bru, y0, tp0, a, sigma, d, is_bv):
    """Scan rows for the first passage below 0 of the surplus reflected from
    above at a.  Returns (kappa, hit, y_end); kappa = -1 when not hit."""
    y = y0
    tp = tp0
    s2 = sigma * sigma
    for i in range(times.size):
        t = times[i]
        if is_bv:
            dt = t - tp
            w = y + d * dt
            if d < 0.0 and w < 0.0:
                return tp + y / (-d), 1, y
            y = w if w < a else a
        else:
            w = y + cont[i]
            wc = w if w < a else a
            den = s2 * (t - tp)
            el = -2.0 * y * wc / den
            pl = 1.0 if el >= 0.0 else math.exp(el)
            if bru[i] < pl:
                return t, 1, y
            y = wc
        j = jump[i]
        if j != 0.0:
            y = y + j
            if y > a:
                y = a
            if y < 0.0:
                return t, 1, y
        tp = t
    return -1.0, 0, y


@njit(**_OPTS)
def first_dividend_kernel(times, cont, jump, bru, u0, tp0, a, sigma, d, is_bv):
    """Scan rows for the first increase of the upper regulator of the doubly
    reflected surplus.  Returns (rho, hit, u_end); rho = -1 when not hit."""
    u = u0
    tp = tp0
    s2 = sigma * sigma
    for i in range(times.size):
        t = times[i]
        if is_bv:
            dt = t - tp
            w = u + d * dt
            if d > 0.0 and w > a:
                return tp + (a - u) / d, 1, u
            if w < 0.0:
                w = 0.0
            u = w
        else:
            w = u + cont[i]
            if w < 0.0:
                w = 0.0
            den = s2 * (t - tp)
            eu = -2.0 * (a - u) * (a - w) / den
            pu = 1.0 if eu >= 0.0 else math.exp(eu)
            if bru[i] < pu:
                return t, 1, u
            u = w
        j = jump[i]
        if j != 0.0:
            u = u + j
            if u > a:
                return t, 1, u
            if u < 0.0:
                u = 0.0
        tp = t
    return -1.0, 0, u


@njit(**_OPTS)
def coupled_barrier_kernel(times, cont, jump, x, a, eps, d, is_bv):
    """One pass over both barrier levels a and a + eps from the same start.

    Returns row series (time 0 included): surplus under each barrier, the
    difference series L^a - L^{a+eps} and R^a - R^{a+eps} accumulated
    directly, and the barrier-a regulator increments split into the
    continuous-step part and the jump part (the within-row order needed for
    phase detection)."""
    n = times.size
    u1_o = np.empty(n + 1)
    u2_o = np.empty(n + 1)
    dl_o = np.empty(n + 1)
    dr_o = np.empty(n + 1)
    inc_lc = np.empty(n + 1)
    inc_rc = np.empty(n + 1)
    inc_lj = np.empty(n + 1)
    inc_rj = np.empty(n + 1)
    a2 = a + eps
    u1 = x
    u2 = x
    l1 = 0.0
    l2 = 0.0
    r1 = 0.0
    r2 = 0.0
    if x > a:
        l1 = x - a
        u1 = a
    elif x < 0.0:
        r1 = -x
        u1 = 0.0
    if x > a2:
        l2 = x - a2
        u2 = a2
    elif x < 0.0:
        r2 = -x
        u2 = 0.0
    DL = l1 - l2
    DR = r1 - r2
    u1_o[0] = u1
    u2_o[0] = u2
    dl_o[0] = DL
    dr_o[0] = DR
    inc_lc[0] = l1
    inc_rc[0] = r1
    inc_lj[0] = 0.0
    inc_rj[0] = 0.0
    tp = 0.0
    for i in range(n):
        t = times[i]
        inc = d * (t - tp) if is_bv else cont[i]
        # continuous part of the row
        w1 = u1 + inc
        w2 = u2 + inc
        a1l = 0.0
        a2l = 0.0
        a1r = 0.0
        a2r = 0.0
        if w1 > a:
            a1l = w1 - a
            u1 = a
        elif w1 < 0.0:
            a1r = -w1
            u1 = 0.0
        else:
            u1 = w1
        if w2 > a2:
            a2l = w2 - a2
            u2 = a2
        elif w2 < 0.0:
            a2r = -w2
            u2 = 0.0
        else:
            u2 = w2
        DL += a1l - a2l
        DR += a1r - a2r
        inc_lc[i + 1] = a1l
        inc_rc[i + 1] = a1r
        a1lj = 0.0
        a1rj = 0.0
        j = jump[i]
        if j != 0.0:
            w1 = u1 + j
            w2 = u2 + j
            a2l = 0.0
            a2r = 0.0
            if w1 > a:
                a1lj = w1 - a
                u1 = a
            elif w1 < 0.0:
                a1rj = -w1
                u1 = 0.0
            else:
                u1 = w1
            if w2 > a2:
                a2l = w2 - a2
                u2 = a2
            elif w2 < 0.0:
                a2r = -w2
                u2 = 0.0
            else:
                u2 = w2
            DL += a1lj - a2l
            DR += a1rj - a2r
        u1_o[i + 1] = u1
        u2_o[i + 1] = u2
        dl_o[i + 1] = DL
        dr_o[i + 1] = DR
        inc_lj[i + 1] = a1lj
        inc_rj[i + 1] = a1rj
        tp = t
    return u1_o, u2_o, dl_o, dr_o, inc_lc, inc_rc, inc_lj, inc_rj


@njit(**_OPTS)
def coupled_start_kernel(times, cont, jump, x, eps, a, d, is_bv):
    """One pass over both starts x and x + eps at the same barrier a.

    Returns row series: surplus from each start, L^{x+eps} - L^{x} and
    R^{x} - R^{x+eps} accumulated directly."""
    n = times.size
    u1_o = np.empty(n + 1)
    u2_o = np.empty(n + 1)
    dl_o = np.empty(n + 1)
    dr_o = np.empty(n + 1)
    x2 = x + eps
    u1 = x
    u2 = x2
    l1 = 0.0
    l2 = 0.0
    r1 = 0.0
    r2 = 0.0
    if x > a:
        l1 = x - a
        u1 = a
    elif x < 0.0:
        r1 = -x
        u1 = 0.0
    if x2 > a:
        l2 = x2 - a
        u2 = a
    elif x2 < 0.0:
        r2 = -x2
        u2 = 0.0
    DL = l2 - l1
    DR = r1 - r2
    u1_o[0] = u1
    u2_o[0] = u2
    dl_o[0] = DL
    dr_o[0] = DR
    tp = 0.0
    for i in range(n):
        t = times[i]
        inc = d * (t - tp) if is_bv else cont[i]
        w1 = u1 + inc
        w2 = u2 + inc
        a1l = 0.0
        a2l = 0.0
        a1r = 0.0
        a2r = 0.0
        if w1 > a:
            a1l = w1 - a
            u1 = a
        elif w1 < 0.0:
            a1r = -w1
            u1 = 0.0
        else:
            u1 = w1
        if w2 > a:
            a2l = w2 - a
            u2 = a
        elif w2 < 0.0:
            a2r = -w2
            u2 = 0.0
        else:
            u2 = w2
        DL += a2l - a1l
        DR += a1r - a2r
        j = jump[i]
        if j != 0.0:
            w1 = u1 + j
            w2 = u2 + j
            a1l = 0.0
            a2l = 0.0
            a1r = 0.0
            a2r = 0.0
            if w1 > a:
                a1l = w1 - a
                u1 = a
            elif w1 < 0.0:
                a1r = -w1
                u1 = 0.0
            else:
                u1 = w1
            if w2 > a:
                a2l = w2 - a
                u2 = a
            elif w2 < 0.0:
                a2r = -w2
                u2 = 0.0
            else:
                u2 = w2
            DL += a2l - a1l
            DR += a1r - a2r
        u1_o[i + 1] = u1
        u2_o[i + 1] = u2
        dl_o[i + 1] = DL
        dr_o[i + 1] = DR
        tp = t
    return u1_o, u2_o, dl_o, dr_o


@njit(**_OPTS)
def periodic_review_kernel(times, cont, jump, review, x, a, d, is_bv, q, tail_t0):
    """Inject continuously at 0; skim the excess above a only at the times
    flagged in `review` (aligned with rows)."""
    vL = 0.0
    vR = -x if x < 0.0 else 0.0
    u = x if x > 0.0 else 0.0
    tl = 0.0
    tr = 0.0
    tp = 0.0
    for i in range(times.size):
        t = times[i]
        if is_bv:
            dt = t - tp
            w = u + d * dt
            if d < 0.0 and w < 0.0:
                th = tp if u <= 0.0 else tp + u / (-d)
                vR += (-d) * (math.exp(-q * th) - math.exp(-q * t)) / q
                if t > tail_t0:
                    s0 = th if th > tail_t0 else tail_t0
                    tr += (-d) * (t - s0)
                u = 0.0
            else:
                u = w
        else:
            w = u + cont[i]
            if w < 0.0:
                vR += (-w) * math.exp(-q * t)
                if t >= tail_t0:
                    tr += -w
                u = 0.0
            else:
                u = w
        j = jump[i]
        if j != 0.0:
            w = u + j
            if w < 0.0:
                vR += (-w) * math.exp(-q * t)
                if t >= tail_t0:
                    tr += -w
                u = 0.0
            else:
                u = w
        if review[i] and u > a:
            vL += (u - a) * math.exp(-q * t)
            if t >= tail_t0:
                tl += u - a
            u = a
        tp = t
    return vL, vR, tl, tr


@njit(**_OPTS)
def hysteresis_kernel(times, cont, jump, x, a, b, d, is_bv, q, tail_t0):
    """Inject continuously at 0; on reaching a, pay a lump bringing the
    surplus down to b < a."""
    vL = 0.0
    vR = -x if x < 0.0 else 0.0
    u = x if x > 0.0 else 0.0
    if u >= a:
        vL += u - b
        u = b
    tl = 0.0
    tr = 0.0
    tp = 0.0
    for i in range(times.size):
        t = times[i]
        if is_bv:
            dt = t - tp
            w = u + d * dt
            if d > 0.0 and w >= a:
                th = tp + (a - u) / d
                vL += (a - b) * math.exp(-q * th)
                if th >= tail_t0:
                    tl += a - b
                u = b
                # drift resumes from b for the rest of the segment
                w = b + d * (t - th)
                while w >= a:
                    th = th + (a - b) / d
                    vL += (a - b) * math.exp(-q * th)
                    if th >= tail_t0:
                        tl += a - b
                    w = b + d * (t - th)
                u = w
            elif d < 0.0 and w < 0.0:
                th = tp if u <= 0.0 else tp + u / (-d)
                vR += (-d) * (math.exp(-q * th) - math.exp(-q * t)) / q
                if t > tail_t0:
                    s0 = th if th > tail_t0 else tail_t0
                    tr += (-d) * (t - s0)
                u = 0.0
            else:
                u = w
        else:
            w = u + cont[i]
            if w < 0.0:
                vR += (-w) * math.exp(-q * t)
                if t >= tail_t0:
                    tr += -w
                u = 0.0
            elif w >= a:
                vL += (w - b) * math.exp(-q * t)
                if t >= tail_t0:
                    tl += w - b
                u = b
            else:
                u = w
        j = jump[i]
        if j != 0.0:
            w = u + j
            if w < 0.0:
                vR += (-w) * math.exp(-q * t)
                if t >= tail_t0:
                    tr += -w
                u = 0.0
            elif w >= a:
                vL += (w - b) * math.exp(-q * t)
                if t >= tail_t0:
                    tl += w - b
                u = b
            else:
                u = w
        tp = t
    return vL, vR, tl, tr
