# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Same algorithms and constants as `dynevt._kernels._pure`; see that module
for the documentation. The hot paths here are the per-candidate GPD fits
inside `brt_scan` and the conditional-variance recursions.
"""

from libc.math cimport log, log1p, exp, fabs, sqrt, pow, INFINITY
from libc.stdlib cimport malloc, free

import numpy as np

cdef double _XI_EPS = 1e-9
cdef double _INVPHI = (sqrt(5.0) - 1.0) / 2.0
cdef int _GRID_NEG = 32
cdef int _GRID_POS = 48
cdef int _GOLDEN_ITERS = 48
cdef int _BOUNDARY_ITERS = 40

XI_ZERO_EPS = _XI_EPS
XI_LO_DEFAULT = -0.5
XI_HI_DEFAULT = 1.5


cdef double _nll_c(double xi, double sigma, const double* y, int n) nogil:
    cdef int i
    cdef double a, z, acc = 0.0
    if sigma <= 0.0 or n == 0:
        return INFINITY
    if fabs(xi) < _XI_EPS:
        for i in range(n):
            a = y[i] / sigma
            acc += a + xi * (a - 0.5 * a * a)
        return n * log(sigma) + acc
    for i in range(n):
        z = xi * (y[i] / sigma)
        if z <= -1.0:
            return INFINITY
        acc += log1p(z)
    return n * log(sigma) + (1.0 + 1.0 / xi) * acc


cdef void _profile_c(double theta, const double* y, int n, double xi_lo,
                     double xi_hi, double* out) nogil:
    # out = {nll, xi, sigma}
    cdef int i
    cdef double z, acc = 0.0, xi, sigma, ybar
    out[0] = INFINITY
    out[1] = 0.0
    out[2] = 0.0
    if theta == 0.0:
        ybar = 0.0
        for i in range(n):
            ybar += y[i]
        ybar /= n
        out[0] = n * (log(ybar) + 1.0)
        out[2] = ybar
        return
    for i in range(n):
        z = theta * y[i]
        if z <= -1.0:
            return
        acc += log1p(z)
    xi = acc / n
    if xi < xi_lo or xi > xi_hi or xi == 0.0:
        return
    sigma = xi / theta
    if sigma <= 0.0:
        return
    out[0] = n * (log(sigma) + xi + 1.0)
    out[1] = xi
    out[2] = sigma


cdef void _fixed_xi_c(double xi, const double* y, int n, double ymax,
                      double ybar, double* out) nogil:
    # out = {nll, xi, sigma}
    cdef double lo, hi, llo, lhi, c, d, fc, fd, best_f, best_s
    cdef int it
    out[0] = INFINITY
    out[1] = xi
    out[2] = 0.0
    lo = 1e-8 * ybar
    if xi < 0.0 and -xi * ymax * (1.0 + 1e-12) > lo:
        lo = -xi * ymax * (1.0 + 1e-12)
    hi = 10.0 * ymax
    if lo >= hi:
        out[2] = hi
        return
    llo = log(lo)
    lhi = log(hi)
    c = lhi - _INVPHI * (lhi - llo)
    d = llo + _INVPHI * (lhi - llo)
    fc = _nll_c(xi, exp(c), y, n)
    fd = _nll_c(xi, exp(d), y, n)
    if fc <= fd:
        best_f = fc
        best_s = exp(c)
    else:
        best_f = fd
        best_s = exp(d)
    for it in range(_BOUNDARY_ITERS):
        if fc < fd:
            lhi = d
            d = c
            fd = fc
            c = lhi - _INVPHI * (lhi - llo)
            fc = _nll_c(xi, exp(c), y, n)
            if fc < best_f:
                best_f = fc
                best_s = exp(c)
        else:
            llo = c
            c = d
            fc = fd
            d = llo + _INVPHI * (lhi - llo)
            fd = _nll_c(xi, exp(d), y, n)
            if fd < best_f:
                best_f = fd
                best_s = exp(d)
    out[0] = best_f
    out[2] = best_s


cdef void _fit_sorted_c(const double* y, int n, double xi_lo, double xi_hi,
                        double* out) nogil:
    # y ascending; out = {xi, sigma, loglik}
    cdef double ymax = y[n - 1]
    cdef double ybar = 0.0, s2 = 0.0
    cdef double t_min, g, lo_p, hi_p, xi_m, sigma_m, theta_m
    cdef double best_f, best_xi, best_sigma
    cdef double lo, hi, c, d, fc, fd
    cdef double prof[3]
    cdef double grid[81]
    cdef int ng = 0, i, j, best_j, it
    cdef double key

    for i in range(n):
        ybar += y[i]
    ybar /= n
    for i in range(n):
        s2 += (y[i] - ybar) * (y[i] - ybar)
    s2 /= n

    t_min = -(1.0 - 1e-8) / ymax
    for j in range(_GRID_NEG):
        g = pow(10.0, -6.0 + 6.0 * j / (_GRID_NEG - 1))
        grid[ng] = t_min * (1.0 - g)
        ng += 1
    lo_p = log(1e-4 / ybar)
    hi_p = log(1e4 / ybar)
    for j in range(_GRID_POS):
        grid[ng] = exp(lo_p + (hi_p - lo_p) * j / (_GRID_POS - 1))
        ng += 1
    if s2 > 0.0:
        xi_m = 0.5 * (1.0 - ybar * ybar / s2)
        sigma_m = ybar * (1.0 - xi_m)
        if sigma_m > 0.0 and xi_m != 0.0:
            theta_m = xi_m / sigma_m
            if theta_m > t_min:
                grid[ng] = theta_m
                ng += 1
    # insertion sort (the blocks are already ascending; only the moment
    # seed can be out of place, but keep the full sort for parity)
    for i in range(1, ng):
        key = grid[i]
        j = i - 1
        while j >= 0 and grid[j] > key:
            grid[j + 1] = grid[j]
            j -= 1
        grid[j + 1] = key

    _profile_c(0.0, y, n, xi_lo, xi_hi, prof)
    best_f = prof[0]
    best_xi = prof[1]
    best_sigma = prof[2]
    best_j = -1
    for j in range(ng):
        _profile_c(grid[j], y, n, xi_lo, xi_hi, prof)
        if prof[0] < best_f:
            best_f = prof[0]
            best_xi = prof[1]
            best_sigma = prof[2]
            best_j = j

    if best_j >= 0:
        lo = grid[best_j - 1] if best_j > 0 else grid[best_j]
        hi = grid[best_j + 1] if best_j + 1 < ng else grid[best_j]
        c = hi - _INVPHI * (hi - lo)
        d = lo + _INVPHI * (hi - lo)
        _profile_c(c, y, n, xi_lo, xi_hi, prof)
        fc = prof[0]
        if fc < best_f:
            best_f = prof[0]
            best_xi = prof[1]
            best_sigma = prof[2]
        _profile_c(d, y, n, xi_lo, xi_hi, prof)
        fd = prof[0]
        if fd < best_f:
            best_f = prof[0]
            best_xi = prof[1]
            best_sigma = prof[2]
        for it in range(_GOLDEN_ITERS):
            if fc < fd:
                hi = d
                d = c
                fd = fc
                c = hi - _INVPHI * (hi - lo)
                _profile_c(c, y, n, xi_lo, xi_hi, prof)
                fc = prof[0]
                if fc < best_f:
                    best_f = prof[0]
                    best_xi = prof[1]
                    best_sigma = prof[2]
            else:
                lo = c
                c = d
                fc = fd
                d = lo + _INVPHI * (hi - lo)
                _profile_c(d, y, n, xi_lo, xi_hi, prof)
                fd = prof[0]
                if fd < best_f:
                    best_f = prof[0]
                    best_xi = prof[1]
                    best_sigma = prof[2]

    _fixed_xi_c(xi_lo, y, n, ymax, ybar, prof)
    if prof[0] < best_f:
        best_f = prof[0]
        best_xi = prof[1]
        best_sigma = prof[2]
    _fixed_xi_c(xi_hi, y, n, ymax, ybar, prof)
    if prof[0] < best_f:
        best_f = prof[0]
        best_xi = prof[1]
        best_sigma = prof[2]

    out[0] = best_xi
    out[1] = best_sigma
    out[2] = -best_f


cdef double _evt_var_c(double u, double xi, double sigma, double n,
                       double n_u, double p) nogil:
    cdef double bracket = (n / n_u) * (1.0 - p)
    if fabs(xi) < _XI_EPS:
        return u - sigma * log(bracket)
    return u + sigma / xi * (pow(bracket, -xi) - 1.0)


def gpd_nll(double xi, double sigma, y):
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    if yv.shape[0] == 0:
        return float("inf")
    return _nll_c(xi, sigma, &yv[0], yv.shape[0])


def fit_gpd(y, double xi_lo=-0.5, double xi_hi=1.5):
    arr = np.sort(np.asarray(y, dtype=np.float64))
    cdef const double[::1] yv = np.ascontiguousarray(arr)
    cdef double out[3]
    _fit_sorted_c(&yv[0], yv.shape[0], xi_lo, xi_hi, out)
    return out[0], out[1], out[2]


def evt_var(double u, double xi, double sigma, n, n_u, double p):
    return _evt_var_c(u, xi, sigma, <double> n, <double> n_u, p)


def brt_scan(losses, cand, n_total, double target_loss, double p,
             min_exc, double xi_lo=-0.5, double xi_hi=1.5,
             double tie_tol=1e-12):
    asc_arr = np.sort(np.asarray(losses, dtype=np.float64))
    cand_arr = np.asarray(cand, dtype=np.float64)
    cdef const double[::1] asc = np.ascontiguousarray(asc_arr)
    cdef const double[::1] cv = np.ascontiguousarray(cand_arr)
    cdef int n = asc.shape[0]
    cdef int m = cv.shape[0]
    cdef int nt = <int> n_total
    cdef int me = <int> min_exc
    cdef int i, k, lo, hi, mid, idx, n_u, searched = 0, best_i = -1
    cdef double u, var, best
    cdef double fit[3]
    objs_arr = np.full(m, np.inf)
    cdef double[::1] objs = objs_arr
    cdef double* scratch = <double*> malloc(n * sizeof(double))
    if scratch == NULL:
        raise MemoryError()
    try:
        for i in range(m):
            u = cv[i]
            lo = 0
            hi = n
            while lo < hi:
                mid = (lo + hi) // 2
                if asc[mid] <= u:
                    lo = mid + 1
                else:
                    hi = mid
            idx = lo
            n_u = n - idx
            if n_u < me:
                break    # candidates ascend, exceedance counts only shrink
            for k in range(n_u):
                scratch[k] = asc[idx + k] - u
            if scratch[n_u - 1] <= 0.0:
                continue
            _fit_sorted_c(scratch, n_u, xi_lo, xi_hi, fit)
            var = _evt_var_c(u, fit[0], fit[1], <double> nt, <double> n_u, p)
            objs[i] = fabs(var - target_loss)
            searched += 1
    finally:
        free(scratch)
    if searched == 0:
        return -1, float("inf"), 0
    best = INFINITY
    for i in range(m):
        if objs[i] < best:
            best = objs[i]
    for i in range(m):
        if objs[i] <= best + tie_tol:
            return i, float(objs[i]), searched
    return -1, float("inf"), searched


def garch_filter(x, double alpha0, alpha, beta, double sigma2_init):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] av = np.ascontiguousarray(alpha, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(beta, dtype=np.float64)
    cdef int T = xv.shape[0]
    cdef int q = av.shape[0]
    cdef int p = bv.shape[0]
    out_arr = np.empty(T + 1)
    cdef double[::1] s2 = out_arr
    cdef int t, i, j
    cdef double v, e2
    for t in range(T + 1):
        v = alpha0
        for i in range(1, q + 1):
            e2 = xv[t - i] * xv[t - i] if t - i >= 0 else sigma2_init
            v += av[i - 1] * e2
        for j in range(1, p + 1):
            v += bv[j - 1] * (s2[t - j] if t - j >= 0 else sigma2_init)
        s2[t] = v
    return out_arr


def egarch_filter(x, double omega, betag, alpha, double theta, double lam,
                  double logs2_init, double ez):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] gv = np.ascontiguousarray(betag, dtype=np.float64)
    cdef const double[::1] av = np.ascontiguousarray(alpha, dtype=np.float64)
    cdef int T = xv.shape[0]
    cdef int q = gv.shape[0]
    cdef int p = av.shape[0]
    ls_arr = np.empty(T + 1)
    out_arr = np.empty(T + 1)
    cdef double[::1] ls = ls_arr
    cdef double[::1] s2 = out_arr
    cdef int t, k
    cdef double v, z
    for t in range(T + 1):
        v = omega
        for k in range(1, q + 1):
            if t - k >= 0:
                z = xv[t - k] / sqrt(s2[t - k])
                v += gv[k - 1] * (theta * z + lam * (fabs(z) - ez))
        for k in range(1, p + 1):
            v += av[k - 1] * (ls[t - k] if t - k >= 0 else logs2_init)
        if v > 50.0:
            v = 50.0
        elif v < -50.0:
            v = -50.0
        ls[t] = v
        s2[t] = exp(v)
    return out_arr


def caviar_filter(x, double b1, double b2, double b3, double b4, double q0):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef int T = xv.shape[0]
    out_arr = np.empty(T + 1)
    cdef double[::1] q = out_arr
    cdef int t
    cdef double xm, v
    q[0] = q0
    for t in range(1, T + 1):
        xm = xv[t - 1]
        v = b1 + b2 * q[t - 1] + b3 * (xm if xm > 0.0 else 0.0) \
            + b4 * (-xm if xm < 0.0 else 0.0)
        if v > 1e10:
            v = 1e10
        elif v < -1e10:
            v = -1e10
        q[t] = v
    return out_arr
