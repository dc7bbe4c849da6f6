"""Pure-numpy kernel backend.

Mirrors `dynevt._kernels._core` (the Cython extension) function for
function and constant for constant. Algorithms:

* GPD negative log-likelihood with a series-expanded branch near xi = 0.
* GPD MLE through the 1-D profile likelihood in theta = xi / sigma
  (closed-form xi(theta) = mean log1p(theta * y)), scanned on a
  scale-equivariant grid and refined by golden section, with constrained
  boundary fits at the xi box edges. Excesses are sorted ascending on
  entry so the result is independent of input order.
* Break-even threshold scan: per candidate threshold, fit the tail and
  measure |VaR - target|; two-pass argmin with the tie rule "within
  tie_tol of the minimum, prefer the threshold closest to zero".
* GARCH / EGARCH / CAViaR recursions used by the benchmark models.
"""

import math

import numpy as np

XI_ZERO_EPS = 1e-9          # switch to the exponential branch below this |xi|
XI_LO_DEFAULT = -0.5
XI_HI_DEFAULT = 1.5
_GRID_NEG = 32              # theta grid points hugging the lower support bound
_GRID_POS = 48              # log-spaced positive theta grid points
_GOLDEN_ITERS = 48
_BOUNDARY_ITERS = 40
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def gpd_nll(xi: float, sigma: float, y: np.ndarray) -> float:
    """Negative log-likelihood of GPD excesses; +inf outside the support."""
    n = y.shape[0]
    if sigma <= 0.0 or n == 0:
        return math.inf
    a = y / sigma
    if abs(xi) < XI_ZERO_EPS:
        # (1 + 1/xi) log1p(xi a) = a + xi (a - a^2/2) + O(xi^2)
        return n * math.log(sigma) + float(np.sum(a + xi * (a - 0.5 * a * a)))
    z = xi * a
    if np.min(z) <= -1.0:
        return math.inf
    return n * math.log(sigma) + (1.0 + 1.0 / xi) * float(np.sum(np.log1p(z)))


def _profile_nll(theta: float, y: np.ndarray, xi_lo: float, xi_hi: float):
    """Profile nll at theta; returns (nll, xi, sigma)."""
    n = y.shape[0]
    if theta == 0.0:
        ybar = float(np.mean(y))
        return n * (math.log(ybar) + 1.0), 0.0, ybar
    z = theta * y
    if float(np.min(z)) <= -1.0:
        return math.inf, 0.0, 0.0
    xi = float(np.mean(np.log1p(z)))
    if xi < xi_lo or xi > xi_hi or xi == 0.0:
        return math.inf, 0.0, 0.0
    sigma = xi / theta
    if sigma <= 0.0:
        return math.inf, 0.0, 0.0
    return n * (math.log(sigma) + xi + 1.0), xi, sigma


def _fixed_xi_fit(xi: float, y: np.ndarray, ymax: float, ybar: float):
    """Golden-section fit of sigma (in log space) at a pinned shape."""
    lo = 1e-8 * ybar
    if xi < 0.0:
        lo = max(lo, -xi * ymax * (1.0 + 1e-12))
    hi = 10.0 * ymax
    if lo >= hi:
        return math.inf, xi, hi
    llo, lhi = math.log(lo), math.log(hi)
    c = lhi - _INVPHI * (lhi - llo)
    d = llo + _INVPHI * (lhi - llo)
    fc = gpd_nll(xi, math.exp(c), y)
    fd = gpd_nll(xi, math.exp(d), y)
    best_f, best_s = (fc, math.exp(c)) if fc <= fd else (fd, math.exp(d))
    for _ in range(_BOUNDARY_ITERS):
        if fc < fd:
            lhi, d, fd = d, c, fc
            c = lhi - _INVPHI * (lhi - llo)
            fc = gpd_nll(xi, math.exp(c), y)
            if fc < best_f:
                best_f, best_s = fc, math.exp(c)
        else:
            llo, c, fc = c, d, fd
            d = llo + _INVPHI * (lhi - llo)
            fd = gpd_nll(xi, math.exp(d), y)
            if fd < best_f:
                best_f, best_s = fd, math.exp(d)
    return best_f, xi, best_s


def fit_gpd(y: np.ndarray, xi_lo: float = XI_LO_DEFAULT,
            xi_hi: float = XI_HI_DEFAULT):
    """Maximum-likelihood GPD fit to non-negative excesses.

    Returns (xi, sigma, loglik). The caller guarantees len(y) >= 1 and
    max(y) > 0.
    """
    y = np.sort(np.asarray(y, dtype=np.float64))
    n = y.shape[0]
    ymax = float(y[-1])
    ybar = float(np.mean(y))

    # scale-equivariant theta grid: dense toward the lower support bound,
    # log-spaced on the heavy-tail side, plus the moment-estimate seed
    t_min = -(1.0 - 1e-8) / ymax
    grid = []
    for j in range(_GRID_NEG):
        g = 10.0 ** (-6.0 + 6.0 * j / (_GRID_NEG - 1))   # 1e-6 .. 1
        grid.append(t_min * (1.0 - g))
    lo_p, hi_p = math.log(1e-4 / ybar), math.log(1e4 / ybar)
    for j in range(_GRID_POS):
        grid.append(math.exp(lo_p + (hi_p - lo_p) * j / (_GRID_POS - 1)))
    s2 = float(np.mean((y - ybar) ** 2))
    if s2 > 0.0:
        xi_m = 0.5 * (1.0 - ybar * ybar / s2)
        sigma_m = ybar * (1.0 - xi_m)
        if sigma_m > 0.0 and xi_m != 0.0:
            theta_m = xi_m / sigma_m
            if theta_m > t_min:
                grid.append(theta_m)
    grid = np.sort(np.asarray(grid))

    best_f, best_xi, best_sigma = _profile_nll(0.0, y, xi_lo, xi_hi)
    best_j = -1
    for j, theta in enumerate(grid):
        f, xi, sigma = _profile_nll(float(theta), y, xi_lo, xi_hi)
        if f < best_f:
            best_f, best_xi, best_sigma, best_j = f, xi, sigma, j

    if best_j >= 0:
        lo = float(grid[best_j - 1]) if best_j > 0 else float(grid[best_j])
        hi = float(grid[best_j + 1]) if best_j + 1 < grid.shape[0] else float(grid[best_j])
        c = hi - _INVPHI * (hi - lo)
        d = lo + _INVPHI * (hi - lo)
        fc, xic, sic = _profile_nll(c, y, xi_lo, xi_hi)
        fd, xid, sid = _profile_nll(d, y, xi_lo, xi_hi)
        if fc < best_f:
            best_f, best_xi, best_sigma = fc, xic, sic
        if fd < best_f:
            best_f, best_xi, best_sigma = fd, xid, sid
        for _ in range(_GOLDEN_ITERS):
            if fc < fd:
                hi, d, fd = d, c, fc
                c = hi - _INVPHI * (hi - lo)
                fc, xic, sic = _profile_nll(c, y, xi_lo, xi_hi)
                if fc < best_f:
                    best_f, best_xi, best_sigma = fc, xic, sic
            else:
                lo, c, fc = c, d, fd
                d = lo + _INVPHI * (hi - lo)
                fd, xid, sid = _profile_nll(d, y, xi_lo, xi_hi)
                if fd < best_f:
                    best_f, best_xi, best_sigma = fd, xid, sid

    for xib in (xi_lo, xi_hi):
        f, xi, sigma = _fixed_xi_fit(xib, y, ymax, ybar)
        if f < best_f:
            best_f, best_xi, best_sigma = f, xi, sigma

    return best_xi, best_sigma, -best_f


def evt_var(u: float, xi: float, sigma: float, n: int, n_u: int,
            p: float) -> float:
    """Peaks-over-threshold VaR (loss units) from a fitted tail."""
    bracket = (n / n_u) * (1.0 - p)
    if abs(xi) < XI_ZERO_EPS:
        return u - sigma * math.log(bracket)
    return u + sigma / xi * (bracket ** (-xi) - 1.0)


def brt_scan(losses: np.ndarray, cand: np.ndarray, n_total: int,
             target_loss: float, p: float, min_exc: int,
             xi_lo: float = XI_LO_DEFAULT, xi_hi: float = XI_HI_DEFAULT,
             tie_tol: float = 1e-12):
    """Evaluate |EVT VaR - target| over ascending loss-space thresholds.

    Returns (best_index, best_gap, searched) where best_index indexes
    `cand` and is -1 when no candidate leaves min_exc exceedances.
    Ties within tie_tol of the minimum resolve to the smallest threshold.
    """
    asc = np.sort(np.asarray(losses, dtype=np.float64))
    cand = np.asarray(cand, dtype=np.float64)
    m = cand.shape[0]
    objs = np.full(m, math.inf)
    searched = 0
    for i in range(m):
        u = float(cand[i])
        idx = int(np.searchsorted(asc, u, side="right"))
        n_u = asc.shape[0] - idx
        if n_u < min_exc:
            break    # candidates ascend, exceedance counts only shrink
        y = asc[idx:] - u
        if y[-1] <= 0.0:
            continue
        xi, sigma, _ = fit_gpd(y, xi_lo, xi_hi)
        var = evt_var(u, xi, sigma, n_total, n_u, p)
        objs[i] = abs(var - target_loss)
        searched += 1
    if searched == 0:
        return -1, math.inf, 0
    best = float(np.min(objs))
    for i in range(m):
        if objs[i] <= best + tie_tol:
            return i, float(objs[i]), searched
    return -1, math.inf, searched   # unreachable


def garch_filter(x: np.ndarray, alpha0: float, alpha: np.ndarray,
                 beta: np.ndarray, sigma2_init: float) -> np.ndarray:
    """Conditional-variance recursion; element T is the next-day forecast."""
    T = x.shape[0]
    q = alpha.shape[0]
    p = beta.shape[0]
    s2 = np.empty(T + 1)
    for t in range(T + 1):
        v = alpha0
        for i in range(1, q + 1):
            e2 = x[t - i] ** 2 if t - i >= 0 else sigma2_init
            v += alpha[i - 1] * e2
        for j in range(1, p + 1):
            v += beta[j - 1] * (s2[t - j] if t - j >= 0 else sigma2_init)
        s2[t] = v
    return s2


def egarch_filter(x: np.ndarray, omega: float, betag: np.ndarray,
                  alpha: np.ndarray, theta: float, lam: float,
                  logs2_init: float, ez: float) -> np.ndarray:
    """Log-variance recursion with g(Z) = theta Z + lam (|Z| - E|Z|)."""
    T = x.shape[0]
    q = betag.shape[0]
    p = alpha.shape[0]
    ls = np.empty(T + 1)
    s2 = np.empty(T + 1)
    for t in range(T + 1):
        v = omega
        for k in range(1, q + 1):
            if t - k >= 0:
                z = x[t - k] / math.sqrt(s2[t - k])
                v += betag[k - 1] * (theta * z + lam * (abs(z) - ez))
        for k in range(1, p + 1):
            v += alpha[k - 1] * (ls[t - k] if t - k >= 0 else logs2_init)
        if v > 50.0:
            v = 50.0
        elif v < -50.0:
            v = -50.0
        ls[t] = v
        s2[t] = math.exp(v)
    return s2


def caviar_filter(x: np.ndarray, b1: float, b2: float, b3: float, b4: float,
                  q0: float) -> np.ndarray:
    """Asymmetric-slope quantile recursion; element T is the forecast."""
    T = x.shape[0]
    q = np.empty(T + 1)
    q[0] = q0
    for t in range(1, T + 1):
        xm = x[t - 1]
        v = b1 + b2 * q[t - 1] + b3 * (xm if xm > 0.0 else 0.0) \
            + b4 * (-xm if xm < 0.0 else 0.0)
        if v > 1e10:
            v = 1e10
        elif v < -1e10:
            v = -1e10
        q[t] = v
    return q
