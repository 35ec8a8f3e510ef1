"""Hot numeric kernels: numba-jitted cores with pure-numpy fallbacks.

The numba path is used when numba imports cleanly and the environment
variable ``MORSEGENUS_DISABLE_NUMBA`` is unset/falsy. Both paths produce
identical results (up to floating-point associativity); the test suite and
``benchmarks/bench_kernels.py`` compare them directly.

Kernels here are deliberately free of package types: arrays in, arrays out.
"""

from __future__ import annotations

import os

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

_env = os.environ.get("MORSEGENUS_DISABLE_NUMBA", "").strip().lower()
NUMBA_DISABLED_BY_ENV = _env not in ("", "0", "false", "no")

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised via env flag instead
    HAS_NUMBA = False

NUMBA_ENABLED = HAS_NUMBA and not NUMBA_DISABLED_BY_ENV


# --------------------------------------------------------------------------
# sliding template fits
#
# Three 2-parameter families fit per window of odd length L = 2h+1 centered
# at each position of a series d:
#   rising step : level a on the left points, level b >= a on the right
#                 points; the center point and its two neighbors are
#                 excluded because a central-difference series smears any
#                 sharp feature across them
#   peak        : c + m * tent(i), tent = h - |i - h|, slope m >= 0
#   falling step: mirror of the rising step (a >= b)
# Each fit is least squares with its sign constraint; when the unconstrained
# optimum violates the constraint the constrained optimum is the flat fit.
# Residuals are RMS over the fitted points, so they scale linearly with d.
#
# The reported step contrast is the slope-adjusted jump: the jump
# coefficient of the 3-parameter fit a + m*x + jump*[x > 0], which is
# exactly zero on any straight ramp (a tilted window alone produces no
# contrast) and equals the plain jump on a level step. On the symmetric
# off-center positions it reduces to 6*jump_plain - 4*cov(x, y)/n.
#
# Each template also gets the RMS residual of the best straight-line fit
# over the same points (center excluded for the steps). A smooth ramp fits
# a line far better than a step, while a genuine kink does the opposite, so
# downstream detection can demand the template beat the line.
# --------------------------------------------------------------------------


def _template_scan_numpy(d: np.ndarray, half: int):
    L = 2 * half + 1
    win = sliding_window_view(d, L)
    side = half - 1
    left = win[:, :side]
    right = win[:, L - side :]

    la = left.mean(axis=1)
    rb = right.mean(axis=1)
    jump = rb - la
    sq_split = ((left - la[:, None]) ** 2).sum(axis=1) + (
        (right - rb[:, None]) ** 2
    ).sum(axis=1)
    res_split = np.sqrt(sq_split / (2 * side))
    both_mean = (la + rb) / 2.0
    sq_flat = ((left - both_mean[:, None]) ** 2).sum(axis=1) + (
        (right - both_mean[:, None]) ** 2
    ).sum(axis=1)
    res_flat2 = np.sqrt(sq_flat / (2 * side))

    # slope-adjusted jump over the side points (positions +-2..+-half)
    x_gap = np.concatenate([np.arange(-half, -1), np.arange(2, half + 1)]).astype(
        np.float64
    )
    y_gap = np.concatenate([left, right], axis=1)
    var_x = (x_gap**2).mean()
    cov_xs = np.abs(x_gap).mean() / 2.0
    det = var_x / 4.0 - cov_xs * cov_xs
    cov_xy = (y_gap * x_gap[None, :]).mean(axis=1)
    j_adj = (var_x * jump / 4.0 - cov_xs * cov_xy) / det

    res_up = np.where(jump >= 0.0, res_split, res_flat2)
    con_up = np.maximum(j_adj, 0.0)
    res_down = np.where(jump <= 0.0, res_split, res_flat2)
    con_down = np.maximum(-j_adj, 0.0)

    xx_gap = (x_gap**2).sum()
    slope_gap = (y_gap * x_gap[None, :]).sum(axis=1) / xx_gap
    fit_gap = both_mean[:, None] + slope_gap[:, None] * x_gap[None, :]
    res_line_gap = np.sqrt(((y_gap - fit_gap) ** 2).mean(axis=1))

    tent = (half - np.abs(np.arange(L) - half)).astype(np.float64)
    tent_c = tent - tent.mean()
    tent_var = (tent_c**2).sum()
    wm = win.mean(axis=1)
    slope = ((win - wm[:, None]) * tent_c[None, :]).sum(axis=1) / tent_var
    fit = wm[:, None] + slope[:, None] * tent_c[None, :]
    res_peak_free = np.sqrt(((win - fit) ** 2).mean(axis=1))
    res_peak_flat = np.sqrt(((win - wm[:, None]) ** 2).mean(axis=1))
    res_peak = np.where(slope >= 0.0, res_peak_free, res_peak_flat)
    con_peak = np.maximum(slope, 0.0) * half

    # line fit over the full window
    x_full = np.arange(-half, half + 1).astype(np.float64)
    xx_full = (x_full**2).sum()
    slope_full = (win * x_full[None, :]).sum(axis=1) / xx_full
    fit_full = wm[:, None] + slope_full[:, None] * x_full[None, :]
    res_line_full = np.sqrt(((win - fit_full) ** 2).mean(axis=1))

    return (
        res_up,
        con_up,
        res_peak,
        con_peak,
        res_down,
        con_down,
        res_line_gap,
        res_line_full,
    )


if HAS_NUMBA:

    @njit(cache=True)
    def _template_scan_numba(d, half):  # pragma: no cover - compiled
        L = 2 * half + 1
        n_win = d.size - L + 1
        res_up = np.empty(n_win)
        con_up = np.empty(n_win)
        res_peak = np.empty(n_win)
        con_peak = np.empty(n_win)
        res_down = np.empty(n_win)
        con_down = np.empty(n_win)
        res_line_gap = np.empty(n_win)
        res_line_full = np.empty(n_win)

        tent = np.empty(L)
        for i in range(L):
            tent[i] = half - abs(i - half)
        tent_mean = tent.mean()
        tent_var = 0.0
        for i in range(L):
            tent_var += (tent[i] - tent_mean) ** 2
        side = half - 1
        xx_gap = 0.0
        abs_sum = 0.0
        for i in range(2, half + 1):
            xx_gap += 2.0 * i * i
            abs_sum += 2.0 * i
        xx_full = 0.0
        for i in range(1, half + 1):
            xx_full += 2.0 * i * i
        var_x = xx_gap / (2 * side)
        cov_xs = abs_sum / (2 * side) / 2.0
        det = var_x / 4.0 - cov_xs * cov_xs

        for w in range(n_win):
            la = 0.0
            rb = 0.0
            for i in range(side):
                la += d[w + i]
                rb += d[w + half + 2 + i]
            la /= side
            rb /= side
            jump = rb - la
            sq_split = 0.0
            for i in range(side):
                sq_split += (d[w + i] - la) ** 2
                sq_split += (d[w + half + 2 + i] - rb) ** 2
            res_split = np.sqrt(sq_split / (2 * side))
            bm = 0.5 * (la + rb)
            sq_flat = 0.0
            for i in range(side):
                sq_flat += (d[w + i] - bm) ** 2
                sq_flat += (d[w + half + 2 + i] - bm) ** 2
            res_flat2 = np.sqrt(sq_flat / (2 * side))

            cov_xy = 0.0
            for i in range(side):
                cov_xy += (i - half) * d[w + i] + (i + 2) * d[w + half + 2 + i]
            cov_xy /= 2 * side
            j_adj = (var_x * jump / 4.0 - cov_xs * cov_xy) / det

            if jump >= 0.0:
                res_up[w] = res_split
                res_down[w] = res_flat2
            else:
                res_up[w] = res_flat2
                res_down[w] = res_split
            con_up[w] = max(j_adj, 0.0)
            con_down[w] = max(-j_adj, 0.0)

            # line fit over the side points; by symmetry the x-mean is
            # zero so intercept = bm and slope = sum(x*y)/sum(x*x)
            sxy = 0.0
            for i in range(side):
                x_l = i - half  # positions -half..-2
                x_r = i + 2  # positions 2..half
                sxy += x_l * d[w + i] + x_r * d[w + half + 2 + i]
            slope_gap = sxy / xx_gap
            sq_lg = 0.0
            for i in range(side):
                x_l = i - half
                x_r = i + 2
                sq_lg += (d[w + i] - bm - slope_gap * x_l) ** 2
                sq_lg += (d[w + half + 2 + i] - bm - slope_gap * x_r) ** 2
            res_line_gap[w] = np.sqrt(sq_lg / (2 * side))

            wm = 0.0
            for i in range(L):
                wm += d[w + i]
            wm /= L
            slope = 0.0
            for i in range(L):
                slope += (d[w + i] - wm) * (tent[i] - tent_mean)
            slope /= tent_var
            sq_free = 0.0
            sq_wflat = 0.0
            for i in range(L):
                fit = wm + slope * (tent[i] - tent_mean)
                sq_free += (d[w + i] - fit) ** 2
                sq_wflat += (d[w + i] - wm) ** 2
            if slope >= 0.0:
                res_peak[w] = np.sqrt(sq_free / L)
                con_peak[w] = slope * half
            else:
                res_peak[w] = np.sqrt(sq_wflat / L)
                con_peak[w] = 0.0

            sxy_f = 0.0
            for i in range(L):
                sxy_f += (i - half) * d[w + i]
            slope_full = sxy_f / xx_full
            sq_lf = 0.0
            for i in range(L):
                sq_lf += (d[w + i] - wm - slope_full * (i - half)) ** 2
            res_line_full[w] = np.sqrt(sq_lf / L)

        return (
            res_up,
            con_up,
            res_peak,
            con_peak,
            res_down,
            con_down,
            res_line_gap,
            res_line_full,
        )

else:
    _template_scan_numba = None


def template_scan(d: np.ndarray, window_len: int):
    """Slide the three template families over ``d``.

    Returns eight arrays aligned to window centers ``half .. len(d)-1-half``:
    (rising residual, rising jump, peak residual, peak prominence,
    falling residual, falling jump, line residual without the center point,
    line residual over the full window).
    """
    d = np.ascontiguousarray(d, dtype=np.float64)
    if window_len % 2 == 0 or window_len < 5:
        raise ValueError(f"window_len must be odd and >= 5, got {window_len}")
    if d.size < window_len:
        raise ValueError(f"series of length {d.size} shorter than window {window_len}")
    half = window_len // 2
    if NUMBA_ENABLED:
        return _template_scan_numba(d, half)
    return _template_scan_numpy(d, half)


# --------------------------------------------------------------------------
# GF(2) rank of a bit-packed matrix (columns packed into uint64 words)
# --------------------------------------------------------------------------


def _gf2_rank_numpy(cols: np.ndarray) -> int:
    work = cols.copy()
    pivot_of: dict[int, int] = {}
    rank = 0
    for c in range(work.shape[0]):
        col = work[c]
        while True:
            nz = np.nonzero(col)[0]
            if nz.size == 0:
                break
            w = int(nz[-1])
            top = 64 * w + int(col[w]).bit_length() - 1
            p = pivot_of.get(top)
            if p is None:
                pivot_of[top] = c
                rank += 1
                break
            col ^= work[p]
    return rank


if HAS_NUMBA:

    @njit(cache=True)
    def _gf2_rank_numba(cols, n_bits):  # pragma: no cover - compiled
        n_cols, n_words = cols.shape
        work = cols.copy()
        pivot_of = np.full(n_bits, -1, np.int64)
        rank = 0
        for c in range(n_cols):
            while True:
                top = -1
                for w in range(n_words - 1, -1, -1):
                    word = work[c, w]
                    if word != np.uint64(0):
                        b = 0
                        while word != np.uint64(0):
                            word = word >> np.uint64(1)
                            b += 1
                        top = 64 * w + b - 1
                        break
                if top < 0:
                    break
                p = pivot_of[top]
                if p < 0:
                    pivot_of[top] = c
                    rank += 1
                    break
                for w in range(n_words):
                    work[c, w] ^= work[p, w]
        return rank

else:
    _gf2_rank_numba = None


def gf2_rank(cols: np.ndarray, n_bits: int) -> int:
    """Rank over GF(2) of a matrix whose columns are bit-packed uint64 rows."""
    if cols.size == 0:
        return 0
    cols = np.ascontiguousarray(cols, dtype=np.uint64)
    if NUMBA_ENABLED:
        return int(_gf2_rank_numba(cols, n_bits))
    return _gf2_rank_numpy(cols)


# --------------------------------------------------------------------------
# Vietoris-Rips simplex enumeration from a boolean adjacency matrix
# --------------------------------------------------------------------------


def _vr_triangles_numpy(adj: np.ndarray) -> np.ndarray:
    n = adj.shape[0]
    iu, ju = np.nonzero(np.triu(adj, 1))
    rows = []
    for i, j in zip(iu, ju):
        ks = np.nonzero(adj[i] & adj[j])[0]
        for k in ks[ks > j]:
            rows.append((i, j, k))
    if not rows:
        return np.empty((0, 3), np.int64)
    return np.asarray(rows, dtype=np.int64)


def _vr_tetrahedra_numpy(adj: np.ndarray, tri: np.ndarray) -> np.ndarray:
    rows = []
    for i, j, k in tri:
        ls = np.nonzero(adj[i] & adj[j] & adj[k])[0]
        for l in ls[ls > k]:
            rows.append((i, j, k, l))
    if not rows:
        return np.empty((0, 4), np.int64)
    return np.asarray(rows, dtype=np.int64)


if HAS_NUMBA:

    @njit(cache=True)
    def _vr_triangles_numba(adj):  # pragma: no cover - compiled
        n = adj.shape[0]
        cnt = 0
        for i in range(n):
            for j in range(i + 1, n):
                if adj[i, j]:
                    for k in range(j + 1, n):
                        if adj[i, k] and adj[j, k]:
                            cnt += 1
        out = np.empty((cnt, 3), np.int64)
        t = 0
        for i in range(n):
            for j in range(i + 1, n):
                if adj[i, j]:
                    for k in range(j + 1, n):
                        if adj[i, k] and adj[j, k]:
                            out[t, 0] = i
                            out[t, 1] = j
                            out[t, 2] = k
                            t += 1
        return out

    @njit(cache=True)
    def _vr_tetrahedra_numba(adj, tri):  # pragma: no cover - compiled
        n = adj.shape[0]
        cnt = 0
        for r in range(tri.shape[0]):
            i, j, k = tri[r, 0], tri[r, 1], tri[r, 2]
            for l in range(k + 1, n):
                if adj[i, l] and adj[j, l] and adj[k, l]:
                    cnt += 1
        out = np.empty((cnt, 4), np.int64)
        t = 0
        for r in range(tri.shape[0]):
            i, j, k = tri[r, 0], tri[r, 1], tri[r, 2]
            for l in range(k + 1, n):
                if adj[i, l] and adj[j, l] and adj[k, l]:
                    out[t, 0] = i
                    out[t, 1] = j
                    out[t, 2] = k
                    out[t, 3] = l
                    t += 1
        return out

else:
    _vr_triangles_numba = None
    _vr_tetrahedra_numba = None


def vr_triangles(adj: np.ndarray) -> np.ndarray:
    adj = np.ascontiguousarray(adj, dtype=np.bool_)
    if NUMBA_ENABLED:
        return _vr_triangles_numba(adj)
    return _vr_triangles_numpy(adj)


def vr_tetrahedra(adj: np.ndarray, tri: np.ndarray) -> np.ndarray:
    adj = np.ascontiguousarray(adj, dtype=np.bool_)
    tri = np.ascontiguousarray(tri, dtype=np.int64)
    if tri.shape[0] == 0:
        return np.empty((0, 4), np.int64)
    if NUMBA_ENABLED:
        return _vr_tetrahedra_numba(adj, tri)
    return _vr_tetrahedra_numpy(adj, tri)
