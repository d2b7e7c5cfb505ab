"""
Compiled inner loops for the walk engines

Profiles are passed in the flat form produced by StepProfile.kernel_args():
(mode, values, window_min, tail_pos, tail_neg).
"""

import math

import numba
import numpy as np


@numba.njit(cache=True)
def p_lookup(j, mode, values, window_min, tail_pos, tail_neg):
    if mode == 0:
        return values[j % values.shape[0]]
    k = j - window_min
    if k < 0:
        return tail_neg
    if k >= values.shape[0]:
        return tail_pos
    return values[k]


@numba.njit(cache=True)
def geometric_from_uniform(u, alpha):
    """Inverse-CDF draw of P(k) = alpha (1 - alpha)^k from u in (0, 1]"""
    if alpha >= 1.0:
        return 0
    return int(math.floor(math.log(u) / math.log1p(-alpha)))


# -- exact sweeps -------------------------------------------------------------

@numba.njit(cache=True)
def joint_step(cur, nxt, p, stay, cap, m):
    """
    Advance the (horizontal count, level) pmf from step m to m + 1.

    Arrays are indexed [h, cap + j]. Only entries with |j| <= min(cap, m - h) and
    j of the parity of m - h can be nonzero. Returns the mass pushed past +-cap.
    """
    size = 2 * cap + 1
    w_new = min(cap, m + 1)
    for h in range(m + 2):
        for i in range(cap - w_new, cap + w_new + 1):
            nxt[h, i] = 0.0

    lost = 0.0
    w = min(cap, m)
    for h in range(m + 1):
        v_moves = m - h
        jmax = min(w, v_moves)
        j0 = -jmax
        if (j0 - v_moves) % 2 != 0:
            j0 += 1
        for j in range(j0, jmax + 1, 2):
            i = cap + j
            mass = cur[h, i]
            if mass == 0.0:
                continue
            nxt[h + 1, i] += mass * stay[i]
            moved = mass * p[i]
            if i + 1 < size:
                nxt[h, i + 1] += moved
            else:
                lost += moved
            if i >= 1:
                nxt[h, i - 1] += moved
            else:
                lost += moved
    return lost


@numba.njit(cache=True)
def origin_return(cur, ssrw, cap, m):
    """sum_h mass(0, h) * P(simple walk of h steps is at 0)"""
    total = 0.0
    for h in range(0, m + 1, 2):
        total += cur[h, cap] * ssrw[h]
    return total


# -- Monte Carlo walks ----------------------------------------------------------

@numba.njit(cache=True)
def direct_chunk(x, y, uniforms, mode, values, window_min, tail_pos, tail_neg, xs, ys):
    """
    One uniform per step: [0, p) up, [p, 2p) down, [2p, 1/2 + p) left, rest right.

    Writes the visited positions into xs, ys and returns (x, y, horizontal moves).
    """
    h = 0
    for t in range(uniforms.shape[0]):
        p = p_lookup(y, mode, values, window_min, tail_pos, tail_neg)
        u = uniforms[t]
        if u < p:
            y += 1
        elif u < 2.0 * p:
            y -= 1
        elif u < 0.5 + p:
            x -= 1
            h += 1
        else:
            x += 1
            h += 1
        xs[t] = x
        ys[t] = y
    return x, y, h


@numba.njit(cache=True)
def embedding_chunk(state, steps, hbuf, vbuf, gbuf, mode, values, window_min, tail_pos, tail_neg, xs, ys):
    """
    Geometric-run construction of the walk.

    On each arrival at a level j a run length G ~ Geom(2 p_j) is drawn; G horizontal
    simple-walk steps follow, then one vertical simple-walk step. Three independent
    uniform streams drive the horizontal signs, vertical signs and run lengths.

    ``state`` holds [x, y, run_left, need_draw, ih, iv, ig, h] and is updated in
    place. Returns the number of steps taken, which is short of ``steps`` when a
    buffer ran dry.
    """
    x = state[0]
    y = state[1]
    run_left = state[2]
    need_draw = state[3]
    ih = state[4]
    iv = state[5]
    ig = state[6]
    h = state[7]

    t = 0
    while t < steps:
        if need_draw == 1:
            if ig >= gbuf.shape[0]:
                break
            alpha = 2.0 * p_lookup(y, mode, values, window_min, tail_pos, tail_neg)
            run_left = geometric_from_uniform(gbuf[ig], alpha)
            ig += 1
            need_draw = 0
        if run_left > 0:
            if ih >= hbuf.shape[0]:
                break
            if hbuf[ih] < 0.5:
                x += 1
            else:
                x -= 1
            ih += 1
            run_left -= 1
            h += 1
        else:
            if iv >= vbuf.shape[0]:
                break
            if vbuf[iv] < 0.5:
                y += 1
            else:
                y -= 1
            iv += 1
            need_draw = 1
        xs[t] = x
        ys[t] = y
        t += 1

    state[0] = x
    state[1] = y
    state[2] = run_left
    state[3] = need_draw
    state[4] = ih
    state[5] = iv
    state[6] = ig
    state[7] = h
    return t


def new_embedding_state() -> np.ndarray:
    """Walk at the origin, about to draw its first run length"""
    return np.array([0, 0, 0, 1, 0, 0, 0, 0], dtype=np.int64)
