"""Scenario 4: 28 GHz network with rectangular obstacles, penetration loss,
first-order specular reflections, log-normal shadowing and sector antennas.

Each trial draws interferers and obstacles uniformly in a square window
centred on the typical receiver. Every transmitter-receiver pair is linked by
its direct path and by one mirror path per reflecting obstacle face that
admits a specular reflection. Path gain in dB:

    -61.4 - 20 log10(length) + 10 log10(r) [if reflected] - n * l_o - X

with ``n`` the obstacles crossed by the path and ``X ~ N(0, shadow_db^2)``
drawn once per path. The typical pair steers both beams along its strongest
path; interferers point their beams in uniformly random directions. The
reference ``y`` and the simplified ``x`` share all draws; ``x`` may drop
reflections, make obstacles impenetrable and remove side lobes.
"""
from __future__ import annotations

import math

import numba
import numpy as np

from ..geometry import segment_hits_rect
from ..interference import PRM, ModelSpec, interference_batch
from ..propagation import MMWAVE_CONST_DB
from .config import ScenarioConfig

TWO_PI = 2.0 * math.pi
GAIN_FLOOR_DB = -180.0
CELL = 10.0  # obstacle grid cell (m)
MIN_PATH = 1.0  # path lengths are floored at the 1 m reference distance


@numba.njit(cache=True)
def _wrap(a):
    a = (a + math.pi) % (2.0 * math.pi)
    return a - math.pi


@numba.njit(cache=True)
def _cell_range(c, r, lo, cell, ncell):
    i0 = min(max(int((c - r - lo) / cell), 0), ncell - 1)
    i1 = min(max(int((c + r - lo) / cell), 0), ncell - 1)
    return i0, i1


@numba.njit(cache=True)
def _build_grid(cx, cy, rad, lo, cell, ncell):
    """Bucket obstacles into every grid cell their bounding box touches (CSR layout)."""
    n = cx.size
    start = np.zeros(ncell * ncell + 1, dtype=np.int64)
    for j in range(n):
        i0, i1 = _cell_range(cx[j], rad[j], lo, cell, ncell)
        k0, k1 = _cell_range(cy[j], rad[j], lo, cell, ncell)
        for ix in range(i0, i1 + 1):
            for iy in range(k0, k1 + 1):
                start[ix * ncell + iy + 1] += 1
    for i in range(1, start.size):
        start[i] += start[i - 1]
    items = np.empty(start[-1], dtype=np.int64)
    fill = start.copy()
    for j in range(n):
        i0, i1 = _cell_range(cx[j], rad[j], lo, cell, ncell)
        k0, k1 = _cell_range(cy[j], rad[j], lo, cell, ncell)
        for ix in range(i0, i1 + 1):
            for iy in range(k0, k1 + 1):
                c = ix * ncell + iy
                items[fill[c]] = j
                fill[c] += 1
    return start, items


@numba.njit(cache=True)
def _count_on_segment(x0, y0, x1, y1, cx, cy, hw, hl, ori, start, items, stamp, qid,
                      lo, cell, ncell, skip):
    """Obstacles crossed by the segment, visiting only the grid cells it passes."""
    ix = min(max(int((x0 - lo) / cell), 0), ncell - 1)
    iy = min(max(int((y0 - lo) / cell), 0), ncell - 1)
    jx = min(max(int((x1 - lo) / cell), 0), ncell - 1)
    jy = min(max(int((y1 - lo) / cell), 0), ncell - 1)
    dx = x1 - x0
    dy = y1 - y0
    sx = 1 if dx > 0 else -1
    sy = 1 if dy > 0 else -1
    if dx != 0.0:
        nxt = lo + (ix + (1 if dx > 0 else 0)) * cell
        tmx = (nxt - x0) / dx
        tdx = cell / abs(dx)
    else:
        tmx = np.inf
        tdx = np.inf
    if dy != 0.0:
        nxt = lo + (iy + (1 if dy > 0 else 0)) * cell
        tmy = (nxt - y0) / dy
        tdy = cell / abs(dy)
    else:
        tmy = np.inf
        tdy = np.inf
    hits = 0
    steps = abs(jx - ix) + abs(jy - iy) + 1
    for _ in range(steps):
        c = ix * ncell + iy
        for p in range(start[c], start[c + 1]):
            j = items[p]
            if stamp[j] == qid or j == skip:
                continue
            stamp[j] = qid
            if segment_hits_rect(x0, y0, x1, y1, cx[j], cy[j], hw[j], hl[j], ori[j]):
                hits += 1
        if ix == jx and iy == jy:
            break
        if tmx < tmy:
            ix += sx
            tmx += tdx
        else:
            iy += sy
            tmy += tdy
        if ix < 0 or iy < 0 or ix >= ncell or iy >= ncell:
            break
    return hits


@numba.njit(cache=True)
def _mirror_point(tlx, tly, rlx, rly, cx, cy, c, s, hw, hl, face):
    """Specular point on one face of a rectangle, with both ends in its local frame.

    Returns ``(ok, px, py, length)``; faces 0..3 are local +x, -x, +y, -y.
    """
    if face < 2:
        sign = 1.0 if face == 0 else -1.0
        a = sign * tlx - hw
        b = sign * rlx - hw
        half = hl
        u_t = tly
        u_r = rly
    else:
        sign = 1.0 if face == 2 else -1.0
        a = sign * tly - hl
        b = sign * rly - hl
        half = hw
        u_t = tlx
        u_r = rlx
    if a <= 0.0 or b <= 0.0:
        return False, 0.0, 0.0, 0.0
    u = u_r + (u_t - u_r) * b / (a + b)
    if abs(u) > half:
        return False, 0.0, 0.0, 0.0
    length = math.sqrt((a + b) ** 2 + (u_t - u_r) ** 2)
    if face < 2:
        lx = sign * hw
        ly = u
    else:
        lx = u
        ly = sign * hl
    px = cx + lx * c - ly * s
    py = cy + lx * s + ly * c
    return True, px, py, length


@numba.njit(cache=True)
def _trial_paths(tx, ty, cx, cy, hw, hl, ori, refl_idx, rcos, rsin, rlx, rly, rfaces,
                 start, items, stamp, qid, lo, ncell, out_len, out_nb, out_refl, out_dep, out_arr):
    """All paths from (tx, ty) to the origin; returns (count, next query id).

    ``rcos``, ``rsin``, ``rlx``, ``rly`` hold each reflector's rotation and the
    receiver's position in its frame; ``rfaces[k]`` lists the (at most two)
    faces the receiver can see.
    """
    m = 0
    out_len[m] = math.hypot(tx, ty)
    qid += 1
    out_nb[m] = _count_on_segment(tx, ty, 0.0, 0.0, cx, cy, hw, hl, ori, start, items, stamp, qid,
                                  lo, CELL, ncell, -1)
    out_refl[m] = False
    out_dep[m] = math.atan2(-ty, -tx)
    out_arr[m] = math.atan2(ty, tx)
    m += 1
    for q in range(refl_idx.size):
        k = refl_idx[q]
        c = rcos[q]
        s = rsin[q]
        ax = tx - cx[k]
        ay = ty - cy[k]
        tlx = ax * c + ay * s
        tly = -ax * s + ay * c
        for f in range(2):
            face = rfaces[q, f]
            if face < 0:
                continue
            ok, px, py, length = _mirror_point(tlx, tly, rlx[q], rly[q], cx[k], cy[k], c, s,
                                               hw[k], hl[k], face)
            if not ok:
                continue
            qid += 1
            nb = _count_on_segment(tx, ty, px, py, cx, cy, hw, hl, ori, start, items, stamp, qid,
                                   lo, CELL, ncell, k)
            qid += 1
            nb += _count_on_segment(px, py, 0.0, 0.0, cx, cy, hw, hl, ori, start, items, stamp, qid,
                                    lo, CELL, ncell, k)
            out_len[m] = length
            out_nb[m] = nb
            out_refl[m] = True
            out_dep[m] = math.atan2(py - ty, px - tx)
            out_arr[m] = math.atan2(py, px)
            m += 1
    return m, qid


@numba.njit(cache=True)
def _reflector_frames(cx, cy, hw, hl, ori, refl_idx):
    nr = refl_idx.size
    rcos = np.empty(nr)
    rsin = np.empty(nr)
    rlx = np.empty(nr)
    rly = np.empty(nr)
    rfaces = np.full((nr, 2), -1, dtype=np.int64)
    for q in range(nr):
        k = refl_idx[q]
        c = math.cos(ori[k])
        s = math.sin(ori[k])
        rcos[q] = c
        rsin[q] = s
        # receiver (origin) in the reflector frame
        rlx[q] = -cx[k] * c - cy[k] * s
        rly[q] = cx[k] * s - cy[k] * c
        f = 0
        if rlx[q] > hw[k]:
            rfaces[q, f] = 0
            f += 1
        elif rlx[q] < -hw[k]:
            rfaces[q, f] = 1
            f += 1
        if rly[q] > hl[k]:
            rfaces[q, f] = 2
        elif rly[q] < -hl[k]:
            rfaces[q, f] = 3
    return rcos, rsin, rlx, rly, rfaces


@numba.njit(cache=True)
def _path_gain(length, nb, refl, shadow_db, lo_lin, refl_lin):
    """Linear channel gain of one path (antennas excluded)."""
    if refl and refl_lin == 0.0:
        return 0.0
    g = 10.0 ** ((MMWAVE_CONST_DB - 20.0 * math.log10(max(length, MIN_PATH)) - shadow_db) / 10.0)
    if refl:
        g *= refl_lin
    if nb > 0:
        if lo_lin == 0.0:
            return 0.0
        g *= lo_lin ** nb
    return g


@numba.njit(cache=True)
def s4_kernel(seed, n_t, n_o, half, d0, theta, p, shadow_sd, refl_prob,
              z_y, lo_y, r_y, main_y, z_x, lo_x, r_x, main_x, floor):
    np.random.seed(seed)
    n = n_t.size
    total = 0
    for t in range(n):
        total += n_t[t]
    sig_y = np.zeros(n)
    sig_x = np.zeros(n)
    dist = np.empty(total)
    pow_y = np.zeros(total)
    pow_x = np.zeros(total)
    ch_y = np.zeros(total)
    ch_x = np.zeros(total)
    lo = -half - 3.0 * CELL
    ncell = int(math.ceil((2.0 * half + 6.0 * CELL) / CELL))
    half_beam = 0.5 * theta
    pos = 0
    for t in range(n):
        no = n_o[t]
        cx = np.random.uniform(-half, half, no)
        cy = np.random.uniform(-half, half, no)
        hw = np.empty(no)
        hl = np.empty(no)
        ori = np.empty(no)
        rad = np.empty(no)
        nref = 0
        is_ref = np.zeros(no, dtype=np.bool_)
        for j in range(no):
            hw[j] = 0.5 * np.random.uniform(0.0, 4.0)
            hl[j] = 0.5 * np.random.uniform(0.0, 3.0)
            ori[j] = np.random.uniform(0.0, 2.0 * math.pi)
            rad[j] = math.sqrt(hw[j] ** 2 + hl[j] ** 2)
            if np.random.random() < refl_prob:
                is_ref[j] = True
                nref += 1
        refl_idx = np.empty(nref, dtype=np.int64)
        k = 0
        for j in range(no):
            if is_ref[j]:
                refl_idx[k] = j
                k += 1
        start, items = _build_grid(cx, cy, rad, lo, CELL, ncell)
        rcos, rsin, rlx, rly, rfaces = _reflector_frames(cx, cy, hw, hl, ori, refl_idx)
        stamp = np.zeros(no, dtype=np.int64)
        qid = 0
        cap = 1 + 2 * nref
        plen = np.empty(cap)
        pnb = np.empty(cap, dtype=np.int64)
        prefl = np.empty(cap, dtype=np.bool_)
        pdep = np.empty(cap)
        parr = np.empty(cap)

        # typical link: both ends steer along their strongest path
        m, qid = _trial_paths(d0, 0.0, cx, cy, hw, hl, ori, refl_idx, rcos, rsin, rlx, rly, rfaces, start, items, stamp, qid, lo, ncell,
                              plen, pnb, prefl, pdep, parr)
        best_y = 0.0
        best_x = 0.0
        beam_y = 0.0
        beam_x = 0.0
        for q in range(m):
            x_db = np.random.normal(0.0, shadow_sd) if shadow_sd > 0 else 0.0
            gy = _path_gain(plen[q], pnb[q], prefl[q], x_db, lo_y, r_y)
            gx = _path_gain(plen[q], pnb[q], prefl[q], x_db, lo_x, r_x)
            if gy > best_y:
                best_y = gy
                beam_y = parr[q]
            if gx > best_x:
                best_x = gx
                beam_x = parr[q]
        sig_y[t] = p * main_y * main_y * best_y
        sig_x[t] = p * main_x * main_x * best_x

        for i in range(n_t[t]):
            ix = np.random.uniform(-half, half)
            iy = np.random.uniform(-half, half)
            phi = np.random.uniform(-math.pi, math.pi)
            dist[pos] = math.hypot(ix, iy)
            if dist[pos] == 0.0:
                pos += 1
                continue
            m, qid = _trial_paths(ix, iy, cx, cy, hw, hl, ori, refl_idx, rcos, rsin, rlx, rly, rfaces, start, items, stamp, qid, lo,
                                  ncell, plen, pnb, prefl, pdep, parr)
            for q in range(m):
                x_db = np.random.normal(0.0, shadow_sd) if shadow_sd > 0 else 0.0
                tx_main = abs(_wrap(pdep[q] - phi)) <= half_beam
                gy = _path_gain(plen[q], pnb[q], prefl[q], x_db, lo_y, r_y)
                if gy > 0.0:
                    ant = (main_y if tx_main else z_y) * (main_y if abs(_wrap(parr[q] - beam_y)) <= half_beam else z_y)
                    if ant * gy >= floor:
                        pow_y[pos] += p * ant * gy
                        ch_y[pos] += gy
                gx = _path_gain(plen[q], pnb[q], prefl[q], x_db, lo_x, r_x)
                if gx > 0.0:
                    ant = (main_x if tx_main else z_x) * (main_x if abs(_wrap(parr[q] - beam_x)) <= half_beam else z_x)
                    if ant * gx >= floor:
                        pow_x[pos] += p * ant * gx
                        ch_x[pos] += gx
            pos += 1
    return sig_y, sig_x, dist, pow_y, pow_x, ch_y, ch_x


def main_lobe_gain(theta: float, z: float) -> float:
    return (TWO_PI - (TWO_PI - theta) * z) / theta


def _lin(db: float) -> float:
    return 0.0 if db == -math.inf else 10.0 ** (db / 10.0)


def _loss(db: float) -> float:
    return 0.0 if db == math.inf else 10.0 ** (-db / 10.0)


def simulate_s4(cfg: ScenarioConfig, models: list[ModelSpec], rng: np.random.Generator, n: int):
    from .engine import Parts

    half = 0.5 * cfg.window
    area = cfg.window**2
    n_t = rng.poisson(cfg.lambda_t * area, n).astype(np.int64)
    n_o = rng.poisson(cfg.lambda_o * area, n).astype(np.int64)
    seed = int(rng.integers(0, 2**31 - 1))
    main_y = main_lobe_gain(cfg.theta, _lin(cfg.z_db))
    main_x = main_y if cfg.x_keep_main_gain else main_lobe_gain(cfg.theta, _lin(cfg.x_z_db))
    sig_y, sig_x, dist, pow_y, pow_x, ch_y, ch_x = s4_kernel(
        seed, n_t, n_o, half, cfg.d0, cfg.theta, cfg.p, cfg.shadow_db, cfg.reflector_prob,
        _lin(cfg.z_db), _loss(cfg.l_o_db), cfg.refl_coeff, main_y,
        _lin(cfg.x_z_db), _loss(cfg.x_l_o_db), cfg.x_refl_coeff, main_x,
        10.0 ** (GAIN_FLOOR_DB / 10.0))
    idx = np.repeat(np.arange(n), n_t)

    def aggregate(model, power, gain):
        # the protocol radius only reacts to interferers whose power reaches the receiver
        d = np.where(power > 0, dist, math.inf) if model.kind == PRM else dist
        return interference_batch(model, idx, power, d, gain, n)

    y = (sig_y, aggregate(cfg.y_spec, pow_y, ch_y))
    x = {m.label(): (sig_x, aggregate(m, pow_x, ch_x)) for m in models}
    return Parts(cfg.sigma, y, x)
