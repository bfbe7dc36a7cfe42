"""Compiled measurement and trial kernels.

The stabilizer state lives in bit-packed uint64 arrays:

- ``sx, sz``: (n, w) X/Z bit rows of the current generators, ``sph`` their
  phases (0 or 2, sign + or -); only the first ``meta[0]`` rows are live.
- ``dx, dz``: one companion row per generator with the defining property
  sym(row_i, generator_j) = delta_ij.  These let a measurement that commutes
  with every generator be decomposed over the generators in O(rank) word
  operations instead of a fresh Gaussian elimination per call.
- ``lx, lz``: (2, w) bits of the tracked logical X and Z representatives,
  ``lph`` their phases.
- ``meta``: [rank, status] with status 0=alive, 1=x-lost, 2=z-lost,
  3=collapsed.

Every function here is also valid plain numpy Python; set NUMBA_DISABLE_JIT=1
to run uncompiled.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U0 = np.uint64(0)
U1 = np.uint64(1)
_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)

STATUS_ALIVE = 0
STATUS_XLOST = 1
STATUS_ZLOST = 2
STATUS_COLLAPSED = 3


@njit(cache=True, nogil=True, inline="always")
def _popcnt(x):
    x = x - ((x >> U1) & _M1)
    x = (x & _M2) + ((x >> np.uint64(2)) & _M2)
    x = (x + (x >> np.uint64(4))) & _M4
    return np.int64((x * _H01) >> np.uint64(56))


@njit(cache=True, nogil=True, inline="always")
def _sym(ax, az, bx, bz, w):
    """Symplectic product parity of two packed rows (1 = anticommute)."""
    acc = np.int64(0)
    for k in range(w):
        acc += _popcnt(ax[k] & bz[k]) + _popcnt(az[k] & bx[k])
    return acc & np.int64(1)


@njit(cache=True, nogil=True)
def _mul_row(rx, rz, rph, ox, oz, oph, w):
    """In-place r := r * o; returns the new phase (i-exponent mod 4)."""
    t = np.int64(0)
    for k in range(w):
        a, b, c, e = rx[k], rz[k], ox[k], oz[k]
        t += _popcnt(a & b) + _popcnt(c & e) + 2 * _popcnt(b & c)
        t -= _popcnt((a ^ c) & (b ^ e))
        rx[k] = a ^ c
        rz[k] = b ^ e
    return (rph + oph + t) % 4


@njit(cache=True, nogil=True)
def measure_packed(sx, sz, sph, dx, dz, lx, lz, lph, meta,
                   ox, oz, oph, coin, anti, accx, accz):
    """Projective measurement of the packed operator (ox, oz, oph).

    Returns (case, outcome, deterministic).  Cases follow the standard
    stabilizer update rules: 1 = commutes with everything, 2 = anticommutes
    with generators only, 3 = with generators and a logical, 4 = with a
    logical only (the loss event).  A return case of -1 signals that the
    operator commutes with everything but lies outside the generated group;
    the caller must extend the tableau (never reached from code states built
    out of a full layout).  ``coin`` in [0, 1) fixes random outcomes:
    outcome +1 iff coin < 0.5.
    """
    rank = meta[0]
    w = ox.shape[0]
    n_anti = 0
    pivot = -1
    for j in range(rank):
        a = _sym(sx[j], sz[j], ox, oz, w)
        anti[j] = a
        if a == 1:
            n_anti += 1
            if pivot < 0:
                pivot = j
    out_plus = coin < 0.5
    outcome = 1 if out_plus else -1
    sign_ph = 0 if out_plus else 2

    if n_anti > 0:
        # Replace the lowest-index anticommuting generator by the signed
        # operator; multiply every other anticommuting generator (and any
        # anticommuting logical) by the old pivot.
        for k in range(w):
            accx[k] = sx[pivot, k]
            accz[k] = sz[pivot, k]
        pph = sph[pivot]
        for j in range(rank):
            if anti[j] == 1 and j != pivot:
                sph[j] = _mul_row(sx[j], sz[j], sph[j], accx, accz, pph, w)
        for j in range(rank):
            if j != pivot and _sym(dx[j], dz[j], ox, oz, w) == 1:
                for k in range(w):
                    dx[j, k] ^= accx[k]
                    dz[j, k] ^= accz[k]
        case = 2
        if _sym(lx[0], lx[1], ox, oz, w) == 1:
            lph[0] = _mul_row(lx[0], lx[1], lph[0], accx, accz, pph, w)
            case = 3
        if _sym(lz[0], lz[1], ox, oz, w) == 1:
            lph[1] = _mul_row(lz[0], lz[1], lph[1], accx, accz, pph, w)
            case = 3
        for k in range(w):
            dx[pivot, k] = accx[k]
            dz[pivot, k] = accz[k]
            sx[pivot, k] = ox[k]
            sz[pivot, k] = oz[k]
        sph[pivot] = (oph + sign_ph) % 4
        return case, outcome, False

    anti_lx = _sym(lx[0], lx[1], ox, oz, w) == 1
    anti_lz = _sym(lz[0], lz[1], ox, oz, w) == 1
    if anti_lx or anti_lz:
        # Loss event: the replaced logical becomes the companion row of the
        # appended generator (it anticommutes with the measured operator and
        # commutes with every generator).
        if rank >= sx.shape[0]:
            return -2, 0, False
        if anti_lx:
            for k in range(w):
                accx[k] = lx[0, k]
                accz[k] = lx[1, k]
        else:
            for k in range(w):
                accx[k] = lz[0, k]
                accz[k] = lz[1, k]
        for j in range(rank):
            if _sym(dx[j], dz[j], ox, oz, w) == 1:
                for k in range(w):
                    dx[j, k] ^= accx[k]
                    dz[j, k] ^= accz[k]
        new_ph = (oph + sign_ph) % 4
        for k in range(w):
            sx[rank, k] = ox[k]
            sz[rank, k] = oz[k]
            dx[rank, k] = accx[k]
            dz[rank, k] = accz[k]
        sph[rank] = new_ph
        meta[0] = rank + 1
        if anti_lx:
            for k in range(w):
                lx[0, k] = ox[k]
                lx[1, k] = oz[k]
            lph[0] = new_ph
        if anti_lz:
            for k in range(w):
                lz[0, k] = ox[k]
                lz[1, k] = oz[k]
            lph[1] = new_ph
        if meta[1] == STATUS_ALIVE:
            if anti_lx and anti_lz:
                meta[1] = STATUS_COLLAPSED
            elif anti_lx:
                meta[1] = STATUS_XLOST
            else:
                meta[1] = STATUS_ZLOST
        return 4, outcome, False

    # Commutes with generators and logicals: decompose over the generators.
    for k in range(w):
        accx[k] = U0
        accz[k] = U0
    acc_ph = np.int64(0)
    for j in range(rank):
        if _sym(dx[j], dz[j], ox, oz, w) == 1:
            acc_ph = _mul_row(accx, accz, acc_ph, sx[j], sz[j], sph[j], w)
    for k in range(w):
        if accx[k] != ox[k] or accz[k] != oz[k]:
            return -1, 0, False
    outcome = 1 if ((acc_ph - oph) % 4) == 0 else -1
    return 1, outcome, True


@njit(cache=True, nogil=True)
def group_contains_packed(sx, sz, dx, dz, meta, ox, oz, accx, accz):
    """Sign-free membership of (ox, oz) in the span of the generators."""
    rank = meta[0]
    w = ox.shape[0]
    for k in range(w):
        accx[k] = U0
        accz[k] = U0
    for j in range(rank):
        if _sym(dx[j], dz[j], ox, oz, w) == 1:
            for k in range(w):
                accx[k] ^= sx[j, k]
                accz[k] ^= sz[j, k]
    for k in range(w):
        if accx[k] != ox[k] or accz[k] != oz[k]:
            return False
    return True


@njit(cache=True, nogil=True)
def new_state(n, w, plaq_z, star_x, dplaq_x, dstar_z, lxx, lzz):
    """Fresh code state: plaquette rows, star rows, canonical logicals."""
    sx = np.zeros((n, w), dtype=np.uint64)
    sz = np.zeros((n, w), dtype=np.uint64)
    dx = np.zeros((n, w), dtype=np.uint64)
    dz = np.zeros((n, w), dtype=np.uint64)
    sph = np.zeros(n, dtype=np.int64)
    lx = np.zeros((2, w), dtype=np.uint64)
    lz = np.zeros((2, w), dtype=np.uint64)
    lph = np.zeros(2, dtype=np.int64)
    meta = np.zeros(2, dtype=np.int64)
    n_plaq = plaq_z.shape[0]
    for r in range(n_plaq):
        for k in range(w):
            sz[r, k] = plaq_z[r, k]
            dx[r, k] = dplaq_x[r, k]
    for r in range(star_x.shape[0]):
        for k in range(w):
            sx[n_plaq + r, k] = star_x[r, k]
            dz[n_plaq + r, k] = dstar_z[r, k]
    for k in range(w):
        lx[0, k] = lxx[k]
        lz[1, k] = lzz[k]
    meta[0] = n_plaq + star_x.shape[0]
    return sx, sz, sph, dx, dz, lx, lz, lph, meta


@njit(cache=True, nogil=True)
def run_round_packed(sx, sz, sph, dx, dz, lx, lz, lph, meta, n, w,
                     plaq_z, star_x, px, py, pz, ps, use_plaq, use_star,
                     early_stop, anti, accx, accz, opx, opz):
    """One measurement round: Pauli sub-round then stabilizer sub-round.

    Each qubit draws a single uniform against the intervals [0,px),
    [px,px+py), [px+py,px+py+pz); each participating stabilizer generator is
    measured with probability ps.  Every measurement consumes one extra
    uniform as its outcome coin.  Returns the number of measurements made.
    """
    pm = px + py + pz
    count = 0
    for q in range(n):
        u = np.random.random()
        if u < pm:
            word = q >> 6
            bit = U1 << np.uint64(q & 63)
            for k in range(w):
                opx[k] = U0
                opz[k] = U0
            if u < px:
                opx[word] = bit
            elif u < px + py:
                opx[word] = bit
                opz[word] = bit
            else:
                opz[word] = bit
            coin = np.random.random()
            measure_packed(sx, sz, sph, dx, dz, lx, lz, lph, meta,
                           opx, opz, 0, coin, anti, accx, accz)
            count += 1
    if early_stop and meta[1] != STATUS_ALIVE:
        return count
    if ps > 0.0:
        if use_plaq:
            for l in range(plaq_z.shape[0]):
                if np.random.random() < ps:
                    for k in range(w):
                        opx[k] = U0
                        opz[k] = plaq_z[l, k]
                    coin = np.random.random()
                    measure_packed(sx, sz, sph, dx, dz, lx, lz, lph, meta,
                                   opx, opz, 0, coin, anti, accx, accz)
                    count += 1
        if use_star:
            for l in range(star_x.shape[0]):
                if np.random.random() < ps:
                    for k in range(w):
                        opx[k] = star_x[l, k]
                        opz[k] = U0
                    coin = np.random.random()
                    measure_packed(sx, sz, sph, dx, dz, lx, lz, lph, meta,
                                   opx, opz, 0, coin, anti, accx, accz)
                    count += 1
    return count


@njit(cache=True, nogil=True)
def lifetime_trial(n, w, plaq_z, star_x, dplaq_x, dstar_z, lxx, lzz,
                   px, py, pz, ps, use_plaq, use_star, rounds_max, seed):
    """Rounds until the first loss.  Returns (fatal_round, status); a
    censored trial returns (rounds_max, 0)."""
    np.random.seed(seed)
    sx, sz, sph, dx, dz, lx, lz, lph, meta = new_state(
        n, w, plaq_z, star_x, dplaq_x, dstar_z, lxx, lzz)
    anti = np.zeros(n, dtype=np.uint8)
    accx = np.zeros(w, dtype=np.uint64)
    accz = np.zeros(w, dtype=np.uint64)
    opx = np.zeros(w, dtype=np.uint64)
    opz = np.zeros(w, dtype=np.uint64)
    for r in range(1, rounds_max + 1):
        run_round_packed(sx, sz, sph, dx, dz, lx, lz, lph, meta, n, w,
                         plaq_z, star_x, px, py, pz, ps, use_plaq, use_star,
                         True, anti, accx, accz, opx, opz)
        if meta[1] != STATUS_ALIVE:
            return r, meta[1]
    return rounds_max, STATUS_ALIVE


@njit(cache=True, nogil=True)
def single_round_trial(n, w, plaq_z, star_x, dplaq_x, dstar_z, lxx, lzz,
                       px, py, pz, seed):
    """Status after exactly one Pauli sub-round on a fresh state."""
    np.random.seed(seed)
    sx, sz, sph, dx, dz, lx, lz, lph, meta = new_state(
        n, w, plaq_z, star_x, dplaq_x, dstar_z, lxx, lzz)
    anti = np.zeros(n, dtype=np.uint8)
    accx = np.zeros(w, dtype=np.uint64)
    accz = np.zeros(w, dtype=np.uint64)
    opx = np.zeros(w, dtype=np.uint64)
    opz = np.zeros(w, dtype=np.uint64)
    run_round_packed(sx, sz, sph, dx, dz, lx, lz, lph, meta, n, w,
                     plaq_z, star_x, px, py, pz, 0.0, False, False,
                     False, anti, accx, accz, opx, opz)
    return meta[1]


@njit(cache=True, nogil=True)
def count_lost_edges(sx, sz, dx, dz, meta, n, w, accx, accz):
    """Number of qubits whose single-qubit X lies in the generator span."""
    rank = meta[0]
    cnt = 0
    for q in range(n):
        word = q >> 6
        bit = U1 << np.uint64(q & 63)
        for k in range(w):
            accx[k] = U0
            accz[k] = U0
        for j in range(rank):
            if (dz[j, word] & bit) != U0:
                for k in range(w):
                    accx[k] ^= sx[j, k]
                    accz[k] ^= sz[j, k]
        ok = True
        for k in range(w):
            want = bit if k == word else U0
            if accx[k] != want or accz[k] != U0:
                ok = False
                break
        if ok:
            cnt += 1
    return cnt


@njit(cache=True, nogil=True)
def fraction_trial(n, w, plaq_z, star_x, dplaq_x, dstar_z, lxx, lzz,
                   px, ps, rounds, seed, out_f):
    """X measurements against plaquette measurements; records the lost-edge
    fraction once per round into out_f (length rounds).

    The fraction is sampled after the Pauli sub-round and before that
    round's stabilizer sub-round: this is the stationary quantity whose
    balance equation is dF = p_x(1-F) - ps_eff F (1-p_x) (losses strike,
    then recovery acts on the previous round's backlog)."""
    np.random.seed(seed)
    sx, sz, sph, dx, dz, lx, lz, lph, meta = new_state(
        n, w, plaq_z, star_x, dplaq_x, dstar_z, lxx, lzz)
    anti = np.zeros(n, dtype=np.uint8)
    accx = np.zeros(w, dtype=np.uint64)
    accz = np.zeros(w, dtype=np.uint64)
    opx = np.zeros(w, dtype=np.uint64)
    opz = np.zeros(w, dtype=np.uint64)
    for r in range(rounds):
        run_round_packed(sx, sz, sph, dx, dz, lx, lz, lph, meta, n, w,
                         plaq_z, star_x, px, 0.0, 0.0, 0.0, False, False,
                         False, anti, accx, accz, opx, opz)
        out_f[r] = count_lost_edges(sx, sz, dx, dz, meta, n, w, accx, accz) / n
        run_round_packed(sx, sz, sph, dx, dz, lx, lz, lph, meta, n, w,
                         plaq_z, star_x, 0.0, 0.0, 0.0, ps, True, False,
                         False, anti, accx, accz, opx, opz)


@njit(cache=True, nogil=True)
def mask_survival(n, w, plaq_z, star_x, dplaq_x, dstar_z, lxx, lzz,
                  mask, measure_x, seed):
    """Measure X (measure_x) or Z on every qubit flagged in mask, in
    ascending index order; True iff the state stayed alive."""
    np.random.seed(seed)
    sx, sz, sph, dx, dz, lx, lz, lph, meta = new_state(
        n, w, plaq_z, star_x, dplaq_x, dstar_z, lxx, lzz)
    anti = np.zeros(n, dtype=np.uint8)
    accx = np.zeros(w, dtype=np.uint64)
    accz = np.zeros(w, dtype=np.uint64)
    opx = np.zeros(w, dtype=np.uint64)
    opz = np.zeros(w, dtype=np.uint64)
    for q in range(n):
        if mask[q] != 0:
            for k in range(w):
                opx[k] = U0
                opz[k] = U0
            if measure_x:
                opx[q >> 6] = U1 << np.uint64(q & 63)
            else:
                opz[q >> 6] = U1 << np.uint64(q & 63)
            coin = np.random.random()
            measure_packed(sx, sz, sph, dx, dz, lx, lz, lph, meta,
                           opx, opz, 0, coin, anti, accx, accz)
    return meta[1] == STATUS_ALIVE


# -- union-find connectivity -------------------------------------------------


@njit(cache=True, nogil=True, inline="always")
def _uf_root(parent, a):
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


@njit(cache=True, nogil=True)
def uf_terminals_connected(endpoints, n_vertices, term_a, term_b, removed):
    """True iff the terminals stay connected after deleting flagged edges."""
    parent = np.arange(n_vertices, dtype=np.int32)
    size = np.ones(n_vertices, dtype=np.int32)
    for e in range(endpoints.shape[0]):
        if removed[e] != 0:
            continue
        ra = _uf_root(parent, endpoints[e, 0])
        rb = _uf_root(parent, endpoints[e, 1])
        if ra != rb:
            if size[ra] < size[rb]:
                ra, rb = rb, ra
            parent[rb] = ra
            size[ra] += size[rb]
    return _uf_root(parent, term_a) == _uf_root(parent, term_b)


@njit(cache=True, nogil=True)
def bisect_sample(endpoints, n_vertices, term_a, term_b, n_edges,
                  zeta0, grow, shrink, max_iter, seed):
    """Straddling search for the first-loss measurement rate.

    Starting from p = 1/2, each iteration draws a fresh random removal set at
    rate p and tests terminal connectivity; p moves up by zeta on survival
    and down by zeta otherwise, then zeta is multiplied by ``grow`` on
    survival and ``shrink`` on loss.  The search stops once round(p*n_edges)
    repeats between successive iterations.  Returns (p, iterations, done).
    """
    np.random.seed(seed)
    removed = np.zeros(n_edges, dtype=np.uint8)
    p = 0.5
    zeta = zeta0
    prev_m = -1
    for it in range(1, max_iter + 1):
        for e in range(n_edges):
            removed[e] = 1 if np.random.random() < p else 0
        alive = uf_terminals_connected(endpoints, n_vertices, term_a, term_b,
                                       removed)
        if alive:
            p = p + zeta
            zeta = zeta * grow
        else:
            p = p - zeta
            zeta = zeta * shrink
        if p < 0.0:
            p = 0.0
        elif p > 1.0:
            p = 1.0
        m = int(round(p * n_edges))
        if m == prev_m:
            return p, it, True
        prev_m = m
    return p, max_iter, False
