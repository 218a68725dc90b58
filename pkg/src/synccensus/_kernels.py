"""Hot kernels: orderly enumeration, canonical labeling, reset-word search.

Tables are flat ``int64`` arrays: entry ``q*k + a`` is the target of state
``q`` under letter ``a``.  State sets are int bitmasks.  Everything here is
written in the numba ``nopython`` subset; :func:`synccensus._backend.njit`
degrades to a no-op decorator when the JIT is disabled, so the same code
doubles as the plain-Python fallback.

Canonical form: the table serialization minimized over all simultaneous
state/letter relabelings.  Any minimizing relabeling numbers states in
first-reference order while the rows are scanned (breadth-first from the
state labeled 0, with a fresh start whenever the frontier empties), so the
minimum is found by trying every start state, every letter order, and every
fresh-start choice, and nothing else.  The enumeration scan generates
exactly the tables whose own numbering has this breadth-first-contiguous
shape and keeps the ones no alternative trace beats.
"""

import numpy as np

from ._backend import njit

# totals[] slot layout shared with census.py
T_TOTAL = 0
T_SYNC = 1
T_SC = 2
T_SCSYNC = 3
T_IRRED = 4
T_BELOW = 5
T_NONSYNC = 6
T_LNONSYNC = 7
T_OVERFLOW = 8
T_MEMBERS = 9
T_MAXLEN = 10
T_SLOTS = 11


@njit(cache=True)
def popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@njit(cache=True)
def letter_image(d, n, k, a, mask):
    img = 0
    for q in range(n):
        if (mask >> q) & 1:
            img |= 1 << d[q * k + a]
    return img


@njit(cache=True)
def strongly_connected(d, n, k):
    # forward closure from state 0, then backward closure; SC iff both full
    full = (1 << n) - 1
    fwd = 1
    while True:
        nxt = fwd
        for q in range(n):
            if (fwd >> q) & 1:
                for a in range(k):
                    nxt |= 1 << d[q * k + a]
        if nxt == fwd:
            break
        fwd = nxt
    if fwd != full:
        return False
    bwd = 1
    while True:
        nxt = bwd
        for q in range(n):
            if not ((bwd >> q) & 1):
                for a in range(k):
                    if (bwd >> d[q * k + a]) & 1:
                        nxt |= 1 << q
                        break
        if nxt == bwd:
            break
        bwd = nxt
    return bwd == full


@njit(cache=True)
def pair_synchronizing(d, n, k, merge_flags):
    """True iff every state pair can be collapsed (the polynomial criterion).

    ``merge_flags`` is uint8 scratch of size n*n.
    """
    if n == 1:
        return True
    for i in range(n * n):
        merge_flags[i] = 0
    remaining = (n * (n - 1)) // 2
    changed = True
    while changed and remaining > 0:
        changed = False
        for p in range(n):
            for q in range(p + 1, n):
                if merge_flags[p * n + q]:
                    continue
                ok = False
                for a in range(k):
                    r = d[p * k + a]
                    s = d[q * k + a]
                    if r == s:
                        ok = True
                        break
                    if r > s:
                        r, s = s, r
                    if merge_flags[r * n + s]:
                        ok = True
                        break
                if ok:
                    merge_flags[p * n + q] = 1
                    remaining -= 1
                    changed = True
    return remaining == 0


@njit(cache=True)
def subset_bfs_len(d, n, k, stamp, queue, gen):
    """Exact shortest length of a word collapsing the full state set.

    Level-order search over subset bitmasks starting from the full set;
    returns -1 when no singleton is reachable.  ``stamp``/``queue`` are
    scratch of size 2**n; ``gen`` must be a fresh generation id so the
    stamp array never needs clearing between calls.
    """
    if n == 1:
        return 0
    full = (1 << n) - 1
    stamp[full] = gen
    queue[0] = full
    head = 0
    tail = 1
    depth = 0
    while head < tail:
        level_end = tail
        depth += 1
        while head < level_end:
            s = queue[head]
            head += 1
            for a in range(k):
                img = 0
                for q in range(n):
                    if (s >> q) & 1:
                        img |= 1 << d[q * k + a]
                if img & (img - 1) == 0:
                    return depth
                if stamp[img] != gen:
                    stamp[img] = gen
                    queue[tail] = img
                    tail += 1
    return -1


@njit(cache=True)
def unary_synchronizing(d, n, k, a):
    # a single map synchronizes iff iterating it from the full set reaches
    # one state; the image chain stabilizes within n steps
    m = (1 << n) - 1
    for _ in range(n):
        nm = 0
        for q in range(n):
            if (m >> q) & 1:
                nm |= 1 << d[q * k + a]
        if nm == m:
            break
        m = nm
    return popcount(m) == 1


@njit(cache=True)
def reduct_synchronizing(d, n, k, skip, red_table, merge_flags):
    # does the automaton with letter `skip` removed still synchronize?
    if k == 2:
        return unary_synchronizing(d, n, k, 1 - skip)
    j = 0
    for a in range(k):
        if a == skip:
            continue
        for q in range(n):
            red_table[q * (k - 1) + j] = d[q * k + a]
        j += 1
    return pair_synchronizing(red_table, n, k - 1, merge_flags)


@njit(cache=True)
def irreducible_given_sync(d, n, k, red_table, merge_flags):
    # caller guarantees d synchronizes
    for a in range(k):
        if reduct_synchronizing(d, n, k, a, red_table, merge_flags):
            return False
    return True


@njit(cache=True)
def check_canonical_aut(d, n, k, perms, nperms, lab, orde, snap_lab, snap_ord,
                        snap_row, snap_cand):
    """Compare every greedy relabeling trace of ``d`` against ``d`` itself.

    Returns ``(1, aut)`` when no trace is lexicographically smaller, where
    ``aut`` is the number of traces reproducing ``d`` exactly (= the order
    of its relabeling stabilizer); ``(0, 0)`` otherwise.  Scratch arrays:
    lab/orde of size n, snap_* of size (n+1) x n resp. n+1.
    """
    aut = 0
    for pi in range(nperms):
        pbase = pi * k
        for r in range(n):
            for x in range(n):
                lab[x] = -1
            lab[r] = 0
            orde[0] = r
            used = 1
            i = 0
            depth = 0
            while True:
                dead = False
                while i < n:
                    if i >= used:
                        # frontier empty: branch over every unnumbered state
                        c = 0
                        while lab[c] >= 0:
                            c += 1
                        for x in range(n):
                            snap_lab[depth, x] = lab[x]
                            snap_ord[depth, x] = orde[x]
                        snap_row[depth] = i
                        snap_cand[depth] = c
                        depth += 1
                        lab[c] = i
                        orde[i] = c
                        used = i + 1
                    p = orde[i]
                    prow = p * k
                    irow = i * k
                    for j in range(k):
                        t = d[prow + perms[pbase + j]]
                        if lab[t] < 0:
                            lab[t] = used
                            orde[used] = t
                            used += 1
                        v = lab[t]
                        ref = d[irow + j]
                        if v < ref:
                            return 0, 0
                        if v > ref:
                            dead = True
                            break
                    if dead:
                        break
                    i += 1
                if not dead:
                    aut += 1
                resumed = False
                while depth > 0:
                    dd = depth - 1
                    c = snap_cand[dd] + 1
                    while c < n and snap_lab[dd, c] >= 0:
                        c += 1
                    if c >= n:
                        depth -= 1
                        continue
                    for x in range(n):
                        lab[x] = snap_lab[dd, x]
                        orde[x] = snap_ord[dd, x]
                    i = snap_row[dd]
                    snap_cand[dd] = c
                    lab[c] = i
                    orde[i] = c
                    used = i + 1
                    resumed = True
                    break
                if not resumed:
                    break
    return 1, aut


@njit(cache=True)
def minimal_serialization(d, n, k, perms, nperms, best, tmp, lab, orde,
                          snap_lab, snap_ord, snap_row, snap_cand):
    """Write the canonical serialization of ``d`` into ``best``.

    Minimum of the serialized table over all simultaneous state/letter
    relabelings, found as the smallest greedy relabeling trace.
    """
    nk = n * k
    have = False
    for pi in range(nperms):
        pbase = pi * k
        for r in range(n):
            for x in range(n):
                lab[x] = -1
            lab[r] = 0
            orde[0] = r
            used = 1
            i = 0
            depth = 0
            cmp = 0  # 0: tied with best so far, 1: strictly smaller
            while True:
                dead = False
                while i < n:
                    if i >= used:
                        c = 0
                        while lab[c] >= 0:
                            c += 1
                        for x in range(n):
                            snap_lab[depth, x] = lab[x]
                            snap_ord[depth, x] = orde[x]
                        snap_row[depth] = i
                        snap_cand[depth] = c
                        depth += 1
                        lab[c] = i
                        orde[i] = c
                        used = i + 1
                    p = orde[i]
                    prow = p * k
                    irow = i * k
                    for j in range(k):
                        t = d[prow + perms[pbase + j]]
                        if lab[t] < 0:
                            lab[t] = used
                            orde[used] = t
                            used += 1
                        v = lab[t]
                        pos = irow + j
                        tmp[pos] = v
                        if have and cmp == 0:
                            b = best[pos]
                            if v > b:
                                dead = True
                                break
                            if v < b:
                                cmp = 1
                    if dead:
                        break
                    i += 1
                if not dead and ((not have) or cmp == 1):
                    for x in range(nk):
                        best[x] = tmp[x]
                    have = True
                resumed = False
                while depth > 0:
                    dd = depth - 1
                    c = snap_cand[dd] + 1
                    while c < n and snap_lab[dd, c] >= 0:
                        c += 1
                    if c >= n:
                        depth -= 1
                        continue
                    snap_cand[dd] = c
                    ii = snap_row[dd]
                    # best may have moved below this branch's shared prefix
                    ncmp = 0
                    pdead = False
                    if have:
                        for x in range(ii * k):
                            if tmp[x] < best[x]:
                                ncmp = 1
                                break
                            if tmp[x] > best[x]:
                                pdead = True
                                break
                    if pdead:
                        depth -= 1
                        continue
                    for x in range(n):
                        lab[x] = snap_lab[dd, x]
                        orde[x] = snap_ord[dd, x]
                    i = ii
                    cmp = ncmp
                    lab[c] = i
                    orde[i] = c
                    used = i + 1
                    resumed = True
                    break
                if not resumed:
                    break
    return 0


@njit(cache=True)
def census_scan(n, k, prefix, sc_only, do_stats, do_labeled, factnk,
                min_record, member_min, perms, nperms, hist, labeled_hist,
                totals, members, member_lens, argmax):
    """Orderly scan of all breadth-first-contiguous tables under ``prefix``.

    Visits exactly the self-canonical tables (one per isomorphism class)
    and classifies each: synchronizability, exact reset length, strong
    connectivity, irreducibility, optional orbit-weighted (labeled-model)
    counts.  Returns the number of canonical tables visited, -1 for an
    infeasible prefix, -2 when the prefix forces a fresh component start
    under ``sc_only`` (the shard is empty then).
    """
    nk = n * k
    plen = prefix.shape[0]
    e = np.empty(nk, np.int64)
    for x in range(nk):
        e[x] = -1
    used_before = np.empty(nk + 1, np.int64)

    lab = np.empty(n, np.int64)
    orde = np.empty(n, np.int64)
    snap_lab = np.empty((n + 1, n), np.int64)
    snap_ord = np.empty((n + 1, n), np.int64)
    snap_row = np.empty(n + 1, np.int64)
    snap_cand = np.empty(n + 1, np.int64)
    merge_flags = np.zeros(n * n, np.uint8)
    stamp = np.zeros(1 << n, np.int64)
    queue = np.empty(1 << n, np.int64)
    red_table = np.empty(n * (k - 1) if k > 1 else 1, np.int64)
    gen = 0
    member_cap = members.shape[0]
    member_count = 0
    max_len = -1
    visited = 0

    used = 1
    for m in range(plen):
        used_before[m] = used
        v = prefix[m]
        maxv = used if used < n else n - 1
        if v < 0 or v > maxv:
            return -1
        e[m] = v
        if v == used:
            used += 1
        if (m + 1) % k == 0:
            irow = m // k
            if used == irow + 1 and used < n:
                if sc_only:
                    return -2
                used += 1
    used_before[plen] = used

    m = plen
    first_leaf = plen >= nk  # fully specified prefix: single candidate
    while first_leaf or m >= plen:
        if not first_leaf:
            e[m] += 1
            ub = used_before[m]
            maxv = ub if ub < n else n - 1
            if e[m] > maxv:
                e[m] = -1
                m -= 1
                continue
            ua = ub + 1 if e[m] == ub else ub
            if m < nk - 1:
                nxt = m + 1
                if nxt % k == 0:
                    irow = m // k
                    if ua == irow + 1 and ua < n:
                        if sc_only:
                            continue
                        ua += 1
                used_before[nxt] = ua
                m = nxt
                continue
        first_leaf = False

        # ---- leaf: e is a complete breadth-first-contiguous table
        canon, aut = check_canonical_aut(e, n, k, perms, nperms, lab, orde,
                                         snap_lab, snap_ord, snap_row,
                                         snap_cand)
        if canon == 0:
            continue
        if sc_only:
            if not strongly_connected(e, n, k):
                continue
            sc = True
        else:
            sc = False
        visited += 1
        if do_stats == 0:
            continue
        if not sc_only:
            sc = strongly_connected(e, n, k)
        if sc:
            totals[T_SC] += 1
        if pair_synchronizing(e, n, k, merge_flags):
            totals[T_SYNC] += 1
            if sc:
                totals[T_SCSYNC] += 1
            gen += 1
            length = subset_bfs_len(e, n, k, stamp, queue, gen)
            if length > max_len:
                max_len = length
                for x in range(nk):
                    argmax[x] = e[x]
            if min_record > 0 and length < min_record:
                totals[T_BELOW] += 1
            else:
                hist[length] += 1
            if length >= member_min and member_cap > 0:
                if member_count < member_cap:
                    for x in range(nk):
                        members[member_count, x] = e[x]
                    member_lens[member_count] = length
                    member_count += 1
                else:
                    totals[T_OVERFLOW] = 1
            if irreducible_given_sync(e, n, k, red_table, merge_flags):
                totals[T_IRRED] += 1
            if do_labeled:
                labeled_hist[length] += factnk // aut
        else:
            totals[T_NONSYNC] += 1
            if do_labeled:
                totals[T_LNONSYNC] += factnk // aut

    totals[T_TOTAL] += visited
    totals[T_MEMBERS] = member_count
    totals[T_MAXLEN] = max_len
    return visited


@njit(cache=True)
def enum_chunk(n, k, e, used_before, mstate, plen, sc_only, perms, nperms,
               lab, orde, snap_lab, snap_ord, snap_row, snap_cand, out, cap):
    """Resumable slice of the orderly scan.

    Appends up to ``cap`` canonical tables to ``out`` and parks the
    odometer in ``e``/``mstate`` so the next call continues where this one
    stopped.  ``mstate[0]`` drops below ``plen`` once the scan is done.
    """
    nk = n * k
    emitted = 0
    m = mstate[0]
    if m < plen or m >= nk:
        mstate[0] = plen - 1
        return 0
    while m >= plen:
        e[m] += 1
        ub = used_before[m]
        maxv = ub if ub < n else n - 1
        if e[m] > maxv:
            e[m] = -1
            m -= 1
            continue
        ua = ub + 1 if e[m] == ub else ub
        if m == nk - 1:
            canon, aut = check_canonical_aut(e, n, k, perms, nperms, lab,
                                             orde, snap_lab, snap_ord,
                                             snap_row, snap_cand)
            if canon == 1 and (sc_only == 0 or strongly_connected(e, n, k)):
                for x in range(nk):
                    out[emitted, x] = e[x]
                emitted += 1
                if emitted == cap:
                    mstate[0] = m
                    return emitted
            continue
        nxt = m + 1
        if nxt % k == 0:
            irow = m // k
            if ua == irow + 1 and ua < n:
                if sc_only:
                    continue
                ua += 1
        used_before[nxt] = ua
        m = nxt
    mstate[0] = plen - 1
    return emitted
