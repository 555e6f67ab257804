"""Transportation simplex kernel (numba-compiled when available).

The basis is kept as an explicit list of ``m + n - 1`` cells forming a
spanning tree of the bipartite row/column graph.  Every iteration rebuilds
the tree adjacency, solves the potentials ``u_i + v_j = c_ij`` on the tree,
prices all cells, and pivots around the unique cycle closed by the entering
cell.
"""
import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

# consecutive degenerate pivots tolerated before switching to Bland's rule
BLAND_AFTER = 50

STATUS_OPTIMAL = 0
STATUS_ITERATION_LIMIT = 1
STATUS_BROKEN_TREE = 2


@njit(cache=True, nogil=True)
def _initial_basis(a, b, C, flow, bi, bj):
    # matrix-minimum rule; exactly one line is crossed per allocation so the
    # m + n - 1 allocated cells always form a spanning tree
    m, n = C.shape
    supply = a.copy()
    demand = b.copy()
    row_on = np.ones(m, np.bool_)
    col_on = np.ones(n, np.bool_)
    nr = m
    nc = n
    k = 0
    order = np.argsort(C.ravel(), kind="mergesort")
    for idx in order:
        i = idx // n
        j = idx % n
        if not row_on[i] or not col_on[j]:
            continue
        x = min(supply[i], demand[j])
        flow[i, j] = x
        bi[k] = i
        bj[k] = j
        k += 1
        supply[i] -= x
        demand[j] -= x
        if nr == 1 and nc == 1:
            break
        if nr == 1:
            col_on[j] = False
            nc -= 1
        elif nc == 1:
            row_on[i] = False
            nr -= 1
        elif supply[i] <= demand[j]:
            row_on[i] = False
            nr -= 1
        else:
            col_on[j] = False
            nc -= 1
    return k


@njit(cache=True, nogil=True)
def transport_simplex(a, b, C, max_iter):
    """Solve min <C, P> over couplings of ``a`` and ``b``.

    Returns ``(flow, u, v, iterations, status)``.  On ``STATUS_OPTIMAL`` the
    potentials satisfy ``u_i + v_j <= c_ij`` up to the pricing tolerance with
    equality on every basic cell.
    """
    m, n = C.shape
    nb = m + n - 1
    N = m + n
    flow = np.zeros((m, n))
    bi = np.empty(nb, np.int64)
    bj = np.empty(nb, np.int64)
    u = np.zeros(m)
    v = np.zeros(n)
    if _initial_basis(a, b, C, flow, bi, bj) != nb:
        return flow, u, v, 0, STATUS_BROKEN_TREE

    cmax = 0.0
    for i in range(m):
        for j in range(n):
            if C[i, j] > cmax:
                cmax = C[i, j]
    tol = 1e-12 * max(1.0, cmax)

    deg = np.zeros(N, np.int64)
    start = np.zeros(N + 1, np.int64)
    fill = np.zeros(N, np.int64)
    adj_node = np.empty(2 * nb, np.int64)
    adj_edge = np.empty(2 * nb, np.int64)
    parent = np.empty(N, np.int64)
    pedge = np.empty(N, np.int64)
    depth = np.empty(N, np.int64)
    queue = np.empty(N, np.int64)
    ex = np.empty(N, np.int64)
    ey = np.empty(N, np.int64)
    cyc = np.empty(N, np.int64)
    degenerate_run = 0

    for it in range(max_iter):
        deg[:] = 0
        for e in range(nb):
            deg[bi[e]] += 1
            deg[m + bj[e]] += 1
        start[0] = 0
        for x in range(N):
            start[x + 1] = start[x] + deg[x]
            fill[x] = start[x]
        for e in range(nb):
            r = bi[e]
            c = m + bj[e]
            adj_node[fill[r]] = c
            adj_edge[fill[r]] = e
            fill[r] += 1
            adj_node[fill[c]] = r
            adj_edge[fill[c]] = e
            fill[c] += 1

        depth[:] = -1
        depth[0] = 0
        parent[0] = -1
        u[0] = 0.0
        queue[0] = 0
        head = 0
        tail = 1
        while head < tail:
            x = queue[head]
            head += 1
            for p in range(start[x], start[x + 1]):
                y = adj_node[p]
                if depth[y] < 0:
                    e = adj_edge[p]
                    depth[y] = depth[x] + 1
                    parent[y] = x
                    pedge[y] = e
                    if y >= m:
                        v[y - m] = C[bi[e], bj[e]] - u[x]
                    else:
                        u[y] = C[bi[e], bj[e]] - v[x - m]
                    queue[tail] = y
                    tail += 1
        if tail != N:
            return flow, u, v, it, STATUS_BROKEN_TREE

        bland = degenerate_run >= BLAND_AFTER
        ei = -1
        ej = -1
        best = -tol
        for i in range(m):
            for j in range(n):
                r = C[i, j] - u[i] - v[j]
                if r < best:
                    best = r
                    ei = i
                    ej = j
                    if bland:
                        break
            if bland and ei >= 0:
                break
        if ei < 0:
            return flow, u, v, it, STATUS_OPTIMAL

        # tree path from column ej up to the common ancestor, then down to row ei
        x = m + ej
        y = ei
        nx = 0
        ny = 0
        while depth[x] > depth[y]:
            ex[nx] = pedge[x]
            nx += 1
            x = parent[x]
        while depth[y] > depth[x]:
            ey[ny] = pedge[y]
            ny += 1
            y = parent[y]
        while x != y:
            ex[nx] = pedge[x]
            nx += 1
            x = parent[x]
            ey[ny] = pedge[y]
            ny += 1
            y = parent[y]
        total = nx + ny
        for q in range(nx):
            cyc[q] = ex[q]
        for q in range(ny):
            cyc[nx + q] = ey[ny - 1 - q]

        # even positions lose flow; ties broken by smallest cell index
        theta = np.inf
        leave = -1
        leave_key = -1
        for q in range(0, total, 2):
            e = cyc[q]
            f = flow[bi[e], bj[e]]
            key = bi[e] * n + bj[e]
            if f < theta or (f == theta and key < leave_key):
                theta = f
                leave = e
                leave_key = key
        if theta < 0.0:
            theta = 0.0
        for q in range(total):
            e = cyc[q]
            if q % 2 == 0:
                val = flow[bi[e], bj[e]] - theta
                flow[bi[e], bj[e]] = val if val > 0.0 else 0.0
            else:
                flow[bi[e], bj[e]] += theta
        flow[bi[leave], bj[leave]] = 0.0
        flow[ei, ej] = theta
        bi[leave] = ei
        bj[leave] = ej
        if theta <= 1e-15:
            degenerate_run += 1
        else:
            degenerate_run = 0

    return flow, u, v, max_iter, STATUS_ITERATION_LIMIT


@njit(cache=True, nogil=True)
def w1_weight_vectors(wa, wb, C, drop):
    """W1 between two weight vectors on a shared atom universe.

    Mass common to both vectors stays in place (optimal for metric costs),
    so only the positive and negative parts of ``wa - wb`` are transported.
    """
    U = wa.shape[0]
    diff = wa - wb
    npos = 0
    nneg = 0
    for k in range(U):
        if diff[k] > drop:
            npos += 1
        elif diff[k] < -drop:
            nneg += 1
    if npos == 0 or nneg == 0:
        return 0.0
    pos = np.empty(npos, np.int64)
    neg = np.empty(nneg, np.int64)
    ip = 0
    ineg = 0
    for k in range(U):
        if diff[k] > drop:
            pos[ip] = k
            ip += 1
        elif diff[k] < -drop:
            neg[ineg] = k
            ineg += 1
    a = np.empty(npos)
    b = np.empty(nneg)
    sa = 0.0
    sb = 0.0
    for k in range(npos):
        a[k] = diff[pos[k]]
        sa += a[k]
    for k in range(nneg):
        b[k] = -diff[neg[k]]
        sb += b[k]
    scale = sa / sb
    for k in range(nneg):
        b[k] *= scale
    sub = np.empty((npos, nneg))
    for i in range(npos):
        for j in range(nneg):
            sub[i, j] = C[pos[i], neg[j]]
    flow, u, v, it, status = transport_simplex(a, b, sub, 200 * (npos + nneg) + 1000)
    if status != STATUS_OPTIMAL:
        return -1.0
    total = 0.0
    for i in range(npos):
        for j in range(nneg):
            total += flow[i, j] * sub[i, j]
    return total


@njit(cache=True, nogil=True)
def w1_rows(W, C, rows, cols, drop):
    """Matrix of W1 values between sample ``rows`` and sample ``cols``."""
    out = np.empty((rows.shape[0], cols.shape[0]))
    for p in range(rows.shape[0]):
        for q in range(cols.shape[0]):
            i = rows[p]
            j = cols[q]
            if i == j:
                out[p, q] = 0.0
            else:
                out[p, q] = w1_weight_vectors(W[i], W[j], C, drop)
    return out
