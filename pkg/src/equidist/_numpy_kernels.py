"""Pure-numpy versions of the hot kernels.

Signatures mirror ``_numba_kernels`` exactly so either module can back
``equidist.kernels``.
"""
import numpy as np


def jet_mul(a, b, I, J, K, nc):
    """Truncated product of two coefficient blocks of shape (ncoef, nbatch)."""
    prod = a[I] * b[J]
    out = np.zeros((nc, a.shape[1]))
    np.add.at(out, K, prod)
    return out


def det4(m):
    """Determinants of a stack of 4x4 matrices, shape (n, 4, 4)."""
    # Laplace expansion on the first two columns; same formula as the numba path.
    a = m[:, :, 0]
    b = m[:, :, 1]
    c = m[:, :, 2]
    d = m[:, :, 3]

    def minor(x, y, i, j):
        return x[:, i] * y[:, j] - x[:, j] * y[:, i]

    return (minor(a, b, 0, 1) * minor(c, d, 2, 3)
            - minor(a, b, 0, 2) * minor(c, d, 1, 3)
            + minor(a, b, 0, 3) * minor(c, d, 1, 2)
            + minor(a, b, 1, 2) * minor(c, d, 0, 3)
            - minor(a, b, 1, 3) * minor(c, d, 0, 2)
            + minor(a, b, 2, 3) * minor(c, d, 0, 1))


def cell_cases(values, periodic_x, periodic_y):
    """Marching-squares case code of every cell (bit k set = corner k >= 0)."""
    pos = values >= 0.0
    nx, ny = values.shape
    mx = nx if periodic_x else nx - 1
    my = ny if periodic_y else ny - 1
    i0 = np.arange(mx)
    j0 = np.arange(my)
    i1 = (i0 + 1) % nx
    j1 = (j0 + 1) % ny
    c0 = pos[i0][:, j0]
    c1 = pos[i1][:, j0]
    c2 = pos[i1][:, j1]
    c3 = pos[i0][:, j1]
    return (c0.astype(np.uint8) | (c1.astype(np.uint8) << 1)
            | (c2.astype(np.uint8) << 2) | (c3.astype(np.uint8) << 3))


def _cell_edge_ids(mx, my, nx, ny):
    i0 = np.arange(mx)[:, None]
    j0 = np.arange(my)[None, :]
    i1 = (i0 + 1) % nx
    j1 = (j0 + 1) % ny
    e0 = 2 * (i0 * ny + j0)
    e1 = 2 * (i1 * ny + j0) + 1
    e2 = 2 * (i0 * ny + j1)
    e3 = 2 * (i0 * ny + j0) + 1
    e0, e1, e2, e3 = np.broadcast_arrays(e0, e1, e2, e3)
    return np.stack([e0, e1, e2, e3], axis=-1).astype(np.int64)


def segments_from_cases(cases, center_pos, nx, ny):
    """Segments as pairs of global edge ids, row-major cell order.

    ``center_pos`` is consulted only for the saddle cases 5 and 10.
    """
    mx, my = cases.shape
    ids = _cell_edge_ids(mx, my, nx, ny)
    b = [((cases >> k) & 1).astype(bool) for k in range(4)]
    crossed = np.stack([b[0] != b[1], b[1] != b[2], b[3] != b[2], b[0] != b[3]], axis=-1)
    count = crossed.sum(axis=-1)

    seg = np.full((mx, my, 2, 2), -1, dtype=np.int64)
    two = count == 2
    first = np.argmax(crossed, axis=-1)
    last = 3 - np.argmax(crossed[..., ::-1], axis=-1)
    ti, tj = np.nonzero(two)
    seg[ti, tj, 0, 0] = ids[ti, tj, first[ti, tj]]
    seg[ti, tj, 0, 1] = ids[ti, tj, last[ti, tj]]

    four = count == 4
    si, sj = np.nonzero(four)
    pair_a = (cases[si, sj] == 5) == center_pos[si, sj]
    la = np.where(pair_a[:, None], [[0, 1, 2, 3]], [[0, 3, 1, 2]])
    seg[si, sj, 0, 0] = ids[si, sj, la[:, 0]]
    seg[si, sj, 0, 1] = ids[si, sj, la[:, 1]]
    seg[si, sj, 1, 0] = ids[si, sj, la[:, 2]]
    seg[si, sj, 1, 1] = ids[si, sj, la[:, 3]]

    flat = seg.reshape(-1, 2)
    return flat[flat[:, 0] >= 0]


def sign_change_edges(values, zero, excluded, periodic):
    """First grid axis along which each usable node sees a strict sign change.

    Returns flat node indices (row-major) and the chosen axis per node.
    """
    usable = ~(zero | excluded)
    neg = values < 0.0
    ndim = values.ndim
    changes = []
    for ax in range(ndim):
        nb_usable = np.roll(usable, -1, axis=ax)
        nb_neg = np.roll(neg, -1, axis=ax)
        ch = usable & nb_usable & (neg != nb_neg)
        if not periodic[ax]:
            idx = [slice(None)] * ndim
            idx[ax] = -1
            ch[tuple(idx)] = False
        changes.append(ch)
    stacked = np.stack(changes, axis=0)
    anych = stacked.any(axis=0).ravel()
    nodes = np.nonzero(anych)[0]
    axis = np.argmax(stacked.reshape(ndim, -1)[:, nodes], axis=0)
    return nodes.astype(np.int64), axis.astype(np.int64)
