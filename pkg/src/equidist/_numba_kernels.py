"""numba versions of the hot kernels (see ``_numpy_kernels`` for the contract)."""
import numpy as np
from numba import njit


@njit(cache=True)
def jet_mul(a, b, I, J, K, nc):
    nb = a.shape[1]
    out = np.zeros((nc, nb))
    for p in range(I.shape[0]):
        i = I[p]
        j = J[p]
        k = K[p]
        for m in range(nb):
            out[k, m] += a[i, m] * b[j, m]
    return out


@njit(cache=True)
def det4(m):
    n = m.shape[0]
    out = np.empty(n)
    for r in range(n):
        a0, a1, a2, a3 = m[r, 0, 0], m[r, 1, 0], m[r, 2, 0], m[r, 3, 0]
        b0, b1, b2, b3 = m[r, 0, 1], m[r, 1, 1], m[r, 2, 1], m[r, 3, 1]
        c0, c1, c2, c3 = m[r, 0, 2], m[r, 1, 2], m[r, 2, 2], m[r, 3, 2]
        d0, d1, d2, d3 = m[r, 0, 3], m[r, 1, 3], m[r, 2, 3], m[r, 3, 3]
        out[r] = ((a0 * b1 - a1 * b0) * (c2 * d3 - c3 * d2)
                  - (a0 * b2 - a2 * b0) * (c1 * d3 - c3 * d1)
                  + (a0 * b3 - a3 * b0) * (c1 * d2 - c2 * d1)
                  + (a1 * b2 - a2 * b1) * (c0 * d3 - c3 * d0)
                  - (a1 * b3 - a3 * b1) * (c0 * d2 - c2 * d0)
                  + (a2 * b3 - a3 * b2) * (c0 * d1 - c1 * d0))
    return out


@njit(cache=True)
def cell_cases(values, periodic_x, periodic_y):
    nx, ny = values.shape
    mx = nx if periodic_x else nx - 1
    my = ny if periodic_y else ny - 1
    out = np.zeros((mx, my), dtype=np.uint8)
    for i in range(mx):
        i1 = (i + 1) % nx
        for j in range(my):
            j1 = (j + 1) % ny
            code = 0
            if values[i, j] >= 0.0:
                code |= 1
            if values[i1, j] >= 0.0:
                code |= 2
            if values[i1, j1] >= 0.0:
                code |= 4
            if values[i, j1] >= 0.0:
                code |= 8
            out[i, j] = code
    return out


@njit(cache=True)
def segments_from_cases(cases, center_pos, nx, ny):
    mx, my = cases.shape
    out = np.empty((2 * mx * my, 2), dtype=np.int64)
    n = 0
    ids = np.empty(4, dtype=np.int64)
    crossed = np.empty(4, dtype=np.bool_)
    for i in range(mx):
        i1 = (i + 1) % nx
        for j in range(my):
            code = cases[i, j]
            if code == 0 or code == 15:
                continue
            j1 = (j + 1) % ny
            ids[0] = 2 * (i * ny + j)
            ids[1] = 2 * (i1 * ny + j) + 1
            ids[2] = 2 * (i * ny + j1)
            ids[3] = 2 * (i * ny + j) + 1
            b0 = code & 1
            b1 = (code >> 1) & 1
            b2 = (code >> 2) & 1
            b3 = (code >> 3) & 1
            crossed[0] = b0 != b1
            crossed[1] = b1 != b2
            crossed[2] = b3 != b2
            crossed[3] = b0 != b3
            cnt = 0
            for k in range(4):
                if crossed[k]:
                    cnt += 1
            if cnt == 2:
                first = -1
                last = -1
                for k in range(4):
                    if crossed[k]:
                        if first < 0:
                            first = k
                        last = k
                out[n, 0] = ids[first]
                out[n, 1] = ids[last]
                n += 1
            elif cnt == 4:
                if (code == 5) == center_pos[i, j]:
                    out[n, 0] = ids[0]
                    out[n, 1] = ids[1]
                    out[n + 1, 0] = ids[2]
                    out[n + 1, 1] = ids[3]
                else:
                    out[n, 0] = ids[0]
                    out[n, 1] = ids[3]
                    out[n + 1, 0] = ids[1]
                    out[n + 1, 1] = ids[2]
                n += 2
    return out[:n]


@njit(cache=True)
def _sign_change_4d(values, zero, excluded, periodic):
    n0, n1, n2, n3 = values.shape
    dims = np.array([n0, n1, n2, n3])
    nodes = np.empty(values.size, dtype=np.int64)
    axes = np.empty(values.size, dtype=np.int64)
    cnt = 0
    idx = np.zeros(4, dtype=np.int64)
    nbr = np.zeros(4, dtype=np.int64)
    flat = 0
    for i0 in range(n0):
        for i1 in range(n1):
            for i2 in range(n2):
                for i3 in range(n3):
                    if not (zero[i0, i1, i2, i3] or excluded[i0, i1, i2, i3]):
                        idx[0] = i0
                        idx[1] = i1
                        idx[2] = i2
                        idx[3] = i3
                        neg = values[i0, i1, i2, i3] < 0.0
                        for ax in range(4):
                            if idx[ax] == dims[ax] - 1 and not periodic[ax]:
                                continue
                            for k in range(4):
                                nbr[k] = idx[k]
                            nbr[ax] = (idx[ax] + 1) % dims[ax]
                            if zero[nbr[0], nbr[1], nbr[2], nbr[3]]:
                                continue
                            if excluded[nbr[0], nbr[1], nbr[2], nbr[3]]:
                                continue
                            if (values[nbr[0], nbr[1], nbr[2], nbr[3]] < 0.0) != neg:
                                nodes[cnt] = flat
                                axes[cnt] = ax
                                cnt += 1
                                break
                    flat += 1
    return nodes[:cnt], axes[:cnt]


def sign_change_edges(values, zero, excluded, periodic):
    if values.ndim != 4:
        from . import _numpy_kernels
        return _numpy_kernels.sign_change_edges(values, zero, excluded, periodic)
    return _sign_change_4d(values, zero, excluded, np.asarray(periodic, dtype=np.bool_))
