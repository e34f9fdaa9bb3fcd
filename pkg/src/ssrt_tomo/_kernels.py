"""Compiled inner loops for ray marching and backprojection."""

import math

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def _bilinear(data, row, col):
    h, w = data.shape
    r0 = math.floor(row)
    c0 = math.floor(col)
    fr = row - r0
    fc = col - c0
    acc = 0.0
    for dr in range(2):
        rr = r0 + dr
        if rr < 0 or rr >= h:
            continue
        wr = fr if dr else 1.0 - fr
        for dc in range(2):
            cc = c0 + dc
            if cc < 0 or cc >= w:
                continue
            wc = fc if dc else 1.0 - fc
            acc += wr * wc * data[rr, cc]
    return acc


@numba.njit(cache=True, nogil=True)
def ray_march(data, rho, angles, n_s):
    """Sum the bilinear interpolant at unit steps ``s = -n_s..n_s`` along every ray."""
    h, w = data.shape
    cx = (w - 1) / 2.0
    cy = (h - 1) / 2.0
    out = np.zeros((rho.size, angles.size))
    for i in range(angles.size):
        c = math.cos(angles[i])
        sn = math.sin(angles[i])
        for k in range(rho.size):
            acc = 0.0
            for j in range(-n_s, n_s + 1):
                x = rho[k] * c - j * sn
                y = rho[k] * sn + j * c
                col = x + cx
                row = cy - y
                if col <= -1.0 or col >= w or row <= -1.0 or row >= h:
                    continue
                acc += _bilinear(data, row, col)
            out[k, i] = acc
    return out


@numba.njit(cache=True, nogil=True)
def backproject_sum(values, rho0, tau, angles, size):
    """Sum over views of the linearly interpolated projections at each pixel center."""
    n_det = values.shape[0]
    out = np.zeros((size, size))
    c0 = (size - 1) / 2.0
    for i in range(angles.size):
        c = math.cos(angles[i])
        sn = math.sin(angles[i])
        for r in range(size):
            y = c0 - r
            for q in range(size):
                x = q - c0
                pos = (x * c + y * sn - rho0) / tau
                k = math.floor(pos)
                if k < 0 or k >= n_det:
                    continue
                f = pos - k
                if k == n_det - 1:
                    if f == 0.0:
                        out[r, q] += values[k, i]
                    continue
                out[r, q] += (1.0 - f) * values[k, i] + f * values[k + 1, i]
    return out
