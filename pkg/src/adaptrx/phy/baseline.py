"""Classical channel estimation and equalization baseline.

Least-squares estimates at pilot positions, piecewise-linear
interpolation over the grid with nearest-neighbor extrapolation outside
the pilots' hull, and per-element MMSE combining across antennas.
"""
from __future__ import annotations

import numpy as np
from scipy.interpolate import griddata
from scipy.spatial import QhullError

from ..errors import EstimationError, InvalidArgument


def ls_estimate(rx_grid: np.ndarray, positions: np.ndarray,
                pilot_symbols: np.ndarray):
    """Per-antenna least-squares estimates h = y / s at pilot positions.

    positions are flat row-major indices into the (T, F) grid.  Returns
    (positions, estimates) with estimates of shape (n, K).
    """
    t_dim, f_dim, k = rx_grid.shape
    positions = np.asarray(positions, dtype=np.int64)
    pilot_symbols = np.asarray(pilot_symbols)
    if positions.size == 0:
        raise EstimationError("no usable pilots to estimate from")
    if positions.size != pilot_symbols.size:
        raise InvalidArgument("positions and pilot symbols differ in length")
    if positions.min() < 0 or positions.max() >= t_dim * f_dim:
        raise InvalidArgument("pilot position outside the grid")
    flat = rx_grid.reshape(t_dim * f_dim, k)
    return positions, flat[positions] / pilot_symbols[:, None]


def interpolate(positions: np.ndarray, values: np.ndarray, t_dim: int,
                f_dim: int) -> np.ndarray:
    """Spread scattered per-antenna estimates onto the full (T, F, K) grid.

    Piecewise-linear interpolation inside the convex hull of the pilot
    coordinates, nearest-neighbor fill outside it.  Degenerate layouts
    (single pilot, pilots confined to one symbol or one subcarrier, or
    collinear scatters) reduce to 1-d linear interpolation along the
    populated axis with edge-value extrapolation, replicated along the
    other axis.
    """
    positions = np.asarray(positions, dtype=np.int64)
    values = np.asarray(values)
    if values.ndim == 1:
        values = values[:, None]
    n, k = values.shape
    if positions.size != n:
        raise InvalidArgument("positions and values differ in length")
    t = positions // f_dim
    f = positions % f_dim
    out = np.empty((t_dim, f_dim, k), dtype=np.complex128)

    if n == 1:
        out[:] = values[0]
        return out

    def interp_1d(coords, vals, length):
        order = np.argsort(coords, kind="stable")
        xs = coords[order].astype(np.float64)
        ys = vals[order]
        # average duplicates (same coordinate, e.g. two pilots on one
        # subcarrier of the same symbol cannot happen; across symbols it can)
        uniq, inv = np.unique(xs, return_inverse=True)
        if uniq.size != xs.size:
            acc = np.zeros(uniq.size, dtype=np.complex128)
            cnt = np.zeros(uniq.size)
            np.add.at(acc, inv, ys)
            np.add.at(cnt, inv, 1.0)
            xs, ys = uniq, acc / cnt
        grid = np.arange(length, dtype=np.float64)
        if xs.size == 1:
            return np.full(length, ys[0], dtype=np.complex128)
        re = np.interp(grid, xs, ys.real)
        im = np.interp(grid, xs, ys.imag)
        return re + 1j * im

    for ant in range(k):
        v = values[:, ant]
        if np.unique(t).size == 1:
            line = interp_1d(f, v, f_dim)
            out[:, :, ant] = line[None, :]
            continue
        if np.unique(f).size == 1:
            line = interp_1d(t, v, t_dim)
            out[:, :, ant] = line[:, None]
            continue
        tt, ff = np.meshgrid(np.arange(t_dim), np.arange(f_dim), indexing="ij")
        pts = np.column_stack([t, f]).astype(np.float64)
        try:
            re = griddata(pts, v.real, (tt, ff), method="linear")
            im = griddata(pts, v.imag, (tt, ff), method="linear")
            grid_v = re + 1j * im
            holes = np.isnan(re)
        except QhullError:
            grid_v = np.full((t_dim, f_dim), np.nan + 0j)
            holes = np.ones((t_dim, f_dim), dtype=bool)
        if holes.any():
            re = griddata(pts, v.real, (tt, ff), method="nearest")
            im = griddata(pts, v.imag, (tt, ff), method="nearest")
            grid_v = np.where(holes, re + 1j * im, grid_v)
        out[:, :, ant] = grid_v
    return out


def lmmse_equalize(rx_grid: np.ndarray, h_hat: np.ndarray, noise_var: float):
    """Per-element MMSE combining across antennas.

    s_hat = sum_k conj(h_k) y_k / (sum_k |h_k|^2 + noise_var)
    post_snr = sum_k |h_k|^2 / noise_var

    Elements whose estimate is zero on every antenna are erased:
    s_hat = 0 and post_snr = 0, which downstream yields all-zero LLRs.
    Returns (s_hat, post_snr) of shape (T, F).
    """
    if h_hat.shape != rx_grid.shape:
        raise InvalidArgument(
            f"estimate shape {h_hat.shape} does not match grid {rx_grid.shape}")
    if noise_var < 0:
        raise InvalidArgument("noise_var must be non-negative")
    energy = np.sum(np.abs(h_hat) ** 2, axis=-1)
    num = np.sum(np.conj(h_hat) * rx_grid, axis=-1)
    den = energy + noise_var
    dead = den == 0.0
    s_hat = np.where(dead, 0.0, num / np.where(dead, 1.0, den))
    if noise_var > 0:
        post_snr = energy / noise_var
    else:
        post_snr = np.where(energy > 0, np.inf, 0.0)
    return s_hat, post_snr
