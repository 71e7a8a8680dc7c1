"""Independent reference computations used to freeze expected values."""

import itertools

import numpy as np


def ssr(stations, ranges, p):
    d = np.hypot(*(np.asarray(stations, float) - np.asarray(p, float)).T)
    res = np.asarray(ranges, float) - d
    return float(res @ res)


def grid_minimize(f, center, half_width, points=41, levels=14):
    """Minimize ``f`` over the plane by repeated grid refinement around the best node."""
    cx, cy = map(float, center)
    for _ in range(levels):
        axis = np.linspace(-half_width, half_width, points)
        best = min(((f((cx + dx, cy + dy)), dx, dy) for dx in axis for dy in axis))
        cx, cy = cx + best[1], cy + best[2]
        half_width = 2 * (axis[1] - axis[0])
    return np.array([cx, cy])


def ls_oracle(stations, ranges, center=(0.0, 0.0), half_width=6000.0):
    return grid_minimize(lambda p: ssr(stations, ranges, p), center, half_width)


def best_sparse_fit(atoms, values, mask, k):
    """Exhaustive search over all size-``k`` supports; returns (reconstruction, sorted residuals)."""
    fits = []
    for supp in itertools.combinations(range(atoms.shape[1]), k):
        sub = atoms[mask][:, supp]
        coef, *_ = np.linalg.lstsq(sub, values[mask], rcond=None)
        res = np.linalg.norm(sub @ coef - values[mask])
        full = np.zeros(atoms.shape[1], dtype=complex)
        full[list(supp)] = coef
        fits.append((res, atoms @ full))
    fits.sort(key=lambda t: t[0])
    return fits[0][1], [r for r, _ in fits]
