"""Shared sampling helpers for the surface checks."""

import mpmath
import numpy as np


def sample_surface_points(count, seed=7):
    rng = np.random.default_rng(seed)
    pts = []
    for k in range(count):
        kind = k % 4
        if kind == 0:
            pts.append((complex(rng.uniform(-8, 5), rng.uniform(-3, 3)), None))
        elif kind == 1:
            pts.append((complex(rng.uniform(1.01, 1.99), 0), int(rng.choice([-1, 1]))))
        elif kind == 2:
            pts.append((complex(rng.uniform(-4.99, -1.01), 0), int(rng.choice([-1, 1]))))
        else:
            pts.append((complex(rng.choice([-1e3, 1e3]) * rng.uniform(1, 3), rng.uniform(-1, 1)), None))
    return pts


def surface_inverse_residual(smap, points):
    """max |H(psi_j(t)) - t| / (1 + |t|) over the points and all three sheets, in mp."""
    worst = mpmath.mpf(0)
    with mpmath.workprec(smap.bits):
        for side in (None, 1, -1):
            ts = [smap.affine(mpmath.mpc(z)) for z, s in points if s == side]
            for t, ys in zip(ts, smap.psi_mp_many(ts, side=side)):
                worst = max([worst] + [abs(smap.H(y) - t) / (1 + abs(t)) for y in ys])
    return worst
