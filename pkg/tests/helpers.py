"""Random model generators shared by the property and acceptance tests."""

import numpy as np

from tubeflood.measures import Measure


def random_measure(rng, alpha_max=10.0, kind="mixed", hi_frac=0.95):
    """Random nonzero measure with support inside (0, hi_frac * alpha_max).

    kind: "atoms", "pieces" or "mixed".
    """
    atoms = ()
    pieces = ()
    want_atoms = kind in ("atoms", "mixed")
    want_pieces = kind in ("pieces", "mixed")
    if kind == "mixed":
        # keep at least one component, drop the other at random
        if rng.random() < 0.3:
            want_atoms = False
        elif rng.random() < 0.3:
            want_pieces = False
    hi = hi_frac * alpha_max
    if want_atoms:
        n = int(rng.integers(1, 12))
        L = rng.uniform(0.25 * alpha_max, hi, n)
        S = rng.uniform(0.5, 2.0, n)
        atoms = tuple(zip(L.tolist(), S.tolist()))
    if want_pieces:
        n = int(rng.integers(1, 4))
        for _ in range(n):
            a = rng.uniform(0.1 * alpha_max, 0.8 * alpha_max)
            b = rng.uniform(a * 1.05, hi)
            rho = rng.uniform(0.2, 2.0)
            pieces += ((float(a), float(b), float(rho)),)
    return Measure(atoms=atoms, pieces=pieces)


def random_pump(rng, total_f, n_segments=4):
    """Piecewise-constant pump with positive final rate reaching total_f."""
    from tubeflood.tubes import PumpHistory

    breaks = np.concatenate([[0.0], np.sort(rng.uniform(0.2, 5.0, n_segments - 1))])
    c = rng.uniform(0.1, 3.0, n_segments)
    c[-1] = max(c[-1], 0.5)  # guarantee every threshold is eventually reached
    return PumpHistory(tuple(breaks.tolist()), tuple(c.tolist()))
