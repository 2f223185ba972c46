"""Envelope fits on synthetic decays, by exhaustive search.

For each trial floor f on a fine grid, fit log(z - f) = a + b t by the
normal equations; keep the floor with the smallest RMS residual.
"""

import math

DT = 1.0 / 400.0


def samples(fn, duration):
    n = int(round(duration / DT))
    return [i * DT for i in range(n)], [fn(i * DT) for i in range(n)]


def line_fit(t, y):
    n = len(t)
    st, sy = sum(t), sum(y)
    stt = sum(v * v for v in t)
    sty = sum(a * b for a, b in zip(t, y))
    b = (n * sty - st * sy) / (n * stt - st * st)
    a = (sy - b * st) / n
    r = math.sqrt(sum((yy - a - b * tt) ** 2 for tt, yy in zip(t, y)) / n)
    return a, b, r


def fit(t, z, tail=0.25, ratio=3.0, grid=200):
    n_tail = max(1, round(tail * len(z)))
    eps = max(z[-n_tail:])
    end = next(i for i, v in enumerate(z) if v <= ratio * eps)
    best = None
    for k in range(grid + 1):
        f = eps * k / grid
        a, b, r = line_fit(t[:end], [math.log(v - f) for v in z[:end]])
        if best is None or r < best[3]:
            best = (f, a, b, r)
    f, a, b, r = best
    return {"beta": -b, "alpha": math.exp(a) / z[0], "eps": eps, "floor": f, "residual": r}


if __name__ == "__main__":
    t, z = samples(lambda s: 2.0 * math.exp(-3.0 * s) + 0.01, 5.0)
    print("2 exp(-3t) + 0.01, 5 s:", fit(t, z))
    t, z = samples(lambda s: math.exp(-s), 20.0)
    print("exp(-t), 20 s:", fit(t, z))
