"""Reference values for the bound calculator, in 50-digit arithmetic.

Writes ../data/bound_oracle.json. Run with: python3 bound_oracle.py
"""
import json
import math
import os
import random

from mpmath import mp, mpf, log, sqrt

mp.dps = 50


def c_term(n, q, delta, rho):
    n, delta, rho = mpf(n), mpf(delta), mpf(rho)
    tail = sqrt(log(4 / delta) / n)
    if q == 1:
        return tail
    lq = log(mpf(q))
    return (1 / delta) * sqrt(lq / n) * (2 + sqrt(log(rho**2 * n / lq))) + tail


def selector(n, q):
    return mpf(q) * (1 + log(mpf(n))) / sqrt(mpf(n))


def count(n, q):
    return n * math.comb(n - 1, q - 1)


def headline(n, q, delta, rho, kappa, rad, risk):
    n_ = mpf(n)
    inner = (mpf(q) * (1 + log(n_)) + mpf(kappa)) / sqrt(n_) + max(mpf(r) for r in rad)
    return mpf(risk) + 4 * q * inner + c_term(n, q, delta, rho)


def intermediate(n, q, delta, rho, kappa, rad, risk, nk):
    n_ = mpf(n)
    s = selector(n, q) + mpf(kappa) / sqrt(n_)
    total = sum(min(mpf(c) / n_, 4 * (mpf(r) + s)) for c, r in zip(nk, rad))
    return mpf(risk) + total + c_term(n, q + 1, delta, rho)


def s(x):
    return mp.nstr(x, 25, min_fixed=-5, max_fixed=5)


def point(n, q, delta, rho, kappa, rad, risk, nk):
    return {
        "n": n, "q": q, "delta": delta, "rho": rho, "kappa": kappa,
        "rademacher": rad, "risk": risk, "n_k_plus": nk,
        "c_term": s(c_term(n, q, delta, rho)),
        "selector_bound": s(selector(n, q)),
        "count": str(count(n, q)),
        "rhs": s(headline(n, q, delta, rho, kappa, rad, risk)),
        "intermediate_rhs": s(intermediate(n, q, delta, rho, kappa, rad, risk, nk)),
    }


def main():
    rng = random.Random(20240607)
    points = [
        point(1000, 4, 0.05, 1.0, 1.0, [0.1] * 4, 0.05, [100, 200, 300, 350]),
        point(1153, 3, 0.05, 1.0, 1.0, [0.1, 0.1, 0.1], 0.0, [400, 400, 300]),
        point(100, 2, 0.05, 1.0, 1.0, [0.01, 0.02], 0.1, [10, 20]),
        point(52, 26, 0.01, 1.0, 1.0, [0.0] * 26, 0.0, [2] * 26),
        point(10, 1, 0.5, 1.0, 1.0, [0.3], 0.2, [7]),
    ]
    while len(points) < 50:
        n = rng.choice([20, 50, 100, 300, 1000, 5000, 10**5, 10**6])
        q = rng.randint(1, min(12, n // 4))
        delta = round(rng.uniform(0.001, 1.0 / q), 6)
        rho = round(rng.uniform(0.5, 3.0), 4)
        if q > 1 and rho * rho * n / math.log(q + 1) <= 1.0001:
            continue
        kappa = round(rng.uniform(0.1, 3.0), 4)
        rad = [round(rng.uniform(0.0, 0.3), 6) for _ in range(q)]
        risk = round(rng.uniform(0.0, 0.5), 6)
        nk = [rng.randint(0, n // q) for _ in range(q)]
        points.append(point(n, q, delta, rho, kappa, rad, risk, nk))
    out = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data", "bound_oracle.json")
    with open(out, "w") as f:
        json.dump({"points": points}, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
