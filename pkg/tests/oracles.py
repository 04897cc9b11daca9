"""Independent reference computations for the test suite.

Nothing here imports the numerical kernels of the package: phases use
mpmath at 50 digits, orbits use exact rationals, continued fractions of
quadratic surds use the integer (P + sqrt D) / Q recursion, and the Mobius
function comes from sympy's factorization.

Running this file freezes reference values into tests/data/frozen.json.
"""
import json
import math
import os

import mpmath
import sympy

mpmath.mp.dps = 50
HERE = os.path.dirname(__file__)
FROZEN = os.path.join(HERE, "data", "frozen.json")


def surd_cf(P, Q, D, depth):
    """Partial quotients of (P + sqrt D) / Q (requires Q | D - P^2), first digit dropped."""
    assert (D - P * P) % Q == 0
    r = math.isqrt(D)
    out = []
    for _ in range(depth + 1):
        a = (P + r) // Q if Q > 0 else (P + r + 1) // Q
        out.append(a)
        P = a * Q - P
        Q = (D - P * P) // Q
    return out[1:]


def golden_mp():
    return (mpmath.sqrt(5) - 1) / 2


def silver_mp():
    return mpmath.sqrt(2) - 1


def mp_phase(a, b, n, alpha, x, y, beta):
    alpha, x, y, beta = (mpmath.mpf(v) for v in (alpha, x, y, beta))
    ph = a * (x + n * alpha) + b * (y + n * x + n * beta + mpmath.mpf(n * (n - 1) // 2) * alpha)
    return float(ph - mpmath.floor(ph))


def exact_orbit(alpha, beta, x, y, n):
    """Phi^k (x, y) for k < n with exact rationals (Fractions)."""
    pts = []
    for _ in range(n):
        pts.append((x, y))
        x, y = (x + alpha) % 1, (y + x + beta) % 1
    return pts


def eval_modes(coeffs, x, y):
    """Direct trigonometric evaluation, summing cos/sin pairs separately."""
    re = 0.0
    for (a, b), c in sorted(coeffs.items()):
        t = 2 * math.pi * float((a * x + b * y) % 1)
        re += c.real * math.cos(t) - c.imag * math.sin(t)
    return re


def naive_birkhoff(coeffs, alpha, beta, x, y, n):
    return math.fsum(eval_modes(coeffs, px, py) for px, py in exact_orbit(alpha, beta, x, y, n))


def mobius(n):
    return int(sympy.mobius(n))


def fibonacci_denominators(depth):
    q = [1, 1]
    while len(q) < depth + 1:
        q.append(q[-1] + q[-2])
    return q[:depth + 1]


def freeze():
    data = {
        "golden_quotients_10": surd_cf(-1, 2, 5, 10),
        "silver_quotients_8": surd_cf(-1, 1, 2, 8),
        "golden_denominators_20": fibonacci_denominators(20),
        "phase_golden_1_1_1e6": mp_phase(1, 1, 10 ** 6, golden_mp(), 0, 0, 0),
        "phase_silver_3_m2_12345678": mp_phase(3, -2, 12345678, silver_mp(), "0.125", "0.375",
                                               "0.0625"),
        "mertens_10000": sum(mobius(n) for n in range(1, 10001)),
        "golden_C_alpha_20": max(b / a for a, b in zip(fibonacci_denominators(20),
                                                       fibonacci_denominators(20)[1:])),
    }
    os.makedirs(os.path.dirname(FROZEN), exist_ok=True)
    with open(FROZEN, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return data


def frozen():
    with open(FROZEN, encoding="utf-8") as fh:
        return json.load(fh)


if __name__ == "__main__":
    print(json.dumps(freeze(), indent=1, sort_keys=True))
