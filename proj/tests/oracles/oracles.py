# Independent reference values frozen into the unit tests. Run with python3.
import itertools
import math

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.stats import norm


def lf_single_node():
    # One backward Lax-Friedrichs step of the Dirac sine game at x = 0,
    # 401 nodes on [-2, 2], written from the update formula alone.
    xs = np.linspace(-2.0, 2.0, 401)
    dx = xs[1] - xs[0]
    us = np.linspace(0, 1, 5)
    vs = np.linspace(0, 1, 5)
    f = lambda x, u, v: 1 / (1 + x * x) + math.sin(x) + u - 0.1 * v
    l = lambda x, u, v: math.sin(x) + x + u - v
    sigma = max(abs(f(x, u, v)) for x in xs for u in us for v in vs)
    steps = math.ceil(1.0 * sigma / dx / 0.9)
    dt = 1.0 / steps
    i = 200
    V = np.sin(xs)
    p = (V[i + 1] - V[i - 1]) / (2 * dx)
    pay = [[p * f(xs[i], u, v) + l(xs[i], u, v) for v in vs] for u in us]
    lower = max(min(pay[a][b] for a in range(5)) for b in range(5))
    upper = min(max(pay[a][b] for b in range(5)) for a in range(5))
    diss = sigma * (V[i + 1] - 2 * V[i] + V[i - 1]) / (2 * dx)
    return steps, V[i] + dt * (lower + diss), V[i] + dt * (upper + diss)


def brute_w2(a, b):
    # equal-size uniform 2-D atoms: an optimal plan is a permutation
    c = ((a[:, None, :] - b[None, :, :]) ** 2).sum(-1)
    r, k = linear_sum_assignment(c)
    return math.sqrt(c[r, k].mean())


def strategies_value():
    # f = 2 v - u, l = u^2 / 4, m = sin(x1), x0 = 0.3, S = 2, U = V = {0, 1},
    # tau = 0.5. Lower value by explicit enumeration of the 64 step-causal
    # strategies u1 = a(v1), u2 = b(v1, v2); J is in closed form here.
    tau = 0.5
    def J(u, v):
        x = 0.3 + tau * sum(2 * vi - ui for ui, vi in zip(u, v))
        return sum(tau * ui * ui / 4 for ui in u) + math.sin(x)
    best = math.inf
    for a in itertools.product([0, 1], repeat=2):
        for b in itertools.product([0, 1], repeat=4):
            worst = -math.inf
            for v1 in (0, 1):
                for v2 in (0, 1):
                    u = (a[v1], b[2 * v1 + v2])
                    worst = max(worst, J(u, (v1, v2)))
            best = min(best, worst)
    return best


def strategies_upper():
    # mirror: v1 = a(u1), v2 = b(u1, u2)
    tau = 0.5
    def J(u, v):
        x = 0.3 + tau * sum(2 * vi - ui for ui, vi in zip(u, v))
        return sum(tau * ui * ui / 4 for ui in u) + math.sin(x)
    best = -math.inf
    for a in itertools.product([0, 1], repeat=2):
        for b in itertools.product([0, 1], repeat=4):
            worst = math.inf
            for u1 in (0, 1):
                for u2 in (0, 1):
                    worst = min(worst, J((u1, u2), (a[u1], b[2 * u1 + u2])))
            best = max(best, worst)
    return best


if __name__ == "__main__":
    print("normal quantile 0.75:", repr(float(norm.ppf(0.75))))
    print("normal quantile 0.975:", repr(float(norm.ppf(0.975))))
    steps, lo, up = lf_single_node()
    print("LF one step at x=0: steps", steps, "lower", repr(float(lo)), "upper", repr(float(up)))
    a = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]])
    b = np.array([[1.0, 1.0], [2.0, 0.5], [-1.0, 0.0]])
    print("W2 dim-2 example:", repr(brute_w2(a, b)))
    print("strategy enumeration lower value:", repr(strategies_value()))
    print("strategy enumeration upper value:", repr(strategies_upper()))
    var = norm.ppf(0.75) ** 2
    print("mean-variance value N=2:", repr(float(var * math.exp(-1.0))))
    print("mean-field ODE shift:", repr(2 * (math.e - 1)))
