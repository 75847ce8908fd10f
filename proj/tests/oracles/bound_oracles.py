"""Independent high-precision evaluation of the closed-form bounds.

Values printed here are frozen into tests/test_bounds.cpp and the
acceptance suite. Uses mpmath at 50 digits, not the C++ code path.
"""
from mpmath import mp, mpf, sqrt, log, exp, e
from scipy.stats import binom

mp.dps = 50


def log2(x):
    return log(x) / log(2)


def be02(n, g, d, R=1):
    return R * (g / R * sqrt(n) + 1 / sqrt(n)) * sqrt(log(1 / d))


def fv18(n, g, d, R=1):
    return (sqrt(g * R) + R / sqrt(n)) * sqrt(log(1 / d))


def main(n, g, d):
    return 32 * g * log(5 * mpf(n) ** 3 / d) * log2(n) + 2 * sqrt(log(4 / d) / n)


def large(n, g, d, R=1):
    return R * 16 * (g / R) * log(mpf(n) ** 3 / d) * log2(n)


def small(n, g, d, R=1):
    return R * (16 * (g / R) * log(4 * mpf(n) ** 3 / d) * log2(n) + 2 * sqrt(log(4 / d) / n))


def inductive(a, d):
    n = mpf(4) ** a
    return 8 / sqrt(n) * log(n * n / d) * log2(n)


print("mcd(100,.1,.5)", exp(-2 * mpf("0.25") / (100 * mpf("0.01"))))
print("mcd(4,1,2)", exp(-2 * 4 / mpf(4)))
print("be02", be02(mpf(10) ** 4, mpf("0.01"), mpf("1e-3")))
print("fv18", fv18(mpf(10) ** 4, mpf("0.01"), mpf("1e-3")))
print("main(1e4,1e-4,.01)", main(mpf(10) ** 4, mpf("1e-4"), mpf("0.01")))
print("main(1e24,1e-12,1e-3)", main(mpf(10) ** 24, mpf("1e-12"), mpf("1e-3")))
print("fv18(1e24,1e-12,1e-3)", fv18(mpf(10) ** 24, mpf("1e-12"), mpf("1e-3")))
print("main(1e4,.01,1e-3)", main(mpf(10) ** 4, mpf("0.01"), mpf("1e-3")))
print("large(4,.5,1/e)", large(4, mpf("0.5"), 1 / e))
print("small(100,1e-3,.01)", small(100, mpf("1e-3"), mpf("0.01")))
print("small precondition", 1 / (4 * sqrt(100 * log(100 / mpf("0.01")))))
print("inductive a=1", inductive(1, 1 / e), "R", 8 * sqrt(log(4 * e)))
print("inductive a=2", inductive(2, 1 / e))
print("dp main(1e4, e^1e-4-1, .01)", main(mpf(10) ** 4, exp(mpf("1e-4")) - 1, mpf("0.01")))
print("p1(c1=2,c0=0,eps=2)", exp(2) / (exp(2) + 1))
print("e^0.1-1", exp(mpf("0.1")) - 1)
for m in range(4, 10):
    print("P[Bin(100,.01)>=%d]" % m, binom.sf(m - 1, 100, 0.01))
