"""Independent numpy reference values frozen into the C++ unit tests.

Vacuum-normalized covariance matrices (vacuum = identity), qqpp ordering.
Run: python3 tests/oracles/reference_values.py
"""
import numpy as np


def omega(n):
    return np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])


def symplectic_eigs(sigma):
    n = sigma.shape[0] // 2
    ev = np.abs(np.linalg.eigvals(1j * omega(n) @ sigma))
    return np.sort(ev)[::-1][::2]


def h(x):
    if abs(x - 1.0) < 1e-12:
        return 0.0
    p, m = (x + 1) / 2, (x - 1) / 2
    return p * np.log2(p) - m * np.log2(m)


def entropy(sigma):
    return sum(h(v) for v in symplectic_eigs(sigma))


def reduce(sigma, modes):
    n = sigma.shape[0] // 2
    idx = list(modes) + [m + n for m in modes]
    return sigma[np.ix_(idx, idx)]


def s3(r):
    ap, am = np.cosh(r) - np.sinh(r) / 3, np.cosh(r) + np.sinh(r) / 3
    bp, bm = 2 * np.sinh(r) / 3, -2 * np.sinh(r) / 3
    q = np.full((3, 3), bp) + (ap - bp) * np.eye(3)
    p = np.full((3, 3), bm) + (am - bm) * np.eye(3)
    z = np.zeros((3, 3))
    return np.block([[q, z], [z, p]])


def tms(r):
    c, s = np.cosh(r), np.sinh(r)
    q = np.array([[c, s], [s, c]])
    p = np.array([[c, -s], [-s, c]])
    z = np.zeros((2, 2))
    return np.block([[q, z], [z, p]])


def n_mode_eoe(pi):
    n = pi.shape[0] // 2
    return 0.5 * sum(entropy(reduce(pi, [k])) for k in range(n))


def alpha_prime(r3):
    c, s = np.cosh(2 * r3), np.sinh(2 * r3)
    return np.sqrt(9 * c * c - s * s) / 3


if __name__ == "__main__":
    np.set_printoptions(precision=17)
    print("h(2) =", repr(h(2.0)))
    print("h(3) =", repr(h(3.0)))
    g = s3(0.5) @ s3(0.5).T
    print("ghzw(0.5) nu =", symplectic_eigs(g))
    print("ghzw(0.5) n_mode_eoe =", repr(n_mode_eoe(g)))
    print("alpha'(0.5) =", repr(alpha_prime(0.5)), "1.5 h =", repr(1.5 * h(alpha_prime(0.5))))
    print("sqrt det reduced mode 1 =", repr(np.sqrt(np.linalg.det(reduce(g, [0])))))
    t = tms(0.5) @ tms(0.5).T
    print("tms(0.5) reduced =", reduce(t, [0]).ravel(), "cosh(1) =", repr(np.cosh(1.0)))
    print("tms(0.5) eoe 1|2 =", repr(h(np.cosh(1.0))))
    for nbar in [0.1, 0.5, 1, 2, 5]:
        print("thermal", nbar, repr((nbar + 1) * np.log2(nbar + 1) - nbar * np.log2(nbar)))
    # one-thermal S3 state at nbar=1
    d = np.diag([3.0, 1, 1, 3, 1, 1])
    sig = s3(0.5) @ d @ s3(0.5).T
    print("s3 one-thermal nbar=1 sigma=\n", sig)
    print("  nu =", symplectic_eigs(sig), "entropy =", repr(entropy(sig)))
    print("  min eig sigma - ghzw =", np.linalg.eigvalsh(sig - g).min())
