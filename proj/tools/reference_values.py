"""Independent reference values frozen into the C++ tests.

Everything here is computed with numpy/scipy from first principles (matrix exponentials
of truncated generators, covariance matrices, adaptive quadrature) and shares no code
with the library.
"""
import math

import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm, eigvalsh

HBAR = 1.054571817e-34
KB = 1.380649e-23


def g(n):
    return 0.0 if n == 0 else (n + 1) * math.log(n + 1) - n * math.log(n)


def annihilation(d):
    return np.diag(np.sqrt(np.arange(1, d)), 1).astype(complex)


def occupation(omega, T):
    return 1.0 / math.expm1(HBAR * omega / (KB * T))


def symplectic_occupations(n, r, mu):
    """Modes (1, 2, 3): thermal n on 1, TMSV(mu) on (2, 3), beam splitter on (1, 2).
    Returns the symplectic occupations of the reduced (2, 3) covariance."""
    c, s = math.cosh(2 * mu), math.sinh(2 * mu)
    Z = np.diag([1.0, -1.0])
    I = np.eye(2)
    V = np.zeros((6, 6))
    V[0:2, 0:2] = (2 * n + 1) * I
    V[2:4, 2:4] = c * I
    V[4:6, 4:6] = c * I
    V[2:4, 4:6] = s * Z
    V[4:6, 2:4] = s * Z
    t = math.sqrt(1 - r * r)
    B = np.eye(6)
    B[0:2, 0:2] = t * I
    B[0:2, 2:4] = r * I
    B[2:4, 0:2] = -r * I
    B[2:4, 2:4] = t * I
    V = B @ V @ B.T
    W = V[2:6, 2:6]
    J = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    nu = np.sort(np.abs(np.linalg.eigvals(1j * J @ W)))[::2]
    return [(v - 1) / 2 for v in nu]


def environment_states(n, r, mu, points, s, d1=40, d2=22):
    """Brute-force environment states rho_E(zeta_j) on modes (2, 3)."""
    a1 = annihilation(d1)
    a2 = annihilation(d2)
    a3 = annihilation(d2)
    i1, i2, i3 = np.eye(d1), np.eye(d2), np.eye(d2)
    A2 = np.kron(a2, i3)
    A3 = np.kron(i2, a3)
    F = expm(mu * (A2.conj().T @ A3.conj().T - A2 @ A3))
    vac23 = np.zeros(d2 * d2, complex)
    vac23[0] = 1
    tmsv = (F @ vac23).reshape(d2, d2)
    # beam splitter on (1, 2): a1 -> t a1 + r a2
    b1 = np.kron(a1, i2)
    b2 = np.kron(i1, a2)
    theta = math.asin(r)
    U = expm(theta * (b1.conj().T @ b2 - b2.conj().T @ b1))
    pops = (1 / (1 + n)) * (n / (1 + n)) ** np.arange(d1) if n > 0 else np.eye(1, d1)[0]
    out = []
    for z in points:
        alpha = s * z
        D = expm(alpha * a1.conj().T - np.conj(alpha) * a1)
        rho = np.zeros((d2 * d2, d2 * d2), complex)
        for k in range(d1):
            if pops[k] < 1e-16:
                continue
            psi = np.einsum("a,bc->abc", D[:, k], tmsv).reshape(d1 * d2, d2)
            phi = (U @ psi).reshape(d1, d2 * d2)
            rho += pops[k] * phi.T @ phi.conj()
        out.append(rho)
    return out


def entropy(rho):
    w = eigvalsh(rho)
    w = w[w > 1e-15]
    return float(-(w * np.log(w)).sum())


def holevo(n, r, mu, points, s):
    states = environment_states(n, r, mu, points, s)
    avg = sum(states) / len(states)
    return entropy(avg) - sum(entropy(x) for x in states) / len(states)


def mutual_information(means, probs, sigma2):
    def Q(k, m):
        return math.exp(-(k - m) ** 2 / sigma2) / math.sqrt(math.pi * sigma2)

    def f(k):
        return sum(p * Q(k, m) for m, p in zip(means, probs))

    total = 0.0
    for m, p in zip(means, probs):
        def integrand(k, m=m):
            q = Q(k, m)
            return 0.0 if q == 0 else q * math.log(q / f(k))
        lo, hi = min(means) - 12 * math.sqrt(sigma2), max(means) + 12 * math.sqrt(sigma2)
        total += p * quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-13, limit=400, points=means)[0]
    return total


if __name__ == "__main__":
    print("n_bar(2e13, 300)", repr(occupation(2e13, 300)))
    print("n_bar(3e14, 300)", repr(occupation(3e14, 300)))
    print("g(0.5)", repr(g(0.5)))
    n2, n3 = symplectic_occupations(0.3, 0.5, 0.6)
    print("symplectic occupations", repr(n2), repr(n3), "g sum", repr(g(n2) + g(n3)))
    four = [complex(x, y) for x in (1, -1) for y in (1, -1)]
    print("chi four-point s=0.5", repr(holevo(0.3, 0.5, 0.6, four, 0.5)))
    print("chi bpsk s=0.7", repr(holevo(0.3, 0.5, 0.6, [1, -1], 0.7)))
    # receiver quadrature: sigma^2 = 2 (n t^2 + n_E) + 1 with means sqrt(2) t s Re(zeta)
    n, r, mu = 0.3, 0.5, 0.6
    t = math.sqrt(1 - r * r)
    sigma2 = 2 * (n * t * t + r * r * math.sinh(mu) ** 2) + 1
    s = 0.8
    print("I four-point s=0.8", repr(mutual_information([math.sqrt(2) * t * s, -math.sqrt(2) * t * s], [0.5, 0.5], sigma2)))
    print("I three-level", repr(mutual_information([-1.0, 0.0, 2.0], [0.25, 0.5, 0.25], 1.7)))
