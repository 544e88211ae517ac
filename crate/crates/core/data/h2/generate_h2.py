"""Regenerate the H2 STO-3G Pauli-sum files in this directory.

Minimal-basis integrals for two 1s centres, symmetric RHF orbitals,
Jordan-Wigner encoding over four spin orbitals (qubit q = character q
of each Pauli string). Energies in Hartree, nuclear repulsion included
as the identity term. Requires numpy only.
"""
import itertools
import math

import numpy as np

ANGSTROM_TO_BOHR = 1.8897261246257702
EXPONENTS = np.array([3.42525091, 0.62391373, 0.16885540])
COEFFS = np.array([0.15432897, 0.53532814, 0.44463454])


def boys0(t):
    if t < 1e-12:
        return 1.0
    return 0.5 * math.sqrt(math.pi / t) * math.erf(math.sqrt(t))


def norm(a):
    return (2.0 * a / math.pi) ** 0.75


def primitives(center):
    return [(a, c * norm(a), center) for a, c in zip(EXPONENTS, COEFFS)]


def overlap(p, q):
    (a, ca, A), (b, cb, B) = p, q
    ab2 = (A - B) ** 2
    return ca * cb * (math.pi / (a + b)) ** 1.5 * math.exp(-a * b / (a + b) * ab2)


def kinetic(p, q):
    (a, ca, A), (b, cb, B) = p, q
    ab2 = (A - B) ** 2
    mu = a * b / (a + b)
    return ca * cb * mu * (3 - 2 * mu * ab2) * (math.pi / (a + b)) ** 1.5 * math.exp(-mu * ab2)


def nuclear(p, q, C):
    (a, ca, A), (b, cb, B) = p, q
    ab2 = (A - B) ** 2
    P = (a * A + b * B) / (a + b)
    return -ca * cb * 2 * math.pi / (a + b) * math.exp(-a * b / (a + b) * ab2) * boys0((a + b) * (P - C) ** 2)


def eri(p, q, r, s):
    (a, ca, A), (b, cb, B), (c, cc, C), (d, cd, D) = p, q, r, s
    P = (a * A + b * B) / (a + b)
    Q = (c * C + d * D) / (c + d)
    pre = 2 * math.pi ** 2.5 / ((a + b) * (c + d) * math.sqrt(a + b + c + d))
    ex = math.exp(-a * b / (a + b) * (A - B) ** 2 - c * d / (c + d) * (C - D) ** 2)
    return ca * cb * cc * cd * pre * ex * boys0((a + b) * (c + d) / (a + b + c + d) * (P - Q) ** 2)


def hamiltonian_matrix(r_bohr):
    centers = [0.0, r_bohr]
    basis = [primitives(c) for c in centers]
    S = np.zeros((2, 2))
    h = np.zeros((2, 2))
    for i, j in itertools.product(range(2), repeat=2):
        for p in basis[i]:
            for q in basis[j]:
                S[i, j] += overlap(p, q)
                h[i, j] += kinetic(p, q) + sum(nuclear(p, q, C) for C in centers)
    g = np.zeros((2, 2, 2, 2))
    for i, j, k, l in itertools.product(range(2), repeat=4):
        g[i, j, k, l] = sum(
            eri(p, q, r, s) for p in basis[i] for q in basis[j] for r in basis[k] for s in basis[l]
        )
    s12 = S[0, 1]
    C = np.array(
        [[1 / math.sqrt(2 * (1 + s12)), 1 / math.sqrt(2 * (1 - s12))],
         [1 / math.sqrt(2 * (1 + s12)), -1 / math.sqrt(2 * (1 - s12))]]
    )
    h_mo = C.T @ h @ C
    g_mo = np.einsum("pi,qj,rk,sl,pqrs->ijkl", C, C, C, C, g)

    # spin orbitals: 2*m + spin
    n = 4
    dim = 2 ** n

    def annihilate(j):
        m = np.zeros((dim, dim))
        for state in range(dim):
            if state >> j & 1:
                sign = (-1) ** bin(state & ((1 << j) - 1)).count("1")
                m[state ^ (1 << j), state] = sign
        return m

    a = [annihilate(j) for j in range(n)]
    ad = [x.T for x in a]
    H = np.eye(dim) / r_bohr
    for p, q in itertools.product(range(n), repeat=2):
        if p % 2 == q % 2:
            H += h_mo[p // 2, q // 2] * ad[p] @ a[q]
    for p, q, r, s in itertools.product(range(n), repeat=4):
        if p % 2 == s % 2 and q % 2 == r % 2:
            # chemists' (ps|qr) for a+_p a+_q a_r a_s
            H += 0.5 * g_mo[p // 2, s // 2, q // 2, r // 2] * ad[p] @ ad[q] @ a[r] @ a[s]
    return H


PAULIS = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1.0, -1.0]),
}


def pauli_matrix(label):
    out = np.array([[1.0]])
    for ch in reversed(label):  # character q acts on qubit q (little-endian)
        out = np.kron(out, PAULIS[ch])
    return out


def decompose(H, n=4):
    terms = []
    for label in itertools.product("IXYZ", repeat=n):
        label = "".join(label)
        coeff = np.trace(pauli_matrix(label) @ H).real / 2 ** n
        if abs(coeff) > 1e-10:
            terms.append((coeff, label))
    return terms


if __name__ == "__main__":
    for idx, r in enumerate(np.linspace(0.4, 2.0, 10)):
        H = hamiltonian_matrix(r * ANGSTROM_TO_BOHR)
        terms = decompose(H)
        e0 = np.linalg.eigvalsh(H)[0]
        with open(f"h2_{idx:02d}_{r:.3f}A.txt", "w") as f:
            f.write(f"# H2 STO-3G, bond length {r:.4f} angstrom, Jordan-Wigner, Hartree\n")
            f.write(f"# exact ground energy {e0:.12f}\n")
            f.write("n=4\n")
            for c, label in terms:
                f.write(f"{c:.12f} {label}\n")
        print(f"{r:.3f} {e0:.6f} {len(terms)}")
