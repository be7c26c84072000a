"""Standalone high-precision reference for the purification key-rate pipeline.

Never imported by the library. It writes the four-mode covariance matrix
entry by entry in closed form from the network parameters

    V1 = sqrt((Vx - Cx)(Vp - Cp)),  V2 = sqrt((Vx + Cx)(Vp + Cp)),
    s1 = 1/4 ln((Vp - Cp)/(Vx - Cx)), s2 = 1/4 ln((Vp + Cp)/(Vx + Cx)),

and takes symplectic eigenvalues from a direct (non-Hermitian)
eigendecomposition of i*Omega*gamma in mpmath.

Run ``python tools/oracle.py`` to print the frozen regression constants used
in tests/test_acceptance.py.
"""

import mpmath as mp

mp.mp.dps = 50


def network_cov(Vx, Vp, Cx, Cp):
    """8x8 covariance in order (A, B, C, D), xpxp."""
    V1 = mp.sqrt((Vx - Cx) * (Vp - Cp))
    V2 = mp.sqrt((Vx + Cx) * (Vp + Cp))
    s1 = mp.log((Vp - Cp) / (Vx - Cx)) / 4
    s2 = mp.log((Vp + Cp) / (Vx + Cx)) / 4
    c1 = mp.sqrt(V1 ** 2 - 1)
    c2 = mp.sqrt(V2 ** 2 - 1)
    r2 = mp.sqrt(2)
    g = mp.zeros(8, 8)
    A, B, C, D = 0, 1, 2, 3

    def put(i, j, q, val):
        g[2 * i + q, 2 * j + q] = val
        g[2 * j + q, 2 * i + q] = val

    for q, sign in ((0, -1), (1, 1)):
        e1 = mp.exp(sign * s1)
        e2 = mp.exp(sign * s2)
        corr_sign = 1 if q == 0 else -1
        w1 = V1 * e1 ** 2
        w2 = V2 * e2 ** 2
        put(A, A, q, (w1 + w2) / 2)
        put(B, B, q, (w1 + w2) / 2)
        put(A, B, q, (w2 - w1) / 2)
        put(C, C, q, V1)
        put(D, D, q, V2)
        put(A, C, q, corr_sign * e1 * c1 / r2)
        put(B, C, q, -corr_sign * e1 * c1 / r2)
        put(A, D, q, corr_sign * e2 * c2 / r2)
        put(B, D, q, corr_sign * e2 * c2 / r2)
    return g


def channel(g, mode, eta, eps):
    g = g.copy()
    n = g.rows
    rt = mp.sqrt(eta)
    for k in (2 * mode, 2 * mode + 1):
        for j in range(n):
            g[k, j] *= rt
        for j in range(n):
            g[j, k] *= rt
        g[k, k] += eta * eps + 1 - eta
    return g


def sympl_eigs(g):
    n = g.rows // 2
    om = mp.zeros(2 * n, 2 * n)
    for k in range(n):
        om[2 * k, 2 * k + 1] = 1
        om[2 * k + 1, 2 * k] = -1
    ev = mp.eig(mp.mpc(0, 1) * om * g, left=False, right=False)
    vals = sorted((abs(e) for e in ev), reverse=True)
    return vals[::2]


def gfun(nu, base=2):
    if nu <= 1:
        return mp.mpf(0)
    a, b = (nu + 1) / 2, (nu - 1) / 2
    return (a * mp.log(a) - b * mp.log(b)) / mp.log(base)


def entropy(g):
    return sum(gfun(nu) for nu in sympl_eigs(g))


def condition(g, mode, kind):
    n = g.rows
    m = [2 * mode, 2 * mode + 1]
    rest = [i for i in range(n) if i not in m]
    a = mp.matrix([[g[i, j] for j in rest] for i in rest])
    s = mp.matrix([[g[i, j] for j in m] for i in rest])
    b = mp.matrix([[g[i, j] for j in m] for i in m])
    if kind == "het":
        return a - s * mp.inverse(b + mp.eye(2)) * s.T
    q = 0 if kind == "x" else 1
    col = mp.matrix([s[i, q] for i in range(len(rest))])
    return a - col * col.T / b[q, q]


def key_rate(VM, VBx, VBp, CMx, CMp, att_db, eps, detection):
    eta = mp.mpf(10) ** (-mp.mpf(att_db) / 10)
    Cx = CMx * mp.sqrt((1 + VBx) / VM)
    Cp = CMp * mp.sqrt((1 + VBp) / VM)
    g = channel(network_cov(VBx, VBp, Cx, Cp), 1, eta, eps)
    S_E = entropy(g)
    kind = "x" if detection == "homodyne" else "het"
    S_EB = entropy(condition(g, 1, kind))
    chi = S_E - S_EB
    VBpx = eta * (VBx + eps) + 1 - eta
    VBpp = eta * (VBp + eps) + 1 - eta
    cx, cp = mp.sqrt(eta) * CMx, mp.sqrt(eta) * CMp
    if detection == "homodyne":
        I = mp.log(1 + cx ** 2 / (VBpx * VM - cx ** 2)) / 2 / mp.log(2)
    else:
        I = mp.log((1 + cx ** 2 / ((VBpx + 1) * VM - cx ** 2))
                   * (1 + cp ** 2 / ((VBpp + 1) * VM - cp ** 2))) / 2 / mp.log(2)
    return I, chi, max(mp.mpf(0), I - chi)


def main():
    VM, C, eps = mp.mpf(9), mp.mpf(9), mp.mpf("0.07")
    print("# perfect scenario (V_M = 9, V_B = 10, C_MB = +-9), epsilon = 0.07")
    print("# detection, dB, I_AB, chi_BE, K")
    for det in ("homodyne", "heterodyne"):
        for db in (0, 3, 6, 9):
            I, chi, K = key_rate(VM, mp.mpf(10), mp.mpf(10), C, -C, db, eps, det)
            print(f"{det}, {db}, {mp.nstr(I, 17)}, {mp.nstr(chi, 17)}, {mp.nstr(K, 17)}")
    print("# homodyne-x gap K(10,10.1) - K(10,10)")
    for db in (0, 3, 6, 9, 12, 15):
        _, _, K0 = key_rate(VM, mp.mpf(10), mp.mpf(10), C, -C, db, eps, "homodyne")
        _, _, K1 = key_rate(VM, mp.mpf(10), mp.mpf("10.1"), C, -C, db, eps, "homodyne")
        print(f"{db}, {mp.nstr(K1 - K0, 10)}")


if __name__ == "__main__":
    main()
