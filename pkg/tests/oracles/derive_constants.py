"""Independent high-precision oracle for the frozen constants in ``frozen.py``.

Uses mpmath only (no scipy, no sigmalab), so it shares no code with the
quadrature under test.  Run ``python tests/oracles/derive_constants.py`` to
regenerate the values.
"""
import mpmath as mp

mp.mp.dps = 30


def h(rho):
    t = rho - 1
    return 1 - t ** 3 * (10 - 15 * t + 6 * t * t)


def dh(rho):
    t = rho - 1
    return -30 * t * t * (1 - t) ** 2


def cutoff_constant(hf, dhf):
    g = lambda r: r * ((dhf(r) / r - hf(r) / r ** 2) ** 2 + hf(r) ** 2 / r ** 4)  # noqa: E731
    return mp.pi * mp.quad(g, [1, 2])


def family_energy(eps):
    """Energy of the shrinking map in the scaled variable ``rho = |z| / eps``.

    With ``f = eps h(rho) / rho`` the core ``rho < 1`` integrates in closed
    form to ``pi / (1 + eps^2)``; the ring ``1 < rho < 2`` by quadrature.
    """
    eps = mp.mpf(eps)
    core = mp.pi / (1 + eps ** 2)

    def ring(r):
        f = eps * h(r) / r
        fp = eps * (dh(r) / r - h(r) / r ** 2)
        return (fp ** 2 + f ** 2 / r ** 2) * r / (1 + f ** 2) ** 2

    return core + mp.pi * mp.quad(ring, [1, 2])


if __name__ == "__main__":
    print("C_SMOOTHSTEP =", mp.nstr(cutoff_constant(h, dh), 20))
    print("C_CONSTANT =", mp.nstr(cutoff_constant(lambda r: 1, lambda r: 0), 20), "(3 pi / 4 =", mp.nstr(3 * mp.pi / 4, 20), ")")
    for e in ("0.05", "0.1", "0.2"):
        print(f"E[{e}] =", mp.nstr(family_energy(e), 20))
