"""Reference values for the complex symbols at 40-digit precision.

Independent of the Rust code: evaluates the closed forms directly with
mpmath and prints the values frozen into tests/symbols.rs.

    python3 symbols_mpmath.py
"""
from mpmath import mp, mpf, mpc, sqrt

mp.dps = 40

eps = mpf(1)
kx = ky = sqrt(mpf(2)) / 2
nu = mpf("0.5")
I = mpc(0, 1)


def root(z):
    w = sqrt(z)  # mpmath uses the principal branch
    assert w.real > 0
    return w


def r_pm(eta, sign):
    s = root(1 - 2 * eps * ky * eta / kx**2 + 2 * I * nu * eps * ky**2 / kx**2)
    return I * kx / ky * eta - I * kx / (eps * ky**2) * (1 + sign * s)


def a_pm(xi, sign):
    t = root(1 - 2 * eps * kx * xi / ky**2 + 2 * I * eps * nu * kx**2 / ky**2)
    return I * ky / kx * xi - I * ky / (eps * kx**2) * (1 + sign * t)


def m_entrance(eta):
    s = root(1 - 2 * eps * ky * eta / kx**2 + 2 * I * nu * eps * ky**2 / kx**2)
    return 2 / (1 + s)


def k_hat(eta):
    rp, rm = r_pm(eta, 1), r_pm(eta, -1)
    return -(rm - I * kx / ky * eta) / (rp - rm)


def show(name, z):
    print(f"{name}: ({mp.nstr(z.real, 25)}, {mp.nstr(z.imag, 25)})")


show("r_plus(eta=1)", r_pm(1, 1))
show("r_minus(eta=1)", r_pm(1, -1))
show("a_plus(xi=1)", a_pm(1, 1))
show("a_minus(xi=1)", a_pm(1, -1))
show("m_entrance(eta=-2)", m_entrance(-2))
show("k_hat(eta=-2)", k_hat(-2))
