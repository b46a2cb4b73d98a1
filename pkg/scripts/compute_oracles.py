"""Print the frozen reference values in tests/oracle_values.py at 40 digits.

Everything is written out from the closed forms with mpmath; nothing is
imported from the package.
"""

from mpmath import log, mp, mpf, nstr, pi

mp.dps = 40


def main():
    b1 = b2 = mpf("5.6e-7")
    xi, delta, p, c = mpf("4.19"), mpf("0.17"), mpf("1.6e10"), mpf(1)
    mu = -1 / log(mpf("0.05"))
    area = pi
    R_origin = -3 / (8 * pi)

    x = mpf("0.5")
    g = -log(x) / (2 * pi) + x**2 / (4 * pi) - 3 / (8 * pi)   # image term vanishes for x0 = 0
    r_half = -log(1 - x**2) / (2 * pi) + x**2 / (2 * pi) - 3 / (8 * pi)

    D0 = mpf(2)
    R1 = p * b2 / (delta * c) + p * b1 * xi * (2 * pi * D0 + area) / (2 * pi * delta * D0 * area * c)
    R2 = p * b1 * xi * R_origin / (delta * c)

    D0s = mpf("0.1")
    dT = -b1 * xi / (2 * pi * D0s) - mu / D0s * b1 * R_origin * xi - b2

    rows = [
        ("G_HALF_ORIGIN", g), ("R_HALF", r_half), ("MU_EPS_005", mu),
        ("R0_TABLE1_D0_2", R1 + mu / D0 * R2), ("R1_TABLE1_D0_2", R1), ("R2_TABLE1_D0_2", R2),
        ("R0_TCL_TABLE1", p * b2 / (delta * c)), ("DT_MULTISCALE_D0_01", dT),
    ]
    for name, val in rows:
        print(f"{name} = {nstr(val, 20)}")


if __name__ == "__main__":
    main()
