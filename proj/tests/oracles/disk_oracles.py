"""Reference values for the curvature tests.

Disk of radius R centred at the origin, kernel mu(rho) on (0, r), x = (d, 0).
H(x) = ||J||_1 - 2 * int_{disk} mu(|x - y|) dy, evaluated by scipy in polar
coordinates about the disk centre (not about x), so nothing is shared with the
C++ ray quadrature.

    python3 disk_oracles.py
"""
import math

from scipy import integrate

INF = math.inf


def power_law(alpha, r):
    return lambda s: s ** (alpha - 2.0) if s < r else 0.0


def smooth(r):
    return lambda s: 1.0 - (s / r) ** 2 if s < r else 0.0


def two_sided(alpha, alpha1, r=INF):
    return lambda s: s ** (alpha - 2.0) / (1.0 + s ** (alpha + alpha1)) if s < r else 0.0


def indicator(r):
    return lambda s: 1.0 if s < r else 0.0


def l1(mu, r):
    hi = r if math.isfinite(r) else INF
    v, _ = integrate.quad(lambda s: mu(s) * s, 0.0, hi, limit=400)
    return 2 * math.pi * v


def disk_mass(mu, r, R, d):
    # Inner integral over the polar angle phi about the disk centre, for radius s. The
    # integrand is singular where the circle of radius s passes through x.
    def ring(s):
        def f(phi):
            q = math.sqrt(max(d * d + s * s - 2 * d * s * math.cos(phi), 0.0))
            return mu(q) if q > 0 else 0.0
        pts = []
        if math.isfinite(r) and abs(d - s) < r < d + s:
            c = (d * d + s * s - r * r) / (2 * d * s)
            pts.append(math.acos(max(-1.0, min(1.0, c))))
        pts.append(1e-300)
        v, _ = integrate.quad(f, 0.0, math.pi, points=sorted(pts)[1:] or None, limit=400,
                              epsabs=1e-13, epsrel=1e-12)
        return 2 * v * s

    brk = sorted({p for p in (d, d - r, d + r) if 0 < p < R})
    v, _ = integrate.quad(ring, 0.0, R, points=brk or None, limit=400, epsabs=1e-12, epsrel=1e-11)
    return v


def curvature(mu, r, R, d):
    return l1(mu, r) - 2 * disk_mass(mu, r, R, d)


CASES = [
    ("power_law a=1 r=1", power_law(1.0, 1.0), 1.0),
    ("smooth r=1", smooth(1.0), 1.0),
    ("two_sided a=1 a1=1 r=inf", two_sided(1.0, 1.0), INF),
    ("indicator r=0.5", indicator(0.5), 0.5),
]

if __name__ == "__main__":
    for name, mu, r in CASES:
        print(f"{name}: l1 = {l1(mu, r):.12g}")
        for d in (0.0, 0.5, 1.0, 1.3):
            print(f"  R=1 d={d}: H = {curvature(mu, r, 1.0, d):.12g}")
