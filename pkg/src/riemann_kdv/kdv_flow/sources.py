"""Extended-precision contour samples of the elliptic and Riemann potentials."""
from __future__ import annotations

import mpmath
import numpy as np

from ..elliptic import Lattice, invariants_mp, wp_pair_mp
from ..errors import ValidationError
from .spectral import DEFAULT_DPS, ContourField, mp_array, precision


def _wp_fn(lat: Lattice, dps: int, shift=0):
    def wp(z):
        return wp_pair_mp(z - shift, lat, dps)
    return wp


def elliptic_potential(t: float = 1.0, kind: str = "vertical", n: int = 256, dps: int = DEFAULT_DPS,
                       shift: complex = 0j, **geom) -> ContourField:
    """u = -2 P(z - shift) on the lattice tZ + iZ."""
    lat = Lattice(float(t))
    wp = _wp_fn(lat, dps, mpmath.mpc(shift))
    return ContourField.from_function(lambda z: -2 * wp(z)[0], kind, n, dps, **geom)


class RiemannSource:
    """Gauss map g = a (P - e2) of the Riemann example in extended precision.

    Jets come from P' and P'' = 6 P^2 - g2/2, so that u(g) and y = g^(-1/2)
    are computed without passing through the translated-P closed form.
    """

    def __init__(self, t: float, dps: int = DEFAULT_DPS):
        self.t = float(t)
        self.dps = dps
        self.lattice = Lattice(self.t)
        with mpmath.workdps(dps + 10):
            g2, g3, e1, e2, e3 = invariants_mp(self.lattice, dps + 10)
            self.g2, self.e1, self.e2, self.e3 = g2, e1, e2, e3
            self.a = 1 / mpmath.sqrt((e1 - e2) * (e2 - e3))
        self._jets: dict = {}

    def jets(self, z):
        """(g, g'/g, g''/g) at z."""
        key = (str(mpmath.mpc(z).real), str(mpmath.mpc(z).imag))
        if key not in self._jets:
            p, dp = wp_pair_mp(z, self.lattice, self.dps + 10)
            d = p - self.e2
            self._jets[key] = (self.a * d, dp / d, (6 * p ** 2 - self.g2 / 2) / d)
        return self._jets[key]

    def g(self, z):
        return self.jets(z)[0]

    def u(self, z):
        """u = -(3/4)(g'/g)^2 + (1/2) g''/g."""
        _, l1, l2 = self.jets(z)
        return -mpmath.mpf(3) / 4 * l1 ** 2 + l2 / 2

    def u_closed_form(self, z):
        """-2 P(z - w2) - e2, the same potential via the addition formula."""
        w2 = mpmath.mpc(self.t, 1) / 2
        return -2 * wp_pair_mp(z - w2, self.lattice, self.dps + 10)[0] - self.e2

    def u_field(self, kind: str = "vertical", n: int = 256, **geom) -> ContourField:
        geom = self._default_geom(kind, geom)
        return ContourField.from_function(self.u, kind, n, self.dps, **geom)

    def g_field(self, kind: str = "vertical", n: int = 256, **geom) -> ContourField:
        geom = self._default_geom(kind, geom)
        return ContourField.from_function(self.g, kind, n, self.dps, **geom)

    def y_field(self, kind: str = "vertical", n: int = 256, **geom) -> ContourField:
        """y = g^(-1/2) continued along the contour; antiperiodic on the vertical circle."""
        geom = self._default_geom(kind, geom)
        proto = ContourField(kind, np.zeros(n, dtype=object), self.dps, **geom)
        with mpmath.workdps(self.dps + 10):
            vals = []
            for z in proto.nodes_mpmath():
                y = 1 / mpmath.sqrt(self.g(z))
                if vals and abs(y + vals[-1]) < abs(y - vals[-1]):
                    y = -y
                vals.append(y)
            twist = 0.5 if abs(vals[-1] + vals[0]) < abs(vals[-1] - vals[0]) else 0.0
            with precision(self.dps):
                samples = mp_array(vals)
        if kind == "circle" and twist:
            raise ValidationError("g^(-1/2) has no single-valued branch on this circle")
        return ContourField(kind, samples, self.dps, twist=twist, **geom)

    def _default_geom(self, kind, geom):
        if kind == "vertical" and "x0" not in geom:
            geom = dict(geom, x0=self.t / 4)
        return geom



def local_solutions(src: RiemannSource, z):
    """Values (y1, y1', y2, y2') at z of the two Schrodinger solutions attached to
    the zero w2 of g: y1 = g^(-1/2) and y2 = y1 * int_{w2}^z g."""
    with mpmath.workdps(src.dps + 10):
        z = mpmath.mpc(z)
        w2 = mpmath.mpc(src.t, 1) / 2
        gv, l1, _ = src.jets(z)
        y1 = 1 / mpmath.sqrt(gv)
        dy1 = -y1 * l1 / 2
        G = mpmath.quad(lambda s: src.g(w2 + s * (z - w2)), [0, 1]) * (z - w2)
        return complex(y1), complex(dy1), complex(y1 * G), complex(dy1 * G + y1 * gv)
