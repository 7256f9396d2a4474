"""Builders for complete area-stationary surfaces with singular sets.

A horizontal curve Gamma(eps) sweeps a ruled surface

    F(eps, t) = gamma_eps(t),

where gamma_eps is the characteristic curve of curvature 0 with initial
point Gamma(eps) and initial velocity J(Gammadot(eps)).  The J-rotation
makes the rulings meet the base curve orthogonally, which is exactly the
area-stationarity condition for minimal surfaces with a singular curve,
and the base curve is the singular set: the vertical component of the
variation field V = dF/deps vanishes precisely at t = 0.

Supported base curves are the closed-form kinds (characteristic line and
exponential families, and integral curves of X or of Y, which are special
cases of those).  Arbitrary sampled curves are not accepted: the vertical
component needs second derivatives of Gamma, and differentiating user
samples silently would hide error.

For a generic base curve (neither an integral curve of X nor of Y), with
k = xdot e^{-z} - ydot e^{z} and s = k t / sqrt2, the vertical component of
V has the closed form

    <V, T>(eps, t) = [ A (e^{-s} - e^{s}) + B (e^{-s} + e^{s} - 2) ] / sqrt2
    A = k/2 + zdot^2 / k
    B = zddot / k - zdot kdot / k^2

(everything evaluated at eps).  For the degenerate kinds the closed form
above loses meaning (k = 0 or the rulings are vertical) and the component
is obtained by finite differences of F instead; the scan then reports the
singular locus rather than assuming it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import CharacteristicCurve, LINE_FAMILY_TOL, _eval_raw, make_curve
from .errors import BadParams, BranchUnsupported, DegenerateRuling, NotHorizontal
from .expressions import ScalarField, catalog
from .frame import CoordVector, Point, SQRT2, frame_components

#: dichotomy threshold for the degenerate base-curve branches
BRANCH_TOL = 1e-12

#: singular-locus detection threshold (scaled per t-line)
EPS_SCAN = 1e-9


@dataclass(frozen=True)
class HorizontalCurve:
    """Closed-form horizontal curve record with analytic derivatives.

    Wraps a characteristic-curve record (every built-in kind is one).
    ``kind`` is 'generic', 'x-integral' or 'y-integral' and fixes which
    sweep branch applies along the whole curve, since the classifying
    quantities zdot and k are constant on characteristic curves.
    """

    curve: CharacteristicCurve
    kind: str

    @staticmethod
    def from_initial_data(p0: Point, v0: CoordVector) -> "HorizontalCurve":
        c = make_curve(p0, v0)
        a, b = c.frame_velocity()  # X- and Y-components of the unit velocity
        if abs(b) < BRANCH_TOL and abs(a) < BRANCH_TOL:
            raise DegenerateRuling("base curve velocity vanishes")
        if abs(b) < BRANCH_TOL:
            kind = "x-integral"
        elif abs(a) < BRANCH_TOL:
            kind = "y-integral"
        else:
            kind = "generic"
        return HorizontalCurve(c, kind)

    @staticmethod
    def x_line(p0: Point, direction: float = 1.0) -> "HorizontalCurve":
        """Integral curve of X through p0 (a vertical line)."""
        return HorizontalCurve.from_initial_data(
            p0, CoordVector(0.0, 0.0, math.copysign(1.0, direction)))

    @staticmethod
    def y_line(p0: Point, direction: float = 1.0) -> "HorizontalCurve":
        """Integral curve of Y through p0 (a horizontal straight line)."""
        s = math.copysign(1.0, direction)
        return HorizontalCurve.from_initial_data(
            p0, CoordVector(-s * math.exp(p0.z) / SQRT2,
                            s * math.exp(-p0.z) / SQRT2, 0.0))

    def point(self, eps):
        x, y, z, *_ = self._raw(eps)
        return x, y, z

    def velocity(self, eps):
        *_, dx, dy, dz = self._raw(eps)
        return dx, dy, dz

    def acceleration(self, eps):
        c = self.curve
        eps = np.asarray(eps, dtype=float)
        if c.family == "line":
            zero = np.zeros_like(eps)
            return zero, zero, zero
        zd = c.zdot0
        return (zd * c.v0.dx * np.exp(zd * eps),
                -zd * c.v0.dy * np.exp(-zd * eps),
                np.zeros_like(eps))

    def horizontality_defect(self, eps):
        x, y, z, dx, dy, dz = self._raw(eps)
        return dy * np.exp(z) + dx * np.exp(-z)

    def _raw(self, eps):
        c = self.curve
        return _eval_raw(c.p0.x, c.p0.y, c.p0.z,
                         c.v0.dx, c.v0.dy, c.v0.dz, eps)


def _j_rotate_coords(z, dx, dy, dz):
    """Coordinate components of J applied to a horizontal coordinate vector."""
    a, b, _ = frame_components(z, dx, dy, dz)
    # J: (a, b) -> (-b, a); back to coordinates with zero T-part
    ez = np.exp(z)
    emz = np.exp(-z)
    ja, jb = -b, a
    return ez * (-jb) / SQRT2, emz * jb / SQRT2, ja


@dataclass(frozen=True)
class RuledSurface:
    """Surface swept by characteristic curves from a horizontal base curve."""

    gamma: HorizontalCurve
    eps_range: tuple
    t_range: tuple
    n_eps: int
    n_t: int
    skew: float = 0.0   # fixture knob: blends the tangent into the ruling

    # -- geometry -------------------------------------------------------

    def ruling_velocity(self, eps):
        """Initial ruling velocity at Gamma(eps), J(Gammadot) by default."""
        x, y, z, dx, dy, dz = self.gamma._raw(eps)
        jx, jy, jz = _j_rotate_coords(z, dx, dy, dz)
        if self.skew:
            n = math.hypot(1.0, self.skew)
            jx = (jx + self.skew * dx) / n
            jy = (jy + self.skew * dy) / n
            jz = (jz + self.skew * dz) / n
        return jx, jy, jz

    def point(self, eps, t):
        """F(eps, t); broadcasts over arrays."""
        eps = np.asarray(eps, dtype=float)
        t = np.asarray(t, dtype=float)
        gx, gy, gz = self.gamma.point(eps)
        vx, vy, vz = self.ruling_velocity(eps)
        return _ruling_eval(gx, gy, gz, vx, vy, vz, t)

    def t_velocity(self, eps, t):
        """dF/dt, the ruling velocity at parameter t (analytic)."""
        gx, gy, gz = self.gamma.point(eps)
        vx, vy, vz = self.ruling_velocity(eps)
        return _ruling_velocity_eval(gx, gy, gz, vx, vy, vz, t)

    def eps_velocity(self, eps, t, h: float = 1e-6):
        """dF/deps by central finite differences (Richardson extrapolated)."""
        def diff(step):
            xp = np.stack(self.point(eps + step, t))
            xm = np.stack(self.point(eps - step, t))
            return (xp - xm) / (2.0 * step)
        d1 = diff(h)
        d2 = diff(h / 2.0)
        out = (4.0 * d2 - d1) / 3.0
        return out[0], out[1], out[2]

    def ruling(self, eps: float) -> CharacteristicCurve:
        """The t-line through Gamma(eps) as a characteristic-curve record."""
        gx, gy, gz = self.gamma.point(eps)
        vx, vy, vz = self.ruling_velocity(eps)
        return make_curve(Point(float(gx), float(gy), float(gz)),
                          CoordVector(float(vx), float(vy), float(vz)))

    # -- vertical component of the variation field -----------------------

    def vertical_component_closed(self, eps, t):
        """Closed-form <V, T>(eps, t); generic branch only."""
        if self.skew:
            raise BranchUnsupported("closed form needs unskewed rulings")
        if self.gamma.kind != "generic":
            raise BranchUnsupported(
                f"closed form needs a generic base curve, got {self.gamma.kind}")
        eps = np.asarray(eps, dtype=float)
        t = np.asarray(t, dtype=float)
        x, y, z, dx, dy, dz = self.gamma._raw(eps)
        ddx, ddy, ddz = self.gamma.acceleration(eps)
        emz = np.exp(-z)
        ez = np.exp(z)
        k = dx * emz - dy * ez
        kdot = ddx * emz - dx * dz * emz - ddy * ez - dy * dz * ez
        s = k * t / SQRT2
        A = k / 2.0 + dz * dz / k
        B = ddz / k - dz * kdot / (k * k)
        em = np.exp(-s)
        ep = np.exp(s)
        return (A * (em - ep) + B * (em + ep - 2.0)) / SQRT2

    def vertical_component_fd(self, eps, t, h: float = 1e-6):
        """<V, T> by finite differences of F contracted with the frame."""
        vx, vy, vz = self.eps_velocity(eps, t, h=h)
        x, y, z = self.point(eps, t)
        _, _, c = frame_components(z, vx, vy, vz)
        return c

    def vertical_component(self, eps, t):
        """Closed form where available, finite differences otherwise."""
        try:
            return self.vertical_component_closed(eps, t)
        except BranchUnsupported:
            return self.vertical_component_fd(eps, t)

    # -- grids ------------------------------------------------------------

    def eps_grid(self):
        return np.linspace(self.eps_range[0], self.eps_range[1], self.n_eps)

    def t_grid(self):
        return np.linspace(self.t_range[0], self.t_range[1], self.n_t)

    def mesh(self):
        """(eps, t) meshgrid plus the swept coordinates, each (n_eps, n_t)."""
        E, T = np.meshgrid(self.eps_grid(), self.t_grid(), indexing="ij")
        X, Y, Z = self.point(E, T)
        return E, T, X, Y, Z

    def intrinsic_mean_curvature(self, eps, t, h: float = 1e-4):
        """|H| estimated from the parametrization alone.

        The surface normal comes from the cross product of discrete
        tangents; the characteristic direction is the unit t-velocity.
        H is the derivative of the horizontal unit normal along that
        direction (connection terms vanish for horizontal directions).
        """
        def nu_h_at(tt):
            x, y, z = self.point(eps, tt)
            e1 = np.stack(frame_components(z, *self.eps_velocity(eps, tt)), axis=-1)
            e2 = np.stack(frame_components(z, *self.t_velocity(eps, tt)), axis=-1)
            n = np.cross(e1, e2)
            nh = n.copy()
            nh[..., 2] = 0.0
            norm = np.linalg.norm(nh, axis=-1, keepdims=True)
            return nh / norm, e2

        def d_nu(step):
            nup, _ = nu_h_at(t + step)
            num, _ = nu_h_at(t - step)
            return (nup - num) / (2.0 * step)

        nu0, e2 = nu_h_at(t)
        d1 = d_nu(h)
        d2 = d_nu(h / 2.0)
        dnu = (4.0 * d2 - d1) / 3.0
        speed = np.linalg.norm(e2, axis=-1, keepdims=True)
        zdir = e2 / speed
        # orient nu_h consistently along the center line (sign irrelevant for H)
        return -np.sum(dnu / speed * zdir, axis=-1)


def _ruling_eval(gx, gy, gz, vx, vy, vz, t):
    """Vectorized closed-form characteristic flow from array initial data."""
    gx, gy, gz, vx, vy, vz, t = np.broadcast_arrays(gx, gy, gz, vx, vy, vz, t)
    line = np.abs(vz) < LINE_FAMILY_TOL
    x = np.empty_like(gx)
    y = np.empty_like(gy)
    z = np.empty_like(gz)
    x[line] = gx[line] + vx[line] * t[line]
    y[line] = gy[line] + vy[line] * t[line]
    z[line] = gz[line]
    e = ~line
    with np.errstate(over="raise"):
        x[e] = gx[e] + vx[e] / vz[e] * np.expm1(vz[e] * t[e])
        y[e] = gy[e] - vy[e] / vz[e] * np.expm1(-vz[e] * t[e])
    z[e] = gz[e] + vz[e] * t[e]
    return x, y, z


def _ruling_velocity_eval(gx, gy, gz, vx, vy, vz, t):
    gx, gy, gz, vx, vy, vz, t = np.broadcast_arrays(gx, gy, gz, vx, vy, vz, t)
    line = np.abs(vz) < LINE_FAMILY_TOL
    dx = np.where(line, vx, vx * np.exp(vz * t))
    dy = np.where(line, vy, vy * np.exp(-vz * t))
    dz = np.where(line, 0.0, vz)
    return dx, dy, dz


def sweep_surface(gamma: HorizontalCurve, eps_range, t_range,
                  grid=(64, 64), skew: float = 0.0,
                  horiz_tol: float = 1e-9) -> RuledSurface:
    """Sweep a ruled surface from a horizontal base curve.

    Validates horizontality and regularity of the base curve over the
    requested range before returning the surface.
    """
    eps_lo, eps_hi = float(eps_range[0]), float(eps_range[1])
    t_lo, t_hi = float(t_range[0]), float(t_range[1])
    if not (eps_hi > eps_lo and t_hi > t_lo):
        raise BadParams("degenerate parameter ranges")
    probe = np.linspace(eps_lo, eps_hi, 33)
    defect = np.max(np.abs(gamma.horizontality_defect(probe)))
    if defect > horiz_tol:
        raise NotHorizontal(float(defect))
    vx, vy, vz = gamma.velocity(probe)
    speed2 = np.min(vx * vx + vy * vy + vz * vz)
    if speed2 == 0.0:
        raise DegenerateRuling("base curve is not regular")
    return RuledSurface(gamma, (eps_lo, eps_hi), (t_lo, t_hi),
                        int(grid[0]), int(grid[1]), skew=skew)


def orthogonality_check(surface) -> float:
    """Largest normalized |<ruling velocity, base velocity>| over the base.

    Zero (to rounding) for every J-ruled sweep; order one for skewed
    fixtures.  Accepts any object exposing ``gamma`` and
    ``ruling_velocity``.
    """
    eps = np.linspace(surface.eps_range[0], surface.eps_range[1], 257)
    x, y, z, dx, dy, dz = surface.gamma._raw(eps)
    rx, ry, rz = surface.ruling_velocity(eps)
    g = np.stack(frame_components(z, dx, dy, dz), axis=-1)
    r = np.stack(frame_components(z, rx, ry, rz), axis=-1)
    num = np.abs(np.sum(g * r, axis=-1))
    den = np.linalg.norm(g, axis=-1) * np.linalg.norm(r, axis=-1)
    return float(np.max(num / den))


def jacobi_vertical(surface: RuledSurface, eps, t,
                    fd_rtol: float = 1e-5) -> float:
    """Vertical component <V, T> of the variation field at (eps, t).

    On the generic branch returns the closed form, cross-checked against
    the finite-difference contraction at relative tolerance ``fd_rtol``;
    degenerate branches fall back to the finite-difference value.
    """
    try:
        closed = surface.vertical_component_closed(eps, t)
    except BranchUnsupported:
        return float(surface.vertical_component_fd(eps, t))
    fd = surface.vertical_component_fd(eps, t)
    scale = 1.0 + abs(float(fd))
    if abs(float(closed) - float(fd)) > fd_rtol * scale:
        raise AssertionError(
            f"closed-form and finite-difference vertical components disagree "
            f"at ({eps}, {t}): {closed} vs {fd}")
    return float(closed)


def uniqueness_scan(surface, eps_sing: float = EPS_SCAN) -> list:
    """Locate singular loci from the sign structure of <V, T> on the grid.

    Returns one entry per connected t-band where the vertical component
    vanishes (below eps_sing scaled by the per-line magnitude) or changes
    sign.  Area-stationary sweeps must yield exactly the band at t = 0.
    """
    eps = surface.eps_grid()
    tg = surface.t_grid()
    E, T = np.meshgrid(eps, tg, indexing="ij")
    v = np.asarray(surface.vertical_component(E, T), dtype=float)
    dt = tg[1] - tg[0]
    candidates = []
    for i in range(len(eps)):
        line = v[i]
        scale = eps_sing * (1.0 + np.max(np.abs(line)))
        hits = np.abs(line) < scale
        candidates.extend(tg[hits])
        sign_change = line[:-1] * line[1:] < 0.0
        for j in np.nonzero(sign_change)[0]:
            # linear interpolation of the crossing
            t0, t1 = tg[j], tg[j + 1]
            f0, f1 = line[j], line[j + 1]
            candidates.append(t0 - f0 * (t1 - t0) / (f1 - f0))
    if not candidates:
        return []
    ts = np.sort(np.asarray(candidates))
    gaps = np.nonzero(np.diff(ts) > 1.5 * dt)[0]
    bounds = np.concatenate([[0], gaps + 1, [len(ts)]])
    loci = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        chunk = ts[lo:hi]
        if len(chunk) == 0:
            continue
        loci.append({
            "t_center": float(np.median(chunk)),
            "t_min": float(chunk[0]),
            "t_max": float(chunk[-1]),
            "samples": int(len(chunk)),
        })
    return loci


def singular_point_surface(p0: Point) -> ScalarField:
    """Defining function of the complete minimal surface whose only
    singular point is ``p0``.

    The catalog saddle-point field exp(z - z0)*(y - y0) + x - x0 places its
    singular point at (x0, y0, -z0), so the z-parameter is bound to -p0.z.
    """
    return catalog("saddle-point", x0=p0.x, y0=p0.y, z0=-p0.z)


def family_surfaces(kind: str, **params) -> ScalarField:
    """The two families of area-stationary surfaces with a geodesic
    singular curve: planes a x + b y + c = 0 and the saddle family around
    a vertical line.
    """
    if kind == "plane_ab":
        return catalog("plane-ab", **params)
    if kind == "saddle_curve":
        return catalog("saddle-curve", **params)
    raise BadParams(f"unknown family {kind!r}; expected plane_ab or saddle_curve")


def plane_ab_singular_line_z(a: float, b: float) -> float:
    """z-level of the singular line of the plane a x + b y + c = 0.

    Exists only for a b > 0, where -a e^z + b e^-z = 0 gives
    z = log(sqrt(b/a)).
    """
    if a * b <= 0:
        raise BadParams("the plane has a singular line only for a*b > 0")
    return 0.5 * math.log(b / a)
