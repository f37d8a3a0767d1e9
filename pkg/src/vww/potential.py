"""Singular potentials q = nu' modeled through their primitive nu.

A potential is never evaluated directly: nu is an L^2 function given as a
closed-form smooth part plus Heaviside jump atoms, so q consists of a
smooth density (the derivative of the smooth part) plus Dirac layers at
the jump locations.  Regularization convolves the zero-extension of q
with a compactly supported bump psi_eps(x) = psi(x/eps)/eps; the Dirac
part mollifies exactly to sum_i alpha_i * psi_eps(x - x_i), the smooth
density by quadrature split at the boundary kinks of the extension.

Moderateness / negligibility of eps-indexed nets is measured by
least-squares slopes in log-log coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np
from scipy.interpolate import InterpolatedUnivariateSpline

from .errors import ConfigError, DegenerateNet, MissingNorm, UnresolvedMollifier
from .grid import Grid, GridFunction

SMOOTH_KINDS = ("zero", "const", "linear", "sine", "samples")

_PRIMITIVE_PANELS = 16384


@lru_cache(maxsize=8)
def _gauss_rule(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


class BumpProfile:
    """Smooth bump psi(u) = C * exp(-s / (1 - u^2)) * (1 + t*u) on (-1, 1).

    The normalization C makes the integral one.  The tilt t (|t| < 1)
    breaks evenness, giving a nonzero first moment; the default profiles
    are untilted.  The antiderivative Psi(u) = int_{-1}^u psi is
    tabulated once on a fine uniform grid and evaluated by cubic Hermite
    interpolation with the exact density as slope data, which keeps
    pointwise errors near machine precision.
    """

    def __init__(self, name: str, sharpness: float, tilt: float = 0.0):
        self.name = name
        self.sharpness = float(sharpness)
        self.tilt = float(tilt)
        self._built = False

    def _raw(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        inside = np.abs(u) < 1.0
        ui = u[inside]
        out[inside] = np.exp(-self.sharpness / (1.0 - ui * ui)) \
            * (1.0 + self.tilt * ui)
        return out

    def _build(self):
        if self._built:
            return
        n = _PRIMITIVE_PANELS
        edges = np.linspace(-1.0, 1.0, n + 1)
        gx, gw = _gauss_rule(16)
        half = (edges[1] - edges[0]) / 2.0
        mids = (edges[:-1] + edges[1:]) / 2.0
        pts = mids[:, None] + half * gx[None, :]
        panel = (self._raw(pts) @ gw) * half
        cum = np.concatenate([[0.0], np.cumsum(panel)])
        total = cum[-1]
        self._norm = 1.0 / total
        self._table_x = edges
        self._table_v = cum / total
        self._table_v[-1] = 1.0
        self._table_h = edges[1] - edges[0]
        self._built = True

    def density(self, u) -> np.ndarray:
        """psi(u), vanishing outside (-1, 1)."""
        self._build()
        return self._norm * self._raw(u)

    @property
    def peak(self) -> float:
        """psi(0)."""
        self._build()
        return float(self._norm * math.exp(-self.sharpness))

    def primitive(self, u) -> np.ndarray:
        """Psi(u) = int_{-1}^u psi, clamped to 0 / 1 outside the support."""
        self._build()
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.empty_like(u)
        below = u <= -1.0
        above = u >= 1.0
        out[below] = 0.0
        out[above] = 1.0
        mid = ~(below | above)
        if np.any(mid):
            um = u[mid]
            h = self._table_h
            idx = np.clip(((um + 1.0) / h).astype(int), 0, _PRIMITIVE_PANELS - 1)
            t = (um - self._table_x[idx]) / h
            f0 = self._table_v[idx]
            f1 = self._table_v[idx + 1]
            d0 = self._norm * self._raw(self._table_x[idx])
            d1 = self._norm * self._raw(self._table_x[idx + 1])
            t2 = t * t
            t3 = t2 * t
            out[mid] = (
                (2 * t3 - 3 * t2 + 1) * f0
                + (t3 - 2 * t2 + t) * h * d0
                + (-2 * t3 + 3 * t2) * f1
                + (t3 - t2) * h * d1
            )
        return out

    def mass(self) -> float:
        """Quadrature check of int psi (should be 1 by construction)."""
        self._build()
        gx, gw = _gauss_rule(64)
        edges = np.linspace(-1.0, 1.0, 65)
        half = (edges[1] - edges[0]) / 2.0
        mids = (edges[:-1] + edges[1:]) / 2.0
        pts = mids[:, None] + half * gx[None, :]
        return float(np.sum(self.density(pts) @ gw) * half)


PROFILES: dict[str, BumpProfile] = {
    "bump": BumpProfile("bump", 1.0),
    "bump2": BumpProfile("bump2", 2.0),
    "bump_skew": BumpProfile("bump_skew", 1.0, tilt=0.5),
}


def get_profile(name: str) -> BumpProfile:
    try:
        return PROFILES[name]
    except KeyError:
        raise ConfigError(f"unknown mollifier profile {name!r}") from None


@dataclass(frozen=True)
class MollifierSpec:
    """A bump profile together with the scale eps in (0, 1]."""

    profile: str = "bump"
    epsilon: float = 0.25

    def __post_init__(self):
        get_profile(self.profile)
        if not 0.0 < self.epsilon <= 1.0:
            raise ConfigError(f"epsilon must lie in (0, 1], got {self.epsilon}")

    @property
    def bump(self) -> BumpProfile:
        return get_profile(self.profile)


@lru_cache(maxsize=64)
def _samples_spline(values: tuple) -> InterpolatedUnivariateSpline:
    vals = np.asarray(values, dtype=float)
    if vals.size < 8:
        raise ConfigError("sampled smooth part needs at least 8 values")
    x = np.linspace(0.0, 1.0, vals.size)
    return InterpolatedUnivariateSpline(x, vals, k=5)


@dataclass(frozen=True)
class NuPrimitive:
    """Primitive nu of the potential q = nu', as smooth part plus jumps.

    Parameters
    ----------
    smooth_kind : str
        One of ``zero``, ``const c``, ``linear c*x``,
        ``sine a*sin(2 pi m x + phase)`` or ``samples`` (uniform grid
        values on [0, 1], interpolated by a quintic spline).
    smooth_params : tuple
        Parameters of the smooth part; see above.
    jumps : tuple[tuple[float, float], ...]
        Heaviside atoms (location, height); locations strictly inside
        (0, 1) and strictly increasing.  Each contributes
        ``height * delta_location`` to q.

    Evaluation at a jump location returns the left limit.
    """

    smooth_kind: str = "zero"
    smooth_params: tuple = ()
    jumps: tuple = ()

    def __post_init__(self):
        if self.smooth_kind not in SMOOTH_KINDS:
            raise ConfigError(f"unknown smooth kind {self.smooth_kind!r}")
        object.__setattr__(
            self, "smooth_params", tuple(float(p) for p in self.smooth_params)
        )
        jumps = tuple((float(x), float(a)) for x, a in self.jumps)
        locs = [x for x, _ in jumps]
        if any(not 0.0 < x < 1.0 for x in locs):
            raise ConfigError("jump locations must lie strictly inside (0, 1)")
        if any(b <= a for a, b in zip(locs, locs[1:])):
            raise ConfigError("jump locations must be strictly increasing")
        object.__setattr__(self, "jumps", jumps)
        if self.smooth_kind in ("const", "linear") and len(self.smooth_params) != 1:
            raise ConfigError(f"{self.smooth_kind} takes one parameter")
        if self.smooth_kind == "sine" and len(self.smooth_params) not in (2, 3):
            raise ConfigError("sine takes (amplitude, m[, phase])")
        if self.smooth_kind == "samples" and len(self.smooth_params) < 8:
            raise ConfigError("samples kind needs at least 8 values")

    # -- smooth part -------------------------------------------------------

    def smooth_values(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        k = self.smooth_kind
        if k == "zero":
            return np.zeros_like(x)
        if k == "const":
            return np.full_like(x, self.smooth_params[0])
        if k == "linear":
            return self.smooth_params[0] * x
        if k == "sine":
            a, m = self.smooth_params[:2]
            phase = self.smooth_params[2] if len(self.smooth_params) == 3 else 0.0
            return a * np.sin(2.0 * math.pi * m * x + phase)
        return _samples_spline(self.smooth_params)(x)

    def density_values(self, x) -> np.ndarray:
        """Smooth density g = (smooth part)' of the potential."""
        x = np.asarray(x, dtype=float)
        k = self.smooth_kind
        if k in ("zero", "const"):
            return np.zeros_like(x)
        if k == "linear":
            return np.full_like(x, self.smooth_params[0])
        if k == "sine":
            a, m = self.smooth_params[:2]
            phase = self.smooth_params[2] if len(self.smooth_params) == 3 else 0.0
            w = 2.0 * math.pi * m
            return a * w * np.cos(w * x + phase)
        return _samples_spline(self.smooth_params).derivative()(x)

    def density_integral(self, t) -> np.ndarray:
        """G(t) = int_0^t g, i.e. smooth(t) - smooth(0)."""
        return self.smooth_values(t) - self.smooth_values(0.0)

    # -- full primitive ----------------------------------------------------

    def nu_values(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = self.smooth_values(x).astype(float, copy=True)
        for loc, height in self.jumps:
            out = out + height * (x > loc)
        return out

    @property
    def breakpoints(self) -> tuple:
        return tuple(loc for loc, _ in self.jumps)

    def _panel_offsets(self) -> list[tuple[float, float, float]]:
        """(a, b, jump offset) for each smooth panel of [0, 1]."""
        edges = [0.0, *self.breakpoints, 1.0]
        heights = dict(self.jumps)
        panels = []
        offset = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            if a in heights:
                offset += heights[a]
            panels.append((a, b, offset))
        return panels

    def ode_panels(self) -> list[tuple[float, float, Callable[[float], float]]]:
        """Panels (a, b, nu) covering [0, 1] on which nu is smooth."""
        return [
            (a, b, self._panel_callable(shift))
            for a, b, shift in self._panel_offsets()
        ]

    def _panel_callable(self, shift: float) -> Callable[[float], float]:
        k = self.smooth_kind
        if k == "zero":
            return lambda x: shift
        if k == "const":
            c = self.smooth_params[0] + shift
            return lambda x: c
        if k == "linear":
            c = self.smooth_params[0]
            return lambda x: c * x + shift
        if k == "sine":
            a, m = self.smooth_params[:2]
            phase = self.smooth_params[2] if len(self.smooth_params) == 3 else 0.0
            w = 2.0 * math.pi * m
            return lambda x: a * math.sin(w * x + phase) + shift
        spl = _samples_spline(self.smooth_params)
        return lambda x: float(spl(x)) + shift

    # -- norms and reporting -----------------------------------------------

    def norm_l2(self) -> float:
        """L^2(0,1) norm of nu, by per-panel Gauss quadrature."""
        gx, gw = _gauss_rule(64)
        total = 0.0
        for a, b, shift in self._panel_offsets():
            if b <= a:
                continue
            half = (b - a) / 2.0
            pts = (a + b) / 2.0 + half * gx
            vals = self.smooth_values(pts) + shift
            total += half * float(gw @ vals**2)
        return math.sqrt(max(total, 0.0))

    def norm_linf(self, samples_per_panel: int = 4096) -> float:
        sup = 0.0
        for a, b, shift in self._panel_offsets():
            xs = np.linspace(a, b, samples_per_panel)
            sup = max(sup, float(np.max(np.abs(self.smooth_values(xs) + shift))))
        return sup

    def q_linf(self) -> float:
        if self.jumps:
            raise MissingNorm("potential has Dirac atoms; no L-infinity norm")
        xs = np.linspace(0.0, 1.0, 8193)
        return float(np.max(np.abs(self.density_values(xs))))

    def q_values(self, x) -> np.ndarray:
        """Potential density away from atoms (atoms excluded by caller)."""
        return self.density_values(x)

    def total_mass(self) -> float:
        return float(self.density_integral(1.0)) + sum(a for _, a in self.jumps)

    def descriptor(self) -> dict:
        return {
            "smooth": {"kind": self.smooth_kind, "params": list(self.smooth_params)},
            "jumps": [[x, a] for x, a in self.jumps],
        }

    @classmethod
    def from_descriptor(cls, d: dict) -> "NuPrimitive":
        try:
            smooth = d["smooth"]
            return cls(
                smooth_kind=smooth["kind"],
                smooth_params=tuple(smooth.get("params", ())),
                jumps=tuple((x, a) for x, a in d.get("jumps", ())),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad potential descriptor: {exc}") from exc


def evaluate_nu(nu: NuPrimitive, x: float) -> float:
    """nu(x) on [0, 1] with the left-limit convention at jumps."""
    if not 0.0 <= x <= 1.0:
        raise ConfigError(f"x={x} outside [0, 1]")
    return float(nu.nu_values(np.asarray([x]))[0])


class ZeroExtension:
    """Zero extension of a grid function to the whole line.

    Inside (0, 1) values are linearly interpolated from the grid samples;
    outside the extension vanishes identically.
    """

    def __init__(self, f: GridFunction):
        self._f = f

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = (x > 0.0) & (x < 1.0)
        out = np.zeros_like(x)
        if np.any(inside):
            out[inside] = np.interp(x[inside], self._f.grid.nodes, self._f.values)
        return out


def extend_by_zero(f: GridFunction) -> ZeroExtension:
    return ZeroExtension(f)


# -- mollification ----------------------------------------------------------


@lru_cache(maxsize=8)
def _composite_rule(panels: int, order: int):
    """Composite Gauss-Legendre nodes/weights on [-1, 1]."""
    gx, gw = _gauss_rule(order)
    edges = np.linspace(-1.0, 1.0, panels + 1)
    half = (edges[1] - edges[0]) / 2.0
    mids = (edges[:-1] + edges[1:]) / 2.0
    nodes = (mids[:, None] + half * gx[None, :]).ravel()
    weights = np.tile(half * gw, panels)
    return nodes, weights


def _conv_with_kinks(F: Callable, x: np.ndarray, eps: float, bump: BumpProfile,
                     weight: Callable) -> np.ndarray:
    """int_{-1}^{1} F(x - eps*u) * weight(u) du, split where x - eps*u hits 0 or 1.

    F must be continuous and piecewise smooth with kinks only at 0 and 1
    (the zero-extension boundary).  Interior points, whose window avoids
    both kinks, are handled in one vectorized pass.  Composite Gauss
    panels keep the quadrature error of the flat-ended bump near machine
    precision.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    un, uw = _composite_rule(16, 16)
    out = np.empty_like(x)
    interior = (x >= eps) & (x <= 1.0 - eps)
    if np.any(interior):
        xs = x[interior]
        pts = xs[:, None] - eps * un[None, :]
        out[interior] = F(pts) @ (uw * weight(un))
    rest = np.nonzero(~interior)[0]
    gx, gw = _gauss_rule(16)
    for i in rest:
        xi = x[i]
        cuts = sorted(
            {-1.0, 1.0}
            | {u for u in ((xi - 1.0) / eps, xi / eps) if -1.0 < u < 1.0}
        )
        acc = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            sub = max(2, math.ceil((b - a) / 0.125))
            edges = np.linspace(a, b, sub + 1)
            half = (edges[1] - edges[0]) / 2.0
            mids = (edges[:-1] + edges[1:]) / 2.0
            u = (mids[:, None] + half * gx[None, :]).ravel()
            w = np.tile(half * gw, sub)
            acc += float((w * weight(u)) @ F(xi - eps * u))
        out[i] = acc
    return out


def mollify_potential(nu: NuPrimitive, m: MollifierSpec, grid: Grid) -> GridFunction:
    """Regularized potential q_eps sampled on the grid.

    Dirac atoms convolve exactly to scaled bumps; the smooth density is
    convolved with the bump by quadrature, honoring the kinks the zero
    extension introduces at 0 and 1.
    """
    eps = m.epsilon
    if 2.0 * eps < 8.0 * grid.h * (1.0 - 1e-12):
        raise UnresolvedMollifier(
            f"grid h={grid.h:.3g} cannot resolve epsilon={eps:.3g} "
            "(need >= 8 nodes across the support)"
        )
    bump = m.bump
    x = grid.nodes
    vals = np.zeros_like(x)
    for loc, height in nu.jumps:
        vals += height * bump.density((x - loc) / eps) / eps
    if nu.smooth_kind not in ("zero", "const"):
        def g_ext(pts):
            p = np.asarray(pts, dtype=float)
            inside = (p > 0.0) & (p < 1.0)
            res = np.zeros_like(p)
            res[inside] = nu.density_values(p[inside])
            return res

        vals += _conv_with_kinks(g_ext, x, eps, bump, bump.density)
    return GridFunction(grid, vals)


class MollifiedNu:
    """Smooth primitive nu_eps of the regularized potential q_eps.

    nu_eps is the convolution of the primitive of the zero-extended
    potential with the bump: atoms contribute exact antiderivative terms
    ``height * Psi((x - loc)/eps)``, the smooth density a slowly varying
    convolution that is tabulated once per (nu, eps) pair and evaluated by
    cubic Hermite interpolation (exact slopes from the mollified density).
    Exposes the same potential protocol as :class:`NuPrimitive` so the
    phase integration can consume either.
    """

    def __init__(self, nu: NuPrimitive, spec: MollifierSpec):
        self.base = nu
        self.spec = spec
        self._eps = spec.epsilon
        self._bump = spec.bump
        self._has_smooth = nu.smooth_kind not in ("zero", "const")
        if self._has_smooth:
            self._build_smooth_table()

    # smooth-part tabulation ------------------------------------------------

    def _P_s(self, y):
        """Primitive of the zero-extended smooth density."""
        y = np.asarray(y, dtype=float)
        return self.base.density_integral(np.clip(y, 0.0, 1.0))

    def _g_ext(self, y):
        y = np.asarray(y, dtype=float)
        inside = (y > 0.0) & (y < 1.0)
        out = np.zeros_like(y)
        out[inside] = self.base.density_values(y[inside])
        return out

    def _smooth_conv(self, x):
        return _conv_with_kinks(self._P_s, x, self._eps, self._bump,
                                self._bump.density)

    def _smooth_density_conv(self, x):
        return _conv_with_kinks(self._g_ext, x, self._eps, self._bump,
                                self._bump.density)

    def _build_smooth_table(self):
        eps = self._eps
        m_freq = 1.0
        if self.base.smooth_kind == "sine":
            m_freq = max(1.0, abs(self.base.smooth_params[1]))
        if eps >= 0.2:
            segs = [(0.0, 1.0, max(4096, int(2048 * m_freq)))]
        else:
            segs = [
                (0.0, 2.0 * eps, 512),
                (2.0 * eps, 1.0 - 2.0 * eps, max(2048, int(1024 * m_freq))),
                (1.0 - 2.0 * eps, 1.0, 512),
            ]
        xs, vs, ds = [], [], []
        for a, b, k in segs:
            t = np.linspace(a, b, k + 1)
            xs.append(t)
            vs.append(self._smooth_conv(t))
            ds.append(self._smooth_density_conv(t))
        self._seg_x = [s for s in xs]
        self._seg_v = vs
        self._seg_d = ds
        self._seg_bounds = [(a, b) for a, b, _ in segs]

    def _smooth_interp(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        outside = (x < 0.0) | (x > 1.0)
        if np.any(outside):
            out[outside] = self._smooth_conv(x[outside])
        for (a, b), t, v, d in zip(self._seg_bounds, self._seg_x, self._seg_v,
                                   self._seg_d):
            if a == 0.0:
                sel = (x >= a) & (x <= b)
            else:
                sel = (x > a) & (x <= b)
            if not np.any(sel):
                continue
            xi = x[sel]
            h = t[1] - t[0]
            idx = np.clip(((xi - a) / h).astype(int), 0, len(t) - 2)
            s = (xi - t[idx]) / h
            s2 = s * s
            s3 = s2 * s
            out[sel] = (
                (2 * s3 - 3 * s2 + 1) * v[idx]
                + (s3 - 2 * s2 + s) * h * d[idx]
                + (-2 * s3 + 3 * s2) * v[idx + 1]
                + (s3 - s2) * h * d[idx + 1]
            )
        return out

    # potential protocol ------------------------------------------------------

    def nu_values(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        for loc, height in self.base.jumps:
            out += height * self._bump.primitive((x - loc) / self._eps)
        if self._has_smooth:
            out += self._smooth_interp(x)
        return out

    @property
    def jumps(self) -> tuple:
        return ()

    @property
    def breakpoints(self) -> tuple:
        eps = self._eps
        pts = set()
        for loc, _ in self.base.jumps:
            pts.update((loc - eps, loc, loc + eps))
        if self._has_smooth:
            for a, b in self._seg_bounds:
                pts.update((a, b))
        return tuple(sorted(p for p in pts if 0.0 < p < 1.0))

    def ode_panels(self):
        edges = [0.0, *self.breakpoints, 1.0]
        atom_locs = np.array([loc for loc, _ in self.base.jumps])
        atom_heights = np.array([h for _, h in self.base.jumps])
        eps = self._eps
        bump = self._bump

        def nu_scalar(x: float) -> float:
            acc = 0.0
            if atom_locs.size:
                acc += float(
                    atom_heights @ bump.primitive((x - atom_locs) / eps)
                )
            if self._has_smooth:
                acc += float(self._smooth_interp(x)[0])
            return acc

        return [(a, b, nu_scalar) for a, b in zip(edges[:-1], edges[1:])]

    def q_values(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        for loc, height in self.base.jumps:
            out += height * self._bump.density((x - loc) / self._eps) / self._eps
        if self._has_smooth:
            out += self._smooth_density_conv(x)
        return out

    def q_linf(self) -> float:
        xs = np.linspace(0.0, 1.0, 8193)
        xs = np.concatenate([xs, [loc for loc, _ in self.base.jumps]])
        return float(np.max(np.abs(self.q_values(xs))))

    def norm_l2(self) -> float:
        dense = Grid(8192)
        vals = self.nu_values(dense.nodes)
        return dense.norm_l2(vals)

    def norm_linf(self) -> float:
        xs = np.linspace(0.0, 1.0, 8193)
        return float(np.max(np.abs(self.nu_values(xs))))

    def total_mass(self) -> float:
        return self.base.total_mass()

    def descriptor(self) -> dict:
        return {
            "mollified": self.base.descriptor(),
            "profile": self.spec.profile,
            "epsilon": self._eps,
        }


class PerturbedNu:
    """Potential-like wrapper adding c * w to a base potential.

    The perturbation is given through its primitive ``w_nu`` (a smooth
    :class:`NuPrimitive` without jumps, so w = w_nu' is bounded); the
    perturbed primitive is base_nu + c * w_nu, which keeps the phase
    equations well defined.
    """

    def __init__(self, base, w_nu: NuPrimitive, coefficient: float):
        if w_nu.jumps:
            raise ConfigError("perturbation primitive must be jump-free")
        self.base = base
        self.w_nu = w_nu
        self.c = float(coefficient)

    def nu_values(self, x) -> np.ndarray:
        return self.base.nu_values(x) + self.c * self.w_nu.smooth_values(x)

    @property
    def jumps(self) -> tuple:
        return getattr(self.base, "jumps", ())

    @property
    def breakpoints(self) -> tuple:
        return getattr(self.base, "breakpoints", ())

    def ode_panels(self):
        w_fn = self.w_nu._panel_callable(0.0)
        c = self.c

        def wrap(f):
            return lambda x: f(x) + c * w_fn(x)

        return [(a, b, wrap(f)) for a, b, f in self.base.ode_panels()]

    def q_values(self, x) -> np.ndarray:
        return self.base.q_values(x) + self.c * self.w_nu.density_values(x)

    def _probe_points(self) -> np.ndarray:
        xs = np.linspace(0.0, 1.0, 8193)
        inner = getattr(self.base, "base", None)
        atoms = [loc for loc, _ in getattr(inner, "jumps", ())]
        return np.concatenate([xs, atoms]) if atoms else xs

    def q_linf(self) -> float:
        if getattr(self.base, "jumps", ()) and isinstance(self.base, NuPrimitive):
            raise MissingNorm("base potential has Dirac atoms")
        return float(np.max(np.abs(self.q_values(self._probe_points()))))

    def norm_l2(self) -> float:
        dense = Grid(8192)
        return dense.norm_l2(self.nu_values(dense.nodes))

    def norm_linf(self) -> float:
        return float(np.max(np.abs(self.nu_values(np.linspace(0.0, 1.0, 8193)))))

    def total_mass(self) -> float:
        return self.base.total_mass() + self.c * float(
            self.w_nu.density_integral(1.0))

    def descriptor(self) -> dict:
        return {
            "perturbed": self.base.descriptor(),
            "w_primitive": self.w_nu.descriptor(),
            "coefficient": self.c,
        }


# -- moderateness / negligibility fits ---------------------------------------


@dataclass(frozen=True)
class RegularizedNet:
    """Norms of an eps-indexed family, ready for log-log slope fitting."""

    ladder: tuple
    norms: tuple
    norm_kind: str = "L2"

    def __post_init__(self):
        lad = tuple(float(e) for e in self.ladder)
        if any(b >= a for a, b in zip(lad, lad[1:])):
            raise ConfigError("epsilon ladder must be strictly decreasing")
        object.__setattr__(self, "ladder", lad)
        object.__setattr__(self, "norms", tuple(float(v) for v in self.norms))
        if len(self.ladder) != len(self.norms):
            raise ConfigError("ladder and norms must have equal length")

    @classmethod
    def from_grid_functions(cls, ladder, members, norm_kind="L2"):
        fn = {"L2": GridFunction.norm_l2, "Linf": GridFunction.norm_linf}
        try:
            measure = fn[norm_kind]
        except KeyError:
            raise ConfigError(f"unsupported norm kind {norm_kind!r}") from None
        members = list(members)
        if len({m.grid.n for m in members}) > 1:
            raise ConfigError("net members must share one grid")
        return cls(tuple(ladder), tuple(measure(m) for m in members), norm_kind)


class ExponentFit(NamedTuple):
    slope: float
    max_dev: float
    intercept: float


def default_ladder(k_min: int = 2, k_max: int = 9) -> tuple:
    """Geometric ladder eps_k = 2^-k, k = k_min..k_max."""
    if k_max < k_min:
        raise ConfigError("k_max must be >= k_min")
    return tuple(2.0 ** (-k) for k in range(k_min, k_max + 1))


def _fit_loglog(xs: np.ndarray, ys: np.ndarray) -> ExponentFit:
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    return ExponentFit(float(slope), float(np.max(np.abs(resid))), float(intercept))


def fit_moderateness(net: RegularizedNet) -> ExponentFit:
    """Slope N of log(norm) against log(1/eps): norms ~ eps^-N."""
    if len(net.ladder) < 4:
        raise ConfigError("need at least 4 ladder points to fit")
    norms = np.asarray(net.norms)
    if np.any(norms <= 0.0):
        raise DegenerateNet(
            "net contains zero norms (exponent -inf); nothing to fit"
        )
    return _fit_loglog(np.log(1.0 / np.asarray(net.ladder)), np.log(norms))


class NegligibilityReport(NamedTuple):
    passed: bool
    slope: float
    max_dev: float
    order: int


NEGLIGIBILITY_MARGIN = 0.2


def check_negligibility(net: RegularizedNet, order: int) -> NegligibilityReport:
    """Fit log(norm) against log(eps); pass when slope >= order - 0.2."""
    if order < 1:
        raise ConfigError("negligibility order must be a positive integer")
    if len(net.ladder) < 4:
        raise ConfigError("need at least 4 ladder points to fit")
    norms = np.asarray(net.norms)
    if np.any(norms <= 0.0):
        raise DegenerateNet(
            "net contains zero norms (negligible at every order)"
        )
    fit = _fit_loglog(np.log(np.asarray(net.ladder)), np.log(norms))
    return NegligibilityReport(
        fit.slope >= order - NEGLIGIBILITY_MARGIN, fit.slope, fit.max_dev, order
    )
