"""Riemann solvers: Lax wave curves, homogeneous fans, and source-lattice fans.

The source-lattice solver inserts a standing zero-speed jump at a lattice
point x0 carrying the integrated source effect over one cell: two states
u_minus, u_plus with u_plus = stationary_flow(x0, u_minus) are joined by
negative-speed waves to the left data and positive-speed waves to the right
data.  Wave strengths for genuinely nonlinear families are measured as
characteristic-speed differences, so curves are parametrized by that
difference.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CurveLeftDomain, InverseDiverged, NewtonDiverged, OutOfDomain
from .numerics import damped_newton, fd_jacobian, rk4_path
from .systems import GNL, LD, SourceSpec, SystemSpec, eigen_decompose

SHOCK = "shock"
RAREFACTION = "rarefaction"
CONTACT = "contact"
ZERO_WAVE = "zero"

ZERO_FAMILY = 0

RAREFACTION_STEP = 1e-3   # max curve-parameter step for integral curves
HUGONIOT_TOL = 1e-11
FAN_TOL = 1e-10
INVERSE_TOL = 1e-12
STRENGTH_FLOOR = 1e-13    # waves below this strength are dropped from fans


@dataclass(frozen=True)
class ElementaryWave:
    """One wave of a Riemann fan.

    speed_lo == speed_hi for shocks and contacts; for rarefactions they are
    the characteristic speeds of the left and right states.  The zero wave
    has family 0 and both speeds equal to zero.
    """

    family: int
    kind: str
    left: np.ndarray
    right: np.ndarray
    speed_lo: float
    speed_hi: float
    strength: float

    @property
    def speed(self) -> float:
        return 0.5 * (self.speed_lo + self.speed_hi)


@dataclass(frozen=True)
class WaveFan:
    """Ordered waves solving one (possibly source-augmented) Riemann problem."""

    system: SystemSpec
    waves: tuple
    states: tuple
    u_minus: Optional[np.ndarray] = None
    u_plus: Optional[np.ndarray] = None

    @property
    def left_state(self) -> np.ndarray:
        return self.states[0]

    @property
    def right_state(self) -> np.ndarray:
        return self.states[-1]


def _rarefy_direction(sys: SystemSpec, family: int):
    def rhs(u):
        _, right, _ = eigen_decompose(sys, u)
        return right[:, family - 1]

    return rhs


def _check_inside(sys: SystemSpec):
    def probe(u):
        if not sys.contains(u, tol=1e-9):
            raise CurveLeftDomain(f"wave curve left the box at {u}")

    return probe


def _scalar_curve(sys: SystemSpec, u0: np.ndarray, eps: float):
    lam0 = float(sys.eigenvalues(u0)[0])
    u1 = sys.state(sys.lambda_inv(lam0 + eps))
    return u1


def _curve_with_speed(sys: SystemSpec, family: int, u0: np.ndarray, eps: float):
    """Point on the wave curve plus wave metadata (kind, speeds).

    GNL: eps >= 0 follows the integral curve of the scaled eigenvector
    (characteristic speed rises exactly by eps); eps < 0 solves the
    Rankine-Hugoniot conditions pinned to the same speed-difference
    parametrization.  LD: the integral curve in both directions.
    """
    u0 = sys.state(u0)
    kind_cfg = sys.field_kinds[family - 1]
    if abs(eps) <= STRENGTH_FLOOR:
        lam = float(sys.eigenvalues(u0)[family - 1])
        k = CONTACT if kind_cfg == LD else (RAREFACTION if eps >= 0 else SHOCK)
        return u0.copy(), k, lam, lam

    if kind_cfg == LD:
        rhs = _rarefy_direction(sys, family)
        u1 = rk4_path(rhs, u0, eps, RAREFACTION_STEP, on_point=_check_inside(sys))
        lam = float(sys.eigenvalues(u1)[family - 1])
        return u1, CONTACT, lam, lam

    if eps > 0.0:
        if sys.n == 1 and sys.lambda_inv is not None:
            u1 = _scalar_curve(sys, u0, eps)
        else:
            rhs = _rarefy_direction(sys, family)
            u1 = rk4_path(rhs, u0, eps, RAREFACTION_STEP, on_point=_check_inside(sys))
        if not sys.contains(u1):
            raise CurveLeftDomain(f"rarefaction curve left the box at {u1}")
        lam0 = float(sys.eigenvalues(u0)[family - 1])
        lam1 = float(sys.eigenvalues(u1)[family - 1])
        return u1, RAREFACTION, lam0, lam1

    # shock branch
    if sys.n == 1 and sys.lambda_inv is not None:
        u1 = _scalar_curve(sys, u0, eps)
        if not sys.contains(u1):
            raise CurveLeftDomain(f"shock curve left the box at {u1}")
        du = u1 - u0
        s = float((sys.flux(u1)[0] - sys.flux(u0)[0]) / du[0])
        return u1, SHOCK, s, s

    lam0 = float(sys.eigenvalues(u0)[family - 1])
    f0 = np.atleast_1d(sys.flux(u0))
    _, right0, _ = eigen_decompose(sys, u0)

    def residual(x):
        u = x[:-1]
        s = x[-1]
        rh = np.atleast_1d(sys.flux(u)) - f0 - s * (u - u0)
        par = sys.eigenvalues(u)[family - 1] - lam0 - eps
        return np.concatenate([rh, [par]])

    x0 = np.concatenate([u0 + eps * right0[:, family - 1], [lam0 + 0.5 * eps]])
    x = damped_newton(residual, x0, tol=HUGONIOT_TOL, context=f"hugoniot family {family}")
    u1 = x[:-1]
    if not sys.contains(u1):
        raise CurveLeftDomain(f"shock curve left the box at {u1}")
    s = float(x[-1])
    return u1, SHOCK, s, s


def wave_curve(sys: SystemSpec, family: int, u0, eps: float) -> np.ndarray:
    """State at parameter eps along the family's wave curve from u0.

    Positive eps follows the rarefaction (or contact) branch, negative eps
    the shock branch, parametrized so the characteristic speed changes by
    eps for genuinely nonlinear families.
    """
    u0 = sys.state(u0)
    sys.require_inside(u0)
    u1, _, _, _ = _curve_with_speed(sys, family, u0, eps)
    return u1


def _chain(sys: SystemSpec, u_start: np.ndarray, families, eps_vec):
    """Apply successive wave curves; returns the end state and per-wave metadata."""
    state = u_start
    meta = []
    for fam, e in zip(families, eps_vec):
        u_next, kind, s_lo, s_hi = _curve_with_speed(sys, fam, state, float(e))
        meta.append((fam, float(e), state, u_next, kind, s_lo, s_hi))
        state = u_next
    return state, meta


def _fan_from_meta(sys: SystemSpec, meta, u_l, u_r, u_minus=None, u_plus=None,
                   zero_wave: Optional[ElementaryWave] = None, zero_slot: int = 0):
    """Assemble a WaveFan, dropping null waves and snapping outer states."""
    waves = []
    states = [sys.state(u_l)]
    entries = list(meta)
    for idx, (fam, e, ul, ur, kind, s_lo, s_hi) in enumerate(entries):
        if zero_wave is not None and idx == zero_slot:
            waves.append(zero_wave)
            states.append(np.asarray(zero_wave.right))
        if abs(e) <= STRENGTH_FLOOR:
            continue
        left = states[-1]
        right = sys.state(u_r) if idx == len(entries) - 1 and zero_slot <= idx else np.asarray(ur)
        waves.append(ElementaryWave(family=fam, kind=kind, left=left, right=right,
                                    speed_lo=s_lo, speed_hi=s_hi, strength=float(e)))
        states.append(right)
    if zero_wave is not None and zero_slot == len(entries):
        waves.append(zero_wave)
        states.append(np.asarray(zero_wave.right))
    # snap the final state to the requested right datum
    states[-1] = sys.state(u_r)
    if len(waves) > 0:
        w = waves[-1]
        waves[-1] = ElementaryWave(family=w.family, kind=w.kind, left=w.left,
                                   right=states[-1], speed_lo=w.speed_lo,
                                   speed_hi=w.speed_hi, strength=w.strength)
    return WaveFan(system=sys, waves=tuple(waves), states=tuple(states),
                   u_minus=u_minus, u_plus=u_plus)


def solve_homogeneous(sys: SystemSpec, u_l, u_r) -> WaveFan:
    """Fan of n elementary waves joining u_l to u_r without source effects."""
    u_l = sys.state(u_l)
    u_r = sys.state(u_r)
    sys.require_inside(u_l)
    sys.require_inside(u_r)
    families = list(range(1, sys.n + 1))

    if sys.n == 1 and sys.lambda_inv is not None and sys.field_kinds[0] == GNL:
        eps = np.array([float(sys.eigenvalues(u_r)[0] - sys.eigenvalues(u_l)[0])])
    else:
        mid = 0.5 * (u_l + u_r)
        _, _, left_vecs = eigen_decompose(sys, mid)
        eps0 = left_vecs @ (u_r - u_l)

        def residual(e):
            end, _ = _chain(sys, u_l, families, e)
            return end - u_r

        eps = damped_newton(residual, eps0, tol=FAN_TOL, context="homogeneous fan")

    _, meta = _chain(sys, u_l, families, eps)
    return _fan_from_meta(sys, meta, u_l, u_r, zero_wave=None, zero_slot=-1)


def stationary_flow(sys: SystemSpec, src: SourceSpec, x0: float, h: float, u) -> np.ndarray:
    """Map u to the state whose flux absorbs one source cell: f^-1[f(u) + int g].

    The integral freezes u and runs over [x0, x0+h]; the flux inverse is a
    damped Newton iteration started from u, valid because all characteristic
    speeds are bounded away from zero.
    """
    u = sys.state(u)
    sys.require_inside(u)
    if src.is_trivial:
        return u.copy()
    target = np.atleast_1d(sys.flux(u)) + src.integral(x0, h, u)

    def residual(w):
        return np.atleast_1d(sys.flux(w)) - target

    try:
        w = damped_newton(residual, u, tol=INVERSE_TOL, jac=lambda w: sys.jacobian_at(w),
                          context="flux inversion")
    except NewtonDiverged as exc:
        raise InverseDiverged(str(exc)) from exc
    if not sys.contains(w):
        raise OutOfDomain(f"stationary flow image {w} left the box")
    return w


def zero_wave_strength(src: SourceSpec, x0: float, h: float) -> float:
    """Strength of the standing wave on cell [x0, x0+h]: the omega mass there."""
    if src.is_trivial:
        return 0.0
    return src.omega_integral(x0, x0 + h)


def solve_source_riemann(sys: SystemSpec, src: SourceSpec, x0: float, h: float,
                         u_l, u_r) -> WaveFan:
    """Riemann fan with a standing source jump at x0.

    Families 1..p join u_l to u_minus with negative speeds, the zero wave
    jumps to u_plus = stationary_flow(x0, u_minus), and families p+1..n join
    u_plus to u_r with positive speeds.  Strengths solve one damped Newton
    problem in wave-strength coordinates started from zero.
    """
    u_l = sys.state(u_l)
    u_r = sys.state(u_r)
    sys.require_inside(u_l)
    sys.require_inside(u_r)
    p = sys.split_index
    left_fams = list(range(1, p + 1))
    right_fams = list(range(p + 1, sys.n + 1))

    if p == 0:
        u_minus = u_l.copy()
        u_plus = stationary_flow(sys, src, x0, h, u_minus)
        if sys.n == 1 and sys.lambda_inv is not None and sys.field_kinds[0] == GNL:
            eps = np.array([float(sys.eigenvalues(u_r)[0] - sys.eigenvalues(u_plus)[0])])
        else:
            def residual(e):
                end, _ = _chain(sys, u_plus, right_fams, e)
                return end - u_r

            eps = damped_newton(residual, np.zeros(sys.n - p), tol=FAN_TOL,
                                context="source fan (p=0)")
        _, meta_r = _chain(sys, u_plus, right_fams, eps)
        meta_l = []
    else:
        def residual(e):
            um, _ = _chain(sys, u_l, left_fams, e[:p])
            up = stationary_flow(sys, src, x0, h, um)
            end, _ = _chain(sys, up, right_fams, e[p:])
            return end - u_r

        eps = damped_newton(residual, np.zeros(sys.n), tol=FAN_TOL, context="source fan")
        u_minus, meta_l = _chain(sys, u_l, left_fams, eps[:p])
        u_plus = stationary_flow(sys, src, x0, h, u_minus)
        _, meta_r = _chain(sys, u_plus, right_fams, eps[p:])

    zw = ElementaryWave(family=ZERO_FAMILY, kind=ZERO_WAVE, left=u_minus, right=u_plus,
                        speed_lo=0.0, speed_hi=0.0,
                        strength=zero_wave_strength(src, x0, h))
    return _fan_from_meta(sys, list(meta_l) + list(meta_r), u_l, u_r,
                          u_minus=u_minus, u_plus=u_plus,
                          zero_wave=zw, zero_slot=len(meta_l))


def sample_fan(fan: WaveFan, xi: float) -> np.ndarray:
    """State of the self-similar fan at ray (x - x0)/t = xi.

    Inside a rarefaction the state solves characteristic speed == xi along
    the integral curve.  At the standing jump the right-side value is taken
    for xi == 0.
    """
    sys = fan.system
    state = fan.states[0]
    for w in fan.waves:
        if xi < w.speed_lo:
            return np.asarray(state).copy()
        if w.kind == RAREFACTION and w.speed_lo < xi < w.speed_hi:
            return wave_curve(sys, w.family, w.left, xi - w.speed_lo)
        if w.kind == ZERO_WAVE and xi < 0.0:
            return np.asarray(w.left).copy()
        state = w.right
    return np.asarray(fan.states[-1]).copy()
