"""Hyperbolic systems of balance laws: flux, eigenstructure, source, validation.

A system is strictly hyperbolic on an axis-aligned box of states, with each
characteristic family either genuinely nonlinear (GNL) or linearly degenerate
(LD), and non-resonant: families 1..p have speeds <= -c and families p+1..n
have speeds >= c for a positive gap c.  The source g(x, u) is dominated in
value and u-gradient by an integrable weight omega(x).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ClassificationError, NonHyperbolic, OutOfDomain
from .numerics import gauss4

GNL = "gnl"
LD = "ld"

_GRAD_STEP = 1e-6  # directional-derivative step for eigenvalue gradients


@dataclass(frozen=True)
class SystemSpec:
    """A strictly hyperbolic flux on a box of admissible states.

    split_index is the number of negative-speed families; speed_gap is the
    non-resonance constant c.  kappa optionally records a convexity lower
    bound f'' >= kappa for scalar fluxes.  lambda_inv, when given for a
    scalar system, inverts u -> f'(u) and enables closed-form wave curves.
    """

    name: str
    n: int
    split_index: int
    flux: Callable[[np.ndarray], np.ndarray]
    field_kinds: tuple
    dom_lo: np.ndarray
    dom_hi: np.ndarray
    speed_gap: float
    jac: Optional[Callable[[np.ndarray], np.ndarray]] = None
    kappa: Optional[float] = None
    lambda_inv: Optional[Callable[[float], np.ndarray]] = None
    jac_step: float = 1e-7
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "dom_lo", np.asarray(self.dom_lo, dtype=float))
        object.__setattr__(self, "dom_hi", np.asarray(self.dom_hi, dtype=float))
        if not 0 <= self.split_index <= self.n:
            raise ValueError("split index must lie in [0, n]")
        if len(self.field_kinds) != self.n:
            raise ValueError("need one field kind per family")

    def state(self, u) -> np.ndarray:
        return np.atleast_1d(np.asarray(u, dtype=float))

    def contains(self, u, tol: float = 1e-9) -> bool:
        u = self.state(u)
        return bool(np.all(u >= self.dom_lo - tol) and np.all(u <= self.dom_hi + tol))

    def require_inside(self, u, what: str = "state"):
        if not self.contains(u):
            raise OutOfDomain(f"{what} {np.asarray(u)} outside box [{self.dom_lo}, {self.dom_hi}]")

    def jacobian_at(self, u) -> np.ndarray:
        u = self.state(u)
        if self.jac is not None:
            return np.atleast_2d(np.asarray(self.jac(u), dtype=float))
        f0 = np.atleast_1d(np.asarray(self.flux(u), dtype=float))
        jac = np.empty((self.n, self.n))
        for k in range(self.n):
            up = u.copy()
            up[k] += self.jac_step
            jac[:, k] = (np.atleast_1d(np.asarray(self.flux(up), dtype=float)) - f0) / self.jac_step
        return jac

    def eigenvalues(self, u) -> np.ndarray:
        return _sorted_eigvals(self.jacobian_at(u))

    def char_speed(self, family: int, u) -> float:
        return float(self.eigenvalues(u)[family - 1])

    def domain_samples(self, min_total: int = 1000) -> np.ndarray:
        """Deterministic dyadic tensor grid with at least min_total points."""
        k = 0
        while (1 + 2 ** k) ** self.n < min_total:
            k += 1
        axis_counts = 1 + 2 ** k
        axes = [np.linspace(self.dom_lo[i], self.dom_hi[i], axis_counts) for i in range(self.n)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass(frozen=True)
class SourceSpec:
    """Source g(x, u) with a dominating weight omega(x).

    omega carries declared L1 mass and sup bound; support is the closed
    interval outside which g vanishes (None for the trivial source).
    x_breaks lists abscissae where g or omega may kink, used to keep the
    quadrature exact; lip_g is the Lipschitz constant of g in u, consumed
    only by the scalar decay oracle.
    """

    name: str
    g: Optional[Callable[[float, np.ndarray], np.ndarray]]
    omega: Callable[[float], float]
    omega_l1: float
    omega_linf: float
    lip_g: float = 0.0
    support: Optional[tuple] = None
    x_breaks: tuple = ()
    g_cells: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    params: dict = field(default_factory=dict)

    @property
    def is_trivial(self) -> bool:
        return self.g is None

    def value(self, x: float, u: np.ndarray) -> np.ndarray:
        if self.g is None:
            return np.zeros_like(np.atleast_1d(np.asarray(u, dtype=float)))
        return np.atleast_1d(np.asarray(self.g(x, u), dtype=float))

    def integral(self, x0: float, h: float, u: np.ndarray) -> np.ndarray:
        """Integral of s -> g(x0 + s, u) over [0, h] with u frozen."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if self.g is None:
            return np.zeros_like(u)
        breaks = [b - x0 for b in self.x_breaks]
        return gauss4(lambda s: self.value(x0 + s, u), 0.0, h, breaks)

    def omega_integral(self, a: float, b: float) -> float:
        vals = gauss4(lambda x: self.omega(x), a, b, self.x_breaks)
        return float(vals)


# ---------------------------------------------------------------------------
# eigene decomposition


def _sorted_eigvals(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    if n == 1:
        return np.array([a[0, 0]])
    if n == 2:
        tr = a[0, 0] + a[1, 1]
        det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        disc = tr * tr - 4.0 * det
        if disc < 0.0:
            raise NonHyperbolic(f"complex speeds, discriminant {disc:.3e}")
        root = np.sqrt(disc)
        return np.array([0.5 * (tr - root), 0.5 * (tr + root)])
    vals = np.linalg.eigvals(a)
    scale = 1.0 + float(np.max(np.abs(vals.real)))
    if np.max(np.abs(vals.imag)) > 1e-12 * scale:
        raise NonHyperbolic("complex characteristic speeds")
    return np.sort(vals.real)


def _raw_right_vectors(a: np.ndarray, lam: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    if n == 1:
        return np.array([[1.0]])
    if n == 2:
        cols = []
        for l in lam:
            # null vector of (a - l I), taking the better-conditioned row
            r1 = np.array([a[0, 1], l - a[0, 0]])
            r2 = np.array([l - a[1, 1], a[1, 0]])
            cols.append(r1 if np.linalg.norm(r1) >= np.linalg.norm(r2) else r2)
        return np.stack(cols, axis=1)
    vals, vecs = np.linalg.eig(a)
    order = np.argsort(vals.real)
    return vecs[:, order].real


def eigen_decompose(sys: SystemSpec, u):
    """Eigenvalues and normalized right/left eigenvectors of the flux Jacobian.

    Columns of R are sorted by ascending eigenvalue.  GNL families are scaled
    so the directional derivative of the eigenvalue along r equals one; LD
    families get unit vectors with a deterministic sign.  Rows of L satisfy
    l_i . r_j = delta_ij.

    Raises NonHyperbolic for complex or coincident speeds, OutOfDomain for
    states outside the box.
    """
    u = sys.state(u)
    sys.require_inside(u)
    a = sys.jacobian_at(u)
    lam = _sorted_eigvals(a)
    if sys.n > 1 and float(np.min(np.diff(lam))) <= 1e-12:
        raise NonHyperbolic(f"coincident speeds {lam}")
    raw = _raw_right_vectors(a, lam)
    right = np.empty_like(raw)
    for i in range(sys.n):
        r_hat = raw[:, i] / np.linalg.norm(raw[:, i])
        if sys.field_kinds[i] == GNL:
            d = _eig_directional_derivative(sys, u, i, r_hat)
            if abs(d) < 1e-8:
                raise ClassificationError(
                    f"family {i + 1} declared GNL but eigenvalue gradient vanishes at {u}"
                )
            right[:, i] = r_hat / d
        else:
            k = int(np.argmax(np.abs(r_hat)))
            right[:, i] = r_hat * np.sign(r_hat[k])
    left = np.linalg.inv(right)
    return lam, right, left


def _eig_directional_derivative(sys: SystemSpec, u: np.ndarray, i: int, direction: np.ndarray) -> float:
    lp = _sorted_eigvals(sys.jacobian_at(u + _GRAD_STEP * direction))[i]
    lm = _sorted_eigvals(sys.jacobian_at(u - _GRAD_STEP * direction))[i]
    return float(lp - lm) / (2.0 * _GRAD_STEP)


def right_vector(sys: SystemSpec, family: int, u) -> np.ndarray:
    _, right, _ = eigen_decompose(sys, u)
    return right[:, family - 1]


# ---------------------------------------------------------------------------
# assumption validation


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    margin: float
    worst_point: tuple
    detail: str = ""

    def __str__(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: margin {self.margin:+.6g} at {self.worst_point} {self.detail}".rstrip()


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __str__(self):
        return "\n".join(str(c) for c in self.checks)


def validate_assumptions(sys: SystemSpec, src: SourceSpec, samples: int = 1000) -> ValidationReport:
    """Check hyperbolicity, non-resonance, field classes and source domination.

    Failures are reported with their worst margin over a deterministic box
    sample, never raised.
    """
    pts = sys.domain_samples(samples)
    checks = []

    gap_margin, gap_at = np.inf, ()
    res_margin, res_at = np.inf, ()
    gnl_lo = {i: np.inf for i in range(sys.n) if sys.field_kinds[i] == GNL}
    gnl_hi = {i: -np.inf for i in gnl_lo}
    gnl_at = {i: () for i in gnl_lo}
    ld_max = {i: 0.0 for i in range(sys.n) if sys.field_kinds[i] == LD}
    ld_at = {i: () for i in ld_max}
    hyperbolic_ok = True
    hyperbolic_msg = ""

    for u in pts:
        try:
            lam = _sorted_eigvals(sys.jacobian_at(u))
        except NonHyperbolic as exc:
            hyperbolic_ok = False
            hyperbolic_msg = str(exc)
            gap_margin, gap_at = -np.inf, tuple(u)
            break
        if sys.n > 1:
            g = float(np.min(np.diff(lam)))
            if g < gap_margin:
                gap_margin, gap_at = g, tuple(u)
        else:
            gap_margin, gap_at = np.inf, tuple(u)
        for i in range(sys.n):
            m = (-sys.speed_gap - lam[i]) if i < sys.split_index else (lam[i] - sys.speed_gap)
            if m < res_margin:
                res_margin, res_at = float(m), tuple(u)
        raw = _raw_right_vectors(sys.jacobian_at(u), lam)
        for i in range(sys.n):
            r_hat = raw[:, i] / np.linalg.norm(raw[:, i])
            d = _eig_directional_derivative(sys, u, i, r_hat)
            if sys.field_kinds[i] == GNL:
                a = abs(d)
                if a < gnl_lo[i]:
                    gnl_lo[i], gnl_at[i] = a, tuple(u)
                gnl_hi[i] = max(gnl_hi[i], a)
            else:
                if abs(d) > ld_max[i]:
                    ld_max[i], ld_at[i] = abs(d), tuple(u)

    if sys.n > 1:
        checks.append(CheckResult("hyperbolicity", hyperbolic_ok and gap_margin > 0.0,
                                  float(gap_margin), gap_at, hyperbolic_msg))
    else:
        checks.append(CheckResult("hyperbolicity", hyperbolic_ok, np.inf, (), "scalar"))
    checks.append(CheckResult("non_resonance", bool(res_margin >= 0.0), float(res_margin), res_at))

    for i in sorted(gnl_lo):
        checks.append(CheckResult(f"gnl_family_{i + 1}", gnl_lo[i] > 0.0, float(gnl_lo[i]), gnl_at[i],
                                  f"|grad lambda . r| in [{gnl_lo[i]:.3g}, {gnl_hi[i]:.3g}]"))
    for i in sorted(ld_max):
        checks.append(CheckResult(f"ld_family_{i + 1}", ld_max[i] <= 1e-10,
                                  float(1e-10 - ld_max[i]), ld_at[i]))

    checks.extend(_source_checks(sys, src, pts, samples))
    return ValidationReport(tuple(checks))


def _source_checks(sys: SystemSpec, src: SourceSpec, pts: np.ndarray, samples: int):
    if src.is_trivial:
        return [CheckResult("source_domination", True, 0.0, (), "trivial source"),
                CheckResult("omega_mass", True, 0.0, (), "trivial source")]
    lo, hi = src.support if src.support is not None else (-1.0, 1.0)
    k = 0
    while 1 + 2 ** k < samples:
        k += 1
    xs = np.linspace(lo, hi, 1 + 2 ** k)
    # subsample states so the product grid stays around the sample budget
    stride = max(1, pts.shape[0] * xs.size // max(samples * 32, 1))
    upts = pts[::stride]

    dom_margin, dom_at = np.inf, ()
    for x in xs:
        w = float(src.omega(x))
        for u in upts:
            gv = src.value(x, u)
            m = w - float(np.linalg.norm(gv))
            if m < dom_margin:
                dom_margin, dom_at = m, (float(x), tuple(u))
            grad = _source_u_gradient(src, x, u)
            m = w - float(np.linalg.norm(grad))
            if m < dom_margin:
                dom_margin, dom_at = m, (float(x), tuple(u))

    quad_mass = src.omega_integral(lo, hi)
    rel = abs(quad_mass - src.omega_l1) / max(abs(src.omega_l1), 1e-300)
    return [
        CheckResult("source_domination", bool(dom_margin >= 0.0), float(dom_margin), dom_at),
        CheckResult("omega_mass", bool(rel <= 1e-6), float(1e-6 - rel), (),
                    f"declared {src.omega_l1:.9g}, quadrature {quad_mass:.9g}"),
    ]


def _source_u_gradient(src: SourceSpec, x: float, u: np.ndarray, step: float = 1e-7) -> np.ndarray:
    g0 = src.value(x, u)
    n = u.size
    grad = np.empty((n, n))
    for kk in range(n):
        up = u.copy()
        up[kk] += step
        grad[:, kk] = (src.value(x, up) - g0) / step
    return grad


# ---------------------------------------------------------------------------
# built-in systems and sources


def burgers(lo: float = 0.5, hi: float = 1.5, speed_gap: float = 0.5) -> SystemSpec:
    """Convex scalar flux u^2/2 on a positive-speed box; all families move right."""
    return SystemSpec(
        name="burgers",
        n=1,
        split_index=0,
        flux=lambda u: 0.5 * u * u,
        jac=lambda u: np.array([[u[0]]]),
        field_kinds=(GNL,),
        dom_lo=np.array([lo]),
        dom_hi=np.array([hi]),
        speed_gap=speed_gap,
        kappa=1.0,
        lambda_inv=lambda s: np.array([s]),
        params={"lo": lo, "hi": hi, "speed_gap": speed_gap},
    )


def coupled2x2(half_width: float = 0.15, speed_gap: float = 1.5) -> SystemSpec:
    """Quadratically coupled 2x2 system with one left- and one right-moving family.

    Speeds sit near -2 and +2 on the box, and the quadratic self-terms make
    both families genuinely nonlinear with eigenvalue derivative near one.
    """

    def flux(u):
        return np.array([
            2.0 * u[0] + 0.5 * u[0] * u[0] + 0.1 * u[1] * u[1],
            -2.0 * u[1] + 0.5 * u[1] * u[1] + 0.1 * u[0] * u[0],
        ])

    def jac(u):
        return np.array([
            [2.0 + u[0], 0.2 * u[1]],
            [0.2 * u[0], -2.0 + u[1]],
        ])

    return SystemSpec(
        name="coupled2x2",
        n=2,
        split_index=1,
        flux=flux,
        jac=jac,
        field_kinds=(GNL, GNL),
        dom_lo=np.array([-half_width, -half_width]),
        dom_hi=np.array([half_width, half_width]),
        speed_gap=speed_gap,
        params={"half_width": half_width, "speed_gap": speed_gap},
    )


def scalar_from_poly(coeffs: Sequence[float], lo: float, hi: float, speed_gap: float,
                     kappa: Optional[float] = None, name: str = "scalar_poly") -> SystemSpec:
    """Scalar system with polynomial flux (numpy highest-degree-first coefficients)."""
    coeffs = tuple(float(c) for c in coeffs)
    dcoeffs = np.polyder(np.asarray(coeffs))
    mid_speed = float(np.polyval(dcoeffs, 0.5 * (lo + hi)))
    split = 1 if mid_speed < 0 else 0

    def lam_inv(s):
        from .numerics import damped_newton

        def res(u):
            return np.array([np.polyval(dcoeffs, u[0]) - s])

        return damped_newton(res, np.array([0.5 * (lo + hi)]), tol=1e-13, context="lambda_inv")

    return SystemSpec(
        name=name,
        n=1,
        split_index=split,
        flux=lambda u: np.polyval(np.asarray(coeffs), u),
        jac=lambda u: np.array([[np.polyval(dcoeffs, u[0])]]),
        field_kinds=(GNL,),
        dom_lo=np.array([lo]),
        dom_hi=np.array([hi]),
        speed_gap=speed_gap,
        kappa=kappa,
        lambda_inv=lam_inv,
        params={"coeffs": coeffs, "lo": lo, "hi": hi, "speed_gap": speed_gap, "kappa": kappa},
    )


def linear_system(a_matrix, lo, hi, speed_gap: float, name: str = "linear") -> SystemSpec:
    """Constant-coefficient system; every family is linearly degenerate."""
    a = np.asarray(a_matrix, dtype=float)
    n = a.shape[0]
    lam = _sorted_eigvals(a)
    split = int(np.sum(lam < 0.0))
    return SystemSpec(
        name=name,
        n=n,
        split_index=split,
        flux=lambda u: a @ u,
        jac=lambda u: a,
        field_kinds=(LD,) * n,
        dom_lo=np.asarray(lo, dtype=float),
        dom_hi=np.asarray(hi, dtype=float),
        speed_gap=speed_gap,
        params={"matrix": a.tolist()},
    )


def no_source(n: int = 1) -> SourceSpec:
    return SourceSpec(name="none", g=None, omega=lambda x: 0.0, omega_l1=0.0,
                      omega_linf=0.0, lip_g=0.0, support=None, params={"n": n})


def constant_source(vec, x_lo: float, x_hi: float) -> SourceSpec:
    """g(x, u) = vec on the closed interval [x_lo, x_hi], zero elsewhere."""
    v = np.atleast_1d(np.asarray(vec, dtype=float))
    mag = float(np.linalg.norm(v))

    def g(x, u):
        return v if x_lo <= x <= x_hi else np.zeros_like(v)

    def omega(x):
        return mag if x_lo <= x <= x_hi else 0.0

    def g_cells(xs, us):
        mask = (xs >= x_lo) & (xs <= x_hi)
        return mask[:, None] * v[None, :]

    return SourceSpec(name="constant", g=g, omega=omega, omega_l1=mag * (x_hi - x_lo),
                      omega_linf=mag, lip_g=0.0, support=(x_lo, x_hi),
                      x_breaks=(x_lo, x_hi), g_cells=g_cells,
                      params={"vec": v.tolist(), "x_lo": x_lo, "x_hi": x_hi})


def linear_u_source(coeff: float, x_lo: float, x_hi: float, sys: SystemSpec) -> SourceSpec:
    """g(x, u) = coeff * u on [x_lo, x_hi]; omega dominates both g and its gradient."""
    sup_state = float(np.max(np.linalg.norm(
        np.stack(np.meshgrid(*[[sys.dom_lo[i], sys.dom_hi[i]] for i in range(sys.n)],
                             indexing="ij"), axis=-1).reshape(-1, sys.n), axis=1)))
    w = abs(coeff) * max(sup_state, np.sqrt(sys.n))

    def g(x, u):
        return coeff * np.atleast_1d(np.asarray(u, dtype=float)) if x_lo <= x <= x_hi \
            else np.zeros(sys.n)

    def omega(x):
        return w if x_lo <= x <= x_hi else 0.0

    def g_cells(xs, us):
        mask = (xs >= x_lo) & (xs <= x_hi)
        return coeff * us * mask[:, None]

    return SourceSpec(name="linear_u", g=g, omega=omega, omega_l1=w * (x_hi - x_lo),
                      omega_linf=w, lip_g=abs(coeff), support=(x_lo, x_hi),
                      x_breaks=(x_lo, x_hi), g_cells=g_cells,
                      params={"coeff": coeff, "x_lo": x_lo, "x_hi": x_hi})


BUILTIN_SYSTEMS = {"burgers": burgers, "coupled2x2": coupled2x2}
