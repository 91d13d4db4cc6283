"""Small shared numerical kernels: quadrature, damped Newton, curve integration."""

from __future__ import annotations

import numpy as np

from .errors import NewtonDiverged

# 4-point Gauss-Legendre nodes/weights on [0, 1]
_GL4_X = 0.5 + 0.5 * np.array(
    [-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526]
)
_GL4_W = 0.5 * np.array(
    [0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538]
)


def gauss4(fn, a: float, b: float, breakpoints=()):
    """Integrate fn over [a, b] with 4-point Gauss-Legendre per smooth piece.

    breakpoints lists abscissae where fn may kink or jump; the interval is
    split there so the rule stays exact for piecewise polynomials up to
    degree 7.  fn may return scalars or vectors.
    """
    if b < a:
        return -gauss4(fn, b, a, breakpoints)
    cuts = [a]
    for c in sorted(breakpoints):
        if a < c < b:
            cuts.append(c)
    cuts.append(b)
    total = None
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        width = hi - lo
        if width <= 0.0:
            continue
        for x, w in zip(_GL4_X, _GL4_W):
            val = np.asarray(fn(lo + width * x), dtype=float) * (w * width)
            total = val if total is None else total + val
    if total is None:
        probe = np.asarray(fn(a), dtype=float)
        return np.zeros_like(probe)
    return total


def fd_jacobian(fn, x: np.ndarray, f0=None, step: float = 1e-7) -> np.ndarray:
    """Forward-difference Jacobian of fn at x."""
    x = np.asarray(x, dtype=float)
    if f0 is None:
        f0 = np.asarray(fn(x), dtype=float)
    m = f0.size
    jac = np.empty((m, x.size))
    for k in range(x.size):
        dx = step * max(1.0, abs(x[k]))
        xp = x.copy()
        xp[k] += dx
        jac[:, k] = (np.asarray(fn(xp), dtype=float) - f0) / dx
    return jac


def damped_newton(fn, x0, tol: float, max_iter: int = 50, jac=None, context: str = ""):
    """Damped Newton iteration with backtracking line search.

    Residual is measured in the max norm.  Raises NewtonDiverged after
    max_iter iterations or when backtracking bottoms out.
    """
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    f = np.atleast_1d(np.asarray(fn(x), dtype=float))
    norm = float(np.max(np.abs(f)))
    for _ in range(max_iter):
        if norm <= tol:
            return x
        jmat = np.atleast_2d(jac(x) if jac is not None else fd_jacobian(fn, x, f0=f))
        try:
            step = np.linalg.solve(jmat, -f)
        except np.linalg.LinAlgError as exc:
            raise NewtonDiverged(f"singular Jacobian {context}".strip()) from exc
        alpha = 1.0
        while True:
            x_new = x + alpha * step
            f_new = np.atleast_1d(np.asarray(fn(x_new), dtype=float))
            norm_new = float(np.max(np.abs(f_new)))
            if norm_new < norm or norm_new <= tol:
                x, f, norm = x_new, f_new, norm_new
                break
            alpha *= 0.5
            if alpha < 2.0 ** -24:
                raise NewtonDiverged(f"line search stalled at residual {norm:.3e} {context}".strip())
    if norm <= tol:
        return x
    raise NewtonDiverged(f"no convergence after {max_iter} iterations, residual {norm:.3e} {context}".strip())


def rk4_path(rhs, u0: np.ndarray, length: float, max_step: float, on_point=None) -> np.ndarray:
    """Integrate du/ds = rhs(u) from s=0 to s=length with classic RK4.

    length may be negative.  Step size is at most max_step in magnitude.
    on_point, when given, is called with every accepted state (domain checks).
    """
    u = np.asarray(u0, dtype=float).copy()
    if length == 0.0:
        return u
    n_steps = max(1, int(np.ceil(abs(length) / max_step)))
    ds = length / n_steps
    for _ in range(n_steps):
        k1 = rhs(u)
        k2 = rhs(u + 0.5 * ds * k1)
        k3 = rhs(u + 0.5 * ds * k2)
        k4 = rhs(u + ds * k3)
        u = u + (ds / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if on_point is not None:
            on_point(u)
    return u
