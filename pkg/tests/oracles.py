"""Independent numerical oracles shared by the test suite.

Everything here deliberately avoids the package's own differentiation and
solver paths: central finite differences, explicit series, and classic
time-stepping references.
"""

from __future__ import annotations

import numpy as np

# Central-difference stencils per derivative order: (offset, coefficient),
# to be divided by h**order.
_STENCILS = {
    0: ((0, 1.0),),
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
}

# Step sizes per total derivative order, balancing truncation against the
# roundoff amplification eps / h**order; Richardson kills the h^2 term.
FD_STEPS = {0: 1.0, 1: 1e-4, 2: 5e-4, 3: 2e-3}


def fd_partial(f, x: float, y: float, i: int, j: int, h: float | None = None) -> float:
    """Richardson-extrapolated central difference for d^{i+j} f / dx^i dy^j."""
    order = i + j
    if order == 0:
        return f(x, y)
    h = FD_STEPS[order] if h is None else h

    def stencil(hh: float) -> float:
        total = 0.0
        for ox, cx in _STENCILS[i]:
            for oy, cy in _STENCILS[j]:
                total += cx * cy * f(x + ox * hh, y + oy * hh)
        return total / hh**order

    return (4.0 * stencil(h / 2.0) - stencil(h)) / 3.0


def fd_gradient(func, theta: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite-difference gradient of a scalar function of a vector."""
    theta = np.asarray(theta, dtype=float)
    grad = np.zeros_like(theta)
    for k in range(theta.size):
        up = theta.copy()
        dn = theta.copy()
        up[k] += h
        dn[k] -= h
        grad[k] = (func(up) - func(dn)) / (2.0 * h)
    return grad


def erf_series(z: float, terms: int = 80) -> float:
    """Maclaurin series for erf, accurate to ~1e-15 for |z| <= 5."""
    if z < 0:
        return -erf_series(-z, terms)
    if z > 5.0:
        return 1.0  # erf(5) is 1 within 1.6e-12
    acc = 0.0
    term = z
    for n in range(terms):
        acc += term / (2 * n + 1)
        term *= -z * z / (n + 1)
    return 2.0 / np.sqrt(np.pi) * acc


def rk4_logistic(u0: np.ndarray, rho: float, t_end: float, steps: int = 2000) -> np.ndarray:
    """Classic RK4 for du/dt = rho u (1 - u) from u0."""
    u = np.array(u0, dtype=float)
    h = t_end / steps

    def rhs(v):
        return rho * v * (1.0 - v)

    for _ in range(steps):
        k1 = rhs(u)
        k2 = rhs(u + 0.5 * h * k1)
        k3 = rhs(u + 0.5 * h * k2)
        k4 = rhs(u + h * k3)
        u = u + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return u


def crank_nicolson_burgers(nu: float, nx: int = 1025, nt: int = 2048,
                           t_end: float = 1.0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Crank-Nicolson reference solver for u_t + u u_x = nu u_xx.

    Domain x in [-1, 1], u(x, 0) = -sin(pi x), u(+-1, t) = 0.  Diffusion is
    treated implicitly, advection with a lagged Picard linearization
    iterated to convergence each step.  Returns (x, t, u[t_index, x_index]).
    """
    from scipy.linalg import solve_banded

    x = np.linspace(-1.0, 1.0, nx)
    dx = x[1] - x[0]
    dt = t_end / nt
    t = np.linspace(0.0, t_end, nt + 1)
    u = np.zeros((nt + 1, nx))
    u[0] = -np.sin(np.pi * x)

    r = nu * dt / (2.0 * dx * dx)
    n_in = nx - 2
    for k in range(nt):
        un = u[k]
        v = un.copy()
        for _ in range(12):
            # interior tridiagonal system for the Picard iterate
            conv = dt / (8.0 * dx)  # CN average of u u_x, lagged coefficient
            lower = -r - conv * v[1:-1]
            diag = np.full(n_in, 1.0 + 2.0 * r)
            upper = -r + conv * v[1:-1]
            rhs = (
                un[1:-1]
                + r * (un[2:] - 2.0 * un[1:-1] + un[:-2])
                - conv * v[1:-1] * (un[2:] - un[:-2])
            )
            ab = np.zeros((3, n_in))
            ab[0, 1:] = upper[:-1]
            ab[1] = diag
            ab[2, :-1] = lower[1:]
            v_new = np.zeros(nx)
            v_new[1:-1] = solve_banded((1, 1), ab, rhs)
            if np.max(np.abs(v_new - v)) < 1e-12:
                v = v_new
                break
            v = v_new
        u[k + 1] = v
    return x, t, u


def monomial_product_coeffs(mi_a, mi_b, max_degree: int = 3):
    """Symbolic truncated product of two unit monomials x^i y^j."""
    i = mi_a[0] + mi_b[0]
    j = mi_a[1] + mi_b[1]
    if i + j > max_degree:
        return None
    return (i, j)
