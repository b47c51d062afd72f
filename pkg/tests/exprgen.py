"""Random well-conditioned expressions over x1..x3 for derivative checks.

Every function argument is wrapped so that it stays inside its domain for
points in the unit cube, and nested values stay of moderate size.
"""
import numpy as np

VARS = ["x1", "x2", "x3"]


def random_expression(rng, depth=5, variables=VARS):
    if depth == 0 or rng.random() < 0.2:
        if rng.random() < 0.7:
            return variables[rng.integers(len(variables))]
        return f"{rng.uniform(0.5, 2.0):.3f}"
    sub = lambda: random_expression(rng, depth - 1, variables)  # noqa: E731
    choice = rng.integers(13)
    if choice == 0:
        return f"sin({sub()})"
    if choice == 1:
        return f"cos({sub()})"
    if choice == 2:
        return f"tan(0.5*sin({sub()}))"
    if choice == 3:
        return f"exp(sin({sub()}))"
    if choice == 4:
        return f"log(2 + sin({sub()}))"
    if choice == 5:
        return f"sqrt(2 + cos({sub()}))"
    if choice == 6:
        return f"({sub()}) / (2 + cos({sub()}))"
    if choice == 7:
        return f"({sub()})^2"
    if choice == 8:
        return f"(2 + sin({sub()}))^1.5"
    if choice == 9:
        return f"-({sub()})"
    op = ["+", "-", "*"][choice - 10]
    return f"({sub()}) {op} ({sub()})"


def fd_jet(f, x, h=1e-3):
    """Gradient and Hessian of a scalar function by 4th-order central differences.

    The default step balances truncation (``h^4``) against round-off in the
    second difference (``eps / h^2``); much smaller steps lose digits.
    """
    n = len(x)
    w1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
    w2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
    off = np.arange(-2, 3)
    E = np.eye(n)
    g = np.array([sum(w1[a] * f(x + off[a] * h * E[i]) for a in range(5)) for i in range(n)]) / h
    H = np.empty((n, n))
    for i in range(n):
        H[i, i] = sum(w2[a] * f(x + off[a] * h * E[i]) for a in range(5)) / h**2
        for j in range(i + 1, n):
            H[i, j] = H[j, i] = sum(
                w1[a] * w1[b] * f(x + off[a] * h * E[i] + off[b] * h * E[j]) for a in range(5) for b in range(5)
            ) / h**2
    return g, H


def relative_error(a, b):
    """Componentwise ``|a - b| / max(|a|, 1)``."""
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1.0)))
