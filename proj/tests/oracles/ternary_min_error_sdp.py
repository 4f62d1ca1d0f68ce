#!/usr/bin/env python3
"""Independent SDP reference for ternary coherent-state discrimination.

Solves   max (1/3) sum_j Tr(rho_j P_j)   over POVMs {P_j >= 0, sum P_j = I}
for the coherent amplitudes {0, +0.8, -0.8} on Fock levels 0..12, using a
generic interior-point SDP solver. The optimal value printed here is frozen
into tests/test_bayes.cpp; this script is kept so the number can be re-derived
without the C++ code.
"""
import math
import numpy as np
import cvxpy as cp

N_MAX = 12
ALPHAS = [0.0, 0.8, -0.8]


def coherent(alpha: float, n_max: int) -> np.ndarray:
    c = np.zeros(n_max + 1, dtype=complex)
    c[0] = math.exp(-abs(alpha) ** 2 / 2.0)
    for n in range(n_max):
        c[n + 1] = c[n] * alpha / math.sqrt(n + 1)
    return c


def main() -> None:
    dim = N_MAX + 1
    rhos = []
    for a in ALPHAS:
        v = coherent(a, N_MAX)
        rhos.append(np.outer(v, v.conj()))

    povm = [cp.Variable((dim, dim), hermitian=True) for _ in ALPHAS]
    constraints = [p >> 0 for p in povm]
    constraints.append(sum(povm) == np.eye(dim))
    succ = sum(cp.real(cp.trace(r @ p)) for r, p in zip(rhos, povm)) / 3.0
    prob = cp.Problem(cp.Maximize(succ), constraints)

    solved = False
    for solver, kwargs in (
        ("CLARABEL", {}),
        ("SCS", {"eps": 1e-12, "max_iters": 200000}),
    ):
        try:
            prob.solve(solver=solver, **kwargs)
            solved = True
            break
        except Exception as exc:  # solver not installed
            print(f"# {solver} unavailable: {exc}")
    if not solved:
        raise SystemExit("no SDP solver available")

    p_succ = prob.value
    print(f"solver             : {prob.solver_stats.solver_name}")
    print(f"optimal success    : {p_succ:.12f}")
    print(f"optimal risk (-P)  : {-p_succ:.12f}")
    print(f"error probability  : {1.0 - p_succ:.12f}")


if __name__ == "__main__":
    main()
