"""Python front end for the rrlmi C++ core.

Thin wrappers only: synthesis, simulation and SDPA export all run in C++.
"""

import json

from ._rrlmi import (
    ConfigError,
    System,
    count_unstable_eigenvalues,
    example2_system,
    example4_system,
    neighbor_index,
    open_loop_A,
    polled_neighbor,
    run_cli_config,
    sdpa,
    shift_permutation,
    simulate,
    synthesize,
    system_from_json,
)

__all__ = [
    "ConfigError",
    "System",
    "count_unstable_eigenvalues",
    "example2_system",
    "example4_system",
    "gains_of",
    "neighbor_index",
    "open_loop_A",
    "parse_sdpa",
    "polled_neighbor",
    "run_cli_config",
    "sdpa",
    "shift_permutation",
    "simulate",
    "synthesize",
    "system_from_json",
]


def gains_of(result):
    """Decoded gains from a synthesize() result (list of dicts), or [] when infeasible."""
    return json.loads(result["gains_json"])["gains"] if result["gains_json"] else []


def parse_sdpa(text):
    """Read an SDPA sparse problem: min c'y s.t. sum_a y_a F_a - F0 >= 0.

    Returns (c, block_sizes, F) where F[a][b] is the dense symmetric matrix of
    variable a (a = 0 is F0) in block b.
    """
    import numpy as np

    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith(('"', "*"))]
    m = int(lines[0].split("=")[0])
    nblock = int(lines[1].split("=")[0])
    sizes = [abs(int(v)) for v in lines[2].split("=")[0].split()][:nblock]
    c = np.array([float(v) for v in lines[3].split()])
    F = [[np.zeros((s, s)) for s in sizes] for _ in range(m + 1)]
    for ln in lines[4:]:
        a, b, r, q, v = ln.split()
        a, b, r, q, v = int(a), int(b) - 1, int(r) - 1, int(q) - 1, float(v)
        F[a][b][r, q] = v
        F[a][b][q, r] = v
    return c, sizes, F
