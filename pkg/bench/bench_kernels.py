"""Compare the compiled and pure-numpy kernel backends.

    python bench/bench_kernels.py [--repeat 5]

Checks that both backends agree, then prints the best wall time per kernel.
"""
import argparse
import timeit

import numpy as np

from pmbo import _kernels_py
from pmbo.multiindex import total_degree_set
from pmbo.sampling import leja_chebyshev_nodes

try:
    from pmbo import _kernels as _compiled
except ImportError:
    _compiled = None


def cases():
    rng = np.random.default_rng(0)
    nodes = leja_chebyshev_nodes(127).nodes
    for m, n, npts in [(3, 6, 2000), (6, 4, 2000)]:
        E = total_degree_set(m, n).exponents
        c = rng.normal(size=E.shape[0])
        X = rng.uniform(-1, 1, (npts, m))
        X0 = rng.uniform(-1, 1, (16, m))
        tag = f"m={m} |A|={E.shape[0]}"
        yield f"newton_basis   {tag} n={npts}", lambda k, X=X, E=E: k.newton_basis(X, E, nodes)
        yield f"newton_eval_grad {tag} n={npts}", lambda k, X=X, E=E, c=c: k.newton_eval_grad(X, E, nodes, c)
        yield f"box_pgd        {tag} starts=16", lambda k, X0=X0, E=E, c=c: k.box_pgd(X0, E, nodes, c)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _compiled is None:
        print("compiled extension not built; timing the numpy backend only")
    print(f"{'kernel':<44}{'numpy [ms]':>12}{'cython [ms]':>13}{'speedup':>9}")
    for name, fn in cases():
        t_py = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat)) * 1e3
        if _compiled is None:
            print(f"{name:<44}{t_py:>12.2f}")
            continue
        a, b = fn(_kernels_py), fn(_compiled)
        if name.startswith("box_pgd"):
            # same minima; points may differ within the stopping tolerance
            ok = np.allclose(a[0], b[0], atol=1e-6) and np.allclose(a[1], b[1], rtol=1e-12, atol=1e-12)
        else:
            ok = all(np.allclose(u, v, rtol=1e-9, atol=1e-12)
                     for u, v in zip(a if isinstance(a, tuple) else (a,), b if isinstance(b, tuple) else (b,)))
        assert ok, f"backends disagree on {name}"
        t_cy = min(timeit.repeat(lambda: fn(_compiled), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<44}{t_py:>12.2f}{t_cy:>13.2f}{t_py / t_cy:>8.1f}x")


if __name__ == "__main__":
    main()
