"""Numpy implementation of the Newton-basis kernels.

Used when the compiled ``_kernels`` extension is unavailable, or when
``PMBO_PURE_PYTHON=1`` is set. Signatures and semantics match the extension.
"""
import numpy as np


def _tables(X, exps, nodes, with_derivative):
    # T[i][:, j] = prod_{l<j} (x_i - g_l); dT is its derivative in x_i
    n, m = X.shape
    tabs, dtabs = [], []
    for i in range(m):
        deg = int(exps[:, i].max()) if exps.shape[0] else 0
        t = np.empty((n, deg + 1))
        t[:, 0] = 1.0
        if with_derivative:
            dt = np.empty((n, deg + 1))
            dt[:, 0] = 0.0
        for j in range(deg):
            diff = X[:, i] - nodes[j]
            t[:, j + 1] = t[:, j] * diff
            if with_derivative:
                dt[:, j + 1] = dt[:, j] * diff + t[:, j]
        tabs.append(t)
        if with_derivative:
            dtabs.append(dt)
    return tabs, dtabs


def newton_basis(X, exps, nodes):
    X = np.ascontiguousarray(X, dtype=np.float64)
    exps = np.asarray(exps, dtype=np.int64)
    nodes = np.asarray(nodes, dtype=np.float64)
    tabs, _ = _tables(X, exps, nodes, False)
    D = np.ones((X.shape[0], exps.shape[0]))
    for i, t in enumerate(tabs):
        D *= t[:, exps[:, i]]
    return D


def newton_eval(X, exps, nodes, coeffs):
    coeffs = np.asarray(coeffs, dtype=np.float64)
    return newton_basis(X, exps, nodes) @ coeffs


def newton_grad(X, exps, nodes, coeffs):
    X = np.ascontiguousarray(X, dtype=np.float64)
    exps = np.asarray(exps, dtype=np.int64)
    nodes = np.asarray(nodes, dtype=np.float64)
    coeffs = np.asarray(coeffs, dtype=np.float64)
    n, m = X.shape
    tabs, dtabs = _tables(X, exps, nodes, True)
    factors = [t[:, exps[:, i]] for i, t in enumerate(tabs)]
    G = np.empty((n, m))
    for i in range(m):
        prod = dtabs[i][:, exps[:, i]].copy()
        for l in range(m):
            if l != i:
                prod *= factors[l]
        G[:, i] = prod @ coeffs
    return G


def newton_eval_grad(X, exps, nodes, coeffs):
    return newton_eval(X, exps, nodes, coeffs), newton_grad(X, exps, nodes, coeffs)


def box_pgd(X0, exps, nodes, coeffs, max_iter=200, tol=1e-9, armijo=1e-4, min_step=1e-20):
    # all starts advance together; each one stops independently
    X = np.array(X0, dtype=np.float64, order="C", copy=True)
    val, grad = newton_eval_grad(X, exps, nodes, coeffs)
    active = np.ones(X.shape[0], dtype=bool)
    for _ in range(max_iter):
        pg = X - np.clip(X - grad, -1.0, 1.0)
        active &= np.einsum("ij,ij->i", pg, pg) > tol * tol
        if not active.any():
            break
        t = np.ones(X.shape[0])
        pending = active.copy()
        new_x = X.copy()
        while pending.any():
            idx = np.flatnonzero(pending)
            xt = np.clip(X[idx] - t[idx, None] * grad[idx], -1.0, 1.0)
            dec = np.einsum("ij,ij->i", grad[idx], xt - X[idx])
            ok = dec < 0.0
            vt = np.full(idx.shape[0], np.inf)
            if ok.any():
                vt[ok] = newton_eval(xt[ok], exps, nodes, coeffs)
            ok &= vt <= val[idx] + armijo * dec
            new_x[idx[ok]] = xt[ok]
            pending[idx[ok]] = False
            t[idx[~ok]] *= 0.5
            gave_up = idx[~ok][t[idx[~ok]] < min_step]
            pending[gave_up] = False
            active[gave_up] = False
        if not active.any():
            break
        X[active] = new_x[active]
        v, gr = newton_eval_grad(X[active], exps, nodes, coeffs)
        val[active], grad[active] = v, gr
    return X, val
