"""Downward-closed multi-index sets.

A multi-index set ``A`` is a finite subset of N^m. Every set handled here is
downward closed and stored in graded-lexicographic order (total degree first,
then lexicographic), which makes frontiers and tie-breaks reproducible.
"""
from __future__ import annotations

import json
import math
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "MultiIndexSet",
    "MultiIndexError",
    "canonical_key",
    "total_degree_set",
    "is_downward_closed",
    "frontier",
    "add_index",
    "graded_lex_indices",
    "DEFAULT_MAX_EXPONENT",
]

DEFAULT_MAX_EXPONENT = 127

MultiIndex = tuple


class MultiIndexError(ValueError):
    """Raised for malformed multi-indices or sets that are not downward closed."""


def canonical_key(alpha: Sequence[int]) -> tuple:
    return (sum(alpha), tuple(alpha))


def _as_index(alpha, m: int | None = None) -> tuple:
    alpha = tuple(int(a) for a in alpha)
    if m is not None and len(alpha) != m:
        raise MultiIndexError(f"multi-index {alpha} has length {len(alpha)}, expected {m}")
    if any(a < 0 for a in alpha):
        raise MultiIndexError(f"multi-index {alpha} has a negative entry")
    return alpha


class MultiIndexSet:
    """Immutable, canonically ordered set of multi-indices of one dimension.

    Construction does not enforce downward closure (so that
    :func:`is_downward_closed` can inspect arbitrary sets); the operations that
    grow a set refuse to break it.
    """

    __slots__ = ("_dim", "_indices", "_lookup", "_array")

    def __init__(self, dimension: int, indices: Iterable[Sequence[int]]):
        if dimension < 1:
            raise MultiIndexError("dimension must be >= 1")
        idx = {_as_index(a, dimension) for a in indices}
        self._dim = int(dimension)
        self._indices = tuple(sorted(idx, key=canonical_key))
        self._lookup = {a: i for i, a in enumerate(self._indices)}
        self._array = None

    @property
    def dimension(self) -> int:
        return self._dim

    @property
    def indices(self) -> tuple:
        return self._indices

    @property
    def exponents(self) -> np.ndarray:
        """``(len(self), m)`` int64 array of the indices in canonical order."""
        if self._array is None:
            arr = np.array(self._indices, dtype=np.int64).reshape(len(self._indices), self._dim)
            arr.setflags(write=False)
            self._array = arr
        return self._array

    def position(self, alpha) -> int:
        return self._lookup[tuple(alpha)]

    def __len__(self) -> int:
        return len(self._indices)

    def __iter__(self) -> Iterator[tuple]:
        return iter(self._indices)

    def __contains__(self, alpha) -> bool:
        try:
            return tuple(int(a) for a in alpha) in self._lookup
        except TypeError:
            return False

    def __getitem__(self, i):
        return self._indices[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiIndexSet):
            return NotImplemented
        return self._dim == other._dim and self._indices == other._indices

    def __hash__(self) -> int:
        return hash((self._dim, self._indices))

    def __repr__(self) -> str:
        if len(self) <= 8:
            body = ", ".join(str(a) for a in self._indices)
        else:
            body = f"{len(self)} indices"
        return f"MultiIndexSet(m={self._dim}: {body})"

    def max_exponent(self) -> int:
        return int(self.exponents.max()) if len(self) else 0

    def to_json(self) -> str:
        return json.dumps([list(a) for a in self._indices])

    @classmethod
    def from_json(cls, text: str, dimension: int | None = None) -> "MultiIndexSet":
        data = json.loads(text)
        if dimension is None:
            if not data:
                raise MultiIndexError("cannot infer the dimension of an empty set")
            dimension = len(data[0])
        return cls(dimension, data)


def _lp_norm(alpha: Sequence[int], p) -> float:
    if p == 1:
        return float(sum(alpha))
    if p == 2:
        return math.sqrt(sum(a * a for a in alpha))
    return float(max(alpha, default=0))


def _check_norm(p):
    if p in (1, 2):
        return p
    if p == math.inf or p in ("inf", "infinity"):
        return math.inf
    raise MultiIndexError(f"unsupported degree norm p={p!r}; use 1, 2 or inf")


def total_degree_set(m: int, n: int, p=1) -> MultiIndexSet:
    """All ``alpha`` in N^m with ``||alpha||_p <= n``.

    Parameters
    ----------
    m : int
        Spatial dimension, ``m >= 1``.
    n : int
        Degree bound, ``n >= 0``.
    p : {1, 2, inf}
        Norm used to measure the degree. ``p=1`` gives the total-degree set.
    """
    if m < 1:
        raise MultiIndexError("m must be >= 1")
    if n < 0:
        raise MultiIndexError("n must be >= 0")
    p = _check_norm(p)
    out = []
    prefix = []

    # partial norms only grow as coordinates are appended, so prune early
    def rec(k):
        if k == m:
            out.append(tuple(prefix))
            return
        for a in range(n + 1):
            prefix.append(a)
            if _lp_norm(prefix, p) <= n + 1e-12:
                rec(k + 1)
                prefix.pop()
            else:
                prefix.pop()
                break

    rec(0)
    return MultiIndexSet(m, out)


def _backward_neighbors(alpha):
    for i, a in enumerate(alpha):
        if a > 0:
            yield alpha[:i] + (a - 1,) + alpha[i + 1:]


def is_downward_closed(A: MultiIndexSet) -> bool:
    return all(b in A for alpha in A for b in _backward_neighbors(alpha))


def frontier(A: MultiIndexSet, max_exponent: int = DEFAULT_MAX_EXPONENT) -> tuple:
    """Indices ``beta`` outside ``A`` for which ``A | {beta}`` stays downward closed.

    Candidates with an entry above ``max_exponent`` are dropped, since no
    generating node exists for them.
    """
    if len(A) == 0:
        raise MultiIndexError("frontier of an empty set is undefined")
    if not is_downward_closed(A):
        raise MultiIndexError("frontier requires a downward-closed set")
    m = A.dimension
    cands = set()
    for alpha in A:
        for i in range(m):
            if alpha[i] + 1 > max_exponent:
                continue
            beta = alpha[:i] + (alpha[i] + 1,) + alpha[i + 1:]
            if beta not in A and all(b in A for b in _backward_neighbors(beta)):
                cands.add(beta)
    return tuple(sorted(cands, key=canonical_key))


def add_index(A: MultiIndexSet, alpha, max_exponent: int = DEFAULT_MAX_EXPONENT) -> MultiIndexSet:
    alpha = _as_index(alpha, A.dimension)
    if alpha in A:
        raise MultiIndexError(f"{alpha} is already in the set")
    if max(alpha) > max_exponent or any(b not in A for b in _backward_neighbors(alpha)):
        raise MultiIndexError(f"{alpha} is not in the frontier; adding it breaks downward closure")
    return MultiIndexSet(A.dimension, A.indices + (alpha,))


def graded_lex_indices(m: int, count: int) -> list:
    """The first ``count`` multi-indices of N^m in graded-lexicographic order."""
    degree = 0
    while True:
        A = total_degree_set(m, degree, 1)
        if len(A) >= count:
            return list(A.indices[:count])
        degree += 1
