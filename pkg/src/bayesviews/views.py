"""Market views: representation, compatibility and canonical form.

A view set is the triple ``(P, Q, Omega)``: row ``i`` of ``P`` is a view
portfolio, ``Q[i]`` its expected return and ``Omega`` the covariance of the
view errors. Rows summing to 0 are relative views ("x beats y by a"), rows
summing to 1 absolute views. The canonical form has ``P = I`` and a
diagonal ``Omega``; unmentioned assets get an infinite variance.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DependentViews,
    DimensionMismatch,
    InvalidView,
    NotSymmetric,
    SingularSystem,
)

RANK_TOL = 1e-10


class ViewInformationLoss(UserWarning):
    """Canonicalisation dropped off-diagonal view covariance."""


def numerical_rank(A, tol: float = RANK_TOL) -> int:
    """Number of singular values above ``tol * s_max``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


@dataclass(frozen=True, eq=False)
class ViewSet:
    P: np.ndarray
    Q: np.ndarray
    Omega: np.ndarray

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.P, dtype=float))
        Q = np.asarray(self.Q, dtype=float).reshape(-1)
        Omega = np.atleast_2d(np.asarray(self.Omega, dtype=float))
        k, n = P.shape
        if k < 1 or n < 1:
            raise DimensionMismatch("need at least one view and one asset")
        if Q.shape != (k,):
            raise DimensionMismatch(f"Q has {Q.shape[0]} entries for {k} views")
        if Omega.shape != (k, k):
            raise DimensionMismatch(f"Omega has shape {Omega.shape}, expected {(k, k)}")
        if not np.allclose(Omega, Omega.T, rtol=1e-10, atol=1e-14):
            raise NotSymmetric("Omega must be symmetric")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "Omega", Omega)

    @property
    def k(self) -> int:
        return self.P.shape[0]

    @property
    def n(self) -> int:
        return self.P.shape[1]

    def kinds(self, tol: float = 1e-9) -> list[str]:
        """Classify each row as ``"relative"`` or ``"absolute"``."""
        out = []
        for i, s in enumerate(self.P.sum(axis=1)):
            if abs(s) <= tol:
                out.append("relative")
            elif abs(s - 1.0) <= tol:
                out.append("absolute")
            else:
                raise InvalidView(f"view {i} loadings sum to {s:g}; expected 0 (relative) or 1 (absolute)")
        return out

    def is_one_hot(self, tol: float = 1e-12) -> bool:
        P = self.P
        ones = np.abs(P - 1.0) <= tol
        zeros = np.abs(P) <= tol
        return bool(np.all(ones | zeros) and np.all(ones.sum(axis=1) == 1))

    def to_json(self) -> str:
        return json.dumps({"P": self.P.tolist(), "Q": self.Q.tolist(), "Omega": self.Omega.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "ViewSet":
        d = json.loads(text)
        return cls(np.array(d["P"]), np.array(d["Q"]), np.array(d["Omega"]))


@dataclass(frozen=True, eq=False)
class CanonicalViews:
    """Identity-``P`` views: one expected return and one variance per asset.

    ``omega[i] = inf`` means "no view on asset i"; the matching ``Q[i]`` is
    a placeholder and never influences the posterior.
    """

    Q: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float).reshape(-1)
        omega = np.asarray(self.omega, dtype=float).reshape(-1)
        if Q.shape != omega.shape:
            raise DimensionMismatch(f"Q has {Q.size} entries but omega has {omega.size}")
        if np.any(np.isnan(omega)) or np.any(omega < 0):
            raise ValueError("omega entries must be nonnegative")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "omega", omega)

    @property
    def n(self) -> int:
        return self.Q.size

    @property
    def precision(self) -> np.ndarray:
        """``1/omega`` with zero precision for infinite entries."""
        with np.errstate(divide="ignore"):
            return np.where(np.isinf(self.omega), 0.0, 1.0 / self.omega)

    def to_viewset(self) -> ViewSet:
        """Finite-variance rows as a general :class:`ViewSet`."""
        keep = np.flatnonzero(np.isfinite(self.omega))
        P = np.eye(self.n)[keep]
        return ViewSet(P, self.Q[keep], np.diag(self.omega[keep]))

    def to_json(self) -> str:
        return json.dumps({
            "Q": self.Q.tolist(),
            "omega_diag": ["inf" if np.isinf(w) else float(w) for w in self.omega],
        })

    @classmethod
    def from_json(cls, text: str) -> "CanonicalViews":
        d = json.loads(text)
        omega = [np.inf if w == "inf" else float(w) for w in d["omega_diag"]]
        return cls(np.array(d["Q"], dtype=float), np.array(omega))

    @classmethod
    def no_views(cls, n: int) -> "CanonicalViews":
        return cls(np.zeros(n), np.full(n, np.inf))


@dataclass(frozen=True)
class CompatibilityReport:
    compatible: bool
    rank_P: int
    independent: bool
    witness: np.ndarray | None = field(default=None, compare=False)


def check_compatibility(views: ViewSet, tol: float = RANK_TOL) -> CompatibilityReport:
    """Decide whether the views can hold simultaneously.

    The views are independent when ``P`` has full row rank and compatible
    when appending ``Q`` as a column does not raise the rank. For an
    incompatible set the witness ``c`` satisfies ``c @ P ~ 0`` and
    ``c @ Q != 0``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    P, Q = views.P, views.Q
    k = views.k
    rank_P = numerical_rank(P, tol)
    rank_PQ = numerical_rank(np.column_stack([P, Q]), tol)
    independent = rank_P == k
    compatible = rank_PQ == rank_P
    witness = None
    if not compatible:
        U, s, _ = np.linalg.svd(P)
        left_null = U[:, rank_P:]
        c = left_null @ (left_null.T @ Q)
        c = c / np.max(np.abs(c))
        first = np.flatnonzero(np.abs(c) > 1e-12)[0]
        if c[first] < 0:
            c = -c
        c[np.abs(c) < 1e-12] = 0.0
        witness = c
    return CompatibilityReport(compatible, rank_P, independent, witness)


def _is_diagonal(A, tol=1e-12):
    off = A - np.diag(np.diag(A))
    scale = max(np.max(np.abs(A)), 1e-300)
    return np.max(np.abs(off)) <= tol * scale


def diagonalize_confidence(views: ViewSet, tol: float = 1e-12) -> ViewSet:
    """Rotate the views into the eigenbasis of ``Omega``.

    With ``Omega = V diag(lam) V^T`` the returned set is
    ``(V^T P, V^T Q, diag(lam))``, which leaves ``P^T Omega^-1 P`` and
    ``P^T Omega^-1 Q`` unchanged and hence the Black-Litterman posterior.
    Eigenvalues come in decreasing order and eigenvectors are sign-fixed so
    the first nonzero component is positive.
    """
    Omega = views.Omega
    if not np.allclose(Omega, Omega.T, rtol=1e-10, atol=1e-14):
        raise NotSymmetric("Omega must be symmetric")
    if _is_diagonal(Omega, tol):
        return views
    lam, V = np.linalg.eigh((Omega + Omega.T) / 2)
    lam, V = lam[::-1], V[:, ::-1].copy()
    for j in range(V.shape[1]):
        nz = np.flatnonzero(np.abs(V[:, j]) > 1e-12)
        if nz.size and V[nz[0], j] < 0:
            V[:, j] = -V[:, j]
    scale = max(np.max(np.abs(lam)), 1e-300)
    if lam.min() < -1e-10 * scale:
        raise ValueError("Omega is not positive semidefinite")
    lam = np.clip(lam, 0.0, None)
    return ViewSet(V.T @ views.P, V.T @ views.Q, np.diag(lam))


def _view_weights(P_rel, w):
    """Cap weight attached to each relative view: the weight of its long leg."""
    return np.clip(P_rel, 0.0, None) @ w


def implied_returns(views: ViewSet, w, tol: float = RANK_TOL):
    """Per-asset returns implied by an independent view set.

    Returns ``(assets, r, G)`` where ``assets`` are the indices of the assets
    the views mention, ``r`` their implied returns and ``G`` the linear map
    with ``r = G @ Q``.

    The views give ``P_M r = Q`` on the mentioned columns. When that leaves
    freedom, the level of the relative views is pinned by the capital
    weights: the cap-weighted implied return of the mentioned assets must
    equal the cap-weighted return carried by the views themselves, each
    relative view weighted by its long leg and each absolute view by its
    own loadings. Any freedom left after that is resolved by the
    minimum-norm solution.
    """
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.shape != (views.n,):
        raise DimensionMismatch(f"capital weights have {w.size} entries for {views.n} assets")
    if np.any(w < 0) or not np.isclose(w.sum(), 1.0, atol=1e-9):
        raise ValueError("capital weights must be nonnegative and sum to 1")
    report = check_compatibility(views, tol)
    if not report.independent:
        raise DependentViews(f"P has rank {report.rank_P} < {views.k} views")
    kinds = views.kinds()
    P = views.P
    assets = np.flatnonzero(np.any(np.abs(P) > 0, axis=0))
    P_M = P[:, assets]
    k, m = P_M.shape
    if k == m:
        if np.linalg.cond(P_M) > 1.0 / tol:
            raise SingularSystem("view matrix restricted to mentioned assets is singular")
        G = np.linalg.solve(P_M, np.eye(k))
        return assets, G @ views.Q, G
    # level equation: w_M . r = c . Q
    c = np.array([
        _view_weights(P[i], w) if kind == "relative" else P[i] @ w
        for i, kind in enumerate(kinds)
    ])
    A = np.vstack([P_M, w[assets]])
    B = np.vstack([np.eye(k), c])
    if numerical_rank(A, tol) == k:
        # level equation is implied by the views (or degenerate); drop it
        A, B = P_M, np.eye(k)
    G = np.linalg.pinv(A, rcond=tol) @ B
    r = G @ views.Q
    if not np.allclose(P_M @ r, views.Q, atol=1e-10, rtol=1e-10):
        raise SingularSystem("could not satisfy every view with absolute returns")
    return assets, r, G


def to_absolute(views: ViewSet, w) -> ViewSet:
    """Express independent relative/absolute views as one-hot absolute views.

    The output has one row per mentioned asset with the implied return of
    that asset; its ``Omega`` is the view covariance propagated through the
    linear solve (``G Omega G^T``). One-hot input is returned unchanged.
    """
    if views.is_one_hot():
        check = check_compatibility(views)
        if not check.independent:
            raise DependentViews(f"P has rank {check.rank_P} < {views.k} views")
        return views
    assets, r, G = implied_returns(views, w)
    P_abs = np.eye(views.n)[assets]
    Omega_abs = G @ views.Omega @ G.T
    Omega_abs = (Omega_abs + Omega_abs.T) / 2
    return ViewSet(P_abs, r, Omega_abs)


def canonicalize(views: ViewSet | CanonicalViews, w) -> CanonicalViews:
    """Reduce a view set to identity-``P`` form with per-asset variances.

    Assets without a view get ``omega = inf``. When the absolute-view
    covariance is not diagonal its off-diagonal terms cannot be expressed in
    canonical form; they are dropped and :class:`ViewInformationLoss` is
    warned.
    """
    if isinstance(views, CanonicalViews):
        return views
    # Rotating by the eigenbasis of Omega first would break the 0/1 row sums
    # to_absolute relies on, so the covariance is propagated instead and
    # reduced to its diagonal at the end.
    absolute = to_absolute(views, w)
    n = views.n
    Q = np.zeros(n)
    omega = np.full(n, np.inf)
    rows = absolute.P.argmax(axis=1)
    Q[rows] = absolute.Q
    Om = absolute.Omega
    omega[rows] = np.diag(Om)
    if not _is_diagonal(Om, 1e-10):
        warnings.warn(
            "absolute views are correlated; canonical form keeps only their variances",
            ViewInformationLoss,
            stacklevel=2,
        )
    return CanonicalViews(Q, omega)
