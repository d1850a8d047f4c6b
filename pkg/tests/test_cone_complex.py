# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.

import itertools
from typing import Optional, Tuple

import numpy as np
import pytest
from scipy.optimize import linprog

from gkw_solver.cone import ActiveSet, WeightSystem, cone_membership
from gkw_solver.schemas.reports import Verdict


def _linprog_margin(U: np.ndarray, W: np.ndarray) -> Optional[float]:
    """max t s.t. U^T c = W, c_j >= t, t <= 1; None when infeasible."""
    d = U.shape[0]
    cost = np.zeros(d + 1)
    cost[-1] = -1.0
    A_eq = np.hstack([U.T, np.zeros((U.shape[1], 1))])
    A_ub = np.hstack([-np.eye(d), np.ones((d, 1))])
    bounds = [(None, None)] * d + [(None, 1.0)]
    result = linprog(cost, A_ub=A_ub, b_ub=np.zeros(d), A_eq=A_eq, b_eq=W, bounds=bounds, method="highs")
    if result.status == 2:
        return None
    assert result.status == 0
    return float(-result.fun)


def test_matches_linprog_on_random_systems() -> None:
    """
    Verdicts agree with an independent LP solver whenever the margin is not borderline.
    """
    rng = np.random.default_rng(2026)
    checked = 0
    for _ in range(200):
        n = int(rng.integers(1, 4))
        d = int(rng.integers(1, 6))
        U = rng.integers(-3, 4, size=(d, n)).astype(float)
        W = rng.normal(size=n)
        norm = float(np.max(np.abs(W)))
        scale = max(1.0, norm)
        reference = _linprog_margin(U, W / scale)
        cert = cone_membership(W, WeightSystem(U), ActiveSet.all(d))
        if reference is None:
            assert cert.verdict is Verdict.OUTSIDE
            assert cert.margin is None
        elif reference > 1e-6:
            assert cert.verdict is Verdict.INSIDE
            assert cert.margin == pytest.approx(reference * scale, rel=1e-7, abs=1e-9)
            witness = np.array(cert.witness_c)
            assert np.max(np.abs(witness @ U - W)) < 1e-9 * (1 + norm)
            assert witness.min() > cert.tau_cone
        elif reference < -1e-6:
            assert cert.verdict is Verdict.OUTSIDE
        else:
            continue
        checked += 1
    assert checked > 150


def test_separators_verify_on_random_outside_systems() -> None:
    """Test that every returned separator verifies."""
    rng = np.random.default_rng(5)
    for _ in range(100):
        U = rng.integers(-2, 3, size=(3, 2)).astype(float)
        W = rng.normal(size=2)
        cert = cone_membership(W, WeightSystem(U), ActiveSet.all(3))
        if cert.verdict is Verdict.INSIDE:
            continue
        lam = np.array(cert.separator_lambda)
        pairings = U @ lam
        assert pairings.max() <= cert.tau_cone
        assert lam @ W >= -cert.tau_cone
        assert max(lam @ W, -pairings.min()) > cert.tau_cone


def test_lattice_scan_confirms_boundary_rejection() -> None:
    """
    No strictly positive lattice combination of (1,0) and (0,1) reaches (1,0).
    """
    W = np.array([1.0, 0.0])
    steps = np.linspace(0.01, 2.0, 200)
    hits = [
        (c1, c2) for c1, c2 in itertools.product(steps, steps) if abs(c1 - W[0]) < 1e-12 and abs(c2 - W[1]) < 1e-12
    ]
    assert hits == []
    cert = cone_membership(W, WeightSystem(np.eye(2)), ActiveSet.all(2))
    assert cert.verdict is Verdict.OUTSIDE


def test_lattice_scan_agrees_on_small_systems() -> None:
    """
    Brute-force search over positive combinations on a lattice finds a representation
    exactly when the certificate says Inside.
    """
    U = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]])
    steps = np.arange(1, 9, dtype=float)
    reachable = {tuple(np.array(c) @ U) for c in itertools.product(steps, repeat=3)}
    for W in [(0.0, 0.0), (2.0, -1.0), (3.0, 5.0), (-4.0, 1.0)]:
        cert = cone_membership(np.array(W), WeightSystem(U), ActiveSet.all(3))
        assert cert.verdict is Verdict.INSIDE
        assert W in reachable

    V = np.array([[1.0, 0.0], [1.0, 1.0]])
    reachable = {tuple(np.array(c) @ V) for c in itertools.product(steps, repeat=2)}
    for W in [(-1.0, 1.0), (1.0, 2.0), (0.0, 3.0)]:
        cert = cone_membership(np.array(W), WeightSystem(V), ActiveSet.all(2))
        assert cert.verdict is Verdict.OUTSIDE
        assert W not in reachable


def test_duplicate_weights() -> None:
    """Test that repeated weights are allowed."""
    ws = WeightSystem(np.array([[1.0], [1.0], [2.0]]))
    cert = cone_membership(np.array([3.0]), ws, ActiveSet.all(3))
    assert cert.verdict is Verdict.INSIDE
    assert float(np.array(cert.witness_c) @ ws.u[:, 0]) == pytest.approx(3.0)


def test_inactive_weights_are_ignored() -> None:
    """Test that only active weights enter the cone."""
    ws = WeightSystem(np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]]))
    only_positive = ActiveSet((0, 1), (1.0, 1.0))
    cert = cone_membership(np.array([-1.0, 1.0]), ws, only_positive)
    assert cert.verdict is Verdict.OUTSIDE
    assert cert.active == [0, 1]
    full = cone_membership(np.array([-1.0, 1.0]), ws, ActiveSet.all(3))
    assert full.verdict is Verdict.INSIDE


def _lattice_separators(U: np.ndarray, W: np.ndarray, box: int = 6) -> Tuple[bool, bool]:
    """
    Integer search for λ with <λ, u_j> <= 0 for all j. Returns whether one has <λ, W> > 0 and
    whether one has <λ, W> = 0 with some <λ, u_j> < 0. W is a strictly positive combination
    exactly when neither exists.
    """
    n = U.shape[1]
    grid = np.array(list(itertools.product(range(-box, box + 1), repeat=n)), dtype=np.int64)
    pairings = grid @ U.astype(np.int64).T
    on_target = grid @ W.astype(np.int64)
    feasible = np.all(pairings <= 0, axis=1)
    strict = on_target > 0
    boundary = (on_target == 0) & np.any(pairings < 0, axis=1)
    return bool(np.any(feasible & strict)), bool(np.any(feasible & boundary))


def test_lattice_oracle_agrees_on_random_integer_systems() -> None:
    """Test cone verdicts against an exhaustive integer separator search on 500 samples."""
    rng = np.random.default_rng(77)
    inside = 0
    for _ in range(500):
        n = int(rng.integers(1, 4))
        d = int(rng.integers(1, 5))
        U = rng.integers(-1, 2, size=(d, n)).astype(float)
        W = rng.integers(-3, 4, size=n).astype(float)
        strict, boundary = _lattice_separators(U, W)
        if boundary and not strict:
            continue
        cert = cone_membership(W, WeightSystem(U), ActiveSet.all(d))
        expected = Verdict.OUTSIDE if strict or boundary else Verdict.INSIDE
        assert cert.verdict is expected, (U.tolist(), W.tolist())
        if cert.verdict is Verdict.INSIDE:
            inside += 1
            witness = np.array(cert.witness_c)
            assert np.max(np.abs(witness @ U - W)) < 1e-9 * (1 + np.max(np.abs(W)))
            assert witness.min() > cert.tau_cone
            assert cert.margin is not None and cert.margin > 10 * cert.tau_cone
        else:
            lam = np.array(cert.separator_lambda)
            pairings = U @ lam
            assert pairings.max() <= cert.tau_cone
            assert lam @ W >= -cert.tau_cone
    assert inside > 25
