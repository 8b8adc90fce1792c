import logging

import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from src.krylov import (
    CGBreakdown,
    as_callable,
    check_symmetric,
    estimate_condition,
    estimate_extreme_eigenvalues,
    lanczos_tridiagonal,
    pcg,
    ritz_values,
)

from src.schwarz import build_asm

from tests.conftest import assemble_system, random_free_vector


def test_diagonal_condition_estimate():
    A = sp.diags(np.arange(1.0, 101.0)).tocsr()
    b = np.ones(100)
    _, report = pcg(A, b, rtol=1e-30, maxit=30, warn=False)
    assert report.iterations == 30
    assert not report.converged
    assert 90.0 <= report.kappa_est <= 100.0
    assert 1.0 <= report.lambda_min and report.lambda_max <= 100.0 + 1e-8


def test_identity_converges_in_one_step():
    x, report = pcg(sp.identity(20, format="csr"), np.arange(20.0))
    assert report.converged
    assert report.iterations == 1
    assert report.kappa_est == pytest.approx(1.0)
    np.testing.assert_allclose(x, np.arange(20.0))


def test_exact_preconditioner_converges_in_one_step(rng):
    d = rng.uniform(1.0, 50.0, size=30)
    A = sp.diags(d).tocsr()
    M = sp.diags(1.0 / d).tocsr()
    _, report = pcg(A, rng.standard_normal(30), M=M)
    assert report.iterations == 1
    assert report.low_confidence


def test_solution_matches_direct_solve(poisson_s2_8x8):
    sysm = poisson_s2_8x8
    x, report = pcg(sysm.A, sysm.b, rtol=1e-12, maxit=500)
    ref = spla.spsolve(sysm.A.tocsc(), sysm.b)
    assert report.converged
    assert report.final_relative_residual < 1e-10
    np.testing.assert_allclose(x, ref, rtol=1e-8, atol=1e-12)
    assert report.residual_history[0] == 1.0
    assert len(report.residual_history) == report.iterations + 1


def test_condition_estimate_brackets_true_spectrum(poisson_s2_8x8, rng):
    sysm = poisson_s2_8x8
    free = sysm.free
    eig = np.linalg.eigvalsh(sysm.A.toarray()[np.ix_(free, free)])
    b = random_free_vector(rng, free)
    _, report = pcg(sysm.A, b, rtol=1e-14, maxit=1000)
    assert eig[0] - 1e-8 <= report.lambda_min
    assert report.lambda_max <= eig[-1] + 1e-8
    assert report.kappa_est == pytest.approx(eig[-1] / eig[0], rel=1e-3)
    assert estimate_condition(report).kappa == pytest.approx(report.kappa_est)


def test_zero_rhs_returns_immediately():
    x, report = pcg(sp.identity(5, format="csr"), np.zeros(5))
    assert report.converged and report.iterations == 0
    assert np.all(x == 0.0)


def test_indefinite_operator_breaks_down():
    A = sp.diags([1.0, -1.0]).tocsr()
    with pytest.raises(CGBreakdown):
        pcg(A, np.array([0.0, 1.0]))


def test_indefinite_preconditioner_breaks_down():
    A = sp.identity(3, format="csr")
    with pytest.raises(CGBreakdown):
        pcg(A, np.ones(3), M=lambda r: -r)


def test_nonsymmetric_operator_is_rejected():
    A = sp.csr_matrix(np.array([[2.0, 1.0], [0.0, 2.0]]))
    with pytest.raises(ValueError):
        pcg(A, np.ones(2))


def test_maxit_warning(caplog):
    A = sp.diags(np.arange(1.0, 51.0)).tocsr()
    with caplog.at_level(logging.WARNING, logger="src.krylov.pcg"):
        _, report = pcg(A, np.ones(50), rtol=1e-14, maxit=3)
    assert not report.converged
    assert "did not converge" in caplog.text
    caplog.clear()
    with caplog.at_level(logging.WARNING, logger="src.krylov.pcg"):
        pcg(A, np.ones(50), rtol=1e-14, maxit=3, warn=False)
    assert caplog.text == ""


def test_lanczos_matrix_from_recurrences():
    diag, off = lanczos_tridiagonal([0.5, 0.25], [0.5, 9.0])
    np.testing.assert_allclose(diag, [2.0, 4.0 + 1.0])
    np.testing.assert_allclose(off, [np.sqrt(0.5) / 0.5])
    assert ritz_values([], []).size == 0
    np.testing.assert_allclose(ritz_values([0.25], []), [4.0])


def test_full_lanczos_recovers_extreme_eigenvalues(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((12, 12)))
    eig = np.linspace(1.0, 30.0, 12)
    A = (Q * eig) @ Q.T
    A = 0.5 * (A + A.T)
    _, report = pcg(A, rng.standard_normal(12), rtol=1e-15, maxit=12, warn=False)
    assert report.lambda_min == pytest.approx(1.0, rel=1e-6)
    assert report.lambda_max == pytest.approx(30.0, rel=1e-6)


def test_extreme_eigenvalues_respects_free_mask():
    A = sp.diags(np.array([1.0, 2.0, 3.0, 1000.0])).tocsr()
    free = np.array([True, True, True, False])
    lmin, lmax = estimate_extreme_eigenvalues(A, steps=10, free=free)
    assert lmin == pytest.approx(1.0)
    assert lmax == pytest.approx(3.0)


def test_as_callable_variants():
    A = sp.identity(3, format="csr") * 2.0
    x = np.ones(3)
    np.testing.assert_allclose(as_callable(A)(x), 2.0)
    np.testing.assert_allclose(as_callable(spla.aslinearoperator(A))(x), 2.0)
    np.testing.assert_allclose(as_callable(None)(x), 1.0)
    with pytest.raises(ValueError):
        as_callable(3.0)


def test_check_symmetric_on_assembled_operator():
    sysm = assemble_system("S", 3, (3, 3))
    assert check_symmetric(lambda v: sysm.A @ v, sysm.A.shape[0]) < 1e-12


def test_energy_norm_error_decreases_monotonically(poisson_s2_8x8, rng):
    sysm = poisson_s2_8x8
    A = sysm.A
    b = random_free_vector(rng, sysm.free)
    exact = spla.spsolve(A.tocsc(), b)
    errors = []
    for steps in range(1, 16):
        x, _ = pcg(A, b, rtol=1e-30, maxit=steps, warn=False)
        e = exact - x
        errors.append(float(np.sqrt(e @ (A @ e))))
    scale = errors[0]
    assert all(later <= earlier + 1e-10 * scale for earlier, later in zip(errors, errors[1:]))


def test_condition_estimate_brackets_preconditioned_spectrum(poisson_s2_8x8, rng):
    sysm = poisson_s2_8x8
    free = sysm.free
    pc = build_asm(sysm.A, sysm.mesh, sysm.dofmap, sysm.spec, mode="two-level")
    n = sysm.A.shape[0]
    C = np.column_stack([pc.apply(col) for col in np.eye(n)])
    idx = np.ix_(free, free)
    exact = np.sort(np.linalg.eigvals(C[idx] @ sysm.A.toarray()[idx]).real)
    _, report = pcg(sysm.A, random_free_vector(rng, free), M=pc, rtol=1e-10, maxit=200)
    assert report.lambda_min >= exact[0] * (1.0 - 0.05)
    assert report.lambda_max <= exact[-1] * (1.0 + 0.05)
    assert report.kappa_est <= exact[-1] / exact[0] * 1.05


def test_true_residual_is_recomputed_at_exit(poisson_s2_8x8):
    _, report = pcg(poisson_s2_8x8.A, poisson_s2_8x8.b, rtol=1e-10)
    assert report.converged
    assert not report.residual_drift
    assert report.final_relative_residual <= 10 * 1e-10


def test_residual_drift_is_flagged(caplog):
    calls = []

    def shifted_after_first_product(v):
        # the recursion only ever sees the first product
        calls.append(1)
        return v if len(calls) == 1 else v + 1e-3

    with caplog.at_level(logging.WARNING, logger="src.krylov.pcg"):
        _, report = pcg(shifted_after_first_product, np.ones(4), check_symmetry=False)
    assert report.converged and report.iterations == 1
    assert report.residual_drift
    assert report.final_relative_residual == pytest.approx(1e-3)
    assert "drifted" in caplog.text
