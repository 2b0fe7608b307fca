from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from flux_catastrophe.asymptotics import trigamma
from flux_catastrophe.errors import DomainError
from flux_catastrophe.hilbert import (
    HilbertMatrix,
    block_reduction_check,
    dirichlet_flux_logdet,
    flip_operator,
    hilbert_section,
    hilbert_section_norm,
    hilbert_square_closed_form,
    k_matrix,
    k_part_norms,
    k_part_traces,
    remainder_logdet,
    remark_overlap_logdet,
)
from oracles import k_entry_bruteforce


def test_hilbert_section_basics():
    h = hilbert_section(3)
    assert_allclose(h[0, 0], 2.0 / 3.0, rtol=1e-15)
    assert_allclose(h[0, 1], 2.0 / 5.0, rtol=1e-15)
    assert np.array_equal(h, h.T)
    with pytest.raises(DomainError):
        HilbertMatrix(eta=-2.0, dimension=3)
    with pytest.raises(DomainError):
        HilbertMatrix(dimension=0)


def test_hilbert_section_norm_m1_m2():
    assert_allclose(hilbert_section_norm(1), 2.0 / 3.0, rtol=1e-12)
    # 2x2 eigenvalue closed form for [[2/3, 2/5], [2/5, 2/7]]
    mean = 0.5 * (2.0 / 3.0 + 2.0 / 7.0)
    disc = math.hypot(0.5 * (2.0 / 3.0 - 2.0 / 7.0), 2.0 / 5.0)
    assert_allclose(hilbert_section_norm(2), mean + disc, rtol=1e-10)


def test_hilbert_section_norms_increase_below_pi():
    norms = [hilbert_section_norm(m) for m in (1, 2, 4, 8, 16, 64, 256)]
    assert all(b > a for a, b in zip(norms[:-1], norms[1:]))
    assert all(n < math.pi for n in norms)


def test_flip_operator_unitary_involution():
    t = flip_operator(7)
    assert np.array_equal(t @ t, np.eye(7))
    assert np.array_equal(t, t.T)


def test_hilbert_square_closed_form_values():
    # (H^2)_{11} = psi_1(3/2) = pi^2/2 - 4
    val = hilbert_square_closed_form(np.array([[1.0]]), np.array([[1.0]]))
    assert_allclose(val[0, 0], math.pi**2 / 2 - 4.0, rtol=1e-13)
    # and the dense check: (H_M^2)_{jk} -> closed form as M grows; the
    # finite section truncates the inner sum, an error of order 1/M
    M = 3000
    h = hilbert_section(M)
    h2 = (h @ h)[:4, :4]
    p = np.arange(1, 5, dtype=float)
    closed = hilbert_square_closed_form(p[:, None] * np.ones(4), np.ones((4, 1)) * p[None, :])
    assert_allclose(h2, closed, atol=2.0 / M)


def test_k11_value_pinned_by_bruteforce_sum():
    km = k_matrix(1)
    # frozen from the 10^7-term sum oracle; also equals pi^2/4 - 16/9
    assert_allclose(km.entries[0, 0], 0.6896233224945618, rtol=1e-12)
    assert_allclose(km.entries[0, 0], k_entry_bruteforce(1, 1, 1), rtol=1e-12)


def test_k_matrix_decomposition_identity():
    km = k_matrix(8, with_parts=True)
    total = sum(km.parts[key] for key in ("--", "+-", "-+", "++"))
    assert float(np.max(np.abs(km.entries - total))) < 1e-12


def test_k_matrix_vs_bruteforce_entries():
    km = k_matrix(3)
    for (j, k) in ((1, 1), (1, 2), (2, 3), (3, 3)):
        assert_allclose(km.entries[j - 1, k - 1], k_entry_bruteforce(3, j, k, l_terms=10**6), rtol=1e-11)


def test_k_parts_positive_semidefinite():
    km = k_matrix(16, with_parts=True)
    for key in ("--", "++"):
        part = km.parts[key]
        assert np.array_equal(part, part.T)
        assert float(np.min(np.linalg.eigvalsh(part))) >= -1e-10


def test_k_mm_is_flipped_hilbert_square_section():
    M = 6
    km = k_matrix(M, with_parts=True)
    p = np.arange(M, dtype=float)  # 0-based flipped indices M - j
    grid_p = p[::-1][:, None] * np.ones(M)
    grid_q = np.ones((M, 1)) * p[::-1][None, :]
    closed = 0.25 * hilbert_square_closed_form(grid_p, grid_q)
    assert_allclose(km.parts["--"], closed, rtol=1e-12)


def test_k_part_traces_match_matrices():
    M = 24
    km = k_matrix(M, with_parts=True)
    t_mm, t_pp = k_part_traces(M)
    assert_allclose(np.trace(km.parts["--"]), t_mm, rtol=1e-13)
    assert_allclose(np.trace(km.parts["++"]), t_pp, rtol=1e-13)


def test_k_part_norms_bounds():
    norms = k_part_norms(64)
    assert norms.op_mm <= math.pi**2 / 4 + 1e-8
    # trace norm dominates operator norm for the PSD leading part
    assert norms.t_mm >= norms.op_mm - 1e-10
    assert norms.t_mixed == pytest.approx(math.sqrt(norms.t_mm * norms.t_pp), rel=1e-12)


def test_trace_mm_log_growth():
    t1, _ = k_part_traces(512)
    t2, _ = k_part_traces(1024)
    assert_allclose(t2 - t1, 0.25 * math.log(2.0), rtol=0.01)


def test_dirichlet_flux_logdet_zero_delta():
    ld = dirichlet_flux_logdet(0.0, 16)
    assert ld.log_magnitude == 0.0 and ld.phase == 0.0


def test_dirichlet_flux_logdet_m1():
    # det(1 - (2/pi^2) K_11) with K_11 from the brute-force oracle
    k11 = k_entry_bruteforce(1, 1, 1, l_terms=10**6)
    expected = 1.0 - (4.0 / math.pi**2) * math.sin(math.pi / 4) ** 2 * k11
    ld = dirichlet_flux_logdet(math.pi / 4, 1)
    assert_allclose(math.exp(ld.log_magnitude), abs(expected), rtol=1e-11)


@pytest.mark.parametrize("delta,M", [(math.pi / 4, 8), (math.pi / 3, 16), (3 * math.pi / 8, 32)])
def test_block_reduction_agreement(delta, M):
    ld_block, ld_reduced = block_reduction_check(delta, M)
    assert abs(ld_block - ld_reduced) < 1e-8


def test_dirichlet_logdet_decays_in_M():
    delta = math.pi / 4
    vals = [dirichlet_flux_logdet(delta, m).log_magnitude for m in (8, 12, 16, 24, 32, 48, 64)]
    assert all(b <= a + 1e-12 for a, b in zip(vals[:-1], vals[1:]))


def test_leading_factor_invertibility_margin():
    # smallest singular value of I - (4/pi^2) sin^2 K^{--} stays above
    # 1 - sin^2(delta) (4/pi^2) ||K^{--}||
    delta = 3 * math.pi / 8
    M = 64
    km = k_matrix(M, with_parts=True)
    norms = k_part_norms(M)
    lead = np.eye(M) - (4.0 / math.pi**2) * math.sin(delta) ** 2 * km.parts["--"]
    smin = float(np.min(np.linalg.svd(lead, compute_uv=False)))
    margin = 1.0 - math.sin(delta) ** 2 * norms.op_mm * 4.0 / math.pi**2
    assert smin > 0
    assert smin >= margin - 1e-8


def test_remainder_logdet_bounded():
    delta = math.pi / 4
    vals = [remainder_logdet(delta, m).log_magnitude for m in (16, 32, 64, 128)]
    assert all(math.isfinite(v) for v in vals)
    assert max(vals) - min(vals) < 1.0  # stays O(1) while the leading factor decays


def test_remark_overlap_logdet_runs():
    # exploratory object from the open Dirichlet question: finite, decaying
    ld16 = remark_overlap_logdet(math.pi / 4, 16)
    ld64 = remark_overlap_logdet(math.pi / 4, 64)
    assert math.isfinite(ld16.log_magnitude)
    assert ld64.log_magnitude < ld16.log_magnitude


def test_k_matrix_domain_error():
    with pytest.raises(DomainError):
        k_matrix(0)
    with pytest.raises(DomainError):
        dirichlet_flux_logdet(2.0, 4)
