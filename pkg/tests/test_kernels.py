import numpy as np
import pytest

from kerrqed import _kernels, propagator
from kerrqed.model import TransformedParams

from conftest import random_state

P = TransformedParams.resonant(mu_bar=1.05, Delta=0.2, chi=0.03)


def _direct_series(state, times, p):
    pe, coh = [], []
    for t in times:
        psi = propagator.evolve_pure(state, t, p).tensor.reshape(2, -1)
        pe.append(np.sum(np.abs(psi[0]) ** 2))
        coh.append(np.sum(psi[0] * psi[1].conj()))
    return np.array(pe), np.array(coh)


def test_atom_series_matches_full_evolution(rng, kernel_backend):
    s = random_state(rng, 5, 7)
    times = np.linspace(0, 30, 41)
    pe, coh = propagator.atom_series(s, times, P)
    ref_pe, ref_coh = _direct_series(s, times, P)
    np.testing.assert_allclose(pe, ref_pe, atol=1e-12)
    np.testing.assert_allclose(coh, ref_coh, atol=1e-12)


def test_backends_agree(rng):
    s = random_state(rng, 9, 11)
    times = np.linspace(0, 80, 301)
    ce, cg = s.tensor
    a = _kernels.atom_series_numpy(ce, cg, times, P.Delta, P.chi, P.mu_bar)
    b = _kernels.atom_series_loop(np.ascontiguousarray(ce), np.ascontiguousarray(cg), times,
                                  P.Delta, P.chi, P.mu_bar)
    np.testing.assert_allclose(a[0], b[0], atol=1e-12)
    np.testing.assert_allclose(a[1], b[1], atol=1e-12)


def test_single_level_mode2(kernel_backend):
    s = random_state(np.random.default_rng(1), 3, 1)
    pe, coh = propagator.atom_series(s, np.array([0.0, 5.0]), P)
    assert pe[0] == pytest.approx(pe[1])
    assert coh[0] == pytest.approx(coh[1])


def test_block_elements_zero_splitting():
    u11, u12, u21, u22 = _kernels.block_elements(0.0, 0.0, 3.0)
    assert (u11, u12, u21, u22) == (1, 0, 0, 1)


def test_apply_blocks_with_trailing_axes(rng):
    s = random_state(rng, 4, 5)
    ce, cg = s.tensor
    stacked_e = np.stack([ce, 2 * ce], axis=-1)
    stacked_g = np.stack([cg, 2 * cg], axis=-1)
    e2, g2 = _kernels.apply_blocks(stacked_e, stacked_g, 1.3, P.Delta, P.chi, P.mu_bar)
    e1, g1 = _kernels.apply_blocks(ce, cg, 1.3, P.Delta, P.chi, P.mu_bar)
    np.testing.assert_allclose(e2[..., 1], 2 * e1, atol=1e-14)
    np.testing.assert_allclose(g2[..., 0], g1, atol=1e-14)
