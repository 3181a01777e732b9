"""Frame/mini-batch synthesis determinism and ground-truth consistency."""
from __future__ import annotations

import numpy as np

from adaptrx.frames import (FrameBatch, draw_taus, make_batch, n_data_bits,
                            simulate_frame)
from adaptrx.phy import LinkConfig, bits_per_symbol, qam_map
from adaptrx.pilots import PilotDesign, embed, make_plan

LINK = LinkConfig(symbols=4, subcarriers=32, antennas=2, mod_order=4,
                  snr_db=20.0)
DESIGN = PilotDesign()


class TestSimulateFrame:
    def test_deterministic_in_all_indices(self):
        plan = make_plan(DESIGN, LINK, 5, 0)
        a = simulate_frame(LINK, plan, 45e-9, 5, 0, 0)
        b = simulate_frame(LINK, plan, 45e-9, 5, 0, 0)
        np.testing.assert_array_equal(a.tx_bits, b.tx_bits)
        np.testing.assert_array_equal(a.h, b.h)
        np.testing.assert_array_equal(a.rx, b.rx)

    def test_frames_differ_by_frame_index(self):
        plan = make_plan(DESIGN, LINK, 5, 0)
        a = simulate_frame(LINK, plan, 45e-9, 5, 0, 0)
        b = simulate_frame(LINK, plan, 45e-9, 5, 0, 1)
        assert not np.array_equal(a.tx_bits, b.tx_bits)
        assert not np.array_equal(a.h, b.h)

    def test_frames_differ_by_batch_index(self):
        plan = make_plan(DESIGN, LINK, 5, 0)
        a = simulate_frame(LINK, plan, 45e-9, 5, 0, 0)
        b = simulate_frame(LINK, plan, 45e-9, 5, 1, 0)
        assert not np.array_equal(a.tx_bits, b.tx_bits)

    def test_payload_length_and_rx_shape(self):
        plan = make_plan(DESIGN, LINK, 5, 0)
        fr = simulate_frame(LINK, plan, 45e-9, 5, 0, 0)
        assert fr.tx_bits.size == n_data_bits(LINK, plan)
        assert fr.rx.shape == (4, 32, 2)
        assert fr.h.shape == (4, 32, 2)

    def test_rx_is_channel_times_grid_plus_noise(self):
        # reconstruct the transmitted grid from the ground truth and check
        # the residual rx - h*s is white at the configured variance.
        plan = make_plan(DESIGN, LINK, 5, 0)
        residuals = []
        for i in range(50):
            fr = simulate_frame(LINK, plan, 45e-9, 5, 0, i)
            grid = embed(plan, qam_map(fr.tx_bits, LINK.mod_order))
            residuals.append(fr.rx - grid[:, :, None] * fr.h)
        res = np.concatenate([r.ravel() for r in residuals])
        measured = float(np.mean(np.abs(res) ** 2))
        assert abs(measured - LINK.noise_variance) / LINK.noise_variance < 0.05

    def test_block_fading_within_frame(self):
        plan = make_plan(DESIGN, LINK, 5, 0)
        fr = simulate_frame(LINK, plan, 45e-9, 5, 0, 0)
        for t in range(1, 4):
            np.testing.assert_array_equal(fr.h[t], fr.h[0])


class TestDrawTaus:
    def test_deterministic(self):
        np.testing.assert_array_equal(draw_taus(9, 3, 40e-9, 50e-9, 16),
                                      draw_taus(9, 3, 40e-9, 50e-9, 16))

    def test_within_bounds(self):
        taus = draw_taus(9, 3, 40e-9, 50e-9, 1000)
        assert taus.min() >= 40e-9 and taus.max() <= 50e-9

    def test_varies_with_batch(self):
        assert not np.array_equal(draw_taus(9, 0, 40e-9, 50e-9, 16),
                                  draw_taus(9, 1, 40e-9, 50e-9, 16))


class TestMakeBatch:
    def test_shared_plan_and_mask_across_frames(self):
        taus = draw_taus(7, 0, 40e-9, 50e-9, 8)
        batch = make_batch(LINK, DESIGN, 0.5, taus, 7, 0)
        assert isinstance(batch, FrameBatch)
        assert batch.size == 8
        assert batch.plan.batch_index == 0
        n_eligible = int(batch.plan.learning_eligible.sum())
        assert int(batch.mask.sum()) == n_eligible // 2

    def test_frame_taus_match_input(self):
        taus = draw_taus(7, 0, 40e-9, 50e-9, 4)
        batch = make_batch(LINK, DESIGN, 0.5, taus, 7, 0)
        for fr, tau in zip(batch.frames, taus):
            assert fr.tau_s == float(tau)

    def test_reproducible(self):
        taus = draw_taus(7, 2, 40e-9, 50e-9, 4)
        a = make_batch(LINK, DESIGN, 0.5, taus, 7, 2)
        b = make_batch(LINK, DESIGN, 0.5, taus, 7, 2)
        np.testing.assert_array_equal(a.plan.positions, b.plan.positions)
        np.testing.assert_array_equal(a.mask, b.mask)
        for fa, fb in zip(a.frames, b.frames):
            np.testing.assert_array_equal(fa.rx, fb.rx)

    def test_channel_streams_independent_across_frames(self):
        taus = np.full(4, 45e-9)
        batch = make_batch(LINK, DESIGN, 0.5, taus, 7, 0)
        h0 = batch.frames[0].h
        for fr in batch.frames[1:]:
            assert not np.array_equal(fr.h, h0)

    def test_bit_count_matches_modulation(self):
        big = LinkConfig(symbols=4, subcarriers=32, antennas=2, mod_order=16)
        plan = make_plan(DESIGN, big, 5, 0)
        assert n_data_bits(big, plan) == \
            (big.grid_size - plan.n_pilots) * bits_per_symbol(16)
