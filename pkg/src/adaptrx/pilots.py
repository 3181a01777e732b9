"""Pilot planning, masking, and receiver input assembly.

Pilots do double duty here.  All of them are transmitted for channel
estimation, but at the receiver a fixed fraction of the randomized
("learning-eligible") pilots is hidden from the network's pilot input
and used as free training labels: the network must infer their bits the
same way it infers data bits, and since the transmitter knows what it
sent, the cross-entropy on those hidden pilots is a supervision signal
that costs zero extra overhead.

Three placement designs are provided:

* fully_scattered: every pilot is randomized in position and value and
  is learning-eligible.
* hybrid: part of the budget sits on a deterministic comb across the
  standard two pilot symbols with fixed, known values (never maskable);
  the remainder is randomized and learning-eligible.
* additional: the full standard two-symbol pattern is kept intact and
  extra randomized learning-eligible pilots are spent on top (this is
  the only design that pays extra overhead).

Plans and masks are pure functions of (seed, batch_index), so a
transmitter and receiver that share the seed derive identical plans
without signaling.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InvalidArgument
from .phy import LinkConfig, bits_per_symbol, index_map, indices_to_bits
from .rng import stream

FULLY_SCATTERED = "fully_scattered"
HYBRID = "hybrid"
ADDITIONAL = "additional"
DESIGN_KINDS = (FULLY_SCATTERED, HYBRID, ADDITIONAL)

# Standard demodulation pilot rows (0-based symbol indices): the usual
# two-symbol arrangement, second and eleventh symbols of a 14-symbol frame.
CONVENTIONAL_SYMBOLS = (1, 10)

# Fixed entropy label for the values of the deterministic pilot subset;
# constant so every plan agrees on them without coordination.
_FIXED_VALUE_SEED = 0x0FF1CE


@dataclass(frozen=True)
class PilotDesign:
    """Placement policy and budget for one link."""
    kind: str = FULLY_SCATTERED
    density: float = 2.0 / 14.0       # pilot budget as a fraction of the grid
    hybrid_fixed_fraction: float = 0.5  # share of the budget on the comb
    extra_pilots: int = 32            # additional design only
    conventional_symbols: tuple[int, ...] = CONVENTIONAL_SYMBOLS

    def __post_init__(self):
        if self.kind not in DESIGN_KINDS:
            raise ConfigurationError(f"unknown pilot design kind {self.kind!r}")
        if not 0.0 < self.density < 1.0:
            raise ConfigurationError("density must be in (0, 1)")
        if not 0.0 <= self.hybrid_fixed_fraction <= 1.0:
            raise ConfigurationError("hybrid_fixed_fraction must be in [0, 1]")
        if self.extra_pilots < 0:
            raise ConfigurationError("extra_pilots must be >= 0")
        if len(set(self.conventional_symbols)) != len(self.conventional_symbols):
            raise ConfigurationError("conventional_symbols must be distinct")


def conventional_pattern(design: PilotDesign, cfg: LinkConfig) -> np.ndarray:
    """Flat row-major positions of the fixed pattern rows present in cfg."""
    rows = [t for t in design.conventional_symbols if t < cfg.symbols]
    f = np.arange(cfg.subcarriers)
    return np.concatenate([t * cfg.subcarriers + f for t in sorted(rows)]) \
        if rows else np.empty(0, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class PilotPlan:
    """One batch's pilot arrangement, shared by transmitter and receiver."""
    kind: str
    seed: int
    batch_index: int
    shape: tuple[int, int]            # (T, F)
    mod_order: int
    positions: np.ndarray             # flat row-major indices, sorted
    symbol_indices: np.ndarray        # constellation index per pilot
    learning_eligible: np.ndarray     # bool per pilot

    def __post_init__(self):
        t_dim, f_dim = self.shape
        pos = np.asarray(self.positions, dtype=np.int64)
        idx = np.asarray(self.symbol_indices, dtype=np.int64)
        elig = np.asarray(self.learning_eligible, dtype=bool)
        if not (pos.size == idx.size == elig.size):
            raise ConfigurationError("plan arrays must have equal length")
        if pos.size == 0:
            raise ConfigurationError("plan must contain at least one pilot")
        if pos.size >= t_dim * f_dim:
            raise ConfigurationError("pilot count must be below the grid size")
        if np.unique(pos).size != pos.size:
            raise ConfigurationError("pilot positions must be unique")
        if pos.min() < 0 or pos.max() >= t_dim * f_dim:
            raise ConfigurationError("pilot position outside the grid")
        if (np.diff(pos) <= 0).any():
            raise ConfigurationError("pilot positions must be sorted")
        if idx.min() < 0 or idx.max() >= self.mod_order:
            raise ConfigurationError("symbol index out of constellation range")
        for name, arr in (("positions", pos), ("symbol_indices", idx),
                          ("learning_eligible", elig)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_pilots(self) -> int:
        return int(self.positions.size)

    @property
    def symbols(self) -> np.ndarray:
        """Complex pilot values (unit-average-energy constellation points)."""
        return index_map(self.symbol_indices, self.mod_order)

    def pilot_grid(self) -> np.ndarray:
        """(T, F) bool grid, True at pilot positions."""
        g = np.zeros(self.shape[0] * self.shape[1], dtype=bool)
        g[self.positions] = True
        return g.reshape(self.shape)

    def data_positions(self) -> np.ndarray:
        """Flat row-major indices of the non-pilot elements (ascending)."""
        return np.setdiff1d(np.arange(self.shape[0] * self.shape[1]),
                            self.positions)

    def to_record(self) -> str:
        """Single-line text record; see plan_from_record."""
        return json.dumps({
            "kind": self.kind,
            "seed": int(self.seed),
            "batch_index": int(self.batch_index),
            "shape": list(self.shape),
            "mod_order": int(self.mod_order),
            "positions": self.positions.tolist(),
            "symbol_indices": self.symbol_indices.tolist(),
            "learning_eligible": self.learning_eligible.astype(int).tolist(),
        }, sort_keys=True)


def plan_from_record(record: str) -> PilotPlan:
    d = json.loads(record)
    return PilotPlan(
        kind=d["kind"], seed=d["seed"], batch_index=d["batch_index"],
        shape=tuple(d["shape"]), mod_order=d["mod_order"],
        positions=np.asarray(d["positions"], dtype=np.int64),
        symbol_indices=np.asarray(d["symbol_indices"], dtype=np.int64),
        learning_eligible=np.asarray(d["learning_eligible"], dtype=bool))


def _sorted_plan(kind, seed, batch_index, cfg, positions, indices, eligible):
    positions = np.asarray(positions, dtype=np.int64)
    order = np.argsort(positions, kind="stable")
    return PilotPlan(
        kind=kind, seed=seed, batch_index=batch_index,
        shape=(cfg.symbols, cfg.subcarriers), mod_order=cfg.mod_order,
        positions=positions[order],
        symbol_indices=np.asarray(indices, dtype=np.int64)[order],
        learning_eligible=np.asarray(eligible, dtype=bool)[order])


def _fixed_values(design: PilotDesign, cfg: LinkConfig) -> np.ndarray:
    """Deterministic constellation indices for the full fixed pattern."""
    pattern = conventional_pattern(design, cfg)
    rng = stream(_FIXED_VALUE_SEED, "fixed-pilot-values", cfg.mod_order)
    return rng.integers(0, cfg.mod_order, size=pattern.size)


def _comb_subset(n_total: int, n_take: int) -> np.ndarray:
    """Evenly strided selection of n_take indices out of n_total."""
    return np.floor(np.arange(n_take) * (n_total / n_take)).astype(np.int64)


def make_plan(design: PilotDesign, cfg: LinkConfig, seed: int,
              batch_index: int) -> PilotPlan:
    """Derive the pilot plan for one mini-batch.

    Deterministic in (design, cfg, seed, batch_index); different batch
    indices give different randomized placements and values.
    """
    if batch_index < 0:
        raise InvalidArgument("batch_index must be >= 0")
    grid = cfg.grid_size
    rng = stream(seed, "plan", batch_index)
    budget = int(round(design.density * grid))
    if not 0 < budget < grid:
        raise ConfigurationError(
            f"pilot budget {budget} invalid for a {grid}-element grid")

    if design.kind == FULLY_SCATTERED:
        positions = rng.permutation(grid)[:budget]
        indices = rng.integers(0, cfg.mod_order, size=budget)
        eligible = np.ones(budget, dtype=bool)
        return _sorted_plan(FULLY_SCATTERED, seed, batch_index, cfg,
                            positions, indices, eligible)

    pattern = conventional_pattern(design, cfg)
    if pattern.size == 0:
        raise ConfigurationError(
            "no conventional pilot symbols fall inside this grid")
    fixed_values = _fixed_values(design, cfg)

    if design.kind == HYBRID:
        n_fixed = int(round(design.hybrid_fixed_fraction * budget))
        n_fixed = min(n_fixed, pattern.size, budget)
        comb = _comb_subset(pattern.size, n_fixed) if n_fixed else \
            np.empty(0, dtype=np.int64)
        fixed_pos = pattern[comb]
        n_rand = budget - n_fixed
        if n_rand > 0:
            free = np.setdiff1d(np.arange(grid), fixed_pos)
            rand_pos = rng.permutation(free)[:n_rand]
            rand_idx = rng.integers(0, cfg.mod_order, size=n_rand)
        else:
            rand_pos = np.empty(0, dtype=np.int64)
            rand_idx = np.empty(0, dtype=np.int64)
        positions = np.concatenate([fixed_pos, rand_pos])
        indices = np.concatenate([fixed_values[comb], rand_idx])
        eligible = np.concatenate([np.zeros(n_fixed, bool), np.ones(n_rand, bool)])
        return _sorted_plan(HYBRID, seed, batch_index, cfg,
                            positions, indices, eligible)

    # additional: the intact fixed pattern plus extra randomized pilots
    n_extra = design.extra_pilots
    if pattern.size + n_extra >= grid:
        raise ConfigurationError("extra pilots exceed the available grid")
    free = np.setdiff1d(np.arange(grid), pattern)
    extra_pos = rng.permutation(free)[:n_extra]
    extra_idx = rng.integers(0, cfg.mod_order, size=n_extra)
    positions = np.concatenate([pattern, extra_pos])
    indices = np.concatenate([fixed_values, extra_idx])
    eligible = np.concatenate([np.zeros(pattern.size, bool),
                               np.ones(n_extra, bool)])
    return _sorted_plan(ADDITIONAL, seed, batch_index, cfg,
                        positions, indices, eligible)


def overhead_extra(design: PilotDesign, cfg: LinkConfig) -> int:
    """Pilot overhead beyond the configured budget (additional design only)."""
    return design.extra_pilots if design.kind == ADDITIONAL else 0


def embed(plan: PilotPlan, data_symbols: np.ndarray) -> np.ndarray:
    """Fill a (T, F) grid: pilots at plan positions, data elsewhere in
    row-major order."""
    t_dim, f_dim = plan.shape
    data_symbols = np.asarray(data_symbols)
    n_data = t_dim * f_dim - plan.n_pilots
    if data_symbols.size != n_data:
        raise InvalidArgument(
            f"expected {n_data} data symbols, got {data_symbols.size}")
    grid = np.empty(t_dim * f_dim, dtype=np.complex128)
    grid[plan.positions] = plan.symbols
    grid[plan.data_positions()] = data_symbols.ravel()
    return grid.reshape(t_dim, f_dim)


def select_mask(plan: PilotPlan, fraction: float, seed: int) -> np.ndarray:
    """Choose floor(fraction * n_eligible) learning-eligible pilots to hide.

    Returns a (T, F) bool grid.  Deterministic in (plan, fraction, seed);
    the draw is independent of the plan's own placement stream.
    """
    if not 0.0 <= fraction <= 1.0:
        raise InvalidArgument("mask fraction must be in [0, 1]")
    eligible = plan.positions[plan.learning_eligible]
    count = int(np.floor(fraction * eligible.size))
    if fraction > 0 and eligible.size == 0:
        raise InvalidArgument("plan has no learning-eligible pilots to mask")
    mask = np.zeros(plan.shape[0] * plan.shape[1], dtype=bool)
    if count:
        rng = stream(seed, "mask", plan.batch_index)
        mask[rng.permutation(eligible)[:count]] = True
    return mask.reshape(plan.shape)


def _check_mask(plan: PilotPlan, mask: np.ndarray) -> np.ndarray:
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != plan.shape:
        raise InvalidArgument(
            f"mask shape {mask.shape} does not match grid {plan.shape}")
    stray = mask.ravel().copy()
    stray[plan.positions] = False
    if stray.any():
        raise InvalidArgument("mask covers a non-pilot position")
    return mask


def input_channels(antennas: int) -> int:
    """Receiver input depth: I/Q per antenna, pilot I/Q, noise variance."""
    return 2 * (antennas + 1) + 1


def build_input(rx_grid: np.ndarray, plan: PilotPlan, noise_var: float,
                mask: np.ndarray | None = None) -> np.ndarray:
    """Assemble the (T, F, L) receiver input for one frame.

    Channel order: [Re y_1, Im y_1, ..., Re y_K, Im y_K, Re P, Im P,
    noise_var].  The pilot plane P carries the known pilot values only
    where they are visible; masked pilots and data positions are zero,
    so a masked pilot looks exactly like a data element to the network.
    """
    t_dim, f_dim = plan.shape
    if rx_grid.shape[:2] != (t_dim, f_dim) or rx_grid.ndim != 3:
        raise InvalidArgument(
            f"rx grid shape {rx_grid.shape} does not match plan {plan.shape}")
    if noise_var < 0:
        raise InvalidArgument("noise_var must be non-negative")
    k = rx_grid.shape[2]
    out = np.empty((t_dim, f_dim, input_channels(k)), dtype=np.float64)
    for ant in range(k):
        out[:, :, 2 * ant] = rx_grid[:, :, ant].real
        out[:, :, 2 * ant + 1] = rx_grid[:, :, ant].imag
    pilot_plane = np.zeros(t_dim * f_dim, dtype=np.complex128)
    pilot_plane[plan.positions] = plan.symbols
    if mask is not None:
        mask = _check_mask(plan, mask)
        pilot_plane[mask.ravel()] = 0.0
    pilot_plane = pilot_plane.reshape(t_dim, f_dim)
    out[:, :, 2 * k] = pilot_plane.real
    out[:, :, 2 * k + 1] = pilot_plane.imag
    out[:, :, 2 * k + 2] = noise_var
    return out


def labels_for(plan: PilotPlan, mask: np.ndarray):
    """Bit labels for the masked pilots.

    Returns (labels, element_mask): labels is (T, F, m) float with the
    transmitted bits at masked pilot positions and zeros elsewhere;
    element_mask is the (T, F) bool selector to hand to the loss.
    """
    mask = _check_mask(plan, mask)
    if not mask.any():
        raise InvalidArgument("mask selects no pilots")
    m = bits_per_symbol(plan.mod_order)
    flat_mask = mask.ravel()
    sel = flat_mask[plan.positions]
    bits = indices_to_bits(plan.symbol_indices[sel], plan.mod_order)
    labels = np.zeros((plan.shape[0] * plan.shape[1], m))
    labels[plan.positions[sel]] = bits.reshape(-1, m)
    return labels.reshape(plan.shape + (m,)), mask


def data_bit_labels(plan: PilotPlan, data_bits: np.ndarray):
    """Bit labels for the data elements (offline supervision).

    Returns (labels, element_mask) in the same convention as labels_for:
    data_bits is the flat transmitted bit array in embed order.
    """
    m = bits_per_symbol(plan.mod_order)
    pos = plan.data_positions()
    data_bits = np.asarray(data_bits).ravel()
    if data_bits.size != pos.size * m:
        raise InvalidArgument(
            f"expected {pos.size * m} data bits, got {data_bits.size}")
    labels = np.zeros((plan.shape[0] * plan.shape[1], m))
    labels[pos] = data_bits.reshape(-1, m)
    mask = np.zeros(plan.shape[0] * plan.shape[1], dtype=bool)
    mask[pos] = True
    return labels.reshape(plan.shape + (m,)), mask.reshape(plan.shape)
