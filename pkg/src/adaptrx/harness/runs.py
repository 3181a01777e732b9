"""Run commands: offline training, BER sweeps, shift recovery, continual runs.

Every command takes an ExperimentConfig and an output directory and writes
deterministic CSV files there (plus a ``config.txt`` echo of the resolved
settings).  Output rows carry the master seed and the config hash so any
result file can be traced back to the exact settings that produced it.
Nothing here writes timestamps or machine-specific paths: re-running a
command with the same config yields byte-identical files.
"""

from __future__ import annotations

import dataclasses
import math
import sys
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from ..errors import ConfigurationError
from ..frames import FrameBatch, draw_taus, make_batch
from ..nn.checkpoint import load_params, save_params
from ..nn.gradcheck import gradcheck
from ..nn.model import (
    ModelParams,
    NetConfig,
    clone_params,
    init_params,
    net_backward,
    net_forward,
)
from ..nn.optim import adam_step, init_adam
from ..online.runner import run_continual as _continual_loop, windowed_trace
from ..phy.channel import LinkConfig
from ..pilots import PilotDesign, build_input, data_bit_labels, labels_for
from ..receiver import lmmse_detect, result_from_llrs
from ..rng import subseed
from .config import ExperimentConfig, config_hash, dump_config

RECEIVER_NAMES = ("neural-fixed", "lmmse-perfect", "lmmse-imperfect")
DISTRIBUTION_NAMES = ("matched", "shifted")

_NS = 1e-9

# ---------------------------------------------------------------------------
# deterministic CSV output
# ---------------------------------------------------------------------------


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    text = str(value)
    if "," in text or "\n" in text:
        raise ConfigurationError(f"CSV value may not contain commas/newlines: {text!r}")
    return text


def write_csv(
    path: Path,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    comments: Sequence[str] = (),
) -> None:
    """Write a comment-headed CSV with stable formatting (no timestamps)."""
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(columns))
    for row in rows:
        if len(row) != len(columns):
            raise ConfigurationError(
                f"row width {len(row)} does not match {len(columns)} columns")
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _prep_out(cfg: ExperimentConfig, out_dir: str | Path) -> tuple[Path, str]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(dump_config(cfg), encoding="utf-8")
    return out, config_hash(cfg)


def _say(text: str) -> None:
    print(text)
    sys.stdout.flush()


# ---------------------------------------------------------------------------
# shared pieces
# ---------------------------------------------------------------------------


def _batches(
    link: LinkConfig,
    design: PilotDesign,
    mask_fraction: float,
    seed: int,
    n_frames: int,
    batch_size: int,
    tau_lo_s: float,
    tau_hi_s: float,
    taps: int,
    decay_db: float,
) -> Iterable[FrameBatch]:
    """Yield deterministic mini-batches totalling exactly n_frames frames."""
    produced = 0
    index = 0
    while produced < n_frames:
        count = min(batch_size, n_frames - produced)
        taus = draw_taus(seed, index, tau_lo_s, tau_hi_s, count)
        yield make_batch(link, design, mask_fraction, taus, seed, index,
                         taps=taps, decay_db=decay_db)
        produced += count
        index += 1


def _offline_labels(batch: FrameBatch) -> tuple[np.ndarray, np.ndarray]:
    """Full supervision for synthetic training: data bits plus masked pilots.

    The payload of a simulated frame is known, so offline training can
    supervise every data element as well as the masked pilots.  (Online
    fine-tuning never sees data bits; it uses the masked pilots only.)
    """
    plan = batch.plan
    pilot_labels, pilot_mask = labels_for(plan, batch.mask)
    labels = np.stack([data_bit_labels(plan, f.tx_bits)[0] + pilot_labels
                       for f in batch.frames])
    flat = np.zeros(plan.shape[0] * plan.shape[1], dtype=bool)
    flat[plan.data_positions()] = True
    mask = flat.reshape(plan.shape) | pilot_mask
    return labels, np.broadcast_to(mask, (batch.size,) + mask.shape)


def _masked_inputs(batch: FrameBatch, noise_var: float) -> np.ndarray:
    return np.stack([build_input(f.rx, batch.plan, noise_var, batch.mask)
                     for f in batch.frames])


def _open_inputs(batch: FrameBatch, noise_var: float) -> np.ndarray:
    return np.stack([build_input(f.rx, batch.plan, noise_var, None)
                     for f in batch.frames])


def train_offline(
    cfg: ExperimentConfig,
    log: Callable[[int, float], None] | None = None,
) -> tuple[ModelParams, list[float]]:
    """Train a fresh network on the matched delay-spread range.

    Supervision covers data bits and masked pilots; inputs have the mask
    applied so the training distribution matches deployment.  Returns the
    trained parameters and the per-batch loss history.
    """
    link = cfg.link_config()
    design = cfg.pilot_design()
    net_cfg = cfg.net_config()
    tr = cfg.train
    params = init_params(net_cfg, subseed(cfg.seed, "init"))
    adam = init_adam(params, lr=tr.lr_offline, beta1=tr.beta1, beta2=tr.beta2,
                     eps=tr.eps)
    data_seed = subseed(cfg.seed, "offline-train")
    n_batches = math.ceil(tr.offline_samples / tr.batch_size)
    decay_at = sorted({min(n_batches - 1, int(p * n_batches))
                       for p in tr.decay_points if 0.0 < p <= 1.0})
    lo_s, hi_s = cfg.channel.tau_lo_ns * _NS, cfg.channel.tau_hi_ns * _NS
    losses: list[float] = []
    for index, batch in enumerate(_batches(
            link, design, cfg.pilot.mask_fraction, data_seed,
            n_batches * tr.batch_size, tr.batch_size, lo_s, hi_s,
            cfg.channel.taps, cfg.channel.decay_db)):
        if index in decay_at:
            adam.lr *= tr.decay_factor
        x = _masked_inputs(batch, link.noise_variance)
        labels, mask = _offline_labels(batch)
        _, cache = net_forward(params, net_cfg, x, want_cache=True)
        loss, grads = net_backward(params, net_cfg, cache, labels, mask)
        adam_step(params, grads, adam)
        losses.append(loss)
        if log is not None:
            log(index, loss)
    return params, losses


def _load_checkpoint(cfg: ExperimentConfig) -> ModelParams:
    path = cfg.model.checkpoint
    if not path:
        raise ConfigurationError(
            "this command needs model.checkpoint to point at a trained model")
    params = load_params(path)
    expected = cfg.net_config()
    if params.cfg.layer_specs() != expected.layer_specs():
        raise ConfigurationError(
            f"checkpoint network {params.cfg} does not match configured "
            f"network {expected}")
    return params


def _neural_frame_bers(params: ModelParams | None, net_cfg: NetConfig | None,
                       batch: FrameBatch, noise_var: float) -> list[tuple[int, int]]:
    x = _open_inputs(batch, noise_var)
    llrs, _ = net_forward(params, net_cfg, x, want_cache=False)
    out = []
    for i, frame in enumerate(batch.frames):
        res = result_from_llrs(np.asarray(llrs[i], dtype=np.float64), batch.plan)
        errs = int(np.count_nonzero(res.data_bits != frame.tx_bits))
        out.append((errs, frame.tx_bits.size))
    return out


def _classical_frame_bers(kind: str, batch: FrameBatch,
                          noise_var: float) -> list[tuple[int, int]]:
    out = []
    for frame in batch.frames:
        h = frame.h if kind == "lmmse-perfect" else None
        res = lmmse_detect(frame.rx, batch.plan, noise_var, h=h)
        errs = int(np.count_nonzero(res.data_bits != frame.tx_bits))
        out.append((errs, frame.tx_bits.size))
    return out


def evaluate_receiver(
    receiver: str,
    cfg: ExperimentConfig,
    link: LinkConfig,
    seed: int,
    n_frames: int,
    tau_lo_s: float,
    tau_hi_s: float,
    params: ModelParams | None = None,
) -> tuple[float, int]:
    """Mean BER of one receiver over a deterministic stream of frames.

    The frame stream depends only on (seed, tau range, link, pilot design),
    so different receivers evaluated with the same arguments see identical
    channels, payloads, and noise.
    """
    if receiver not in RECEIVER_NAMES:
        raise ConfigurationError(
            f"unknown receiver {receiver!r}; expected one of {RECEIVER_NAMES}")
    design = cfg.pilot_design()
    errors = 0
    bits = 0
    for batch in _batches(link, design, cfg.pilot.mask_fraction, seed, n_frames,
                          cfg.train.batch_size, tau_lo_s, tau_hi_s,
                          cfg.channel.taps, cfg.channel.decay_db):
        if receiver == "neural-fixed":
            if params is None:
                raise ConfigurationError("neural receiver needs trained parameters")
            pairs = _neural_frame_bers(params, params.cfg, batch, link.noise_variance)
        else:
            pairs = _classical_frame_bers(receiver, batch, link.noise_variance)
        for errs, n in pairs:
            errors += errs
            bits += n
    return errors / bits, bits


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def run_offline_train(cfg: ExperimentConfig, out_dir: str | Path) -> Path:
    """Train from scratch on the matched range and write a checkpoint."""
    out, chash = _prep_out(cfg, out_dir)
    every = max(1, math.ceil(cfg.train.offline_samples / cfg.train.batch_size) // 20)

    def log(index: int, loss: float) -> None:
        if index % every == 0:
            _say(f"batch {index}: loss {loss:.4f}")

    params, losses = train_offline(cfg, log=log)
    ck_path = out / "checkpoint.npz"
    save_params(ck_path, params)
    rows = [(cfg.seed, chash, i, (i + 1) * cfg.train.batch_size, loss)
            for i, loss in enumerate(losses)]
    write_csv(out / "train_loss.csv",
              ["seed", "config_hash", "batch", "samples_seen", "loss"], rows,
              comments=["offline training loss per mini-batch"])
    _say(f"saved {ck_path} (final loss {losses[-1]:.4f})")
    return ck_path


def run_ber_sweep(cfg: ExperimentConfig, out_dir: str | Path) -> Path:
    """BER versus SNR for each configured receiver and delay-spread range.

    All receivers at one (distribution, SNR) point see identical frames;
    SNR points share channel and payload draws and differ only in noise
    scale, so curves are smooth under a modest frame budget.
    """
    out, chash = _prep_out(cfg, out_dir)
    params: ModelParams | None = None
    if "neural-fixed" in cfg.run.receivers:
        params = _load_checkpoint(cfg)
    ranges = {
        "matched": (cfg.channel.tau_lo_ns * _NS, cfg.channel.tau_hi_ns * _NS),
        "shifted": (cfg.channel.shift_lo_ns * _NS, cfg.channel.shift_hi_ns * _NS),
    }
    rows = []
    for dist in cfg.run.distributions:
        if dist not in ranges:
            raise ConfigurationError(
                f"unknown distribution {dist!r}; expected one of {DISTRIBUTION_NAMES}")
        lo_s, hi_s = ranges[dist]
        eval_seed = subseed(cfg.seed, "ber-sweep", 0 if dist == "matched" else 1)
        for snr_db in cfg.run.snr_grid_db:
            link = dataclasses.replace(cfg.link_config(), snr_db=float(snr_db))
            for receiver in cfg.run.receivers:
                value, bits = evaluate_receiver(
                    receiver, cfg, link, eval_seed, cfg.run.sweep_frames,
                    lo_s, hi_s, params=params)
                rows.append((cfg.seed, chash, dist, float(snr_db), receiver,
                             value, bits))
                _say(f"{dist} {snr_db:g} dB {receiver}: ber {value:.3e}")
    path = out / "ber_sweep.csv"
    write_csv(path, ["seed", "config_hash", "distribution", "snr_db",
                     "receiver", "ber", "bits"], rows,
              comments=["bit error rate by receiver, SNR, and delay-spread range"])
    return path


def run_shift_recovery(cfg: ExperimentConfig, out_dir: str | Path) -> Path:
    """Fine-tune a matched-trained model on the shifted range, pilots only.

    Row one is the untouched model on the matched range; row two is the
    same model on the shifted range (samples_used = 0).  Each further row
    continues self-supervised fine-tuning (masked-pilot labels only — no
    payload knowledge) up to the next sample budget and re-evaluates.
    """
    out, chash = _prep_out(cfg, out_dir)
    params = clone_params(_load_checkpoint(cfg))
    link = cfg.link_config()
    design = cfg.pilot_design()
    net_cfg = params.cfg
    tr = cfg.train
    matched = (cfg.channel.tau_lo_ns * _NS, cfg.channel.tau_hi_ns * _NS)
    shifted = (cfg.channel.shift_lo_ns * _NS, cfg.channel.shift_hi_ns * _NS)
    eval_seed = subseed(cfg.seed, "recovery-eval")
    train_seed = subseed(cfg.seed, "recovery-train")

    def measure(dist: str, lo_s: float, hi_s: float, used: int) -> tuple:
        value, bits = evaluate_receiver("neural-fixed", cfg, link, eval_seed,
                                        cfg.run.eval_frames, lo_s, hi_s,
                                        params=params)
        _say(f"{dist} after {used} samples: ber {value:.3e}")
        return (cfg.seed, chash, dist, used, link.snr_db, value, bits)

    rows = [measure("matched", *matched, 0), measure("shifted", *shifted, 0)]

    budgets = sorted(set(int(b) for b in cfg.run.adapt_budgets))
    if any(b <= 0 for b in budgets):
        raise ConfigurationError("adapt budgets must be positive sample counts")
    adam = init_adam(params, lr=tr.lr_online, beta1=tr.beta1, beta2=tr.beta2,
                     eps=tr.eps)
    used = 0
    index = 0
    for budget in budgets:
        while used < budget:
            taus = draw_taus(train_seed, index, *shifted, tr.batch_size)
            batch = make_batch(link, design, cfg.pilot.mask_fraction, taus,
                               train_seed, index, taps=cfg.channel.taps,
                               decay_db=cfg.channel.decay_db)
            x = _masked_inputs(batch, link.noise_variance)
            labels, mask = labels_for(batch.plan, batch.mask)
            blabels = np.broadcast_to(labels, (batch.size,) + labels.shape)
            bmask = np.broadcast_to(mask, (batch.size,) + mask.shape)
            _, cache = net_forward(params, net_cfg, x, want_cache=True)
            _, grads = net_backward(params, net_cfg, cache, blabels, bmask)
            adam_step(params, grads, adam)
            used += batch.size
            index += 1
        rows.append(measure("shifted", *shifted, used))

    path = out / "shift_recovery.csv"
    write_csv(path, ["seed", "config_hash", "distribution", "samples_used",
                     "snr_db", "ber", "bits"], rows,
              comments=["self-supervised recovery after a delay-spread shift"])
    return path


def run_continual(cfg: ExperimentConfig, out_dir: str | Path) -> Path:
    """Drift-tracking run: adaptive receiver versus its frozen twin."""
    out, chash = _prep_out(cfg, out_dir)
    if cfg.model.checkpoint:
        init = _load_checkpoint(cfg)
    else:
        init = init_params(cfg.net_config(), subseed(cfg.seed, "init"))
        _say("no checkpoint configured; starting from untrained parameters")
    policy = cfg.update_policy()
    _say(f"update policy: regime {policy.regime.value}, cadence {policy.cadence}"
         + (", conservative fallback" if policy.fallback else ""))
    rows = _continual_loop(
        cfg.link_config(), cfg.pilot_design(), cfg.pilot.mask_fraction,
        cfg.architecture(), policy, cfg.drift_schedule(), init.cfg, init,
        cfg.run.total_batches, cfg.train.batch_size,
        subseed(cfg.seed, "continual"), lr=cfg.train.lr_online,
        taps=cfg.channel.taps, decay_db=cfg.channel.decay_db)

    trace = [(cfg.seed, chash, r.batch, r.tau_bar_ns, r.ber_adaptive,
              r.ber_fixed, r.loss, r.updated, r.params_version) for r in rows]
    path = out / "continual_trace.csv"
    write_csv(path, ["seed", "config_hash", "batch", "tau_bar_ns",
                     "ber_adaptive", "ber_fixed", "loss", "updated",
                     "params_version"], trace,
              comments=["per-batch trace: adaptive receiver vs frozen twin"])

    win = windowed_trace(rows, cfg.run.window)
    wrows = [(cfg.seed, chash, i, win.tau_bar_ns[i], win.ber_adaptive[i],
              win.ber_fixed[i]) for i in range(len(win))]
    write_csv(out / "continual_windows.csv",
              ["seed", "config_hash", "window", "tau_bar_ns", "ber_adaptive",
               "ber_fixed"], wrows,
              comments=[f"windowed means over {cfg.run.window}-batch windows"])
    _say(f"windows where adaptive <= fixed: "
         f"{int(np.count_nonzero(win.ber_adaptive <= win.ber_fixed))}/{len(win)}")
    return path


def run_gradcheck(cfg: ExperimentConfig, out_dir: str | Path) -> Path:
    """Finite-difference sweep of a reduced network; writes per-layer errors."""
    out, chash = _prep_out(cfg, out_dir)
    from ..phy.modem import bits_per_symbol
    from ..pilots import input_channels

    net_cfg = NetConfig(in_channels=input_channels(cfg.link.antennas),
                        out_bits=bits_per_symbol(cfg.link.mod_order),
                        width=6, blocks=1, gate_bias_init=cfg.model.gate_bias_init)
    rng = np.random.default_rng(subseed(cfg.seed, "gradcheck"))
    x = rng.normal(size=(2, 4, 6, net_cfg.in_channels))
    labels = rng.integers(0, 2, size=(2, 4, 6, net_cfg.out_bits)).astype(float)
    mask = rng.random(size=(2, 4, 6)) < 0.5
    mask.ravel()[0] = True  # the loss rejects an empty mask
    report = gradcheck(net_cfg, x, labels, mask, seed=subseed(cfg.seed, "init"))
    rows = [(cfg.seed, chash, name, err)
            for name, err in sorted(report.per_layer.items())]
    rows.append((cfg.seed, chash, "overall", report.max_rel_err))
    path = out / "gradcheck.csv"
    write_csv(path, ["seed", "config_hash", "layer", "max_rel_err"], rows,
              comments=[f"central finite differences over {report.n_params} "
                        f"parameters, eps {report.eps:g}"])
    _say(f"max relative error {report.max_rel_err:.3e} over {report.n_params} params")
    return path


def run_delay_model(cfg: ExperimentConfig, out_dir: str | Path) -> Path:
    """Classify the configured pipeline timings into an update cadence."""
    out, chash = _prep_out(cfg, out_dir)
    dp = cfg.delay_params()
    policy = cfg.update_policy()
    path = out / "delay_model.csv"
    write_csv(path, ["seed", "config_hash", "t_pre", "d_post", "i_inf",
                     "z_bwd", "n_batch", "m_parallel", "backprop_delay",
                     "regime", "cadence", "fallback"],
              [(cfg.seed, chash, dp.t_pre, dp.d_post, dp.i_inf, dp.z_bwd,
                dp.n_batch, dp.m_parallel, policy.b_d, policy.regime.value,
                policy.cadence, policy.fallback)],
              comments=["update cadence implied by the pipeline stage timings"])
    _say(f"regime {policy.regime.value}: update every {policy.cadence} batches"
         + (" (conservative fallback)" if policy.fallback else ""))
    return path


__all__ = [
    "DISTRIBUTION_NAMES",
    "RECEIVER_NAMES",
    "evaluate_receiver",
    "run_ber_sweep",
    "run_continual",
    "run_delay_model",
    "run_gradcheck",
    "run_offline_train",
    "run_shift_recovery",
    "train_offline",
    "write_csv",
]
