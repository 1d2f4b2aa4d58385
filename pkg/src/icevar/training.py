"""Training loop and objective for the additive autoregressive model.

The per-batch objective is

    MSE(preds, targets)  +  sparsity_l1 * sum_ij mean_batch |f_ij(.)|

with the MSE averaged over batch x targets. Weight decay is decoupled from
Adam (an AdamW-style shrink applied alongside each step), so it is not part
of the batch objective; ``loss_and_gradient`` adds the equivalent penalty
0.5 * l2 * ||theta||^2 explicitly so the full objective is finite-difference
checkable.

Dropout is inverted (activations scaled by 1/keep during training), applied
to hidden activations only; evaluation passes never drop.
"""

import numpy as np

from . import rng
from .exceptions import DataError, TrainingDiverged
from .model import AdditiveARModel, Hyperparams, TrainingHistory
from .panel import PanelSeries
from .windows import WindowSet, build_windows

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

_EVAL_CHUNK = 512  # windows per evaluation-mode chunk, bounds peak memory


def _batch_grad(views, tgt_index, pb, pb_t, targets_t, l1, mask, grad_views):
    """One forward/backward pass; writes the gradient into ``grad_views``.

    views / grad_views: (w1, b1, w2, b2, beta) for parameters and gradient.
    pb: (P, B, K) per-pair inputs, pb_t its contiguous (P, K, B) transpose,
    targets_t: (N, B). Every gradient component is fully overwritten.
    Returns (objective, mse).
    """
    w1, b1, w2, b2, beta = views
    gw1, gb1, gw2, gb2, gbeta = grad_views
    N = beta.shape[0]
    B = pb.shape[1]

    z1 = np.matmul(pb, w1)  # (P, B, H)
    z1 += b1[:, None, :]
    gate = z1 > 0.0
    a1 = np.maximum(z1, 0.0, out=z1)  # reuses z1 storage; gate captured above
    if mask is not None:
        a1 *= mask
    cp = np.matmul(a1, w2[:, :, None])[:, :, 0]  # (P, B)
    cp += b2[:, None]

    preds = cp.reshape(N, N, B).sum(axis=0)  # (N, B), sum over sources
    preds += beta[:, None]
    resid = preds - targets_t
    mse = float(np.mean(resid * resid))
    objective = mse + (l1 * float(np.abs(cp).mean(axis=1).sum()) if l1 else 0.0)

    dpred = resid
    dpred *= 2.0 / (B * N)
    np.sum(dpred, axis=1, out=gbeta)
    dcp = dpred[tgt_index, :]  # (P, B)
    if l1:
        dcp += (l1 / B) * np.sign(cp)
    np.sum(dcp, axis=1, out=gb2)
    np.matmul(a1.transpose(0, 2, 1), dcp[:, :, None], out=gw2[:, :, None])
    dz1 = dcp[:, :, None] * w2[:, None, :]  # (P, B, H)
    dz1 *= gate
    if mask is not None:
        dz1 *= mask
    np.sum(dz1, axis=1, out=gb1)
    np.matmul(pb_t, dz1, out=gw1)
    return objective, mse


def _eval_objective(
    model: AdditiveARModel, pairs_all: np.ndarray, targets: np.ndarray, l1: float
) -> tuple[float, float]:
    """Evaluation-mode (objective, mse) over (W, P, K) pre-gathered inputs,
    chunked to bound memory."""
    W = pairs_all.shape[0]
    if W == 0:
        return float("nan"), float("nan")
    N = model.n_vars
    sq_sum = 0.0
    abs_sum = 0.0
    for start in range(0, W, _EVAL_CHUNK):
        chunk = np.ascontiguousarray(pairs_all[start : start + _EVAL_CHUNK].transpose(1, 0, 2))
        cp, _, _ = model.forward_pairs(chunk)
        b = chunk.shape[1]
        preds = model.beta[:, None] + cp.reshape(N, N, b).sum(axis=0)
        resid = preds - targets[start : start + _EVAL_CHUNK].T
        sq_sum += float(np.sum(resid * resid))
        abs_sum += float(np.abs(cp).sum())
    mse = sq_sum / (W * N)
    return mse + l1 * abs_sum / W, mse


def loss_and_gradient(
    model: AdditiveARModel,
    batch,
    hp: Hyperparams | None = None,
    dropout_mask: np.ndarray | None = None,
) -> tuple[float, np.ndarray]:
    """Full training objective and its gradient as one flat vector.

    ``batch`` is a WindowSet or a (lags, targets) pair with lags of shape
    (B, N, K), lag slot 0 = t-1. The returned loss includes the decoupled
    weight-decay term as an explicit 0.5 * l2 * ||theta||^2 penalty so the
    gradient is exactly finite-difference checkable. Dropout is off unless a
    mask is supplied.
    """
    hp = hp or model.hp
    if isinstance(batch, WindowSet):
        lags, targets = batch.lag_inputs, batch.targets
    else:
        lags, targets = batch
        lags = np.asarray(lags, dtype=float)
        targets = np.asarray(targets, dtype=float)
    if lags.shape[0] == 0:
        raise DataError("empty batch")
    if lags.shape[1:] != (model.n_vars, model.max_lag):
        raise DataError(
            f"lag array shape {lags.shape} does not match model (B, {model.n_vars}, {model.max_lag})"
        )
    pb = model.pair_lags(lags)
    pb_t = np.ascontiguousarray(pb.transpose(0, 2, 1))
    grad = np.zeros(model.n_params)
    loss, _ = _batch_grad(
        model.param_views(model.theta),
        model.tgt_index,
        pb,
        pb_t,
        np.ascontiguousarray(targets.T),
        hp.sparsity_l1,
        dropout_mask,
        model.param_views(grad),
    )
    l2 = hp.weight_decay_l2
    if l2:
        loss += 0.5 * l2 * float(model.theta @ model.theta)
        grad += l2 * model.theta
    return loss, grad


def train(panel: PanelSeries, hp: Hyperparams) -> AdditiveARModel:
    """Train on a standardized panel and return the final-epoch model.

    Adam on the batch objective, AdamW-style decoupled weight decay, batches
    reshuffled every epoch from the shuffle stream, dropout masks from the
    dropout stream. The chronologically last ``val_split`` of windows per
    unit are only ever used for the monitoring trace; there is no early
    stopping.
    """
    if not panel.is_standardized():
        raise DataError("panel must be standardized before training")
    ws = build_windows(panel, hp.max_lag)
    train_idx, val_idx = ws.split_train_val(hp.val_split)
    if len(train_idx) == 0:
        raise DataError("no training windows left after validation split")

    model = AdditiveARModel.initialize(
        panel.n_vars, hp, var_names=panel.var_names, mean=panel.mean, std=panel.std
    )
    N, H = model.n_vars, model.hidden_units
    P = N * N

    pairs_all = ws.lag_inputs[:, model.src_index, :]  # (W, P, K)
    train_pairs = pairs_all[train_idx]
    train_targets = ws.targets[train_idx]
    val_pairs = pairs_all[val_idx]
    val_targets = ws.targets[val_idx]

    shuffle_gen = rng.stream(hp.seed, rng.SHUFFLE)
    dropout_gen = rng.stream(hp.seed, rng.DROPOUT)
    keep = 1.0 - hp.dropout_rate

    history = TrainingHistory()
    obj0, mse0 = _eval_objective(model, train_pairs, train_targets, hp.sparsity_l1)
    history.train_objective.append(obj0)
    history.train_mse.append(mse0)
    history.val_mse.append(_eval_objective(model, val_pairs, val_targets, 0.0)[1])

    views = model.param_views(model.theta)
    grad = np.zeros(model.n_params)
    grad_views = model.param_views(grad)
    adam_m = np.zeros(model.n_params)
    adam_v = np.zeros(model.n_params)
    theta = model.theta
    tgt_index = model.tgt_index
    lr, l1, l2 = hp.learning_rate, hp.sparsity_l1, hp.weight_decay_l2
    step = 0
    n_train = len(train_idx)

    for epoch in range(1, hp.epochs + 1):
        perm = shuffle_gen.permutation(n_train)
        for batch_no, start in enumerate(range(0, n_train, hp.batch_size)):
            idx = perm[start : start + hp.batch_size]
            batch = train_pairs[idx].transpose(1, 0, 2)  # (P, B, K)
            pb = np.ascontiguousarray(batch)
            pb_t = np.ascontiguousarray(batch.transpose(0, 2, 1))
            tb_t = np.ascontiguousarray(train_targets[idx].T)
            mask = None
            if hp.dropout_rate > 0.0:
                mask = (dropout_gen.random((P, len(idx), H)) >= hp.dropout_rate) / keep
            obj, _ = _batch_grad(views, tgt_index, pb, pb_t, tb_t, l1, mask, grad_views)
            if not np.isfinite(obj):
                raise TrainingDiverged(epoch, batch_no, obj)

            # Adam with bias correction; weight decay decoupled from the moments.
            step += 1
            np.multiply(adam_m, ADAM_BETA1, out=adam_m)
            adam_m += (1.0 - ADAM_BETA1) * grad
            np.multiply(adam_v, ADAM_BETA2, out=adam_v)
            adam_v += (1.0 - ADAM_BETA2) * (grad * grad)
            c1 = 1.0 - ADAM_BETA1**step
            c2_sqrt = (1.0 - ADAM_BETA2**step) ** 0.5
            # m_hat / (sqrt(v_hat) + eps) with the corrections folded into scalars
            update = adam_m * (c2_sqrt / c1)
            denom = np.sqrt(adam_v)
            denom += ADAM_EPS * c2_sqrt
            update /= denom
            if l2:
                update += l2 * theta
            theta -= lr * update

        obj_e, mse_e = _eval_objective(model, train_pairs, train_targets, l1)
        history.train_objective.append(obj_e)
        history.train_mse.append(mse_e)
        history.val_mse.append(_eval_objective(model, val_pairs, val_targets, 0.0)[1])

    model.history = history
    return model
