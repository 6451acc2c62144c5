"""Character-level bidirectional LSTM classifier, implemented on numpy.

Architecture: embedding lookup over the 30-symbol name vocabulary, a
stack of bidirectional LSTM layers whose per-step outputs (forward and
backward concatenated) feed the next layer, inter-layer dropout during
training, and a dense softmax head.  The classification feature is the
forward direction's state at the last window position concatenated with
the backward direction's state at position zero, so both halves have
seen the whole window.

Everything runs in float64 and all randomness flows from explicit seeds:
initialization, the train/validation split, class balancing, batch
shuffling, and dropout masks.  Two runs with the same seed produce
bit-identical parameter trajectories.

Gradients are exact backpropagation through time across both directions
and all layers; see the finite-difference tests for the verification.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import json
import struct

import numpy as np

from .core import RaceSet
from .errors import (
    CorruptFileError,
    InsufficientClassError,
    ShapeMismatchError,
)
from .names import NEURAL, VOCAB_SIZE, WINDOW, encode_name, is_valid_name, normalize

TRAIN = "train"
EVAL = "eval"

# gate slices within the stacked 4H dimension: input, forget, candidate, output
_I, _F, _G, _O = range(4)

MAGIC = b"NPRX"
FORMAT_VERSION = 1


@dataclass
class LstmDirection:
    """Weights for one direction of one layer: four gates stacked columnwise."""

    w_in: np.ndarray  # (in_dim, 4*hidden)
    w_rec: np.ndarray  # (hidden, 4*hidden)
    bias: np.ndarray  # (4*hidden,)


@dataclass
class NetworkParams:
    embedding: np.ndarray  # (vocab, embed_dim)
    layers: list[tuple[LstmDirection, LstmDirection]]  # (forward, backward)
    dense_w: np.ndarray  # (2*hidden, n_classes)
    dense_b: np.ndarray  # (n_classes,)
    dropout: float = 0.2

    @property
    def embed_dim(self) -> int:
        return self.embedding.shape[1]

    @property
    def hidden(self) -> int:
        return self.layers[0][0].w_rec.shape[0]

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @property
    def n_classes(self) -> int:
        return self.dense_w.shape[1]

    def named_arrays(self):
        """(name, array) pairs in a fixed, stable order."""
        yield "embedding", self.embedding
        for l, (fwd, bwd) in enumerate(self.layers):
            for tag, d in (("fwd", fwd), ("bwd", bwd)):
                yield f"layer{l}.{tag}.w_in", d.w_in
                yield f"layer{l}.{tag}.w_rec", d.w_rec
                yield f"layer{l}.{tag}.bias", d.bias
        yield "dense_w", self.dense_w
        yield "dense_b", self.dense_b

    def validate(self) -> None:
        if self.embedding.ndim != 2 or self.embedding.shape[0] != VOCAB_SIZE:
            raise ShapeMismatchError(f"embedding must be ({VOCAB_SIZE}, d), got {self.embedding.shape}")
        if not self.layers:
            raise ShapeMismatchError("need at least one recurrent layer")
        hidden = self.hidden
        for l, (fwd, bwd) in enumerate(self.layers):
            in_dim = self.embed_dim if l == 0 else 2 * hidden
            for tag, d in (("fwd", fwd), ("bwd", bwd)):
                if d.w_in.shape != (in_dim, 4 * hidden):
                    raise ShapeMismatchError(
                        f"layer{l}.{tag}.w_in expected {(in_dim, 4 * hidden)}, got {d.w_in.shape}"
                    )
                if d.w_rec.shape != (hidden, 4 * hidden):
                    raise ShapeMismatchError(
                        f"layer{l}.{tag}.w_rec expected {(hidden, 4 * hidden)}, got {d.w_rec.shape}"
                    )
                if d.bias.shape != (4 * hidden,):
                    raise ShapeMismatchError(
                        f"layer{l}.{tag}.bias expected {(4 * hidden,)}, got {d.bias.shape}"
                    )
        if self.dense_w.shape[0] != 2 * hidden or self.dense_w.ndim != 2:
            raise ShapeMismatchError(
                f"dense_w expected (2*{hidden}, classes), got {self.dense_w.shape}"
            )
        if self.dense_b.shape != (self.dense_w.shape[1],):
            raise ShapeMismatchError(
                f"dense_b expected ({self.dense_w.shape[1]},), got {self.dense_b.shape}"
            )
        for name, arr in self.named_arrays():
            if not np.isfinite(arr).all():
                raise ShapeMismatchError(f"{name} contains non-finite values")

    def copy(self) -> "NetworkParams":
        return NetworkParams(
            embedding=self.embedding.copy(),
            layers=[
                (
                    LstmDirection(f.w_in.copy(), f.w_rec.copy(), f.bias.copy()),
                    LstmDirection(b.w_in.copy(), b.w_rec.copy(), b.bias.copy()),
                )
                for f, b in self.layers
            ],
            dense_w=self.dense_w.copy(),
            dense_b=self.dense_b.copy(),
            dropout=self.dropout,
        )


def init_params(
    embed_dim: int = 256,
    hidden: int = 512,
    layers: int = 4,
    n_classes: int = 4,
    dropout: float = 0.2,
    seed: int = 0,
) -> NetworkParams:
    """Seeded initialization: uniform +-1/sqrt(fan_in), forget-gate bias 1."""
    rng = np.random.default_rng(seed)

    def uniform(fan_in, shape):
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape)

    stack = []
    for l in range(layers):
        in_dim = embed_dim if l == 0 else 2 * hidden
        pair = []
        for _ in range(2):
            bias = np.zeros(4 * hidden)
            bias[_F * hidden : (_F + 1) * hidden] = 1.0
            pair.append(
                LstmDirection(
                    w_in=uniform(in_dim, (in_dim, 4 * hidden)),
                    w_rec=uniform(hidden, (hidden, 4 * hidden)),
                    bias=bias,
                )
            )
        stack.append((pair[0], pair[1]))
    params = NetworkParams(
        embedding=uniform(embed_dim, (VOCAB_SIZE, embed_dim)),
        layers=stack,
        dense_w=uniform(2 * hidden, (2 * hidden, n_classes)),
        dense_b=np.zeros(n_classes),
        dropout=dropout,
    )
    params.validate()
    return params


def zero_grads(params: NetworkParams) -> dict[str, np.ndarray]:
    return {name: np.zeros_like(arr) for name, arr in params.named_arrays()}


def _sigmoid(x):
    # exp overflow saturates to inf and the quotient to exactly 0, which is
    # the correctly rounded value, so the warning is just noise
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-x))


def _log_softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def _run_direction(direction: LstmDirection, x, reverse: bool):
    """One direction's pass over the whole window; returns outputs and cache."""
    batch, steps, in_dim = x.shape
    hidden = direction.w_rec.shape[0]
    order = range(steps - 1, -1, -1) if reverse else range(steps)
    # the input contribution has no recurrence: one big matmul up front
    zx = (x.reshape(batch * steps, in_dim) @ direction.w_in).reshape(
        batch, steps, 4 * hidden
    )
    zx += direction.bias
    h = np.zeros((batch, hidden))
    c = np.zeros((batch, hidden))
    gates = np.empty((batch, steps, 4, hidden))
    c_prev = np.empty((batch, steps, hidden))
    h_prev = np.empty((batch, steps, hidden))
    tanh_c = np.empty((batch, steps, hidden))
    out = np.empty((batch, steps, hidden))
    for t in order:
        z = zx[:, t] + h @ direction.w_rec
        i = _sigmoid(z[:, 0 * hidden : 1 * hidden])
        f = _sigmoid(z[:, 1 * hidden : 2 * hidden])
        g = np.tanh(z[:, 2 * hidden : 3 * hidden])
        o = _sigmoid(z[:, 3 * hidden : 4 * hidden])
        c_prev[:, t] = c
        h_prev[:, t] = h
        c = f * c + i * g
        tc = np.tanh(c)
        h = o * tc
        gates[:, t, _I] = i
        gates[:, t, _F] = f
        gates[:, t, _G] = g
        gates[:, t, _O] = o
        tanh_c[:, t] = tc
        out[:, t] = h
    cache = {
        "x": x,
        "gates": gates,
        "c_prev": c_prev,
        "h_prev": h_prev,
        "tanh_c": tanh_c,
        "reverse": reverse,
    }
    return out, cache


def _backprop_direction(direction: LstmDirection, cache, d_out):
    """BPTT through one direction; returns input grads and weight grads."""
    x = cache["x"]
    gates = cache["gates"]
    batch, steps, _, hidden = gates.shape
    order = range(steps - 1, -1, -1) if cache["reverse"] else range(steps)
    dz = np.empty((batch, steps, 4 * hidden))
    dh_next = np.zeros((batch, hidden))
    dc_next = np.zeros((batch, hidden))
    for t in reversed(list(order)):
        i = gates[:, t, _I]
        f = gates[:, t, _F]
        g = gates[:, t, _G]
        o = gates[:, t, _O]
        tc = cache["tanh_c"][:, t]
        dh = d_out[:, t] + dh_next
        do = dh * tc
        dc = dh * o * (1.0 - tc * tc) + dc_next
        df = dc * cache["c_prev"][:, t]
        di = dc * g
        dg = dc * i
        dc_next = dc * f
        dz_t = dz[:, t]
        dz_t[:, 0 * hidden : 1 * hidden] = di * i * (1.0 - i)
        dz_t[:, 1 * hidden : 2 * hidden] = df * f * (1.0 - f)
        dz_t[:, 2 * hidden : 3 * hidden] = dg * (1.0 - g * g)
        dz_t[:, 3 * hidden : 4 * hidden] = do * o * (1.0 - o)
        dh_next = dz_t @ direction.w_rec.T
    flat_x = x.reshape(batch * steps, -1)
    flat_dz = dz.reshape(batch * steps, -1)
    d_x = (flat_dz @ direction.w_in.T).reshape(x.shape)
    d_w_in = flat_x.T @ flat_dz
    d_w_rec = cache["h_prev"].reshape(batch * steps, hidden).T @ flat_dz
    d_bias = flat_dz.sum(axis=0)
    return d_x, d_w_in, d_w_rec, d_bias


def _forward_cached(params: NetworkParams, codes, mode: str, dropout_seed: int):
    if mode not in (TRAIN, EVAL):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    codes = np.asarray(codes, dtype=np.int64)
    if codes.ndim == 1:
        codes = codes[None, :]
    # encoded names use the fixed window, but the network itself runs on
    # any sequence length (handy for small test configurations)
    if codes.ndim != 2 or codes.shape[1] < 1:
        raise ShapeMismatchError(f"codes must be (batch, steps), got {codes.shape}")
    if codes.min() < 0 or codes.max() >= VOCAB_SIZE:
        raise ShapeMismatchError("codes out of vocabulary range")
    hidden = params.hidden
    drop_rng = np.random.default_rng(dropout_seed)
    use_dropout = mode == TRAIN and params.dropout > 0.0

    x = params.embedding[codes]  # (B, T, D)
    layer_caches = []
    for l, (fwd, bwd) in enumerate(params.layers):
        out_f, cache_f = _run_direction(fwd, x, reverse=False)
        out_b, cache_b = _run_direction(bwd, x, reverse=True)
        out = np.concatenate([out_f, out_b], axis=2)  # (B, T, 2H)
        mask = None
        if l < params.n_layers - 1:
            if use_dropout:
                keep = 1.0 - params.dropout
                mask = (drop_rng.random(out.shape) < keep) / keep
                x = out * mask
            else:
                x = out
        layer_caches.append({"fwd": cache_f, "bwd": cache_b, "mask": mask, "out": out})

    top = layer_caches[-1]["out"]
    feat = np.concatenate([top[:, -1, :hidden], top[:, 0, hidden:]], axis=1)
    logits = feat @ params.dense_w + params.dense_b
    log_probs = _log_softmax(logits)
    probs = np.exp(log_probs)
    cache = {
        "codes": codes,
        "layers": layer_caches,
        "feat": feat,
        "log_probs": log_probs,
        "probs": probs,
    }
    return probs, cache


def forward(params: NetworkParams, codes, mode: str = EVAL, dropout_seed: int = 0) -> np.ndarray:
    """Class probabilities for a batch of encoded names, shape (batch, classes).

    Eval mode is a pure function of (params, codes); train mode applies
    seeded inter-layer dropout.
    """
    probs, _ = _forward_cached(params, codes, mode, dropout_seed)
    return probs


def loss_and_gradients(
    params: NetworkParams,
    codes,
    labels,
    mode: str = TRAIN,
    dropout_seed: int = 0,
):
    """Mean cross-entropy over the batch plus gradients for every parameter.

    Gradients flow through the dense head, both directions of every layer,
    and the embedding rows that the batch touched.
    """
    labels = np.asarray(labels, dtype=np.int64)
    probs, cache = _forward_cached(params, codes, mode, dropout_seed)
    batch = probs.shape[0]
    if labels.shape != (batch,):
        raise ShapeMismatchError(f"labels must be ({batch},), got {labels.shape}")
    if labels.min() < 0 or labels.max() >= params.n_classes:
        raise ShapeMismatchError("label outside class range")
    loss = float(-cache["log_probs"][np.arange(batch), labels].mean())

    grads = zero_grads(params)
    hidden = params.hidden

    d_logits = cache["probs"].copy()
    d_logits[np.arange(batch), labels] -= 1.0
    d_logits /= batch
    grads["dense_w"] = cache["feat"].T @ d_logits
    grads["dense_b"] = d_logits.sum(axis=0)
    d_feat = d_logits @ params.dense_w.T

    steps = cache["codes"].shape[1]
    d_out = np.zeros((batch, steps, 2 * hidden))
    d_out[:, -1, :hidden] = d_feat[:, :hidden]
    d_out[:, 0, hidden:] += d_feat[:, hidden:]

    for l in range(params.n_layers - 1, -1, -1):
        layer_cache = cache["layers"][l]
        fwd, bwd = params.layers[l]
        d_x_f, d_w_in_f, d_w_rec_f, d_bias_f = _backprop_direction(
            fwd, layer_cache["fwd"], d_out[:, :, :hidden]
        )
        d_x_b, d_w_in_b, d_w_rec_b, d_bias_b = _backprop_direction(
            bwd, layer_cache["bwd"], d_out[:, :, hidden:]
        )
        grads[f"layer{l}.fwd.w_in"] = d_w_in_f
        grads[f"layer{l}.fwd.w_rec"] = d_w_rec_f
        grads[f"layer{l}.fwd.bias"] = d_bias_f
        grads[f"layer{l}.bwd.w_in"] = d_w_in_b
        grads[f"layer{l}.bwd.w_rec"] = d_w_rec_b
        grads[f"layer{l}.bwd.bias"] = d_bias_b
        d_input = d_x_f + d_x_b
        if l > 0:
            mask = cache["layers"][l - 1]["mask"]
            d_out = d_input if mask is None else d_input * mask
        else:
            d_embed = grads["embedding"]
            flat_codes = cache["codes"].ravel()
            np.add.at(d_embed, flat_codes, d_input.reshape(-1, params.embed_dim))
    return loss, grads


@dataclass
class AdamState:
    """Adam moments plus the hyperparameters of the update rule.

    Weight decay defaults to the coupled form (decay added to the gradient
    before the moment updates); set ``decoupled`` for the variant that
    shrinks parameters directly.
    """

    lr: float = 0.001
    weight_decay: float = 0.004
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    decoupled: bool = False
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def for_params(cls, params: NetworkParams, **kwargs) -> "AdamState":
        state = cls(**kwargs)
        for name, arr in params.named_arrays():
            state.m[name] = np.zeros_like(arr)
            state.v[name] = np.zeros_like(arr)
        return state


def adam_step(params: NetworkParams, grads: dict[str, np.ndarray], state: AdamState):
    """One in-place Adam update with bias correction; returns (params, state)."""
    state.step += 1
    t = state.step
    bc1 = 1.0 - state.beta1**t
    bc2 = 1.0 - state.beta2**t
    for name, theta in params.named_arrays():
        g = grads[name]
        if g.shape != theta.shape:
            raise ShapeMismatchError(
                f"gradient {name} has shape {g.shape}, parameter {theta.shape}"
            )
        if state.weight_decay != 0.0 and not state.decoupled:
            g = g + state.weight_decay * theta
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        update = state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.epsilon)
        if state.weight_decay != 0.0 and state.decoupled:
            update = update + state.lr * state.weight_decay * theta
        theta -= update
    return params, state


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    epochs: int = 10
    batch_size: int = 512
    split: float = 0.8
    embed_dim: int = 256
    hidden: int = 512
    layers: int = 4
    dropout: float = 0.2
    lr: float = 0.001
    weight_decay: float = 0.004
    decoupled_decay: bool = False

    def __post_init__(self):
        if not 0.0 < self.split < 1.0:
            raise ValueError("split must be in (0, 1)")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_loss: float
    val_accuracy: float


def prepare_dataset(records, races: RaceSet | None = None):
    """Normalize, validate, and encode records into (codes, labels).

    Records whose names normalize to nothing or fail the length rule are
    dropped, mirroring the table-construction filters.
    """
    from .errors import EmptyAfterNormalizationError

    races = races or RaceSet()
    codes_list = []
    labels = []
    for rec in records:
        if rec.race is None or rec.race not in races:
            continue
        try:
            first = normalize(rec.first, NEURAL)
            last = normalize(rec.last, NEURAL)
        except EmptyAfterNormalizationError:
            continue
        if not is_valid_name(first, last):
            continue
        codes_list.append(encode_name(first, last))
        labels.append(races.index(rec.race))
    if not codes_list:
        return np.zeros((0, WINDOW), dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.stack(codes_list), np.array(labels, dtype=np.int64)


def split_and_balance(labels, n_classes: int, split: float, rng: np.random.Generator):
    """Stratified split, then undersample the training side to the minority size.

    Returns (train_idx, val_idx); the training indices have exactly equal
    class counts.
    """
    train_parts = []
    val_parts = []
    for cls in range(n_classes):
        members = np.nonzero(labels == cls)[0]
        if members.size < 2:
            raise InsufficientClassError(
                f"class {cls} has {members.size} usable records; need at least 2"
            )
        perm = rng.permutation(members.size)
        n_train = min(max(int(members.size * split), 1), members.size - 1)
        train_parts.append(members[perm[:n_train]])
        val_parts.append(members[perm[n_train:]])
    minority = min(part.size for part in train_parts)
    balanced = [
        part[rng.choice(part.size, size=minority, replace=False)]
        for part in train_parts
    ]
    train_idx = np.concatenate(balanced)
    val_idx = np.concatenate(val_parts)
    return np.sort(train_idx), np.sort(val_idx)


def train(records, cfg: TrainConfig, races: RaceSet | None = None):
    """Full training run; returns (best-validation params, per-epoch stats).

    Pipeline: encode, stratified 80:20 split, undersample the training
    portion to the minority class, then seeded shuffled mini-batches with
    Adam.  The parameters returned are a copy from the epoch with the best
    validation accuracy.
    """
    races = races or RaceSet()
    codes, labels = prepare_dataset(records, races)
    seeds = np.random.SeedSequence(cfg.seed).spawn(4)
    split_rng = np.random.default_rng(seeds[0])
    epoch_rng = np.random.default_rng(seeds[1])
    dropout_rng = np.random.default_rng(seeds[2])

    train_idx, val_idx = split_and_balance(labels, len(races), cfg.split, split_rng)
    x_train, y_train = codes[train_idx], labels[train_idx]
    x_val, y_val = codes[val_idx], labels[val_idx]

    params = init_params(
        embed_dim=cfg.embed_dim,
        hidden=cfg.hidden,
        layers=cfg.layers,
        n_classes=len(races),
        dropout=cfg.dropout,
        seed=seeds[3],
    )
    state = AdamState.for_params(
        params,
        lr=cfg.lr,
        weight_decay=cfg.weight_decay,
        decoupled=cfg.decoupled_decay,
    )

    log: list[EpochStats] = []
    best_params = params.copy()
    best_acc = -1.0
    for epoch in range(1, cfg.epochs + 1):
        order = epoch_rng.permutation(x_train.shape[0])
        total_loss = 0.0
        for start in range(0, order.size, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            seed = int(dropout_rng.integers(0, 2**63))
            loss, grads = loss_and_gradients(
                params, x_train[batch], y_train[batch], mode=TRAIN, dropout_seed=seed
            )
            adam_step(params, grads, state)
            total_loss += loss * batch.size
        train_loss = total_loss / order.size
        val_accuracy = _accuracy(params, x_val, y_val, cfg.batch_size)
        log.append(EpochStats(epoch, train_loss, val_accuracy))
        if val_accuracy > best_acc:
            best_acc = val_accuracy
            best_params = params.copy()
    return best_params, log


def _accuracy(params, codes, labels, batch_size):
    hits = 0
    for start in range(0, codes.shape[0], batch_size):
        probs = forward(params, codes[start : start + batch_size], mode=EVAL)
        hits += int((probs.argmax(axis=1) == labels[start : start + batch_size]).sum())
    return hits / codes.shape[0] if codes.shape[0] else 0.0


def predict_proba(params: NetworkParams, first: str, last: str) -> np.ndarray:
    """Probabilities for one raw name; always produces a valid vector."""
    codes = encode_name(normalize(first, NEURAL), normalize(last, NEURAL))
    return forward(params, codes[None, :], mode=EVAL)[0]


def predict_proba_batch(params: NetworkParams, codes, batch_size: int = 512) -> np.ndarray:
    """Eval-mode probabilities for pre-encoded names, in input order."""
    codes = np.asarray(codes, dtype=np.int64)
    outputs = [
        forward(params, codes[start : start + batch_size], mode=EVAL)
        for start in range(0, codes.shape[0], batch_size)
    ]
    return np.concatenate(outputs) if outputs else np.zeros((0, params.n_classes))


def save_params(params: NetworkParams, path) -> None:
    """Write a versioned binary container with explicit dimension metadata."""
    params.validate()
    arrays = list(params.named_arrays())
    header = {
        "format_version": FORMAT_VERSION,
        "embed_dim": params.embed_dim,
        "hidden": params.hidden,
        "layers": params.n_layers,
        "n_classes": params.n_classes,
        "dropout": params.dropout,
        "arrays": [[name, list(arr.shape)] for name, arr in arrays],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    try:
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<II", FORMAT_VERSION, len(blob)))
            fh.write(blob)
            for _, arr in arrays:
                fh.write(np.ascontiguousarray(arr, dtype=np.float64).tobytes())
    except OSError as exc:
        raise OSError(f"failed writing parameters to {path}: {exc}") from exc


def load_params(path, expect_hidden: int | None = None) -> NetworkParams:
    """Load a parameter container; bit-exact inverse of :func:`save_params`.

    Raises:
        CorruptFileError: bad magic, truncation, trailing bytes, or
            metadata inconsistent with the stored arrays.
        ShapeMismatchError: ``expect_hidden`` given and different from the
            file's hidden size.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < len(MAGIC) + 8 or data[: len(MAGIC)] != MAGIC:
        raise CorruptFileError(f"{path}: not a parameter container")
    version, header_len = struct.unpack_from("<II", data, len(MAGIC))
    if version != FORMAT_VERSION:
        raise CorruptFileError(f"{path}: unsupported format version {version}")
    offset = len(MAGIC) + 8
    try:
        header = json.loads(data[offset : offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptFileError(f"{path}: unreadable header: {exc}") from exc
    offset += header_len
    if expect_hidden is not None and header.get("hidden") != expect_hidden:
        raise ShapeMismatchError(
            f"{path}: file has hidden={header.get('hidden')}, expected {expect_hidden}"
        )
    arrays: dict[str, np.ndarray] = {}
    for name, shape in header.get("arrays", []):
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 8
        if offset + nbytes > len(data):
            raise CorruptFileError(f"{path}: truncated while reading {name}")
        arrays[name] = np.frombuffer(
            data, dtype="<f8", count=count, offset=offset
        ).reshape(shape).copy()
        offset += nbytes
    if offset != len(data):
        raise CorruptFileError(f"{path}: {len(data) - offset} trailing bytes")
    try:
        stack = []
        for l in range(int(header["layers"])):
            dirs = []
            for tag in ("fwd", "bwd"):
                dirs.append(
                    LstmDirection(
                        w_in=arrays[f"layer{l}.{tag}.w_in"],
                        w_rec=arrays[f"layer{l}.{tag}.w_rec"],
                        bias=arrays[f"layer{l}.{tag}.bias"],
                    )
                )
            stack.append((dirs[0], dirs[1]))
        params = NetworkParams(
            embedding=arrays["embedding"],
            layers=stack,
            dense_w=arrays["dense_w"],
            dense_b=arrays["dense_b"],
            dropout=float(header["dropout"]),
        )
    except KeyError as exc:
        raise CorruptFileError(f"{path}: missing array {exc}") from exc
    try:
        params.validate()
    except ShapeMismatchError as exc:
        raise CorruptFileError(f"{path}: inconsistent shapes: {exc}") from exc
    if (
        params.embed_dim != header["embed_dim"]
        or params.hidden != header["hidden"]
        or params.n_classes != header["n_classes"]
    ):
        raise CorruptFileError(f"{path}: header dimensions disagree with arrays")
    return params


def write_training_log(log, path) -> None:
    """Per-epoch CSV: epoch, train loss, validation accuracy."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write("epoch,train_loss,val_accuracy\n")
            for row in log:
                fh.write(f"{row.epoch},{row.train_loss!r},{row.val_accuracy!r}\n")
    except OSError as exc:
        raise OSError(f"failed writing training log to {path}: {exc}") from exc
