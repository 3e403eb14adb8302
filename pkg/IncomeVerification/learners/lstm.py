import json
from pathlib import Path

import numpy as np
from scipy.special import expit

from IncomeVerification import log
from IncomeVerification.IncomeVerificationError import (
    ConfigurationError, ContractViolation, TrainingError
)
from IncomeVerification.core.rng import make_rng
from IncomeVerification.dataStructure import Matrix, Structure, Vector

from .ffn import mae_subgradient


__all__ = [
    'LSTMParams', 'init_lstm', 'lstm_forward', 'lstm_gradients',
    'lstm_regress_train', 'lstm_predict', 'length_batches',
]


logger = log.get_logger('learners')

LSTM_FORMAT = 'lstm-params'
LSTM_VERSION = 1

_PARAMETER_NAMES = ('Wx', 'Wh', 'b', 'W1', 'b1', 'w2', 'b2')


class LSTMParams(Structure):
    """Single-layer LSTM regressor with dropout and a dense ReLU layer.

    Gate blocks in ``Wx`` (d x 4H), ``Wh`` (H x 4H) and ``b`` (4H) are ordered
    input, forget, output, candidate. The last hidden state goes through
    inverted dropout, ``W1`` / ``b1`` (ReLU) and ``w2`` / ``b2`` (linear).
    """

    Wx = Matrix()
    Wh = Matrix()
    b = Vector()
    W1 = Matrix()
    b1 = Vector()
    w2 = Vector()

    def __init__(
            self, Wx, Wh, b, W1, b1, w2, b2,
            dropout=0.5, target_scale=1.0, max_len=16, loss_trace=None):
        super().__init__()
        self.Wx = np.asarray(Wx, dtype=float)
        self.Wh = np.asarray(Wh, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.W1 = np.asarray(W1, dtype=float)
        self.b1 = np.asarray(b1, dtype=float)
        self.w2 = np.asarray(w2, dtype=float)
        self.b2 = float(b2)
        self.dropout = float(dropout)
        self.target_scale = float(target_scale)
        self.max_len = int(max_len)
        self.loss_trace = list(loss_trace or [])

        H = self.Wh.shape[0]
        if self.Wx.shape[1] != 4 * H or self.Wh.shape != (H, 4 * H) \
                or self.b.shape != (4 * H,):
            raise ContractViolation(
                f"Gate shapes {self.Wx.shape}, {self.Wh.shape}, {self.b.shape} "
                f"do not fit hidden size {H}."
            )
        if self.W1.shape[0] != H or self.W1.shape[1] != self.b1.shape[0] \
                or self.w2.shape != self.b1.shape:
            raise ContractViolation("Dense layer shapes do not fit the LSTM.")
        if not 0 <= self.dropout < 1:
            raise ConfigurationError(f"dropout must be in [0, 1), got {dropout}.")

    @property
    def input_dim(self):
        return self.Wx.shape[0]

    @property
    def hidden(self):
        return self.Wh.shape[0]

    def arrays(self):
        return {name: getattr(self, name) for name in _PARAMETER_NAMES}

    def to_dict(self):
        return {
            'format': LSTM_FORMAT,
            'version': LSTM_VERSION,
            **{name: np.asarray(value).tolist() for name, value in self.arrays().items()},
            'dropout': self.dropout,
            'target_scale': self.target_scale,
            'max_len': self.max_len,
        }

    @classmethod
    def from_dict(cls, data):
        if data.get('format') != LSTM_FORMAT or data.get('version') != LSTM_VERSION:
            raise ConfigurationError(
                f"Unsupported LSTM format {data.get('format')!r} "
                f"version {data.get('version')!r}."
            )
        return cls(
            *(data[name] for name in _PARAMETER_NAMES),
            dropout=data['dropout'], target_scale=data['target_scale'],
            max_len=data['max_len'],
        )

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))

    def __repr__(self):
        return (
            f'LSTMParams(input_dim={self.input_dim}, hidden={self.hidden}, '
            f'dense={len(self.b1)}, dropout={self.dropout})'
        )


def init_lstm(input_dim, rng, hidden=128, dense=200, dropout=0.5, output_bias=0.0):
    """Random gates (forget bias 1), He-scaled dense layer, zero output weights."""
    scale = 1 / np.sqrt(hidden)
    b = np.zeros(4 * hidden)
    b[hidden:2 * hidden] = 1.0

    return LSTMParams(
        Wx=rng.uniform(-scale, scale, (input_dim, 4 * hidden)),
        Wh=rng.uniform(-scale, scale, (hidden, 4 * hidden)),
        b=b,
        W1=rng.standard_normal((hidden, dense)) * np.sqrt(2.0 / hidden),
        b1=np.zeros(dense),
        w2=np.zeros(dense),
        b2=output_bias,
        dropout=dropout,
    )


def lstm_forward(params, X, mask=None):
    """Forward pass over a batch of equal-length sequences.

    Parameters
    ----------
    params : LSTMParams
    X : np.ndarray
        Input vectors, shape (batch, steps, input_dim).
    mask : np.ndarray, optional
        Dropout multipliers on the last hidden state, shape (batch, hidden);
        None in evaluation mode.

    Returns
    -------
    output : np.ndarray
        Shape (batch,), scaled units.
    cache : dict
    """
    B, T, _ = X.shape
    H = params.hidden
    h = np.zeros((B, H))
    c = np.zeros((B, H))

    steps = []
    for t in range(T):
        z = X[:, t] @ params.Wx + h @ params.Wh + params.b
        i = expit(z[:, :H])
        f = expit(z[:, H:2 * H])
        o = expit(z[:, 2 * H:3 * H])
        g = np.tanh(z[:, 3 * H:])
        c_prev, h_prev = c, h
        c = f * c_prev + i * g
        tanh_c = np.tanh(c)
        h = o * tanh_c
        steps.append((h_prev, c_prev, i, f, o, g, tanh_c))

    h_drop = h if mask is None else h * mask
    z1 = h_drop @ params.W1 + params.b1
    a1 = np.maximum(z1, 0.0)
    output = a1 @ params.w2 + params.b2

    cache = {'steps': steps, 'h_drop': h_drop, 'z1': z1, 'a1': a1, 'mask': mask}
    return output, cache


def lstm_gradients(params, X, t, mask=None):
    """MAE loss, parameter gradients and input gradients by backpropagation
    through time.

    Returns
    -------
    loss : float
    grads : dict
        Gradient of every array in ``LSTMParams.arrays()``.
    dX : np.ndarray
        Gradient w.r.t. the input vectors, shape of ``X``.
    """
    output, cache = lstm_forward(params, X, mask)
    loss = float(np.mean(np.abs(output - t)))

    d_out = mae_subgradient(output, t)
    grads = {
        'w2': cache['a1'].T @ d_out,
        'b2': d_out.sum(),
    }
    dz1 = np.outer(d_out, params.w2) * (cache['z1'] > 0)
    grads['W1'] = cache['h_drop'].T @ dz1
    grads['b1'] = dz1.sum(axis=0)
    dh = dz1 @ params.W1.T
    if mask is not None:
        dh = dh * mask

    dWx = np.zeros_like(params.Wx)
    dWh = np.zeros_like(params.Wh)
    db = np.zeros_like(params.b)
    dX = np.zeros_like(X)
    dc = np.zeros_like(dh)

    for step in reversed(range(X.shape[1])):
        h_prev, c_prev, i, f, o, g, tanh_c = cache['steps'][step]
        do = dh * tanh_c
        dc = dc + dh * o * (1 - tanh_c ** 2)
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dz = np.concatenate([
            di * i * (1 - i),
            df * f * (1 - f),
            do * o * (1 - o),
            dg * (1 - g ** 2),
        ], axis=1)

        dWx += X[:, step].T @ dz
        dWh += h_prev.T @ dz
        db += dz.sum(axis=0)
        dX[:, step] = dz @ params.Wx.T
        dh = dz @ params.Wh.T
        dc = dc * f

    grads['Wx'] = dWx
    grads['Wh'] = dWh
    grads['b'] = db

    return loss, grads, dX


def _cap(sequence, max_len):
    return list(sequence)[:max_len]


def length_batches(lengths, batch_size, rng=None):
    """Group row indices into batches of equal sequence length.

    Without ``rng`` batches follow ascending length and row order; with it,
    rows within a length and the batch order are shuffled.
    """
    lengths = np.asarray(lengths)
    batches = []
    for length in np.unique(lengths):
        rows = np.flatnonzero(lengths == length)
        if rng is not None:
            rows = rng.permutation(rows)
        batches += [rows[s:s + batch_size] for s in range(0, len(rows), batch_size)]

    if rng is not None:
        batches = [batches[i] for i in rng.permutation(len(batches))]

    return batches


def _batch_inputs(matrix, sequences, rows):
    if len(sequences[rows[0]]) == 0:
        return np.broadcast_to(matrix.mean(axis=0), (len(rows), 1, matrix.shape[1])).copy()
    index = np.array([sequences[r] for r in rows])
    return matrix[index]


@log.log_time('learners')
def lstm_regress_train(
        sequences, embeddings, targets, epochs=10, learning_rate=0.01,
        dropout=0.5, hidden=128, dense=200, batch_size=32, max_len=16, seed=0):
    """Train an LSTM regressor on MAE and tune the embedding rows it reads.

    Sequences longer than ``max_len`` are truncated. An empty sequence is
    fed as a single step holding the mean embedding vector and does not
    update any row.

    Parameters
    ----------
    sequences : list of list of int
        Token row indices into ``embeddings``.
    embeddings : Embeddings
        Initial vectors; not modified.
    targets : array_like
        Targets in dollars.
    epochs, learning_rate, dropout, hidden, dense, batch_size, max_len, seed
        Training configuration; gradient descent with constant learning rate.

    Returns
    -------
    params : LSTMParams
    tuned : Embeddings
    """
    targets = np.asarray(targets, dtype=float)
    if len(sequences) != len(targets) or len(targets) == 0:
        raise ContractViolation(
            f"Got {len(sequences)} sequences for {len(targets)} targets."
        )

    sequences = [_cap(s, max_len) for s in sequences]
    n_empty = sum(1 for s in sequences if len(s) == 0)
    if n_empty:
        logger.warning(f'{n_empty} empty sequences use the mean-vector fallback.')

    rng = make_rng(seed)
    tuned = embeddings.copy()
    matrix = tuned.matrix

    target_scale = float(np.median(np.abs(targets))) or 1.0
    t = targets / target_scale

    params = init_lstm(
        embeddings.dim, rng, hidden, dense, dropout, output_bias=np.median(t)
    )
    params.target_scale = target_scale
    params.max_len = max_len

    lengths = [len(s) for s in sequences]
    for epoch in range(epochs):
        epoch_loss = 0.0
        for rows in length_batches(lengths, batch_size, rng):
            X = _batch_inputs(matrix, sequences, rows)
            mask = None
            if dropout > 0:
                mask = (rng.random((len(rows), hidden)) >= dropout) / (1 - dropout)

            loss, grads, dX = lstm_gradients(params, X, t[rows], mask)
            if not np.isfinite(loss):
                raise TrainingError(
                    f"Non-finite LSTM loss {loss} in epoch {epoch} "
                    f"(learning rate {learning_rate}, sequence length {X.shape[1]})."
                )

            for name, grad in grads.items():
                setattr(params, name, getattr(params, name) - learning_rate * grad)

            if lengths[rows[0]] > 0:
                index = np.array([sequences[r] for r in rows])
                np.add.at(matrix, index, -learning_rate * dX)

            epoch_loss += loss * len(rows)

        params.loss_trace.append(epoch_loss / len(t))
        logger.debug(f'LSTM epoch {epoch}: MAE {params.loss_trace[-1]:.5f}')

    logger.info(
        f'Trained LSTM (hidden {hidden}, dense {dense}) for {epochs} epochs on '
        f'{len(t)} sequences.'
    )

    return params, tuned


def lstm_predict(params, embeddings, sequences, batch_size=256):
    """Predicted dollars for token sequences (evaluation mode), clamped at 0."""
    sequences = [_cap(s, params.max_len) for s in sequences]
    predictions = np.zeros(len(sequences))
    for rows in length_batches([len(s) for s in sequences], batch_size):
        output, _ = lstm_forward(params, _batch_inputs(embeddings.matrix, sequences, rows))
        predictions[rows] = output * params.target_scale

    return np.maximum(predictions, 0.0)
