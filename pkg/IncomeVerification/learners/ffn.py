import json
from pathlib import Path

import numpy as np

from IncomeVerification import log
from IncomeVerification.IncomeVerificationError import (
    ConfigurationError, ContractViolation, TrainingError
)
from IncomeVerification.core.rng import make_rng
from IncomeVerification.dataStructure import SizedNdArray, Structure


__all__ = [
    'ACTIVATIONS', 'FFNParams', 'init_ffn', 'ffn_forward', 'ffn_gradients',
    'ffn_train', 'ffn_predict', 'mae_subgradient',
]


logger = log.get_logger('learners')

FFN_FORMAT = 'ffn-params'
FFN_VERSION = 1

ACTIVATIONS = {
    'relu': (lambda z: np.maximum(z, 0.0), lambda z, a: (z > 0).astype(float)),
    'tanh': (np.tanh, lambda z, a: 1.0 - a ** 2),
    'linear': (lambda z: z, lambda z, a: np.ones_like(z)),
}


def mae_subgradient(prediction, target):
    """Derivative of mean |prediction - target| w.r.t. each prediction (0 at ties)."""
    return np.sign(prediction - target) / len(target)


class FFNParams(Structure):
    """Feed-forward network parameters with input and target scaling.

    Attributes
    ----------
    layer_sizes : list of int
        Input size, hidden sizes and output size 1.
    weights : list of np.ndarray
        ``weights[l]`` has shape (layer_sizes[l], layer_sizes[l + 1]).
    biases : list of np.ndarray
    activations : list of str
        One per weight layer; the last is 'linear'.
    input_mean, input_scale : np.ndarray
        Inputs are standardized with these before the first layer.
    target_scale : float
        Network outputs are in units of ``target_scale`` dollars.
    loss_trace : list of float
        Mean training MAE (scaled units) per epoch.
    """

    input_mean = SizedNdArray(size='n_inputs')
    input_scale = SizedNdArray(size='n_inputs')

    def __init__(
            self, weights, biases, activations,
            input_mean=None, input_scale=None, target_scale=1.0, loss_trace=None):
        super().__init__()
        self.weights = [np.asarray(w, dtype=float) for w in weights]
        self.biases = [np.asarray(b, dtype=float) for b in biases]
        self.activations = list(activations)

        for w, b, a in zip(self.weights, self.biases, self.activations):
            if w.shape[1] != b.shape[0]:
                raise ContractViolation("Bias does not match its weight matrix.")
            if a not in ACTIVATIONS:
                raise ConfigurationError(f"Unknown activation {a!r}.")
        for w, w_next in zip(self.weights, self.weights[1:]):
            if w.shape[1] != w_next.shape[0]:
                raise ContractViolation(
                    f"Inconsistent layer sizes {w.shape} -> {w_next.shape}."
                )

        n_in = self.weights[0].shape[0]
        self.input_mean = (
            np.zeros(n_in) if input_mean is None else np.asarray(input_mean, dtype=float)
        )
        self.input_scale = (
            np.ones(n_in) if input_scale is None else np.asarray(input_scale, dtype=float)
        )
        self.target_scale = float(target_scale)
        self.loss_trace = list(loss_trace or [])

    @property
    def layer_sizes(self):
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def n_inputs(self):
        return self.weights[0].shape[0]

    def copy(self):
        return FFNParams(
            [w.copy() for w in self.weights], [b.copy() for b in self.biases],
            self.activations, self.input_mean, self.input_scale, self.target_scale,
            self.loss_trace,
        )

    def to_dict(self):
        return {
            'format': FFN_FORMAT,
            'version': FFN_VERSION,
            'layer_sizes': self.layer_sizes,
            'activations': self.activations,
            'weights': [w.tolist() for w in self.weights],
            'biases': [b.tolist() for b in self.biases],
            'input_mean': self.input_mean.tolist(),
            'input_scale': self.input_scale.tolist(),
            'target_scale': self.target_scale,
        }

    @classmethod
    def from_dict(cls, data):
        if data.get('format') != FFN_FORMAT or data.get('version') != FFN_VERSION:
            raise ConfigurationError(
                f"Unsupported network format {data.get('format')!r} "
                f"version {data.get('version')!r}."
            )
        sizes = data['layer_sizes']
        weights = [
            np.array(w, dtype=float).reshape(n_in, n_out)
            for w, n_in, n_out in zip(data['weights'], sizes, sizes[1:])
        ]
        return cls(
            weights, data['biases'], data['activations'],
            data['input_mean'], data['input_scale'], data['target_scale'],
        )

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))

    def __repr__(self):
        return f'FFNParams(layer_sizes={self.layer_sizes})'


def init_ffn(layer_sizes, rng, activation='relu', output_bias=0.0):
    """Initialize a network: He-scaled hidden layers, zero output weights.

    With zero output weights the initial prediction equals ``output_bias``
    for every input.
    """
    weights, biases, activations = [], [], []
    for n_in, n_out in zip(layer_sizes[:-2], layer_sizes[1:-1]):
        weights.append(rng.standard_normal((n_in, n_out)) * np.sqrt(2.0 / n_in))
        biases.append(np.zeros(n_out))
        activations.append(activation)

    weights.append(np.zeros((layer_sizes[-2], layer_sizes[-1])))
    biases.append(np.full(layer_sizes[-1], float(output_bias)))
    activations.append('linear')

    return FFNParams(weights, biases, activations)


def _forward(params, Z):
    pre, post = [], [Z]
    a = Z
    for w, b, activation in zip(params.weights, params.biases, params.activations):
        z = a @ w + b
        a = ACTIVATIONS[activation][0](z)
        pre.append(z)
        post.append(a)
    return pre, post


def ffn_forward(params, Z):
    """Network output (scaled units) for standardized inputs ``Z``."""
    return _forward(params, np.atleast_2d(Z))[1][-1][:, 0]


def ffn_gradients(params, Z, t):
    """MAE loss and its gradients by backpropagation.

    Parameters
    ----------
    params : FFNParams
    Z : np.ndarray
        Standardized inputs, shape (n, n_inputs).
    t : np.ndarray
        Targets in scaled units.

    Returns
    -------
    loss : float
    grad_weights : list of np.ndarray
    grad_biases : list of np.ndarray
    """
    pre, post = _forward(params, Z)
    output = post[-1][:, 0]
    loss = float(np.mean(np.abs(output - t)))

    delta = mae_subgradient(output, t)[:, None]
    grad_weights = [None] * len(params.weights)
    grad_biases = [None] * len(params.weights)
    for layer in reversed(range(len(params.weights))):
        activation = params.activations[layer]
        delta = delta * ACTIVATIONS[activation][1](pre[layer], post[layer + 1])
        grad_weights[layer] = post[layer].T @ delta
        grad_biases[layer] = delta.sum(axis=0)
        delta = delta @ params.weights[layer].T

    return loss, grad_weights, grad_biases


@log.log_time('learners')
def ffn_train(
        X, y, hidden=(200,), epochs=100, learning_rate=0.01, batch_size=32,
        seed=0, activation='relu'):
    """Train a feed-forward regressor on MAE with minibatch gradient descent.

    Inputs are standardized and targets divided by their median; the output
    bias starts at the scaled median and the output weights at zero.

    Parameters
    ----------
    X : array_like
        Inputs, shape (n, n_inputs).
    y : array_like
        Targets in dollars.
    hidden : tuple of int, optional
        Hidden layer sizes.
    epochs : int, optional
    learning_rate : float, optional
        Constant learning rate.
    batch_size : int, optional
    seed : int, optional
    activation : {'relu', 'tanh'}, optional

    Returns
    -------
    FFNParams

    Raises
    ------
    TrainingError
        If the loss becomes NaN or infinite.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or len(X) != len(y) or len(y) == 0:
        raise ContractViolation(
            f"Expected |X| = |y| >= 1, got X {X.shape} and y {y.shape}."
        )

    rng = make_rng(seed)

    input_mean = X.mean(axis=0)
    input_scale = X.std(axis=0)
    input_scale[input_scale == 0] = 1.0
    Z = (X - input_mean) / input_scale

    target_scale = float(np.median(np.abs(y))) or 1.0
    t = y / target_scale

    params = init_ffn(
        [X.shape[1], *hidden, 1], rng, activation, output_bias=np.median(t)
    )
    params.input_mean = input_mean
    params.input_scale = input_scale
    params.target_scale = target_scale

    n = len(y)
    for epoch in range(epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, batch_size):
            batch = order[start:start + batch_size]
            loss, grad_weights, grad_biases = ffn_gradients(params, Z[batch], t[batch])
            if not np.isfinite(loss):
                raise TrainingError(
                    f"Non-finite loss {loss} in epoch {epoch}, batch starting at "
                    f"{start} (learning rate {learning_rate}, max |w| "
                    f"{max(np.abs(w).max() for w in params.weights):.3g})."
                )
            for layer in range(len(params.weights)):
                params.weights[layer] -= learning_rate * grad_weights[layer]
                params.biases[layer] -= learning_rate * grad_biases[layer]
            epoch_loss += loss * len(batch)

        params.loss_trace.append(epoch_loss / n)
        logger.debug(f'FFN epoch {epoch}: MAE {params.loss_trace[-1]:.5f}')

    logger.info(
        f'Trained FFN {params.layer_sizes} for {epochs} epochs, final MAE '
        f'{params.loss_trace[-1] * target_scale if params.loss_trace else float("nan"):.2f}.'
    )

    return params


def ffn_predict(params, X):
    """Predicted dollars for raw inputs, clamped at 0."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != params.n_inputs:
        raise ContractViolation(
            f"Expected {params.n_inputs} inputs, got shape {X.shape}."
        )
    Z = (X - params.input_mean) / params.input_scale
    return np.maximum(ffn_forward(params, Z) * params.target_scale, 0.0)
