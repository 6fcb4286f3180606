"""Sequential network container, training loop, and model serialization."""

import json
from dataclasses import dataclass, field

import numpy as np

from fraudkit.base import FraudkitError
from fraudkit.nn.layers import LAYER_KINDS
from fraudkit.nn.losses import bce_loss, bce_loss_grad
from fraudkit.nn.optim import Adam
from fraudkit.rng import derive_seed, generator

FORMAT_VERSION = 1


class TrainingError(FraudkitError):
    pass


class Network:
    """Sequential layers over a fixed per-sample input shape.

    Rows arrive flat (batch x n_features) and are reshaped to
    input_shape; shape algebra across all layers is verified at
    construction, so mismatches fail before any training.
    """

    def __init__(self, layers, input_shape):
        self.layers = list(layers)
        self.input_shape = tuple(input_shape)
        self.shapes = [self.input_shape]
        shape = self.input_shape
        for layer in self.layers:
            shape = layer.output_shape(shape)
            self.shapes.append(tuple(int(d) for d in shape))
        self.output_shape = self.shapes[-1]
        self.initialized = False

    @property
    def n_inputs(self):
        return int(np.prod(self.input_shape))

    def initialize(self, seed=0):
        rng = generator(seed)
        shape = self.input_shape
        for layer in self.layers:
            shape = layer.init_params(shape, rng)
        self.initialized = True
        return self

    def named_params(self):
        return {
            f"{i}.{name}": arr
            for i, layer in enumerate(self.layers)
            for name, arr in layer.params.items()
        }

    def named_grads(self):
        return {
            f"{i}.{name}": arr
            for i, layer in enumerate(self.layers)
            for name, arr in layer.grads.items()
        }

    def n_params(self):
        return sum(arr.size for arr in self.named_params().values())

    def _reshape(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_inputs:
            raise ValueError(
                f"network expects {self.n_inputs} features per row, got shape {X.shape}"
            )
        return X.reshape(X.shape[0], *self.input_shape)

    def forward(self, X, train=False, rng=None):
        if not self.initialized:
            raise TrainingError("network parameters are not initialized")
        out = self._reshape(X)
        for layer in self.layers:
            out = layer.forward(out, train=train, rng=rng)
        if not np.all(np.isfinite(out)):
            raise FloatingPointError("non-finite network output")
        return out

    def predict_proba(self, X):
        return self.forward(X, train=False).reshape(len(X))

    def zero_grads(self):
        for layer in self.layers:
            layer.zero_grads()

    def loss_and_grads(self, X, y, rng=None, train=True):
        """Mean batch BCE plus accumulated parameter gradients."""
        self.zero_grads()
        out = self.forward(X, train=train, rng=rng)
        p = out.reshape(len(X))
        loss = bce_loss(p, y)
        grad = bce_loss_grad(p, y).reshape(out.shape)
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return loss

    def get_weights(self):
        return {k: v.copy() for k, v in self.named_params().items()}

    def set_weights(self, weights):
        for k, v in self.named_params().items():
            v[...] = weights[k]


@dataclass
class TrainingHistory:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    val_accuracy: list = field(default_factory=list)
    best_epoch: int = -1
    stopped_early: bool = False

    def to_dict(self):
        return {
            "train_loss": self.train_loss,
            "val_loss": self.val_loss,
            "val_accuracy": self.val_accuracy,
            "best_epoch": self.best_epoch,
            "stopped_early": self.stopped_early,
        }


def fit(
    network,
    X_train,
    y_train,
    X_val=None,
    y_val=None,
    epochs_max=100,
    batch_size=256,
    patience=5,
    lr=0.001,
    seed=0,
):
    """Seeded mini-batch training with early stopping on validation loss.

    Shuffles per epoch, restores best-validation parameters on early
    stop. Without a validation set, runs all epochs on train loss.
    """
    X_train = np.asarray(X_train, dtype=np.float64)
    y_train = np.asarray(y_train)
    if len(X_train) == 0:
        raise TrainingError("empty training set")
    if not network.initialized:
        network.initialize(derive_seed(seed, "init"))
    history = TrainingHistory()
    if epochs_max == 0:
        return history

    shuffle_rng = generator(derive_seed(seed, "shuffle"))
    dropout_rng = generator(derive_seed(seed, "dropout"))
    optimizer = Adam(lr=lr)
    have_val = X_val is not None and len(X_val) > 0
    best_loss = np.inf
    best_weights = network.get_weights()
    epochs_since_best = 0

    for epoch in range(epochs_max):
        order = shuffle_rng.permutation(len(X_train))
        epoch_loss = 0.0
        for start in range(0, len(order), batch_size):
            batch = order[start : start + batch_size]
            loss = network.loss_and_grads(X_train[batch], y_train[batch], rng=dropout_rng)
            if not np.isfinite(loss):
                raise TrainingError(
                    f"non-finite loss at epoch {epoch}, batch {start // batch_size}"
                )
            optimizer.step(network.named_params(), network.named_grads())
            epoch_loss += loss * len(batch)
        history.train_loss.append(epoch_loss / len(order))

        if have_val:
            p_val = network.predict_proba(X_val)
            v_loss = bce_loss(p_val, y_val)
            history.val_loss.append(v_loss)
            history.val_accuracy.append(float(np.mean((p_val >= 0.5) == (y_val == 1))))
            monitored = v_loss
        else:
            monitored = history.train_loss[-1]

        if monitored < best_loss:
            best_loss = monitored
            best_weights = network.get_weights()
            history.best_epoch = epoch
            epochs_since_best = 0
        else:
            epochs_since_best += 1
            if epochs_since_best >= patience:
                history.stopped_early = True
                break

    network.set_weights(best_weights)
    return history


def network_to_dict(network):
    layers = []
    for layer in network.layers:
        layers.append(
            {
                "kind": layer.kind,
                "hyperparams": layer.hyperparams(),
                "params": {
                    name: {"shape": list(arr.shape), "data": arr.ravel().tolist()}
                    for name, arr in layer.params.items()
                },
            }
        )
    return {
        "format_version": FORMAT_VERSION,
        "input_shape": list(network.input_shape),
        "layers": layers,
    }


def network_from_dict(payload):
    if payload.get("format_version") != FORMAT_VERSION:
        raise FraudkitError(f"unsupported model format version {payload.get('format_version')!r}")
    layers = []
    for spec in payload["layers"]:
        layer = LAYER_KINDS[spec["kind"]](**spec["hyperparams"])
        layer.params = {
            name: np.array(p["data"], dtype=np.float64).reshape(p["shape"])
            for name, p in spec["params"].items()
        }
        layer.zero_grads()
        layers.append(layer)
    network = Network(layers, payload["input_shape"])
    network.initialized = True
    return network


def save_network(network, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(network_to_dict(network), fh)


def load_network(path):
    with open(path, encoding="utf-8") as fh:
        return network_from_dict(json.load(fh))
