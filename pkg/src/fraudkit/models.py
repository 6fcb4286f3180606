"""Model architectures and a uniform train/predict interface.

Builders assemble the three deep architectures (2DCNN, 1DCNN, LSTM);
classifier wrappers expose fit/predict_proba/predict for every model
kind, deep or classical.
"""

import numpy as np

from fraudkit.base import BaseEstimator, NotFittedError
from fraudkit.nn.layers import LSTM, Activation, Conv1D, Conv2D, Dense, Dropout, Flatten, MaxPool1D
from fraudkit.nn.network import Network, fit as fit_network
from fraudkit.trees import DecisionTreeClassifier, RandomForestClassifier

MODEL_KINDS = ("cnn2d", "cnn1d", "lstm", "logreg", "dtree", "forest")


def cnn2d_grid(input_features):
    """The 5x6 feature-image grid; only 30-feature inputs reshape to it."""
    if input_features != 30:
        raise ValueError(
            f"not reshapeable to 5x6: {input_features} features (expected 30)"
        )
    return (5, 6)


def build_cnn2d(input_features=30, grid=None):
    """conv2d(64,3x3,relu) -> conv2d(32,3x3,relu) -> flatten -> dense(1,sigmoid).

    Rows fill the grid row-major in dataset column order.
    """
    if grid is None:
        grid = cnn2d_grid(input_features)
    h, w = grid
    if h * w != input_features:
        raise ValueError(f"grid {h}x{w} does not hold {input_features} features")
    net = Network(
        [
            Conv2D(64, 3, init="he"),
            Activation("relu"),
            Conv2D(32, 3, init="he"),
            Activation("relu"),
            Flatten(),
            Dense(1, init="glorot"),
            Activation("sigmoid"),
        ],
        input_shape=(h, w, 1),
    )
    if grid == (5, 6):
        flat = net.shapes[5][0]
        assert flat == 64, f"flatten width {flat} != 64 for the 5x6 grid"
    return net


def build_cnn1d(input_features):
    """Length-1 sequence with input_features channels, per the 1DCNN layout:
    conv1d(64,k=1) x2 -> dropout(0.5) -> maxpool(1) -> flatten(64) ->
    dense(100,relu) -> dense(1,sigmoid)."""
    net = Network(
        [
            Conv1D(64, 1, init="he"),
            Activation("relu"),
            Conv1D(64, 1, init="he"),
            Activation("relu"),
            Dropout(0.5),
            MaxPool1D(1),
            Flatten(),
            Dense(100, init="he"),
            Activation("relu"),
            Dense(1, init="glorot"),
            Activation("sigmoid"),
        ],
        input_shape=(1, input_features),
    )
    flat = net.shapes[7][0]
    assert flat == 64, f"flatten width {flat} != 64"
    return net


def build_lstm(input_features, hidden=50, inner_act="relu"):
    """Length-1 sequence into an LSTM with `hidden` blocks, sigmoid head."""
    return Network(
        [
            LSTM(hidden, inner_act=inner_act, init="glorot"),
            Dense(1, init="glorot"),
            Activation("sigmoid"),
        ],
        input_shape=(1, input_features),
    )


def build_logreg(input_features):
    """Logistic regression as a dense(1, sigmoid) network."""
    return Network(
        [Dense(1, init="glorot"), Activation("sigmoid")],
        input_shape=(input_features,),
    )


_NETWORK_BUILDERS = {
    "cnn2d": lambda f, p: build_cnn2d(f, grid=p.get("grid")),
    "cnn1d": lambda f, p: build_cnn1d(f),
    "lstm": lambda f, p: build_lstm(f, hidden=p.get("hidden", 50), inner_act=p.get("inner_act", "relu")),
    "logreg": lambda f, p: build_logreg(f),
}


class NeuralNetClassifier(BaseEstimator):
    """fit/predict wrapper over the network engine for one architecture."""

    def __init__(
        self,
        kind="cnn1d",
        grid=None,
        hidden=50,
        inner_act="relu",
        lr=0.001,
        epochs_max=100,
        batch_size=256,
        patience=5,
        seed=0,
    ):
        self.kind = kind
        self.grid = grid
        self.hidden = hidden
        self.inner_act = inner_act
        self.lr = lr
        self.epochs_max = epochs_max
        self.batch_size = batch_size
        self.patience = patience
        self.seed = seed
        self.network_ = None
        self.history_ = None

    def fit(self, X, y, X_val=None, y_val=None):
        if self.kind not in _NETWORK_BUILDERS:
            raise ValueError(f"unknown network kind {self.kind!r}")
        X = np.asarray(X, dtype=np.float64)
        params = {"grid": self.grid, "hidden": self.hidden, "inner_act": self.inner_act}
        self.network_ = _NETWORK_BUILDERS[self.kind](X.shape[1], params)
        self.history_ = fit_network(
            self.network_,
            X,
            y,
            X_val,
            y_val,
            epochs_max=self.epochs_max,
            batch_size=self.batch_size,
            patience=self.patience,
            lr=self.lr,
            seed=self.seed,
        )
        return self

    def predict_proba(self, X):
        if self.network_ is None:
            raise NotFittedError(f"{self.kind} model is not fitted")
        return self.network_.predict_proba(np.asarray(X, dtype=np.float64))

    def predict(self, X, threshold=0.5):
        return classify(self, X, threshold)


def make_model(kind, **params):
    """Uniform factory over every model kind."""
    if kind in _NETWORK_BUILDERS:
        allowed = ("grid", "hidden", "inner_act", "lr", "epochs_max", "batch_size", "patience", "seed")
        kwargs = {k: v for k, v in params.items() if k in allowed}
        return NeuralNetClassifier(kind=kind, **kwargs)
    if kind == "dtree":
        allowed = ("max_depth", "min_leaf", "seed")
        return DecisionTreeClassifier(**{k: v for k, v in params.items() if k in allowed})
    if kind == "forest":
        allowed = ("n_trees", "max_depth", "min_leaf", "max_features", "bootstrap", "seed")
        return RandomForestClassifier(**{k: v for k, v in params.items() if k in allowed})
    raise ValueError(f"unknown model kind {kind!r}")


def predict(model, rows):
    p = model.predict_proba(np.asarray(rows, dtype=np.float64))
    return np.clip(p, 0.0, 1.0)


def classify(model, rows, threshold=0.5):
    """Labels = 1 iff p >= threshold (boundary inclusive); threshold clamped."""
    threshold = min(max(float(threshold), 0.0), 1.0)
    return (predict(model, rows) >= threshold).astype(np.int64)


def model_to_dict(model):
    """Serializable form of any trained model."""
    from fraudkit.nn.network import network_to_dict

    if isinstance(model, NeuralNetClassifier):
        return {"kind": model.kind, "network": network_to_dict(model.network_)}
    if isinstance(model, DecisionTreeClassifier):
        return {"kind": "dtree", "root": model.root_.to_dict()}
    if isinstance(model, RandomForestClassifier):
        return {"kind": "forest", "trees": [t.root_.to_dict() for t in model.trees_]}
    raise ValueError(f"cannot serialize model of type {type(model).__name__}")


def model_from_dict(payload):
    from fraudkit.nn.network import network_from_dict
    from fraudkit.trees import TreeNode

    kind = payload["kind"]
    if kind in _NETWORK_BUILDERS:
        model = NeuralNetClassifier(kind=kind)
        model.network_ = network_from_dict(payload["network"])
        return model
    if kind == "dtree":
        model = DecisionTreeClassifier()
        model.root_ = TreeNode.from_dict(payload["root"])
        return model
    if kind == "forest":
        model = RandomForestClassifier()
        model.trees_ = []
        for tree_dict in payload["trees"]:
            tree = DecisionTreeClassifier()
            tree.root_ = TreeNode.from_dict(tree_dict)
            model.trees_.append(tree)
        return model
    raise ValueError(f"unknown serialized model kind {kind!r}")


def train_logreg(ds, lr=0.001, epochs=100, batch_size=256, seed=0, val=None):
    """Gradient-descent logistic regression on a standardized Dataset."""
    clf = NeuralNetClassifier(kind="logreg", lr=lr, epochs_max=epochs, batch_size=batch_size, seed=seed)
    X_val = val.features if val is not None else None
    y_val = val.labels if val is not None else None
    return clf.fit(ds.features, ds.labels, X_val, y_val)


def train_dtree(ds, max_depth=None, min_leaf=1):
    return DecisionTreeClassifier(max_depth=max_depth, min_leaf=min_leaf).fit(
        ds.features, ds.labels
    )


def train_forest(ds, n_trees=50, max_depth=None, seed=0):
    return RandomForestClassifier(n_trees=n_trees, max_depth=max_depth, seed=seed).fit(
        ds.features, ds.labels
    )
