"""
Deep feedforward network: ReLU hidden layers, softmax output, mean
cross-entropy loss, mini-batch gradient descent with backpropagation.
"""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from t2dmed.config.pipeline_config import NetworkConfig
from t2dmed.models.trained_model import NetworkParams, TrainedModel
from t2dmed.services.classic.base import encode_targets, one_hot
from t2dmed.utils.errors import ConfigError, DivergenceError, NumericalError, ShapeError
from t2dmed.utils.rng import derive_seed, make_rng, XorShift64Star

logger = logging.getLogger(__name__)

GRADIENT_CHECK_MAX_PARAMETERS = 200


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction."""
    logits = np.atleast_2d(np.asarray(logits, dtype=np.float64))
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def _log_sum_exp(logits: np.ndarray) -> np.ndarray:
    peak = logits.max(axis=1)
    return peak + np.log(np.sum(np.exp(logits - peak[:, None]), axis=1))


class NeuralService:
    """Initialization, forward pass, training and verification of the network."""

    def init_network(self, config: NetworkConfig) -> NetworkParams:
        """
        Uniform(-sqrt(6/fan_in), +sqrt(6/fan_in)) weights from the seeded PRNG, zero biases.

        Args:
            config: Resolved network configuration (all widths set)

        Returns:
            Fresh NetworkParams
        """
        if config.input_dim is None or config.output_dim is None or config.hidden_layers is None:
            raise ConfigError("Network configuration must be resolved before initialization")
        config.check_widths()
        sizes = config.layer_sizes()
        rng = make_rng(config.seed or 0, 'init')
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            limit = float(np.sqrt(6.0 / fan_in))
            weights.append(rng.uniform_array(-limit, limit, (fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        logger.debug(f"Initialized network {sizes} with {sum(w.size for w in weights)} weights")
        return NetworkParams(weights=weights, biases=biases)

    def _logits(self, params: NetworkParams, features) -> Tuple[np.ndarray, List[np.ndarray]]:
        x = np.asarray(features, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != params.weights[0].shape[1]:
            raise ShapeError(f"Network expects {params.weights[0].shape[1]} input columns, "
                             f"got shape {x.shape}")
        activations = [x]
        last = len(params.weights) - 1
        for index, (w, b) in enumerate(zip(params.weights, params.biases)):
            z = activations[-1] @ w.T + b
            if index == last:
                if not np.all(np.isfinite(z)):
                    raise NumericalError("Non-finite output logits")
                return z, activations
            activations.append(np.maximum(z, 0.0))
        raise ShapeError("Network has no layers")

    def forward(self, params: NetworkParams, features) -> Tuple[np.ndarray, List[np.ndarray]]:
        """
        Class probabilities per row and the cached layer inputs.

        The cache holds the input matrix followed by each hidden layer's ReLU output.
        """
        logits, activations = self._logits(params, features)
        return softmax(logits), activations

    def loss_and_gradients(self, params: NetworkParams, features,
                           targets) -> Tuple[float, NetworkParams]:
        """Mean cross-entropy and its gradient with respect to every parameter."""
        y = np.asarray(targets, dtype=np.float64)
        logits, activations = self._logits(params, features)
        if y.shape != logits.shape:
            raise ShapeError(f"Targets have shape {y.shape}, outputs {logits.shape}")
        n = y.shape[0]
        loss = float(np.mean(_log_sum_exp(logits) - np.sum(y * logits, axis=1)))

        delta = (softmax(logits) - y) / n
        grad_w: List[np.ndarray] = [None] * len(params.weights)
        grad_b: List[np.ndarray] = [None] * len(params.weights)
        for layer in range(len(params.weights) - 1, -1, -1):
            grad_w[layer] = delta.T @ activations[layer]
            grad_b[layer] = delta.sum(axis=0)
            if layer > 0:
                delta = (delta @ params.weights[layer]) * (activations[layer] > 0)
        return loss, NetworkParams(weights=grad_w, biases=grad_b)

    def loss(self, params: NetworkParams, features, targets) -> float:
        logits, _ = self._logits(params, features)
        y = np.asarray(targets, dtype=np.float64)
        return float(np.mean(_log_sum_exp(logits) - np.sum(y * logits, axis=1)))

    def train(self, params: NetworkParams, features, targets,
              config: NetworkConfig) -> Tuple[NetworkParams, List[float]]:
        """
        Mini-batch gradient descent.

        Each epoch shuffles the rows with a PRNG seeded from (seed, 'shuffle',
        epoch) and steps through batches of batch_size. The recorded loss is
        the mean cross-entropy over all rows after the epoch. Epoch e steps
        with learning_rate * lr_decay ** (e - 1).

        Raises:
            DivergenceError: a batch or epoch loss is not finite
        """
        x = np.asarray(features, dtype=np.float64)
        y = np.asarray(targets, dtype=np.float64)
        if x.shape[0] != y.shape[0]:
            raise ShapeError(f"{x.shape[0]} feature rows but {y.shape[0]} target rows")
        if y.ndim != 2 or not np.all(np.isin(y, (0.0, 1.0))) or not np.all(y.sum(axis=1) == 1.0):
            raise ShapeError("Targets must be one-hot rows")
        current = params.copy()
        base_lr = float(config.learning_rate)
        decay = float(config.lr_decay)
        epochs = int(config.epochs if config.epochs is not None else 100)
        batch_size = int(config.batch_size)
        seed = config.seed or 0
        n = x.shape[0]
        history: List[float] = []

        for epoch in range(1, epochs + 1):
            lr = base_lr * decay ** (epoch - 1)
            order = XorShift64Star(derive_seed(seed, 'shuffle', epoch)).permutation(n)
            for start in range(0, n, batch_size):
                rows = order[start:start + batch_size]
                try:
                    batch_loss, grads = self.loss_and_gradients(current, x[rows], y[rows])
                except NumericalError as e:
                    raise DivergenceError(epoch, float('nan')) from e
                if not np.isfinite(batch_loss):
                    raise DivergenceError(epoch, batch_loss)
                if lr != 0.0:
                    for layer in range(len(current.weights)):
                        current.weights[layer] -= lr * grads.weights[layer]
                        current.biases[layer] -= lr * grads.biases[layer]
            try:
                epoch_loss = self.loss(current, x, y)
            except NumericalError as e:
                raise DivergenceError(epoch, float('nan')) from e
            if not np.isfinite(epoch_loss):
                raise DivergenceError(epoch, epoch_loss)
            history.append(epoch_loss)
            if epoch == 1 or epoch % 25 == 0 or epoch == epochs:
                logger.debug(f"Epoch {epoch}/{epochs}: loss {epoch_loss:.6f}")
        return current, history

    def gradient_check(self, params: NetworkParams, features, targets,
                       epsilon: float = 1e-5) -> float:
        """
        Max relative error between backprop and central finite differences.

        The relative error of each entry uses the denominator max(|g|, |fd|, 1e-8).
        """
        if params.n_parameters() > GRADIENT_CHECK_MAX_PARAMETERS:
            logger.warning(f"Gradient check over {params.n_parameters()} parameters may be slow")
        _, grads = self.loss_and_gradients(params, features, targets)
        shifted = params.copy()
        worst = 0.0
        for tensors, grad_tensors in ((shifted.weights, grads.weights), (shifted.biases, grads.biases)):
            for tensor, grad in zip(tensors, grad_tensors):
                flat, flat_grad = tensor.reshape(-1), grad.reshape(-1)
                for i in range(flat.size):
                    original = flat[i]
                    flat[i] = original + epsilon
                    plus = self.loss(shifted, features, targets)
                    flat[i] = original - epsilon
                    minus = self.loss(shifted, features, targets)
                    flat[i] = original
                    numeric = (plus - minus) / (2.0 * epsilon)
                    analytic = float(flat_grad[i])
                    denom = max(abs(analytic), abs(numeric), 1e-8)
                    worst = max(worst, abs(analytic - numeric) / denom)
        return worst

    def predict_codes(self, params: NetworkParams, features) -> np.ndarray:
        probs, _ = self.forward(params, features)
        return np.argmax(probs, axis=1)

    def predict(self, params: NetworkParams, features, class_labels: Optional[Sequence[str]] = None):
        """Argmax class per row; labels when class_labels is given, else indices."""
        codes = self.predict_codes(params, features)
        if class_labels is None:
            return codes
        return np.array([class_labels[c] for c in codes], dtype=object)

    def fit(self, config: NetworkConfig, features, labels: Sequence[str],
            seed: Optional[int] = None) -> TrainedModel:
        """Resolve the configuration against the data, initialize and train."""
        x = np.asarray(features, dtype=np.float64)
        codes, class_labels = encode_targets(labels)
        resolved = config.resolve(x.shape[1], len(class_labels), seed)
        if resolved.input_dim != x.shape[1]:
            raise ConfigError(f"input_dim {resolved.input_dim} does not match {x.shape[1]} features")
        if resolved.output_dim != len(class_labels):
            raise ConfigError(f"output_dim {resolved.output_dim} does not match "
                              f"{len(class_labels)} classes")
        params = self.init_network(resolved)
        trained, history = self.train(params, x, one_hot(codes, len(class_labels)), resolved)
        logger.info(f"Trained ann {resolved.layer_sizes()} for {resolved.epochs} epochs, "
                    f"final loss {history[-1] if history else float('nan'):.4f}")
        return TrainedModel(kind='ann', class_labels=class_labels, params=trained,
                            hyperparameters=resolved.model_dump(mode='json'),
                            metadata={'seed': resolved.seed, 'n_features': x.shape[1],
                                      'n_train': x.shape[0], 'loss_history': history})


# Global service instance
neural_service = NeuralService()
