# -*- coding: utf-8 -*-

## --------------------------------------------------------------------
## IMWA - Feed-forward network engine
##
## A ReLU multilayer perceptron over one flat float64 parameter
## vector, with softmax cross-entropy and momentum SGD.
##
## License   : GPL Version 2
## --------------------------------------------------------------------

from __future__ import absolute_import, division

import math

import numpy as np

from .Exceptions import ParameterError, NumericError

__all__ = ["LayerLayout", "WeightVector", "SgdState", "Batch",
           "init_weights", "forward", "loss_and_grad", "sgd_step"]


class LayerLayout(object):
    """Ordered (in_width, out_width) pairs of the affine layers.

    Hidden layers use ReLU, the output layer is the identity.
    """

    def __init__(self, dims):
        dims = [(int(i), int(o)) for (i, o) in dims]
        if not dims:
            raise ParameterError("Layer layout needs at least one layer")
        for idx, (in_width, out_width) in enumerate(dims):
            if in_width < 1 or out_width < 1:
                raise ParameterError("Layer %d has invalid widths %dx%d" % (idx, in_width, out_width))
            if idx and dims[idx - 1][1] != in_width:
                raise ParameterError("Layer %d input width %d does not match previous output width %d"
                                     % (idx, in_width, dims[idx - 1][1]))
        self.dims = tuple(dims)

    @classmethod
    def from_widths(cls, widths):
        """from_widths([16, 64, 10]) -> 16x64, 64x10"""
        widths = list(widths)
        if len(widths) < 2:
            raise ParameterError("Need at least input and output widths, got %r" % widths)
        return cls(zip(widths[:-1], widths[1:]))

    @property
    def input_width(self):
        return self.dims[0][0]

    @property
    def output_width(self):
        return self.dims[-1][1]

    @property
    def widths(self):
        return [self.dims[0][0]] + [out_width for (_, out_width) in self.dims]

    @property
    def parameter_count(self):
        return sum(i * o + o for (i, o) in self.dims)

    def __eq__(self, other):
        return isinstance(other, LayerLayout) and self.dims == other.dims

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash(self.dims)

    def __str__(self):
        return u"->".join(u"%d" % w for w in self.widths)

    def __repr__(self):
        return "<LayerLayout %s>" % self


class WeightVector(object):
    """Flat parameter vector of one model plus its layout.

    Per layer the values hold the affine matrix (in_width x out_width,
    row-major) followed by the bias vector. The array is read-only;
    every operation returns a new WeightVector.
    """

    def __init__(self, layout, values):
        values = np.array(values, dtype=np.float64).ravel()
        if values.shape[0] != layout.parameter_count:
            raise ParameterError("Layout %s needs %d values, got %d"
                                 % (layout, layout.parameter_count, values.shape[0]))
        if not np.all(np.isfinite(values)):
            raise NumericError("Weight vector contains non-finite entries")
        values.flags.writeable = False
        self.layout = layout
        self.values = values

    def __len__(self):
        return self.values.shape[0]

    def layers(self):
        """Return [(matrix, bias), ...] read-only views into the values"""
        retval = []
        offset = 0
        for (in_width, out_width) in self.layout.dims:
            matrix = self.values[offset:offset + in_width * out_width].reshape(in_width, out_width)
            offset += in_width * out_width
            bias = self.values[offset:offset + out_width]
            offset += out_width
            retval.append((matrix, bias))
        return retval

    def copy(self):
        return WeightVector(self.layout, self.values)

    def same_layout(self, other):
        return self.layout == other.layout

    def __eq__(self, other):
        return (isinstance(other, WeightVector) and self.layout == other.layout
                and self.values.tobytes() == other.values.tobytes())

    def __ne__(self, other):
        return not self.__eq__(other)

    __hash__ = None

    def __repr__(self):
        return "<WeightVector %s, %d values>" % (self.layout, len(self))


class SgdState(object):
    def __init__(self, learning_rate, momentum, velocity=None, size=None):
        if learning_rate < 0 or not math.isfinite(learning_rate):
            raise ParameterError("Learning rate must be a finite value >= 0, not %r" % learning_rate)
        if not (0.0 <= momentum < 1.0):
            raise ParameterError("Momentum must be in [0, 1), not %r" % momentum)
        if velocity is None:
            if size is None:
                raise ParameterError("SgdState needs either a velocity or a size")
            velocity = np.zeros(size, dtype=np.float64)
        else:
            velocity = np.array(velocity, dtype=np.float64).ravel()
        velocity.flags.writeable = False
        self.learning_rate = float(learning_rate)
        self.momentum = float(momentum)
        self.velocity = velocity

    @classmethod
    def for_weights(cls, weights, learning_rate, momentum):
        return cls(learning_rate, momentum, size=len(weights))

    def with_velocity(self, velocity):
        return SgdState(self.learning_rate, self.momentum, velocity=velocity)


class Batch(object):
    def __init__(self, inputs, labels):
        inputs = np.asarray(inputs, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.int64).ravel()
        if inputs.ndim != 2:
            raise ParameterError("Batch inputs must be a 2-D matrix, got shape %r" % (inputs.shape,))
        if inputs.shape[0] < 1:
            raise ParameterError("Batch must hold at least one row")
        if labels.shape[0] != inputs.shape[0]:
            raise ParameterError("Batch has %d rows but %d labels" % (inputs.shape[0], labels.shape[0]))
        if labels.min() < 0:
            raise ParameterError("Batch labels must be non-negative")
        self.inputs = inputs
        self.labels = labels

    def __len__(self):
        return self.inputs.shape[0]


def init_weights(layout, seed):
    """
    Glorot-uniform matrices, zero biases, fully determined by 'seed'.
    """
    rng = np.random.default_rng(seed)
    chunks = []
    for (in_width, out_width) in layout.dims:
        limit = math.sqrt(6.0 / (in_width + out_width))
        chunks.append(rng.uniform(-limit, limit, size=(in_width, out_width)).ravel())
        chunks.append(np.zeros(out_width, dtype=np.float64))
    return WeightVector(layout, np.concatenate(chunks))


def _check_inputs(w, inputs, labels=None):
    if inputs.shape[1] != w.layout.input_width:
        raise ParameterError("Input width %d does not match layout %s"
                             % (inputs.shape[1], w.layout))
    if labels is not None and labels.max() >= w.layout.output_width:
        raise ParameterError("Label %d out of range for %d output classes"
                             % (labels.max(), w.layout.output_width))


def _forward_pass(w, inputs):
    ## Returns the layer inputs and the pre-activations of every layer
    activations = [inputs]
    pre_activations = []
    layers = w.layers()
    for idx, (matrix, bias) in enumerate(layers):
        z = np.dot(activations[-1], matrix) + bias
        pre_activations.append(z)
        if idx < len(layers) - 1:
            activations.append(np.maximum(z, 0.0))
    return activations, pre_activations


def forward(w, batch):
    """Logits (n x C) of the network for the batch rows"""
    inputs = batch.inputs if isinstance(batch, Batch) else np.asarray(batch, dtype=np.float64)
    _check_inputs(w, inputs)
    return _forward_pass(w, inputs)[1][-1]


def loss_and_grad(w, batch):
    """
    Mean softmax cross-entropy of the batch and its analytic gradient
    with respect to every entry of w.values.
    """
    _check_inputs(w, batch.inputs, batch.labels)
    activations, pre_activations = _forward_pass(w, batch.inputs)
    logits = pre_activations[-1]
    rows = np.arange(len(batch))

    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_norm
    loss = -np.mean(log_probs[rows, batch.labels])

    delta = np.exp(log_probs)
    delta[rows, batch.labels] -= 1.0
    delta /= len(batch)

    layers = w.layers()
    grads = [None] * len(layers)
    for idx in range(len(layers) - 1, -1, -1):
        matrix = layers[idx][0]
        grads[idx] = (np.dot(activations[idx].T, delta), delta.sum(axis=0))
        if idx:
            delta = np.dot(delta, matrix.T) * (pre_activations[idx - 1] > 0.0)

    flat = np.concatenate([part.ravel() for pair in grads for part in pair])
    return float(loss), flat


def sgd_step(w, grad, state):
    """
    velocity <- momentum * velocity + grad
    weights  <- weights - learning_rate * velocity
    """
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != w.values.shape or state.velocity.shape != w.values.shape:
        raise ParameterError("Gradient/velocity shape does not match %r" % w)
    if not np.all(np.isfinite(grad)):
        raise NumericError("Non-finite gradient, training aborted")
    velocity = state.momentum * state.velocity + grad
    values = w.values - state.learning_rate * velocity
    if not np.all(np.isfinite(values)):
        raise NumericError("Weights diverged to non-finite values, training aborted")
    return WeightVector(w.layout, values), state.with_velocity(velocity)

# vim:et:ts=4:sts=4:ai
