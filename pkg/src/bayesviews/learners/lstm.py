"""Two stacked LSTM layers, a tanh dense layer and a linear head, in numpy.

Gate rows of each recurrent weight matrix are ordered ``[i, f, o, g]`` and
act on ``[h_prev, x]``. Only the last step of a window feeds the head; the
loss is the mean squared error against the target vector. Training is
truncated backpropagation through time over the most recent
``bptt_horizon`` inputs followed by one rmsprop step.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch, NonFiniteLoss
from .base import OnlineViewModel, as_input

PARAM_NAMES = ("W1", "b1", "W2", "b2", "D1", "d1", "D2", "d2")


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def init_params(n_inputs, n_outputs, hidden=3, dense=50, seed=0):
    """Uniform initialisation in ``+-1/sqrt(fan_in)``."""
    rng = np.random.default_rng(seed)

    def u(shape, fan_in):
        a = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-a, a, size=shape)

    H = hidden
    return {
        "W1": u((4 * H, H + n_inputs), H + n_inputs),
        "b1": u((4 * H,), H + n_inputs),
        "W2": u((4 * H, 2 * H), 2 * H),
        "b2": u((4 * H,), 2 * H),
        "D1": u((dense, H), H),
        "d1": u((dense,), H),
        "D2": u((n_outputs, dense), dense),
        "d2": u((n_outputs,), dense),
    }


def zero_state(hidden):
    z = np.zeros(hidden)
    return {"h1": z.copy(), "c1": z.copy(), "h2": z.copy(), "c2": z.copy()}


def lstm_cell_step(W, b, x, h_prev, c_prev):
    """One vanilla LSTM step.

    Returns ``(h, c, cache)`` with ``c = f*c_prev + i*tanh(g_pre)`` and
    ``h = o*tanh(c)``.
    """
    H = h_prev.shape[0]
    if W.shape != (4 * H, H + x.shape[0]):
        raise DimensionMismatch(f"weights {W.shape} do not fit hidden={H}, input={x.shape[0]}")
    v = np.concatenate([h_prev, x])
    z = W @ v + b
    i = sigmoid(z[:H])
    f = sigmoid(z[H : 2 * H])
    o = sigmoid(z[2 * H : 3 * H])
    g = np.tanh(z[3 * H :])
    c = f * c_prev + i * g
    tc = np.tanh(c)
    h = o * tc
    return h, c, (v, i, f, o, g, c_prev, tc)


def lstm_cell_backward(W, cache, dh, dc):
    """Gradients of one step; returns ``(dW, db, dh_prev, dc_prev, dx)``."""
    v, i, f, o, g, c_prev, tc = cache
    H = i.shape[0]
    do = dh * tc
    dct = dc + dh * o * (1.0 - tc * tc)
    di = dct * g
    dg = dct * i
    df = dct * c_prev
    dz = np.concatenate([
        di * i * (1.0 - i),
        df * f * (1.0 - f),
        do * o * (1.0 - o),
        dg * (1.0 - g * g),
    ])
    dv = W.T @ dz
    return np.outer(dz, v), dz, dv[:H], dct * f, dv[H:]


def head(params, h2):
    a = np.tanh(params["D1"] @ h2 + params["d1"])
    return params["D2"] @ a + params["d2"], a


def forward_sequence(params, xs, state0):
    """Run the stack over ``xs``; returns ``(y, final_state, caches)``."""
    h1, c1, h2, c2 = state0["h1"], state0["c1"], state0["h2"], state0["c2"]
    caches = []
    for x in xs:
        h1, c1, k1 = lstm_cell_step(params["W1"], params["b1"], x, h1, c1)
        h2, c2, k2 = lstm_cell_step(params["W2"], params["b2"], h1, h2, c2)
        caches.append((k1, k2))
    y, a = head(params, h2)
    return y, {"h1": h1, "c1": c1, "h2": h2, "c2": c2}, (caches, a, h2)


def loss_and_grads(params, xs, target, state0):
    """MSE at the last step and its gradient for every parameter tensor."""
    y, final, (caches, a, h2) = forward_sequence(params, xs, state0)
    target = np.asarray(target, dtype=float)
    r = y - target
    loss = float(np.mean(r * r))
    grads = {k: np.zeros_like(v) for k, v in params.items()}
    dy = 2.0 * r / r.size
    grads["D2"] = np.outer(dy, a)
    grads["d2"] = dy
    dpre = (params["D2"].T @ dy) * (1.0 - a * a)
    grads["D1"] = np.outer(dpre, h2)
    grads["d1"] = dpre
    H = h2.shape[0]
    dh2 = params["D1"].T @ dpre
    dc2 = np.zeros(H)
    dh1 = np.zeros(H)
    dc1 = np.zeros(H)
    for k1, k2 in reversed(caches):
        dW, db, dh2, dc2, dx2 = lstm_cell_backward(params["W2"], k2, dh2, dc2)
        grads["W2"] += dW
        grads["b2"] += db
        dW, db, dh1, dc1, _ = lstm_cell_backward(params["W1"], k1, dh1 + dx2, dc1)
        grads["W1"] += dW
        grads["b1"] += db
    return loss, grads, y, final


def advance(params, x, state):
    """Carry ``state`` one step through ``x`` (no head, no gradients)."""
    h1, c1, _ = lstm_cell_step(params["W1"], params["b1"], x, state["h1"], state["c1"])
    h2, c2, _ = lstm_cell_step(params["W2"], params["b2"], h1, state["h2"], state["c2"])
    return {"h1": h1, "c1": c1, "h2": h2, "c2": c2}


class LstmViewModel(OnlineViewModel):
    """Online LSTM regressor.

    The model keeps the inputs of the last ``bptt_horizon`` updates and the
    recurrent state just before them. Both :meth:`predict` and
    :meth:`update` replay that window with the current parameters, so a
    prediction and the forward pass of the next update agree exactly.
    """

    kind = "lstm"

    def __init__(self, n_inputs, n_outputs, hidden=3, dense=50, bptt_horizon=30,
                 learning_rate=1e-3, decay=0.9, eps=1e-8, seed=0):
        super().__init__(n_inputs, n_outputs)
        self.hidden = hidden
        self.dense = dense
        self.bptt_horizon = bptt_horizon
        self.learning_rate = learning_rate
        self.decay = decay
        self.eps = eps
        self.seed = seed
        self.reset()

    def config(self):
        return dict(
            n_inputs=self.n_inputs, n_outputs=self.n_outputs, hidden=self.hidden,
            dense=self.dense, bptt_horizon=self.bptt_horizon,
            learning_rate=self.learning_rate, decay=self.decay, eps=self.eps, seed=self.seed,
        )

    def reset(self):
        params = init_params(self.n_inputs, self.n_outputs, self.hidden, self.dense, self.seed)
        self.state = {
            "params": params,
            "ms": {k: np.zeros_like(v) for k, v in params.items()},
            "window": [],
            "start": zero_state(self.hidden),
            "steps": 0,
        }

    def reset_optimizer(self):
        self.state["ms"] = {k: np.zeros_like(v) for k, v in self.state["params"].items()}

    @property
    def params(self):
        return self.state["params"]

    def _check(self, x):
        x = as_input(x)
        if x.shape != (self.n_inputs,):
            raise DimensionMismatch(f"expected {self.n_inputs} inputs, got {x.shape[0]}")
        return x

    def predict(self, x):
        x = self._check(x)
        xs = self.state["window"] + [x]
        y, _, _ = forward_sequence(self.params, xs, self.state["start"])
        return y

    def update(self, x, target):
        x = self._check(x)
        target = np.asarray(target, dtype=float).reshape(-1)
        if target.shape != (self.n_outputs,):
            raise DimensionMismatch(f"expected {self.n_outputs} targets, got {target.shape[0]}")
        if not np.all(np.isfinite(target)):
            raise ValueError("target must be finite")
        st = self.state
        xs = st["window"] + [x]
        start = st["start"]
        if len(xs) > self.bptt_horizon:
            start = advance(st["params"], xs[0], start)
            xs = xs[1:]
        loss, grads, _, _ = loss_and_grads(st["params"], xs, target, start)
        if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads.values()):
            raise NonFiniteLoss(f"loss became {loss} at step {st['steps']}")
        rho, lr, eps = self.decay, self.learning_rate, self.eps
        for k, g in grads.items():
            ms = st["ms"][k]
            ms *= rho
            ms += (1.0 - rho) * g * g
            st["params"][k] -= lr * g / (np.sqrt(ms) + eps)
        st["window"] = xs
        st["start"] = start
        st["steps"] += 1
        return loss
