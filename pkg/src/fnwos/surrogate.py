"""Residual MLP surrogate with GELU, hand-written backprop, Adam and JSON checkpoints.

Layout: h0 = W_in x + b_in, h_{k+1} = h_k + gelu(W_k h_k + b_k), out = W_out h + b_out.
Weights are stored as (fan_in, fan_out) so a batch is ``X @ W + b``.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

FORMAT_VERSION = 1
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
FINAL_LR_RATIO = 0.01

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)


class CheckpointError(ValueError):
    pass


@dataclass
class Surrogate:
    input_dim: int
    width: int
    depth: int
    params: list  # [(W, b)] : input lift, depth residual blocks, output head

    def __post_init__(self):
        if len(self.params) != self.depth + 2:
            raise ValueError(f"expected {self.depth + 2} layers, got {len(self.params)}")
        shapes = [(self.input_dim, self.width)] + [(self.width, self.width)] * self.depth + [(self.width, 1)]
        for (w, b), shp in zip(self.params, shapes):
            if w.shape != shp or b.shape != (shp[1],):
                raise ValueError(f"layer shape {w.shape}/{b.shape} does not match {shp}")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return forward(self, x)

    def copy(self) -> "Surrogate":
        return Surrogate(self.input_dim, self.width, self.depth, [(w.copy(), b.copy()) for w, b in self.params])

    def flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for wb in self.params for a in wb])


@dataclass
class OptimizerState:
    base_lr: float
    decay_factor: float
    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps_adam: float = ADAM_EPS

    @property
    def lr(self) -> float:
        return self.base_lr * self.decay_factor**self.step


def init(input_dim: int, width: int, depth: int, seed: int) -> Surrogate:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases."""
    if min(input_dim, width, depth) < 1:
        raise ValueError("input_dim, width and depth must be >= 1")
    rng = np.random.default_rng(seed)
    shapes = [(input_dim, width)] + [(width, width)] * depth + [(width, 1)]
    params = []
    for fan_in, fan_out in shapes:
        bound = 1.0 / math.sqrt(fan_in)
        params.append((rng.uniform(-bound, bound, size=(fan_in, fan_out)), np.zeros(fan_out)))
    return Surrogate(input_dim, width, depth, params)


def make_optimizer(s: Surrogate, base_lr: float, total_steps: int) -> OptimizerState:
    """Adam state with lr(t) = base_lr * (0.01^{1/T})^t."""
    if total_steps < 1:
        raise ValueError("total_steps must be positive")
    decay = FINAL_LR_RATIO ** (1.0 / total_steps)
    zeros = [(np.zeros_like(w), np.zeros_like(b)) for w, b in s.params]
    return OptimizerState(base_lr, decay, 0, zeros, [(a.copy(), c.copy()) for a, c in zeros])


def gelu(z):
    return 0.5 * z * (1.0 + erf(z * _INV_SQRT2))


def gelu_grad(z):
    return 0.5 * (1.0 + erf(z * _INV_SQRT2)) + z * _INV_SQRT2PI * np.exp(-0.5 * z * z)


def _check_input(s: Surrogate, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != s.input_dim:
        raise ValueError(f"input shape {x.shape} does not match input_dim={s.input_dim}")
    return x


def forward(s: Surrogate, x) -> np.ndarray:
    x = _check_input(s, x)
    (w0, b0), blocks, (wo, bo) = s.params[0], s.params[1:-1], s.params[-1]
    h = x @ w0 + b0
    for w, b in blocks:
        h = h + gelu(h @ w + b)
    return (h @ wo + bo)[:, 0]


def _forward_cache(s: Surrogate, x: np.ndarray):
    (w0, b0), blocks, (wo, bo) = s.params[0], s.params[1:-1], s.params[-1]
    hs, dacts = [x @ w0 + b0], []
    for w, b in blocks:
        z = hs[-1] @ w + b
        cdf = 0.5 * (1.0 + erf(z * _INV_SQRT2))
        # erf dominates the cost, so the derivative reuses the CDF
        dacts.append(cdf + z * _INV_SQRT2PI * np.exp(-0.5 * z * z))
        hs.append(hs[-1] + z * cdf)
    return (hs[-1] @ wo + bo)[:, 0], hs, dacts


def _backward(s: Surrogate, x: np.ndarray, hs, dacts, dout: np.ndarray) -> list:
    grads = [None] * len(s.params)
    wo = s.params[-1][0]
    grads[-1] = (hs[-1].T @ dout[:, None], np.array([dout.sum()]))
    dh = dout[:, None] * wo[:, 0][None, :]
    for k in range(s.depth, 0, -1):
        w = s.params[k][0]
        dz = dh * dacts[k - 1]
        grads[k] = (hs[k - 1].T @ dz, dz.sum(axis=0))
        dh = dh + dz @ w.T
    grads[0] = (x.T @ dh, dh.sum(axis=0))
    return grads


@dataclass
class LossParts:
    total: float
    interior: float
    boundary: float


def loss_and_grad(s: Surrogate, x_int, y_int, x_bdy, g_bdy, beta: float):
    """L = mean((v - y)^2 over interior) + beta * mean((v - g)^2 over boundary), with its exact gradient.

    Returns ``(LossParts, grads)``; grads mirror ``s.params``.
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    x_int = _check_input(s, x_int)
    y_int = np.asarray(y_int, dtype=np.float64).ravel()
    if x_int.shape[0] == 0 or y_int.shape[0] != x_int.shape[0]:
        raise ValueError("interior batch must be nonempty with matching targets")
    use_bdy = beta > 0 and x_bdy is not None and len(x_bdy) > 0
    if use_bdy:
        x_bdy = _check_input(s, x_bdy)
        g_bdy = np.asarray(g_bdy, dtype=np.float64).ravel()
        if g_bdy.shape[0] != x_bdy.shape[0]:
            raise ValueError("boundary batch and values differ in length")
        x = np.concatenate([x_int, x_bdy])
    elif beta > 0:
        raise ValueError("boundary batch must be nonempty when beta > 0")
    else:
        x = x_int
    out, hs, dacts = _forward_cache(s, x)
    n_i = x_int.shape[0]
    r_i = out[:n_i] - y_int
    loss_i = float(np.mean(r_i * r_i))
    dout = np.empty_like(out)
    dout[:n_i] = 2.0 * r_i / n_i
    loss_b = 0.0
    if use_bdy:
        r_b = out[n_i:] - g_bdy
        loss_b = float(np.mean(r_b * r_b))
        dout[n_i:] = 2.0 * beta * r_b / r_b.shape[0]
    grads = _backward(s, x, hs, dacts, dout)
    return LossParts(loss_i + beta * loss_b, loss_i, loss_b), grads


def adam_step(s: Surrogate, opt: OptimizerState, grads) -> None:
    """In-place bias-corrected Adam update at the scheduled learning rate."""
    if len(grads) != len(s.params):
        raise ValueError("gradient list does not match parameters")
    lr = opt.lr
    t = opt.step + 1
    c1 = 1.0 - opt.beta1**t
    c2 = 1.0 - opt.beta2**t
    for i, ((w, b), (gw, gb)) in enumerate(zip(s.params, grads)):
        mw, mb = opt.m[i]
        vw, vb = opt.v[i]
        for p, g, m, v in ((w, gw, mw, vw), (b, gb, mb, vb)):
            if g.shape != p.shape:
                raise ValueError(f"gradient shape {g.shape} does not match parameter {p.shape}")
            m *= opt.beta1
            m += (1.0 - opt.beta1) * g
            v *= opt.beta2
            v += (1.0 - opt.beta2) * g * g
            p -= lr * (m / c1) / (np.sqrt(v / c2) + opt.eps_adam)
    opt.step = t


# --------------------------------------------------------------------------
# checkpoints


def _enc(a: np.ndarray) -> dict:
    return {"shape": list(a.shape), "data": [float(v).hex() for v in a.ravel()]}


def _dec(rec: dict) -> np.ndarray:
    return np.array([float.fromhex(v) for v in rec["data"]], dtype=np.float64).reshape(rec["shape"])


def checkpoint_dict(s: Surrogate, opt: OptimizerState | None) -> dict:
    rec = {
        "format_version": FORMAT_VERSION,
        "architecture": {"input_dim": s.input_dim, "width": s.width, "depth": s.depth, "activation": "gelu_erf"},
        "params": [{"W": _enc(w), "b": _enc(b)} for w, b in s.params],
    }
    if opt is not None:
        rec["optimizer"] = {
            "step": opt.step,
            "base_lr": opt.base_lr.hex(),
            "decay_factor": opt.decay_factor.hex(),
            "beta1": opt.beta1.hex(),
            "beta2": opt.beta2.hex(),
            "eps_adam": opt.eps_adam.hex(),
            "m": [{"W": _enc(a), "b": _enc(c)} for a, c in opt.m],
            "v": [{"W": _enc(a), "b": _enc(c)} for a, c in opt.v],
        }
    return rec


def save_checkpoint(s: Surrogate, opt: OptimizerState | None, path) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(checkpoint_dict(s, opt), fh)
    os.replace(tmp, path)


def load_checkpoint(path, expect_input_dim: int | None = None):
    """Returns ``(surrogate, optimizer_or_None)``."""
    with open(path) as fh:
        rec = json.load(fh)
    if rec.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(f"{path}: format version {rec.get('format_version')!r}, expected {FORMAT_VERSION}")
    arch = rec["architecture"]
    if expect_input_dim is not None and arch["input_dim"] != expect_input_dim:
        raise CheckpointError(f"{path}: checkpoint input_dim={arch['input_dim']} but problem has d={expect_input_dim}")
    try:
        params = [(_dec(p["W"]), _dec(p["b"])) for p in rec["params"]]
        s = Surrogate(arch["input_dim"], arch["width"], arch["depth"], params)
    except (KeyError, ValueError) as exc:
        raise CheckpointError(f"{path}: inconsistent checkpoint ({exc})") from exc
    opt = None
    if "optimizer" in rec:
        o = rec["optimizer"]
        opt = OptimizerState(
            base_lr=float.fromhex(o["base_lr"]),
            decay_factor=float.fromhex(o["decay_factor"]),
            step=int(o["step"]),
            m=[(_dec(p["W"]), _dec(p["b"])) for p in o["m"]],
            v=[(_dec(p["W"]), _dec(p["b"])) for p in o["v"]],
            beta1=float.fromhex(o["beta1"]),
            beta2=float.fromhex(o["beta2"]),
            eps_adam=float.fromhex(o["eps_adam"]),
        )
    return s, opt
