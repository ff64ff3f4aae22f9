"""Fully connected tanh networks evaluated over Taylor jets.

Parameters live in one flat float64 vector, layer-major: for each layer the
weight matrix in row-major (out, in) order followed by its bias.  The jet
forward pass propagates coefficient arrays of shape (width, n_points, C)
through the layers, so a single evaluation yields the network value and all
input partials up to the requested truncation degree.  ``backward_batch``
is the hand-written reverse pass used for parameter gradients.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .jets import (
    MAX_DEGREE,
    N_COEFFS,
    Jet,
    tanh_backward,
    tanh_coeffs_with_cache,
)
from .tape import Node, gradient

SNAPSHOT_MAGIC = b"MLPS"
SNAPSHOT_VERSION = 1


class NonFiniteObjectiveError(FloatingPointError):
    """Objective produced NaN/Inf; carries the offending parameter state."""

    def __init__(self, message, params):
        super().__init__(message)
        self.params = np.array(params)


@dataclass(frozen=True)
class MlpSpec:
    input_dim: int = 2
    hidden_layers: int = 2
    width: int = 20
    output_dim: int = 1

    def __post_init__(self):
        if self.hidden_layers < 1 or self.width < 1:
            raise ValueError("need hidden_layers >= 1 and width >= 1")

    def layer_dims(self) -> list[int]:
        return [self.input_dim] + [self.width] * self.hidden_layers + [self.output_dim]

    def n_params(self) -> int:
        dims = self.layer_dims()
        return sum((dims[i] + 1) * dims[i + 1] for i in range(len(dims) - 1))


def init_params(spec: MlpSpec, seed: int) -> np.ndarray:
    """Glorot-uniform weights, zero biases, reproducible from the seed."""
    rng = np.random.default_rng(seed)
    dims = spec.layer_dims()
    parts = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        parts.append(rng.uniform(-limit, limit, size=fan_out * fan_in))
        parts.append(np.zeros(fan_out))
    return np.concatenate(parts)


def split_params(theta: np.ndarray, spec: MlpSpec) -> list[tuple[np.ndarray, np.ndarray]]:
    """Views (W, b) per layer into the flat vector."""
    dims = spec.layer_dims()
    layers = []
    pos = 0
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        w = theta[pos : pos + fan_out * fan_in].reshape(fan_out, fan_in)
        pos += fan_out * fan_in
        b = theta[pos : pos + fan_out]
        pos += fan_out
        layers.append((w, b))
    if pos != theta.size:
        raise ValueError(f"parameter vector length {theta.size} != spec {spec.n_params()}")
    return layers


def forward_batch(theta: np.ndarray, spec: MlpSpec, points: np.ndarray, deg: int):
    """Jet forward pass over a batch of points.

    Returns (out, cache) with out shaped (n_points, C); the cache feeds
    ``backward_batch``.
    """
    pts = np.asarray(points, dtype=float)
    n = pts.shape[0]
    c = N_COEFFS[deg]
    h = np.zeros((spec.input_dim, n, c))
    h[0, :, 0] = pts[:, 0]
    h[1, :, 0] = pts[:, 1]
    if deg >= 1:
        h[0, :, 1] = 1.0
        h[1, :, 2] = 1.0

    layers = split_params(np.asarray(theta, dtype=float), spec)
    n_layers = len(layers)
    stored = []
    for li, (w, b) in enumerate(layers):
        z = (w @ h.reshape(h.shape[0], -1)).reshape(w.shape[0], n, c)
        z[:, :, 0] += b[:, None]
        if li < n_layers - 1:
            out, tanh_cache = tanh_coeffs_with_cache(z, deg)
            stored.append((h, w, tanh_cache))
            h = out
        else:
            stored.append((h, w, None))
            h = z
    return h[0], (spec, deg, n, stored)


def backward_batch(cache, out_bar: np.ndarray) -> np.ndarray:
    """Parameter-vector gradient given d(objective)/d(output coefficients)."""
    spec, deg, n, stored = cache
    c = N_COEFFS[deg]
    z_bar = np.ascontiguousarray(out_bar, dtype=float).reshape(1, n, c)
    w_grads: list[np.ndarray] = []
    b_grads: list[np.ndarray] = []
    for li in range(len(stored) - 1, -1, -1):
        h_in, w, tanh_cache = stored[li]
        flat = z_bar.reshape(z_bar.shape[0], -1)
        w_grads.append(flat @ h_in.reshape(h_in.shape[0], -1).T)
        b_grads.append(z_bar[:, :, 0].sum(axis=1))
        if li > 0:
            h_bar = (w.T @ flat).reshape(w.shape[1], n, c)
            _, _, prev_tanh = stored[li - 1]
            z_bar = tanh_backward(prev_tanh, h_bar, deg)
    parts = []
    for wg, bg in zip(reversed(w_grads), reversed(b_grads)):
        parts.append(wg.ravel())
        parts.append(bg)
    return np.concatenate(parts)


def net_eval(theta, spec: MlpSpec, points: np.ndarray, deg: int):
    """Network jets over points; tape-aware when ``theta`` is a Node."""
    if isinstance(theta, Node):
        out, cache = forward_batch(theta.value, spec, points, deg)
        return Node(out, (theta,), (lambda g: backward_batch(cache, g),))
    out, _ = forward_batch(theta, spec, points, deg)
    return out


def forward_jet(params: np.ndarray, spec: MlpSpec, point) -> Jet:
    """Degree-3 jet of the network output at one point."""
    out, _ = forward_batch(params, spec, np.asarray([point], dtype=float), MAX_DEGREE)
    return Jet(out[0], (float(point[0]), float(point[1])))


def forward_values(params: np.ndarray, spec: MlpSpec, points: np.ndarray) -> np.ndarray:
    """Plain scalar forward pass (degree-0 jets)."""
    out, _ = forward_batch(params, spec, points, 0)
    return out[:, 0]


def grad_params(params: np.ndarray, spec: MlpSpec, objective) -> np.ndarray:
    """Exact gradient of ``objective(theta_node)`` w.r.t. the flat vector.

    The objective receives the parameters as a tape leaf and must build its
    value from tape operations and ``net_eval`` calls.
    """
    leaf = Node(np.asarray(params, dtype=float))
    val = objective(leaf)
    scalar = float(val.value) if isinstance(val, Node) else float(val)
    if not np.isfinite(scalar):
        raise NonFiniteObjectiveError(f"objective evaluated to {scalar}", params)
    if not isinstance(val, Node):
        return np.zeros_like(np.asarray(params, dtype=float))
    return gradient(val, [leaf])[0]


def save_params(path, theta: np.ndarray, spec: MlpSpec, seed: int) -> None:
    """Snapshot: little-endian header + float64 parameter payload."""
    theta = np.asarray(theta, dtype="<f8")
    header = struct.pack(
        "<4sIIIIIqQ",
        SNAPSHOT_MAGIC,
        SNAPSHOT_VERSION,
        spec.input_dim,
        spec.hidden_layers,
        spec.width,
        spec.output_dim,
        int(seed),
        theta.size,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(theta.tobytes())


def load_params(path) -> tuple[np.ndarray, MlpSpec, int]:
    with open(path, "rb") as fh:
        header = fh.read(struct.calcsize("<4sIIIIIqQ"))
        if len(header) < struct.calcsize("<4sIIIIIqQ") or header[:4] != SNAPSHOT_MAGIC:
            raise ValueError("not a parameter snapshot file")
        magic, version, d_in, hidden, width, d_out, seed, count = struct.unpack(
            "<4sIIIIIqQ", header
        )
        if magic != SNAPSHOT_MAGIC:
            raise ValueError("not a parameter snapshot file")
        if version != SNAPSHOT_VERSION:
            raise ValueError(f"unsupported snapshot version {version}")
        spec = MlpSpec(d_in, hidden, width, d_out)
        theta = np.frombuffer(fh.read(8 * count), dtype="<f8").astype(float)
    if theta.size != count or theta.size != spec.n_params():
        raise ValueError("snapshot payload does not match its header")
    return theta, spec, seed
