"""Dual-conditioning latent converter: a two-branch joint-attention transformer.

The source branch carries codec latents (1024-dim rows), the condition branch
carries reference log-mel frames (128-dim rows). Each block runs both
branches through modulated pre-norm attention and FFN sublayers; attention is
joint — queries, keys, and values of the two branches are concatenated along
time into one sequence, with full bidirectional softmax and no mask. A
192-dim speaker vector modulates every sublayer through an adaptive-norm MLP
producing six per-block vectors (scale/shift/gate for attention, then for the
FFN); the modulation form is ``LN(x)*(1+gamma)+beta`` with gated residuals
``x + alpha*out``. The adaptive-MLP output layers are zero at init, so every
freshly initialized block is the identity map on both branches.

Two ablation switches mirror the conditioning study: `use_speaker_condition`
(off: gamma=beta=0, alpha=1, speaker vector unused) and `update_cond_branch`
(off: the condition stream still supplies keys/values each layer but receives
no residual updates after its input projection).

Only the source branch has an output head; the condition stream is discarded
after the last block.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import CheckpointError, NonFiniteError

CHECKPOINT_MAGIC = b"LVCPRM01"
CHECKPOINT_VERSION = 1
LN_EPS = 1e-5

# (z, c, g) -> converted z; what the streaming engine consumes.
ConverterFn = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ConverterConfig:
    d_latent: int = 1024
    d_cond: int = 128
    d_spk: int = 192
    d_model: int = 512
    n_layers: int = 6
    n_heads: int = 8
    d_head: int = 64
    ffn_ratio: int = 4
    update_cond_branch: bool = True
    use_speaker_condition: bool = True

    def __post_init__(self) -> None:
        if self.n_heads * self.d_head != self.d_model:
            raise ValueError(
                f"n_heads*d_head must equal d_model: {self.n_heads}*{self.d_head} != {self.d_model}"
            )
        for f in fields(self):
            v = getattr(self, f.name)
            if f.type == "int" and v <= 0:
                raise ValueError(f"{f.name} must be positive, got {v}")

    @property
    def d_ffn(self) -> int:
        return self.d_model * self.ffn_ratio


# Structural fields that fix tensor shapes; the two ablation flags are
# runtime switches and do not participate in checkpoint compatibility.
_SHAPE_FIELDS = ("d_latent", "d_cond", "d_spk", "d_model", "n_layers", "n_heads", "d_head", "ffn_ratio")


def tensor_shapes(cfg: ConverterConfig) -> dict[str, tuple[int, ...]]:
    """Ordered name -> shape map for every parameter tensor.

    Linear weights are stored (in, out) and applied as ``x @ w + b``. This
    map is the single source of truth for init, save, and load.
    """
    d, s = cfg.d_model, {}
    s["src_in.w"] = (cfg.d_latent, d)
    s["src_in.b"] = (d,)
    s["cond_in.w"] = (cfg.d_cond, d)
    s["cond_in.b"] = (d,)
    for i in range(cfg.n_layers):
        for br in ("src", "cond"):
            p = f"layers.{i}.{br}."
            s[p + "adaln.w1"] = (cfg.d_spk, d)
            s[p + "adaln.b1"] = (d,)
            s[p + "adaln.w2"] = (d, 6 * d)
            s[p + "adaln.b2"] = (6 * d,)
            s[p + "qkv.w"] = (d, 3 * d)
            s[p + "qkv.b"] = (3 * d,)
            s[p + "attn_out.w"] = (d, d)
            s[p + "attn_out.b"] = (d,)
            s[p + "ffn.w1"] = (d, cfg.d_ffn)
            s[p + "ffn.b1"] = (cfg.d_ffn,)
            s[p + "ffn.w2"] = (cfg.d_ffn, d)
            s[p + "ffn.b2"] = (d,)
    s["src_out.w"] = (d, cfg.d_latent)
    s["src_out.b"] = (cfg.d_latent,)
    return s


@dataclass
class ConverterParams:
    cfg: ConverterConfig
    tensors: dict[str, np.ndarray]


def param_count(params: ConverterParams) -> int:
    return sum(int(t.size) for t in params.tensors.values())


def init_params(cfg: ConverterConfig, seed: int, dtype=np.float32) -> ConverterParams:
    """Glorot-uniform weights, zero biases, zero adaptive-norm output layers.

    The zeroed `adaln.w2`/`adaln.b2` make all six modulation vectors zero at
    init, so every block starts as the identity on both branches.
    """
    rng = np.random.default_rng(seed)
    tensors: dict[str, np.ndarray] = {}
    for name, shape in tensor_shapes(cfg).items():
        if name.endswith(".b") or name.endswith("b1") or name.endswith("b2") or name.endswith("adaln.w2"):
            tensors[name] = np.zeros(shape, dtype=dtype)
        else:
            limit = np.sqrt(6.0 / (shape[0] + shape[1]))
            tensors[name] = rng.uniform(-limit, limit, size=shape).astype(dtype)
    return ConverterParams(cfg=cfg, tensors=tensors)


# tanh-form GELU; the erf form is not SIMD-vectorized in this stack and
# would dominate the per-chunk compute budget.
_GELU_C = 0.7978845608028654  # sqrt(2/pi)


def gelu(x: np.ndarray) -> np.ndarray:
    """GELU, tanh approximation: 0.5*x*(1 + tanh(sqrt(2/pi)*(x + 0.044715*x^3)))."""
    return 0.5 * x * (1.0 + np.tanh(_GELU_C * (x + 0.044715 * x * x * x)))


def layer_norm(x: np.ndarray, eps: float = LN_EPS) -> np.ndarray:
    """Parameter-free layer norm over the last axis: (x - mean)/sqrt(var + eps)."""
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    return (x - mu) / np.sqrt(var + eps)


def sinusoidal_positions(positions: np.ndarray, d_model: int) -> np.ndarray:
    """Sinusoidal absolute encoding: PE[p, 2i] = sin(p*w_i), PE[p, 2i+1] = cos(p*w_i),
    with w_i = 10000**(-2i/d_model)."""
    positions = np.asarray(positions, dtype=np.float64)
    half = d_model // 2
    freqs = 10000.0 ** (-2.0 * np.arange(half) / d_model)
    angles = positions[:, None] * freqs[None, :]
    pe = np.empty((positions.shape[0], d_model), dtype=np.float64)
    pe[:, 0::2] = np.sin(angles)
    pe[:, 1::2] = np.cos(angles)
    return pe


@lru_cache(maxsize=32)
def _cached_pe(n: int, d_model: int, dtype_name: str) -> np.ndarray:
    pe = sinusoidal_positions(np.arange(n), d_model).astype(np.dtype(dtype_name))
    pe.flags.writeable = False
    return pe


def speaker_modulations(params: ConverterParams, g: np.ndarray) -> list[dict[str, tuple[np.ndarray, ...]]]:
    """Per-layer, per-branch modulation tuples (s1, b1, a1, s2, b2, a2) from g.

    s = 1 + gamma is stored pre-added so the hot path multiplies directly;
    at init gamma = beta = alpha = 0, i.e. s = 1, no shift, closed gates.
    """
    t = params.tensors
    out = []
    for i in range(params.cfg.n_layers):
        layer = {}
        for br in ("src", "cond"):
            p = f"layers.{i}.{br}."
            h = gelu(g @ t[p + "adaln.w1"] + t[p + "adaln.b1"])
            mod = h @ t[p + "adaln.w2"] + t[p + "adaln.b2"]
            g1, b1, a1, g2, b2, a2 = np.split(mod, 6)
            layer[br] = (1.0 + g1, b1, a1, 1.0 + g2, b2, a2)
        out.append(layer)
    return out


def _ln_fm_into(x: np.ndarray, out: np.ndarray, eps: float = LN_EPS) -> np.ndarray:
    """layer_norm over axis 0 of a feature-major (d, T) buffer, written into `out`.

    Same statistics as `layer_norm` on the transposed array; kept separate so
    the hot path can stay feature-major without per-layer transposes.
    """
    mu = x.mean(axis=0)
    np.subtract(x, mu, out=out)
    var = np.einsum("dt,dt->t", out, out) / x.shape[0]
    np.sqrt(var + eps, out=var)
    out /= var
    return out


def _gelu_into(x: np.ndarray, out: np.ndarray) -> np.ndarray:
    """gelu(x) written into `out` (same shape, distinct storage); x is preserved."""
    np.multiply(x, x, out=out)
    out *= x
    out *= 0.044715
    out += x
    out *= _GELU_C
    np.tanh(out, out=out)
    out += 1.0
    out *= x
    out *= 0.5
    return out


def _buf(scratch: dict | None, key: str, shape: tuple[int, ...], dtype) -> np.ndarray:
    """Fetch a reusable work buffer; falls back to a fresh array without a scratch dict."""
    if scratch is None:
        return np.empty(shape, dtype)
    a = scratch.get(key)
    if a is None or a.shape != shape or a.dtype != dtype:
        a = np.empty(shape, dtype)
        scratch[key] = a
    return a


def _transposed_weights(params: ConverterParams, scratch: dict | None) -> dict[str, np.ndarray]:
    """Contiguous transposed copies of the projection matrices.

    The blocks compute W.T @ x.T with activations kept feature-major; on a
    single core that orientation runs the large rotating-weight products
    measurably faster than x @ W. Cached in `scratch` so a long-lived
    converter pays the copy once.
    """
    if scratch is not None and "wT" in scratch:
        return scratch["wT"]
    t = params.tensors
    names = ["src_in.w", "cond_in.w", "src_out.w"]
    for i in range(params.cfg.n_layers):
        for br in ("src", "cond"):
            p = f"layers.{i}.{br}."
            names += [p + "qkv.w", p + "attn_out.w", p + "ffn.w1", p + "ffn.w2"]
    store = {n: np.ascontiguousarray(t[n].T) for n in names}
    if scratch is not None:
        scratch["wT"] = store
    return store


def forward(
    params: ConverterParams,
    z: np.ndarray,
    c: np.ndarray,
    g: np.ndarray,
    cond_positions: np.ndarray | None = None,
    return_trace: bool = False,
    mod_cache: dict | None = None,
    scratch: dict | None = None,
):
    """Convert source latents (T_s, d_latent) conditioned on mel (T_c, d_cond)
    and speaker vector (d_spk,).

    Both branches are projected to d_model, given sinusoidal positions
    starting at 0 (the condition branch's positions can be overridden via
    `cond_positions`), then run through the joint-attention blocks; the
    output head maps the normalized source stream back to latent space.

    With `return_trace` the per-layer (h_src, h_cond) states after each block
    are returned alongside the output, including the post-projection inputs
    as entry 0. `mod_cache` is an optional dict carried across calls to skip
    recomputing speaker modulations when the same g repeats (every chunk of
    a stream). `scratch` is an optional dict of reusable work buffers; a
    caller that owns one (and calls sequentially) avoids refaulting ~8 MB of
    fresh pages per chunk.

    The body keeps activations feature-major (d, T) and multiplies with
    transposed weight copies, reuses work buffers across layers, and
    operates in place where it can; one chunk must stay well under its own
    duration on a single core, and GEMM orientation, allocation churn, and
    page faults were all measured costs.
    """
    cfg = params.cfg
    t = params.tensors
    dtype = t["src_in.w"].dtype

    z = np.asarray(z)
    c = np.asarray(c)
    g = np.asarray(g).reshape(-1)
    if z.ndim != 2 or z.shape[1] != cfg.d_latent:
        raise ValueError(f"source latents must be (T_s, {cfg.d_latent}), got {z.shape}")
    if c.ndim != 2 or c.shape[1] != cfg.d_cond:
        raise ValueError(f"condition must be (T_c, {cfg.d_cond}), got {c.shape}")
    if g.shape != (cfg.d_spk,):
        raise ValueError(f"speaker vector must have dim {cfg.d_spk}, got {g.shape}")
    if z.shape[0] < 1 or c.shape[0] < 1:
        raise ValueError("source and condition must each have at least one frame")
    for name, arr in (("source latents", z), ("condition", c), ("speaker vector", g)):
        if not np.isfinite(arr).all():
            raise NonFiniteError(f"{name} contain non-finite values")

    T_s, T_c = z.shape[0], c.shape[0]
    d = cfg.d_model
    wt = _transposed_weights(params, scratch)
    zT = _buf(scratch, "zT", (cfg.d_latent, T_s), dtype)
    np.copyto(zT, z.T)
    cT = _buf(scratch, "cT", (cfg.d_cond, T_c), dtype)
    np.copyto(cT, c.T)
    h_src = _buf(scratch, "h_src", (d, T_s), dtype)
    np.matmul(wt["src_in.w"], zT, out=h_src)
    h_src += t["src_in.b"][:, None]
    h_src += _cached_pe(T_s, d, dtype.name).T
    h_cond = _buf(scratch, "h_cond", (d, T_c), dtype)
    np.matmul(wt["cond_in.w"], cT, out=h_cond)
    h_cond += t["cond_in.b"][:, None]
    if cond_positions is None:
        h_cond += _cached_pe(T_c, d, dtype.name).T
    else:
        cond_positions = np.asarray(cond_positions)
        if cond_positions.shape != (T_c,):
            raise ValueError(f"cond_positions must have shape ({T_c},)")
        h_cond += sinusoidal_positions(cond_positions, d).astype(dtype).T

    mods = None
    if cfg.use_speaker_condition:
        g32 = g.astype(dtype)
        if mod_cache is not None:
            key = g32.tobytes()
            mods = mod_cache.get(key)
            if mods is None:
                if len(mod_cache) >= 4:
                    mod_cache.pop(next(iter(mod_cache)))
                mods = mod_cache[key] = speaker_modulations(params, g32)
        else:
            mods = speaker_modulations(params, g32)
    trace = [(h_src.T.copy(), h_cond.T.copy())] if return_trace else None

    # work buffers shared by all layers; activations are (features, tokens)
    T = T_s + T_c
    n_heads, d_head, d_ffn = cfg.n_heads, cfg.d_head, cfg.d_ffn
    qkv = _buf(scratch, "qkv", (3 * d, T), dtype)
    scores = _buf(scratch, "scores", (n_heads, T, T), dtype)
    attn = _buf(scratch, "attn", (d, T), dtype)
    ln_s = _buf(scratch, "ln_s", (d, T_s), dtype)
    ln_c = _buf(scratch, "ln_c", (d, T_c), dtype)
    out_s = _buf(scratch, "out_s", (d, T_s), dtype)
    out_c = _buf(scratch, "out_c", (d, T_c), dtype)
    hid_s = _buf(scratch, "hid_s", (d_ffn, T_s), dtype)
    gel_s = _buf(scratch, "gel_s", (d_ffn, T_s), dtype)
    hid_c = _buf(scratch, "hid_c", (d_ffn, T_c), dtype)
    gel_c = _buf(scratch, "gel_c", (d_ffn, T_c), dtype)
    # per-head views of the packed buffers; all contiguous row blocks
    q_heads = qkv[:d].reshape(n_heads, d_head, T)
    k_heads = qkv[d : 2 * d].reshape(n_heads, d_head, T)
    v_heads = qkv[2 * d :].reshape(n_heads, d_head, T)
    attn_heads = attn.reshape(n_heads, d_head, T)
    inv_sqrt_dh = dtype.type(1.0) / np.sqrt(dtype.type(d_head))

    for i in range(cfg.n_layers):
        ps, pc = f"layers.{i}.src.", f"layers.{i}.cond."
        if mods is not None:
            s1s, b1s, a1s, s2s, b2s, a2s = (m[:, None] for m in mods[i]["src"])
            s1c, b1c, a1c, s2c, b2c, a2c = (m[:, None] for m in mods[i]["cond"])

        _ln_fm_into(h_src, ln_s)
        _ln_fm_into(h_cond, ln_c)
        if mods is not None:
            ln_s *= s1s
            ln_s += b1s
            ln_c *= s1c
            ln_c += b1c
        np.matmul(wt[ps + "qkv.w"], ln_s, out=qkv[:, :T_s])
        qkv[:, :T_s] += t[ps + "qkv.b"][:, None]
        np.matmul(wt[pc + "qkv.w"], ln_c, out=qkv[:, T_s:])
        qkv[:, T_s:] += t[pc + "qkv.b"][:, None]

        # scale queries up front; equivalent to dividing the scores
        qkv[:d] *= inv_sqrt_dh
        np.matmul(q_heads.transpose(0, 2, 1), k_heads, out=scores)
        scores -= scores.max(axis=-1, keepdims=True)
        np.exp(scores, out=scores)
        scores /= scores.sum(axis=-1, keepdims=True)
        np.matmul(v_heads, scores.transpose(0, 2, 1), out=attn_heads)

        np.matmul(wt[ps + "attn_out.w"], attn[:, :T_s], out=out_s)
        out_s += t[ps + "attn_out.b"][:, None]
        if mods is not None:
            out_s *= a1s
        h_src += out_s
        if cfg.update_cond_branch:
            np.matmul(wt[pc + "attn_out.w"], attn[:, T_s:], out=out_c)
            out_c += t[pc + "attn_out.b"][:, None]
            if mods is not None:
                out_c *= a1c
            h_cond += out_c

        _ln_fm_into(h_src, ln_s)
        if mods is not None:
            ln_s *= s2s
            ln_s += b2s
        np.matmul(wt[ps + "ffn.w1"], ln_s, out=hid_s)
        hid_s += t[ps + "ffn.b1"][:, None]
        _gelu_into(hid_s, gel_s)
        np.matmul(wt[ps + "ffn.w2"], gel_s, out=out_s)
        out_s += t[ps + "ffn.b2"][:, None]
        if mods is not None:
            out_s *= a2s
        h_src += out_s
        if cfg.update_cond_branch:
            _ln_fm_into(h_cond, ln_c)
            if mods is not None:
                ln_c *= s2c
                ln_c += b2c
            np.matmul(wt[pc + "ffn.w1"], ln_c, out=hid_c)
            hid_c += t[pc + "ffn.b1"][:, None]
            _gelu_into(hid_c, gel_c)
            np.matmul(wt[pc + "ffn.w2"], gel_c, out=out_c)
            out_c += t[pc + "ffn.b2"][:, None]
            if mods is not None:
                out_c *= a2c
            h_cond += out_c

        if return_trace:
            trace.append((h_src.T.copy(), h_cond.T.copy()))

    _ln_fm_into(h_src, ln_s)
    outT = _buf(scratch, "outT", (cfg.d_latent, T_s), dtype)
    np.matmul(wt["src_out.w"], ln_s, out=outT)
    outT += t["src_out.b"][:, None]
    out = outT.T.copy()
    if return_trace:
        return out, trace
    return out


def make_converter(params: ConverterParams) -> ConverterFn:
    """Bind parameters into the (z, c, g) -> z callable the pipeline uses.

    The returned callable keeps a small modulation cache (repeated calls
    with the same speaker vector, chunk after chunk of a stream, skip the
    adaptive-norm MLPs) and a persistent set of work buffers. The buffer
    reuse makes each returned callable single-stream: call it sequentially,
    and make a separate converter per concurrent stream.
    """
    mod_cache: dict = {}
    scratch: dict = {}
    _transposed_weights(params, scratch)  # pay the layout copy at build time, not in the first chunk
    return lambda z, c, g: forward(params, z, c, g, mod_cache=mod_cache, scratch=scratch)


def identity_converter(z: np.ndarray, c: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Latent passthrough; isolates codec and streaming behavior in tests."""
    return z


def save_params(path: str | Path, params: ConverterParams) -> None:
    """Write magic, uint64 header length, JSON header, then float32 LE blobs.

    The header carries the format version, the config, and a tensor manifest
    mapping name -> [shape, byte offset into the blob section]. Blobs follow
    in manifest order.
    """
    shapes = tensor_shapes(params.cfg)
    manifest: dict[str, list] = {}
    offset = 0
    for name, shape in shapes.items():
        manifest[name] = [list(shape), offset]
        offset += 4 * int(np.prod(shape))
    header = {
        "format_version": CHECKPOINT_VERSION,
        "config": asdict(params.cfg),
        "manifest": manifest,
    }
    header_bytes = json.dumps(header).encode("utf-8")
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC)
        f.write(len(header_bytes).to_bytes(8, "little"))
        f.write(header_bytes)
        for name in shapes:
            f.write(np.ascontiguousarray(params.tensors[name], dtype="<f4").tobytes())


def load_params(path: str | Path, cfg: ConverterConfig | None = None) -> ConverterParams:
    """Load a checkpoint; validate magic, version, shapes, and total size.

    If `cfg` is given, its structural fields must match the file and its
    runtime flags (the two ablation switches) take precedence over the
    stored ones.
    """
    blob = Path(path).read_bytes()
    if len(blob) < len(CHECKPOINT_MAGIC) + 8 or blob[: len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise CheckpointError(f"{path}: not a converter checkpoint (bad magic)")
    header_len = int.from_bytes(blob[8:16], "little")
    header_end = 16 + header_len
    if header_end > len(blob):
        raise CheckpointError(f"{path}: truncated file (header extends past EOF)")
    try:
        header = json.loads(blob[16:header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: unreadable header ({exc})") from exc
    if header.get("format_version") != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"{path}: version mismatch (file {header.get('format_version')}, supported {CHECKPOINT_VERSION})"
        )
    try:
        file_cfg = ConverterConfig(**header["config"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"{path}: invalid config in header ({exc})") from exc
    if cfg is not None:
        for f in _SHAPE_FIELDS:
            if getattr(cfg, f) != getattr(file_cfg, f):
                raise CheckpointError(
                    f"{path}: shape mismatch on {f} (file {getattr(file_cfg, f)}, requested {getattr(cfg, f)})"
                )
        file_cfg = replace(
            file_cfg,
            update_cond_branch=cfg.update_cond_branch,
            use_speaker_condition=cfg.use_speaker_condition,
        )

    shapes = tensor_shapes(file_cfg)
    manifest = header.get("manifest", {})
    if set(manifest) != set(shapes):
        raise CheckpointError(f"{path}: manifest does not list the expected tensors")
    tensors: dict[str, np.ndarray] = {}
    for name, shape in shapes.items():
        m_shape, m_offset = manifest[name]
        if tuple(m_shape) != shape:
            raise CheckpointError(f"{path}: shape mismatch for {name} (file {m_shape}, expected {list(shape)})")
        start = header_end + int(m_offset)
        nbytes = 4 * int(np.prod(shape))
        if start + nbytes > len(blob):
            raise CheckpointError(f"{path}: truncated file (tensor {name} extends past EOF)")
        tensors[name] = np.frombuffer(blob, dtype="<f4", count=int(np.prod(shape)), offset=start).reshape(shape).copy()
    return ConverterParams(cfg=file_cfg, tensors=tensors)
