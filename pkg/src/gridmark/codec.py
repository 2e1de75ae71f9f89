"""Embedding and blind extraction.

Pipeline (embed): scramble the watermark, decompose each embedding
direction matrix into the 3-level detail tree, divide the 8 embedding
subbands by the model's normalization scale, force each eligible slot's
remainder mod q to a bit-dependent target, multiply back and reconstruct.
Extraction recomputes the same reference surface, scale, and weight field
from the watermarked model alone, majority-votes the thresholded
remainders per payload bit, and unscrambles.

Slots are listed position-major: all slots of block position (u, v)
(directions major, then the 8 subbands in canonical order) come before
those of the next raster position.  Bit assignment shifts each
(direction, subband) plane by a fixed stride before reducing mod W^2, so
every payload bit ends up with one slot in every plane, at spatially
scattered positions.  Losing a region to cropping, an eligibility flip,
or a filter that hits one subband family harder than another then costs
each bit a few votes instead of wiping out entire bits.
"""

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .arnold import scramble, unscramble
from .errors import (
    BadParameterError,
    DegenerateModelError,
    InsufficientCapacityError,
    MalformedFileError,
)
from .features import WeightField, compute_weights, reference_surface
from .fuzzy import default_rules_text, make_system, validate_watermark_system
from .model_io import GridModel, WatermarkBitmap, validate_model
from .wavelet import EMBED_BANDS, decompose3, reconstruct3

DIRECTION_ORDER = ("x1", "x2", "x3")


@dataclass
class EmbedConfig:
    """Embedding parameters; the identical config must be used to extract.

    The remainder targets and threshold derive from q: bit 1 aims at
    0.75q, bit 0 at 0.25q, and the decision threshold is 0.5q, keeping
    0 <= r0 < t < r1 < q.
    """

    key: int = 5
    q: float = 0.005
    directions: tuple = ("x1", "x2")
    rules: str = None  # path to a rule source file; None = packaged default

    def __post_init__(self):
        if not isinstance(self.key, int) or isinstance(self.key, bool) or self.key < 0:
            raise BadParameterError(f"key must be a non-negative integer, got {self.key!r}")
        self.q = float(self.q)
        if not self.q > 0:
            raise BadParameterError(f"q must be positive, got {self.q}")
        dirs = tuple(self.directions)
        if len(dirs) != len(set(dirs)) or not dirs:
            raise BadParameterError(f"directions must be a nonempty set, got {dirs}")
        for d in dirs:
            if d not in DIRECTION_ORDER:
                raise BadParameterError(f"unknown direction {d!r}")
        self.directions = tuple(d for d in DIRECTION_ORDER if d in dirs)
        self._system = None

    @property
    def r1(self):
        return 0.75 * self.q

    @property
    def r0(self):
        return 0.25 * self.q

    @property
    def t(self):
        return 0.5 * self.q

    def rules_text(self) -> str:
        if self.rules is None:
            return default_rules_text()
        return Path(self.rules).read_text()

    def system(self):
        if self._system is None:
            self._system = validate_watermark_system(make_system(self.rules_text()))
        return self._system


def serialize_config(cfg: EmbedConfig) -> str:
    lines = [f"key={cfg.key}", f"q={cfg.q!r}", f"directions={','.join(cfg.directions)}"]
    if cfg.rules is not None:
        lines.append(f"rules={cfg.rules}")
    return "\n".join(lines) + "\n"


def save_config(cfg: EmbedConfig, path):
    with open(path, "w") as fh:
        fh.write(serialize_config(cfg))


def load_config(path) -> EmbedConfig:
    """Parse a flat key=value config file.  A relative rules path is
    resolved against the config file's directory."""
    fields = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise MalformedFileError(f"line {lineno}: expected key=value, got {body!r}")
            k, v = body.split("=", 1)
            k, v = k.strip(), v.strip()
            if k in fields:
                raise MalformedFileError(f"line {lineno}: duplicate key {k!r}")
            fields[k] = v
    kwargs = {}
    for k, v in fields.items():
        if k == "key":
            try:
                kwargs["key"] = int(v)
            except ValueError:
                raise MalformedFileError(f"key must be an integer, got {v!r}") from None
        elif k == "q":
            try:
                kwargs["q"] = float(v)
            except ValueError:
                raise MalformedFileError(f"q must be a number, got {v!r}") from None
        elif k == "directions":
            kwargs["directions"] = tuple(s.strip() for s in v.split(",") if s.strip())
        elif k == "rules":
            p = Path(v)
            if not p.is_absolute():
                p = Path(path).parent / p
            kwargs["rules"] = str(p)
        else:
            raise MalformedFileError(f"unknown config key {k!r}")
    return EmbedConfig(**kwargs)


def config_hash(cfg: EmbedConfig) -> str:
    """sha256 over the canonical parameters plus the full rule source, so
    the hash pins the semantics rather than a file path."""
    h = hashlib.sha256()
    core = f"key={cfg.key}\nq={cfg.q!r}\ndirections={','.join(cfg.directions)}\n"
    h.update(core.encode())
    h.update(b"[rules]\n")
    h.update(cfg.rules_text().encode())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# Slot map

@dataclass
class SlotMap:
    """Deterministic slot ordering for (n, w, directions); model-independent.

    bit[d, b, u, v] = assigned payload bit index of the slot in direction
    d, embedding subband b, block position (u, v).  Each plane's raster of
    positions is offset by plane_index * stride, so one bit never sits in
    a single subband: with N=256, W=32 and two directions every bit owns
    exactly one slot in each of the 16 planes, 16 scattered positions.
    """

    n: int
    w: int
    directions: tuple
    bit: np.ndarray = field(init=False)

    def __post_init__(self):
        nb = self.n // 8
        d = len(self.directions)
        pos = np.arange(nb * nb).reshape(nb, nb)
        # stride odd and ~5 rows + a few columns per plane step: consecutive
        # planes land far apart in both grid axes and in row parity
        stride = 5 * nb + 7
        self.bit = np.empty((d, len(EMBED_BANDS), nb, nb), dtype=np.int64)
        for di in range(d):
            for bi in range(len(EMBED_BANDS)):
                plane = di * len(EMBED_BANDS) + bi
                self.bit[di, bi] = (pos + plane * stride) % (self.w**2)

    @property
    def total_slots(self) -> int:
        return int(self.bit.size)

    def iter_slots(self):
        """Slots in ordinal order: ((direction, subband index, u, v), bit)."""
        nb = self.n // 8
        for u in range(nb):
            for v in range(nb):
                for di, dname in enumerate(self.directions):
                    for bi in range(len(EMBED_BANDS)):
                        yield (dname, bi, u, v), int(self.bit[di, bi, u, v])


# ---------------------------------------------------------------------------
# Remainder quantization

def quantize_embed_bit(c, bit, cfg: EmbedConfig):
    """Move each normalized coefficient to the nearest value whose
    remainder mod q is the target for its bit (ties toward the middle
    candidate, i.e. no whole-step move)."""
    c = np.asarray(c, dtype=float)
    bit = np.asarray(bit)
    r = np.mod(c, cfg.q)
    rt = np.where(bit == 1, cfg.r1, cfg.r0)
    base = c - r + rt
    cands = np.stack([base, base - cfg.q, base + cfg.q])
    pick = np.argmin(np.abs(cands - c), axis=0)
    out = np.take_along_axis(cands, pick[None, ...], axis=0)[0]
    return float(out) if out.ndim == 0 else out


def read_bit(c, cfg: EmbedConfig):
    """1 iff the normalized coefficient's remainder mod q exceeds the
    threshold 0.5q."""
    c = np.asarray(c, dtype=float)
    bits = (np.mod(c, cfg.q) > cfg.t).astype(np.uint8)
    return int(bits) if bits.ndim == 0 else bits


# ---------------------------------------------------------------------------
# Normalization scale

def _scale_of_reference(ref: GridModel) -> float:
    ranges = []
    for name in ("x1", "x2", "x3"):
        lo, hi = np.percentile(ref.matrix(name), [1.0, 99.0])
        ranges.append(hi - lo)
    s = float(np.linalg.norm(ranges))
    if s == 0.0:
        raise DegenerateModelError("model has zero robust extent; cannot normalize")
    return s


def normalization_scale(m: GridModel, cfg: EmbedConfig) -> float:
    """Euclidean norm of the robust (p99 - p1) per-coordinate ranges of the
    reference surface; positively homogeneous and translation-invariant."""
    return _scale_of_reference(reference_surface(m, cfg.directions))


# ---------------------------------------------------------------------------
# Embed / extract

def _pipeline_state(m: GridModel, cfg: EmbedConfig):
    validate_model(m)
    system = cfg.system()
    ref = reference_surface(m, cfg.directions)
    s = _scale_of_reference(ref)
    wf = compute_weights(ref, system)
    return ref, s, wf


def embed(m: GridModel, wm: WatermarkBitmap, cfg: EmbedConfig) -> GridModel:
    _, s, wf = _pipeline_state(m, cfg)
    needed = wm.w**2
    available = wf.eligible_positions * len(EMBED_BANDS) * len(cfg.directions)
    if needed > available:
        raise InsufficientCapacityError(available, needed)

    sbits = scramble(wm.bits, cfg.key).ravel()
    smap = SlotMap(m.n, wm.w, cfg.directions)
    out = {}
    for di, name in enumerate(cfg.directions):
        tree = decompose3(m.matrix(name))
        for bi, path in enumerate(EMBED_BANDS):
            c = tree.band(path)
            cn = c / s
            written = quantize_embed_bit(cn, sbits[smap.bit[di, bi]], cfg) * s
            tree.set_band(path, np.where(wf.eligible, written, c))
        out[name] = reconstruct3(tree)
    return m.replace(**out)


def extract(m: GridModel, w: int, cfg: EmbedConfig) -> WatermarkBitmap:
    """Blind extraction: per payload bit, majority vote of the thresholded
    remainders over the currently eligible slots assigned to it (ties
    decode as 1, bits with no eligible slot as 0), then unscramble."""
    if w < 1:
        raise BadParameterError(f"watermark side must be positive, got {w}")
    _, s, wf = _pipeline_state(m, cfg)
    smap = SlotMap(m.n, w, cfg.directions)
    nbits = w * w
    ones = np.zeros(nbits, dtype=np.int64)
    total = np.zeros(nbits, dtype=np.int64)
    el = wf.eligible
    for di, name in enumerate(cfg.directions):
        tree = decompose3(m.matrix(name))
        for bi, path in enumerate(EMBED_BANDS):
            reads = read_bit(tree.band(path) / s, cfg)
            idx = smap.bit[di, bi][el]
            ones += np.bincount(idx, weights=reads[el], minlength=nbits).astype(np.int64)
            total += np.bincount(idx, minlength=nbits)
    bits = ((total > 0) & (2 * ones >= total)).astype(np.uint8)
    return WatermarkBitmap(unscramble(bits.reshape(w, w), cfg.key))
