"""Perceptual block features and the per-slot weight/eligibility field.

Every level-3 detail coefficient at position (u, v) is supported by the
8x8 spatial block rows 8u..8u+7, cols 8v..8v+7, so one feature triple per
block position feeds all 8 embedding subbands that share it.  Features
are computed on a reference surface whose embedding subbands are zeroed,
which makes the weights identical before embedding, after embedding, and
at blind extraction time.

Features per block of the surface S(i,j) = (x1, x2, x3):
  curvature  mean Euclidean norm of the 5-point discrete Laplacian of S
             over the 6x6 interior points of the block
  area       sum of the areas of the block's 98 triangles (each grid cell
             split along its main diagonal; half cross-product norm)
  bumpiness  RMS orthogonal distance of the 64 points to their total
             least-squares plane (sqrt of the smallest scatter eigenvalue
             over the point count)

Raw features are normalized per channel to [0,1] by a robust percentile
map; the fuzzy system turns them into a crisp weight, and a slot is
eligible iff its weight classifies as HIGH or HIGHER.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .fuzzy import FuzzySystem, OUTPUT_TERMS, evaluate_many, weight_class_many
from .model_io import GridModel, validate_model
from .wavelet import EMBED_BANDS, decompose3, reconstruct3

ELIGIBLE_TERMS = ("HIGH", "HIGHER")

_ELIGIBLE_INDICES = tuple(OUTPUT_TERMS.index(t) for t in ELIGIBLE_TERMS)


def _direction_names(directions):
    if hasattr(directions, "directions"):
        directions = directions.directions
    return tuple(directions)


def reference_surface(m: GridModel, directions) -> GridModel:
    """The model with all 8 embedding subbands zeroed in each embedding
    direction; non-embedding directions pass through unchanged."""
    validate_model(m)
    out = {}
    for name in _direction_names(directions):
        tree = decompose3(m.matrix(name))
        for path in EMBED_BANDS:
            tree.set_band(path, np.zeros_like(tree.band(path)))
        out[name] = reconstruct3(tree)
    return m.replace(**out)


# ---------------------------------------------------------------------------
# Raw block features

def _triangle_areas(pts: np.ndarray) -> float:
    # pts: (8, 8, 3) block points; cells split along the main diagonal.
    p00 = pts[:-1, :-1]
    p01 = pts[:-1, 1:]
    p10 = pts[1:, :-1]
    p11 = pts[1:, 1:]
    c1 = np.cross(p10 - p00, p11 - p00)
    c2 = np.cross(p11 - p00, p01 - p00)
    areas = 0.5 * np.linalg.norm(c1, axis=-1) + 0.5 * np.linalg.norm(c2, axis=-1)
    return float(areas.sum())


def block_features(ref: GridModel, u: int, v: int):
    """Raw (curvature, area, bumpiness) of spatial block (u, v)."""
    nb = ref.n // 8
    if not (0 <= u < nb and 0 <= v < nb):
        raise DimensionError(f"block ({u},{v}) out of range for side {ref.n}")
    sl = (slice(8 * u, 8 * u + 8), slice(8 * v, 8 * v + 8))
    pts = np.stack([ref.x1[sl], ref.x2[sl], ref.x3[sl]], axis=-1)

    lap = (
        pts[:-2, 1:-1]
        + pts[2:, 1:-1]
        + pts[1:-1, :-2]
        + pts[1:-1, 2:]
        - 4.0 * pts[1:-1, 1:-1]
    )
    curvature = float(np.linalg.norm(lap, axis=-1).mean())

    area = _triangle_areas(pts)

    # RMS orthogonal distance to the best-fit plane = smallest singular
    # value of the centered points / sqrt(count).  Steep blocks make the
    # spread ratio along the principal axes enormous, so normalize before
    # the SVD and scale back; going through the squared scatter matrix
    # instead would double that ratio and lose the small end entirely.
    flat = pts.reshape(-1, 3)
    centered = flat - flat.mean(axis=0)
    spread = float(np.abs(centered).max())
    if spread == 0.0:
        bumpiness = 0.0
    else:
        sv = np.linalg.svd(centered / spread, compute_uv=False)
        bumpiness = spread * float(sv[-1]) / math.sqrt(flat.shape[0])

    return curvature, area, bumpiness


# ---------------------------------------------------------------------------
# Fields

@dataclass
class FeatureField:
    """Per block position (shared by all 8 subbands at that (u,v)):
    curvature, area, bumpiness as (N/8, N/8) arrays."""

    curvature: np.ndarray
    area: np.ndarray
    bumpiness: np.ndarray

    @property
    def nb(self):
        return self.curvature.shape[0]


@dataclass
class WeightField:
    """Crisp weight and eligibility per block position, plus the normalized
    features that produced them."""

    features: FeatureField
    weight: np.ndarray
    eligible: np.ndarray

    @property
    def nb(self):
        return self.weight.shape[0]

    @property
    def eligible_positions(self) -> int:
        return int(self.eligible.sum())


def raw_features(ref: GridModel) -> FeatureField:
    nb = ref.n // 8
    c = np.empty((nb, nb))
    a = np.empty((nb, nb))
    b = np.empty((nb, nb))
    for u in range(nb):
        for v in range(nb):
            c[u, v], a[u, v], b[u, v] = block_features(ref, u, v)
    return FeatureField(c, a, b)


def _normalize_channel(x: np.ndarray) -> np.ndarray:
    p5, p95 = np.percentile(x, [5.0, 95.0])
    if p95 == p5:
        return np.full_like(x, 0.5)
    return np.clip((x - p5) / (p95 - p5), 0.0, 1.0)


def normalize_features(raw: FeatureField) -> FeatureField:
    return FeatureField(
        _normalize_channel(raw.curvature),
        _normalize_channel(raw.area),
        _normalize_channel(raw.bumpiness),
    )


def compute_weights(ref: GridModel, sys: FuzzySystem) -> WeightField:
    """Raw features -> percentile normalization -> fuzzy weight -> eligibility."""
    norm = normalize_features(raw_features(ref))
    nb = norm.nb
    w = evaluate_many(sys, norm.curvature, norm.bumpiness, norm.area).reshape(nb, nb)
    cls = weight_class_many(sys, w)
    eligible = np.isin(cls, _ELIGIBLE_INDICES)
    return WeightField(norm, w, eligible)


def dump_weight_field(wf: WeightField, path):
    """Debug CSV: one row per (subband, u, v) slot position."""
    lines = ["subband,u,v,curvature,area,bumpiness,weight,eligible"]
    f = wf.features
    for b in range(8):
        for u in range(wf.nb):
            for v in range(wf.nb):
                lines.append(
                    f"{b},{u},{v},{float(f.curvature[u, v])!r},{float(f.area[u, v])!r},"
                    f"{float(f.bumpiness[u, v])!r},{float(wf.weight[u, v])!r},"
                    f"{int(wf.eligible[u, v])}"
                )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
