"""Attack suite for robustness benchmarking.

Every attack is a pure, deterministic function of (model, spec): noise
attacks carry an explicit seed.  Affine attacks (rotate, translate)
return the exact inverse transform as registration metadata so a bench
harness can undo them before extraction; scaling returns none because
the codec normalizes scale away on its own.

Textual encoding, used by the CLI::

    rotate:axis=z,angle=0.5236      translate:dx=1,dy=2,dz=3
    scale:k=2                       randomnoise:a=0.1,seed=7
    saltpepper:d=0.05,seed=42       gaussian:hsize=3,sigma=10
    laplacian:alpha=1               log:hsize=5,sigma=0.5
    crop:p=0.09
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import BadParameterError, MalformedFileError
from .model_io import GridModel

_AXES = ("x1", "x2", "x3")


# ---------------------------------------------------------------------------
# Rigid registration metadata

@dataclass
class Registration:
    """Inverse rigid map p -> rotation @ p + translation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        self.rotation = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        self.translation = np.asarray(self.translation, dtype=float).reshape(3)


def apply_registration(m: GridModel, reg: Registration) -> GridModel:
    pts = np.stack([m.x1, m.x2, m.x3])
    out = np.einsum("ab,bij->aij", reg.rotation, pts) + reg.translation[:, None, None]
    return GridModel(out[0], out[1], out[2])


def save_registration(reg: Registration, path):
    lines = ["REG3"]
    for row in reg.rotation:
        lines.append(" ".join(repr(float(v)) for v in row))
    lines.append(" ".join(repr(float(v)) for v in reg.translation))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_registration(path) -> Registration:
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if len(lines) != 5 or lines[0].strip() != "REG3":
        raise MalformedFileError("registration file must be 'REG3' plus 4 rows")
    try:
        rows = [[float(t) for t in ln.split()] for ln in lines[1:]]
    except ValueError as e:
        raise MalformedFileError(f"bad registration value: {e}") from None
    if any(len(r) != 3 for r in rows):
        raise MalformedFileError("registration rows must have 3 values")
    return Registration(np.array(rows[:3]), np.array(rows[3]))


# ---------------------------------------------------------------------------
# Attack spec

_PARAM_ORDER = {
    "rotate": ("axis", "angle"),
    "translate": ("dx", "dy", "dz"),
    "scale": ("k",),
    "randomnoise": ("a", "seed"),
    "saltpepper": ("d", "seed"),
    "gaussian": ("hsize", "sigma"),
    "laplacian": ("alpha",),
    "log": ("hsize", "sigma"),
    "crop": ("p",),
}

_AXIS_VECTORS = {
    "x": (1.0, 0.0, 0.0),
    "y": (0.0, 1.0, 0.0),
    "z": (0.0, 0.0, 1.0),
}


@dataclass
class AttackSpec:
    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in _PARAM_ORDER:
            raise BadParameterError(f"unknown attack {self.name!r}")
        allowed = set(_PARAM_ORDER[self.name])
        unknown = set(self.params) - allowed
        if unknown:
            raise BadParameterError(f"{self.name}: unknown parameters {sorted(unknown)}")


def parse_attack(text: str) -> AttackSpec:
    """Parse the textual attack encoding, e.g. 'gaussian:hsize=3,sigma=10'."""
    name, _, rest = text.strip().partition(":")
    name = name.strip().lower()
    if name not in _PARAM_ORDER:
        raise BadParameterError(f"unknown attack {name!r}")
    params = {}
    if rest.strip():
        for item in rest.split(","):
            if "=" not in item:
                raise BadParameterError(f"{name}: expected key=value, got {item!r}")
            k, v = item.split("=", 1)
            k, v = k.strip(), v.strip()
            if k in params:
                raise BadParameterError(f"{name}: duplicate parameter {k!r}")
            if name == "rotate" and k == "axis":
                if v.lower() not in _AXIS_VECTORS:
                    raise BadParameterError(f"rotate: axis must be x, y or z, got {v!r}")
                params[k] = v.lower()
            elif k in ("seed", "hsize"):
                try:
                    params[k] = int(v)
                except ValueError:
                    raise BadParameterError(f"{name}: {k} must be an integer, got {v!r}") from None
            else:
                try:
                    params[k] = float(v)
                except ValueError:
                    raise BadParameterError(f"{name}: {k} must be a number, got {v!r}") from None
    return AttackSpec(name, params)


def format_attack(spec: AttackSpec) -> str:
    parts = []
    for k in _PARAM_ORDER[spec.name]:
        if k in spec.params:
            v = spec.params[k]
            parts.append(f"{k}={v}" if isinstance(v, (int, str)) else f"{k}={v!r}")
    return spec.name + (":" + ",".join(parts) if parts else "")


# ---------------------------------------------------------------------------
# Geometric attacks

def rotation_matrix(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation about an arbitrary axis (unit vector or x/y/z)."""
    if isinstance(axis, str):
        try:
            axis = _AXIS_VECTORS[axis.lower()]
        except KeyError:
            raise BadParameterError(f"axis must be x, y or z, got {axis!r}") from None
    k = np.asarray(axis, dtype=float).reshape(3)
    norm = np.linalg.norm(k)
    if norm == 0.0:
        raise BadParameterError("rotation axis must be nonzero")
    k = k / norm
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return math.cos(angle) * np.eye(3) + math.sin(angle) * kx + (1 - math.cos(angle)) * np.outer(k, k)


def rotate(m: GridModel, axis, angle: float):
    r = rotation_matrix(axis, angle)
    pts = np.stack([m.x1, m.x2, m.x3])
    out = np.einsum("ab,bij->aij", r, pts)
    return GridModel(out[0], out[1], out[2]), Registration(r.T, np.zeros(3))


def translate(m: GridModel, dx: float, dy: float, dz: float):
    d = np.array([dx, dy, dz], dtype=float)
    out = GridModel(m.x1 + d[0], m.x2 + d[1], m.x3 + d[2])
    return out, Registration(np.eye(3), -d)


def scale(m: GridModel, k: float) -> GridModel:
    if not k > 0:
        raise BadParameterError(f"scale factor must be positive, got {k}")
    return GridModel(k * m.x1, k * m.x2, k * m.x3)


# ---------------------------------------------------------------------------
# Noise attacks

def random_noise(m: GridModel, a: float, seed: int = 0) -> GridModel:
    """Uniform noise in [-a*range, +a*range] per matrix (its own range)."""
    if a < 0:
        raise BadParameterError(f"noise amplitude must be >= 0, got {a}")
    rng = np.random.default_rng(seed)
    out = {}
    for name in _AXES:
        mat = m.matrix(name)
        rc = float(mat.max() - mat.min())
        out[name] = mat + rng.uniform(-a * rc, a * rc, size=mat.shape)
    return GridModel(**out)


def salt_pepper(m: GridModel, d: float, seed: int = 0) -> GridModel:
    """round(d*N^2) distinct entries per matrix forced to that matrix's
    pre-attack extremes: floor(count/2) to the minimum, the rest to the
    maximum."""
    if not 0.0 <= d <= 1.0:
        raise BadParameterError(f"density must be in [0,1], got {d}")
    rng = np.random.default_rng(seed)
    n = m.n
    count = int(round(d * n * n))
    out = {}
    for name in _AXES:
        mat = m.matrix(name).copy()
        lo, hi = float(mat.min()), float(mat.max())
        pos = rng.choice(n * n, size=count, replace=False)
        flat = mat.reshape(-1)
        flat[pos[: count // 2]] = lo
        flat[pos[count // 2 :]] = hi
        out[name] = mat
    return GridModel(**out)


# ---------------------------------------------------------------------------
# Smoothing kernels and filters

def _check_hsize(hsize):
    if not isinstance(hsize, (int, np.integer)) or hsize < 3 or hsize % 2 == 0:
        raise BadParameterError(f"hsize must be an odd integer >= 3, got {hsize!r}")


def kernel_gaussian(hsize: int, sigma: float) -> np.ndarray:
    _check_hsize(hsize)
    if not sigma > 0:
        raise BadParameterError(f"sigma must be positive, got {sigma}")
    half = hsize // 2
    n1, n2 = np.mgrid[-half : half + 1, -half : half + 1]
    g = np.exp(-(n1**2 + n2**2) / (2.0 * sigma**2))
    return g / g.sum()


def kernel_laplacian(alpha: float) -> np.ndarray:
    if not 0.0 <= alpha <= 1.0:
        raise BadParameterError(f"alpha must be in [0,1], got {alpha}")
    a = alpha
    return (4.0 / (a + 1.0)) * np.array(
        [
            [a / 4, (1 - a) / 4, a / 4],
            [(1 - a) / 4, -1.0, (1 - a) / 4],
            [a / 4, (1 - a) / 4, a / 4],
        ]
    )


def kernel_log(hsize: int, sigma: float) -> np.ndarray:
    _check_hsize(hsize)
    if not sigma > 0:
        raise BadParameterError(f"sigma must be positive, got {sigma}")
    half = hsize // 2
    n1, n2 = np.mgrid[-half : half + 1, -half : half + 1]
    g = kernel_gaussian(hsize, sigma)
    h = (n1**2 + n2**2 - 2.0 * sigma**2) / sigma**4 * g
    return h - h.mean()


def _convolve(mat: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    return ndimage.convolve(mat, kernel, mode="nearest")


def smooth_gaussian(m: GridModel, hsize: int, sigma: float) -> GridModel:
    k = kernel_gaussian(hsize, sigma)
    return GridModel(*(_convolve(m.matrix(n), k) for n in _AXES))


def smooth_laplacian(m: GridModel, alpha: float) -> GridModel:
    """Neighborhood-averaging smoothing: each entry moves a fraction alpha
    toward the mean of its 4 neighbors (replicate at edges)."""
    if not 0.0 <= alpha <= 1.0:
        raise BadParameterError(f"alpha must be in [0,1], got {alpha}")
    a = alpha
    k = np.array([[0, a / 4, 0], [a / 4, 1 - a, a / 4], [0, a / 4, 0]])
    return GridModel(*(_convolve(m.matrix(n), k) for n in _AXES))


def smooth_log(m: GridModel, hsize: int, sigma: float) -> GridModel:
    """Unsharp-style filtering: subtract the LoG response from the surface."""
    k = kernel_log(hsize, sigma)
    return GridModel(*(m.matrix(n) - _convolve(m.matrix(n), k) for n in _AXES))


# ---------------------------------------------------------------------------
# Cropping

def crop(m: GridModel, p: float) -> GridModel:
    """Replace the top-left square block of side round(sqrt(p)*N) with each
    matrix's pre-attack mean; dimensions unchanged."""
    if not 0.0 < p < 1.0:
        raise BadParameterError(f"crop fraction must be in (0,1), got {p}")
    side = int(round(math.sqrt(p) * m.n))
    out = {}
    for name in _AXES:
        mat = m.matrix(name).copy()
        mat[:side, :side] = m.matrix(name).mean()
        out[name] = mat
    return GridModel(**out)


# ---------------------------------------------------------------------------
# Dispatch

def _require(spec: AttackSpec, *names):
    missing = [k for k in names if k not in spec.params]
    if missing:
        raise BadParameterError(f"{spec.name}: missing parameters {missing}")
    return [spec.params[k] for k in names]


def apply(m: GridModel, spec: AttackSpec):
    """Apply an attack; returns (attacked model, registration or None)."""
    p = spec.params
    if spec.name == "rotate":
        axis, angle = _require(spec, "axis", "angle")
        return rotate(m, axis, angle)
    if spec.name == "translate":
        dx, dy, dz = _require(spec, "dx", "dy", "dz")
        return translate(m, dx, dy, dz)
    if spec.name == "scale":
        (k,) = _require(spec, "k")
        return scale(m, k), None
    if spec.name == "randomnoise":
        (a,) = _require(spec, "a")
        return random_noise(m, a, int(p.get("seed", 0))), None
    if spec.name == "saltpepper":
        (d,) = _require(spec, "d")
        return salt_pepper(m, d, int(p.get("seed", 0))), None
    if spec.name == "gaussian":
        hsize, sigma = _require(spec, "hsize", "sigma")
        return smooth_gaussian(m, int(hsize), sigma), None
    if spec.name == "laplacian":
        (alpha,) = _require(spec, "alpha")
        return smooth_laplacian(m, alpha), None
    if spec.name == "log":
        hsize, sigma = _require(spec, "hsize", "sigma")
        return smooth_log(m, int(hsize), sigma), None
    if spec.name == "crop":
        (pp,) = _require(spec, "p")
        return crop(m, pp), None
    raise BadParameterError(f"unknown attack {spec.name!r}")
