"""Synthetic micrographs and segmentation labels.

A volume is projected under uniformly random orientations, the projections
are summed onto a canvas, the canvas is filtered with a contrast transfer
function of a randomly drawn defocus, and Gaussian noise is added until the
requested signal-to-noise ratio (signal variance / noise variance) is met.
Labels come from Li thresholding of the CTF-free clean micrograph.  The
real-data route thresholds externally produced reprojections and pastes the
binary particles at their picked coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .core import Center, Image2D, LabelMask, NumericalError, ProbabilityMap, Volume3D, binarize


@dataclass(frozen=True)
class Orientation:
    """Unit quaternion (w, x, y, z)."""

    q: tuple[float, float, float, float]

    def __post_init__(self):
        q = np.asarray(self.q, dtype=np.float64)
        if q.shape != (4,) or abs(np.linalg.norm(q) - 1.0) > 1e-6:
            raise ValueError("orientation must be a unit quaternion")
        object.__setattr__(self, "q", tuple(float(v) for v in q))

    @classmethod
    def identity(cls) -> "Orientation":
        return cls((1.0, 0.0, 0.0, 0.0))

    @classmethod
    def about_z(cls, angle) -> "Orientation":
        return cls((math.cos(angle / 2), 0.0, 0.0, math.sin(angle / 2)))

    def matrix(self) -> np.ndarray:
        """Rotation matrix acting on (x, y, z) column vectors."""
        w, x, y, z = self.q
        return np.array([
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ])


@dataclass(frozen=True)
class CtfParams:
    voltage_kv: float = 300.0
    cs_mm: float = 2.7
    amplitude_contrast: float = 0.1
    phase_shift: float = 0.0


@dataclass(frozen=True)
class SynthConfig:
    size: int = 512
    particles: int = 100
    snr: float = 0.005
    defocus_pool: tuple[float, ...] = (1.0, 1.5, 2.0, 2.5)
    seed: int = 0
    min_separation: float | None = None
    ctf: CtfParams | None = field(default_factory=CtfParams)

    def __post_init__(self):
        if not self.snr > 0:
            raise ValueError("snr must be positive")
        if self.particles < 1:
            raise ValueError("need at least one particle per micrograph")
        if self.ctf is not None and not self.defocus_pool:
            raise ValueError("CTF filtering needs a non-empty defocus pool")


def sample_orientation(rng: np.random.Generator) -> Orientation:
    """Uniform rotation via Shoemake's subgroup algorithm."""
    u1, u2, u3 = rng.random(3)
    a, b = math.sqrt(1.0 - u1), math.sqrt(u1)
    q = np.array([b * math.cos(2 * math.pi * u3), a * math.sin(2 * math.pi * u2),
                  a * math.cos(2 * math.pi * u2), b * math.sin(2 * math.pi * u3)])
    return Orientation(tuple(q / np.linalg.norm(q)))


def project_volume(vol: Volume3D, o: Orientation) -> Image2D:
    """Rotate about voxel ``side // 2`` (trilinear) and integrate along z."""
    data = vol.data.astype(np.float64)
    rot = o.matrix()
    if np.allclose(rot, np.eye(3), atol=0, rtol=0):
        return Image2D(data.sum(axis=0), vol.pixel_size)
    n = vol.side
    c = n // 2
    grid = np.indices((n, n, n), dtype=np.float64).reshape(3, -1) - c  # z, y, x
    xyz = grid[::-1]
    # output voxel p samples the input at R^T (p - c) + c
    src = rot.T @ xyz + c
    coords = src[::-1].reshape(3, n, n, n)
    rotated = ndimage.map_coordinates(data, coords, order=1, mode="constant", cval=0.0)
    return Image2D(rotated.sum(axis=0), vol.pixel_size)


def electron_wavelength(voltage_kv: float) -> float:
    """Relativistic electron wavelength in Å."""
    v = voltage_kv * 1e3
    return 12.2643247 / math.sqrt(v * (1.0 + 0.978466e-6 * v))


def ctf_2d(shape, defocus_um, pixel_size, params: CtfParams = CtfParams()) -> np.ndarray:
    """Radially symmetric weak-phase CTF on the unshifted FFT grid."""
    lam = electron_wavelength(params.voltage_kv)
    df = defocus_um * 1e4
    cs = params.cs_mm * 1e7
    fy = np.fft.fftfreq(shape[0], d=pixel_size)
    fx = np.fft.fftfreq(shape[1], d=pixel_size)
    s2 = fy[:, None] ** 2 + fx[None, :] ** 2
    chi = math.pi * lam * df * s2 - 0.5 * math.pi * cs * lam ** 3 * s2 ** 2
    return np.sin(chi + params.phase_shift + math.asin(params.amplitude_contrast))


def apply_ctf(img: Image2D, defocus: float, pixel_size: float | None = None,
              params: CtfParams = CtfParams()) -> Image2D:
    h, w = img.shape
    if h % 2 or w % 2:
        raise ValueError(f"CTF filtering needs even dimensions, got {w}x{h}")
    px = img.pixel_size if pixel_size is None else pixel_size
    spectrum = np.fft.fft2(img.data.astype(np.float64))
    out = np.fft.ifft2(spectrum * ctf_2d(img.shape, defocus, px, params)).real
    return Image2D(out, img.pixel_size)


def _paste_origin(shape, center, canvas):
    """Top-left corner that puts pixel ``shape // 2`` at ``center``."""
    h, w = shape
    x0 = int(round(center[0])) - w // 2
    y0 = int(round(center[1])) - h // 2
    if x0 < 0 or y0 < 0 or x0 + w > canvas[1] or y0 + h > canvas[0]:
        raise ValueError(f"placement at {center} of a {w}x{h} footprint leaves the canvas")
    return x0, y0


def compose_micrograph(projections, positions, canvas, pixel_size=None):
    """Sum projections onto a zero canvas of shape (height, width).

    Positions are (x, y) centers, rounded to the nearest pixel.  Returns the
    clean micrograph and the realized centers.
    """
    if len(projections) != len(positions):
        raise ValueError("need one position per projection")
    out = np.zeros(canvas, dtype=np.float64)
    centers = []
    for proj, pos in zip(projections, positions):
        x0, y0 = _paste_origin(proj.shape, pos, canvas)
        h, w = proj.shape
        out[y0:y0 + h, x0:x0 + w] += proj.data
        centers.append(Center(float(x0 + w // 2), float(y0 + h // 2)))
    px = pixel_size or (projections[0].pixel_size if projections else 1.0)
    return Image2D(out, px), centers


def add_noise_to_snr(clean: Image2D, snr: float, rng: np.random.Generator) -> Image2D:
    """Add white Gaussian noise with variance var(clean) / snr."""
    if not snr > 0:
        raise ValueError("snr must be positive")
    data = clean.data.astype(np.float64)
    var = data.var()
    if not var > 0:
        raise NumericalError("cannot set an SNR on a zero-variance image")
    noise = rng.standard_normal(data.shape) * math.sqrt(var / snr)
    return Image2D(data + noise, clean.pixel_size)


def measured_snr(clean: Image2D, noisy: Image2D) -> float:
    clean64 = clean.data.astype(np.float64)
    return float(clean64.var() / (noisy.data.astype(np.float64) - clean64).var())


def _li_objective_terms(x, t):
    fg = x > t
    nf = fg.sum()
    nb = x.size - nf
    mf = x[fg].mean() if nf else 0.0
    mb = x[~fg].mean() if nb else 0.0
    return mf, mb


def li_threshold(img: Image2D, tolerance: float | None = None, max_iter: int = 1000) -> float:
    """Li's iterative minimum cross-entropy threshold.

    The image is shifted so its minimum is zero; the returned threshold is in
    the original intensity units.  Foreground is ``value > threshold``.
    """
    data = np.asarray(img.data if isinstance(img, Image2D) else img, dtype=np.float64).ravel()
    lo = data.min()
    x = data - lo
    if not x.max() > 0:
        raise NumericalError("Li threshold is undefined for a constant image")
    if tolerance is None:
        steps = np.diff(np.unique(x))
        tolerance = steps.min() / 2.0
    t = x.mean()
    for _ in range(max_iter):
        mf, mb = _li_objective_terms(x, t)
        if mf <= 0:
            break
        if mb <= 0:
            # background is all zeros: any t below the smallest foreground value is optimal
            break
        t_next = (mb - mf) / (math.log(mb) - math.log(mf))
        if abs(t_next - t) <= tolerance:
            t = t_next
            break
        t = t_next
    return float(t + lo)


def place_labels(particle_masks, coords, canvas) -> LabelMask:
    """Logical OR of binary masks pasted with pixel ``shape // 2`` at each center."""
    if len(particle_masks) != len(coords):
        raise ValueError("need one coordinate per mask")
    out = np.zeros(canvas, dtype=bool)
    for mask, c in zip(particle_masks, coords):
        x0, y0 = _paste_origin(mask.shape, (c.x, c.y), canvas)
        h, w = mask.shape
        out[y0:y0 + h, x0:x0 + w] |= np.asarray(mask.labels) > 0
    return LabelMask(out.astype(np.uint8), k=2)


def labels_from_reprojections(reprojections, coords, canvas) -> LabelMask:
    """Real-data route: Li-threshold each reprojection and paste it at its center."""
    masks = [binarize(r, li_threshold(r)) for r in reprojections]
    return place_labels(masks, coords, canvas)


def sample_positions(rng, count, canvas, footprint, min_separation, max_tries=200000):
    """Rejection-sample ``count`` integer centers at least ``min_separation`` apart."""
    h, w = canvas
    lo_x, hi_x = footprint // 2, w - (footprint - footprint // 2)
    lo_y, hi_y = footprint // 2, h - (footprint - footprint // 2)
    if hi_x < lo_x or hi_y < lo_y:
        raise ValueError("canvas is smaller than the particle footprint")
    points = []
    tries = 0
    while len(points) < count:
        tries += 1
        if tries > max_tries:
            raise ValueError(
                f"could only place {len(points)} of {count} particles with separation {min_separation}"
            )
        p = (int(rng.integers(lo_x, hi_x + 1)), int(rng.integers(lo_y, hi_y + 1)))
        if all((p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2 >= min_separation ** 2 for q in points):
            points.append(p)
    return points


@dataclass(frozen=True)
class SyntheticMicrograph:
    noisy: Image2D
    clean: Image2D
    labels: LabelMask
    centers: list[Center]
    defocus: float | None
    threshold: float
    snr: float


def micrograph_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for micrograph ``index`` so generation order is irrelevant."""
    return np.random.default_rng([int(seed), int(index)])


def generate_micrograph(vol: Volume3D, config: SynthConfig, index: int = 0) -> SyntheticMicrograph:
    rng = micrograph_rng(config.seed, index)
    canvas = (config.size, config.size)
    sep = config.min_separation if config.min_separation is not None else float(vol.side)
    positions = sample_positions(rng, config.particles, canvas, vol.side, sep)
    projections = [project_volume(vol, sample_orientation(rng)) for _ in positions]
    clean, centers = compose_micrograph(projections, positions, canvas, vol.pixel_size)
    threshold = li_threshold(clean)
    labels = binarize(clean, threshold)
    defocus = None
    signal = clean
    if config.ctf is not None:
        defocus = float(config.defocus_pool[int(rng.integers(len(config.defocus_pool)))])
        signal = apply_ctf(clean, defocus, vol.pixel_size, config.ctf)
    noisy = add_noise_to_snr(signal, config.snr, rng)
    return SyntheticMicrograph(noisy, clean, labels, centers, defocus, threshold,
                               measured_snr(signal, noisy))


def sphere_volume(side: int, radius: float, pixel_size: float = 1.0) -> Volume3D:
    """Solid sphere of unit density centered on voxel ``side // 2``."""
    idx = np.indices((side,) * 3) - side // 2
    return Volume3D((np.sum(idx ** 2, axis=0) <= radius ** 2).astype(np.float32), pixel_size)


@dataclass(frozen=True)
class CorruptedMap:
    """A soft segmentation with isolated flipped pixels plus its ground truth."""

    truth: LabelMask
    prob: ProbabilityMap
    image: Image2D
    features: np.ndarray


def disk_mask(shape, centers, radius) -> np.ndarray:
    yy, xx = np.indices(shape)
    mask = np.zeros(shape, dtype=bool)
    for cy, cx in centers:
        mask |= (yy - cy) ** 2 + (xx - cx) ** 2 <= radius ** 2
    return mask


def salt_noise_map(seed: int, size: int = 96, disks: int = 6, radius: float = 9.0,
                   flip_fraction: float = 0.05, confidence: float = 0.9, edge_blur: float = 1.0,
                   image_noise: float = 1.0, feature_blur: float = 1.0) -> CorruptedMap:
    """Blurred disk mask with ``flip_fraction`` of pixels replaced by ``1 - p``.

    Probabilities run from ``1 - confidence`` in the background to
    ``confidence`` inside the disks.
    The flipped pixels are drawn so that no two are 8-connected.  ``image`` is
    the mask plus Gaussian noise; ``features`` is the Gaussian-blurred mask.
    """
    rng = np.random.default_rng(int(seed))
    pts = sample_positions(rng, disks, (size, size), int(2 * radius + 1), 2 * radius + 4)
    truth = disk_mask((size, size), [(y, x) for x, y in pts], radius)
    soft = np.clip(ndimage.gaussian_filter(truth.astype(np.float64), edge_blur), 0.0, 1.0)
    prob = (1.0 - confidence) + (2.0 * confidence - 1.0) * soft
    want = int(round(flip_fraction * truth.size))
    blocked = np.zeros(truth.shape, dtype=bool)
    flips = []
    for idx in rng.permutation(truth.size):
        if len(flips) == want:
            break
        y, x = divmod(int(idx), size)
        if blocked[y, x]:
            continue
        flips.append((y, x))
        blocked[max(y - 1, 0):y + 2, max(x - 1, 0):x + 2] = True
    if flips:
        fy, fx = np.array(flips).T
        prob[fy, fx] = 1.0 - prob[fy, fx]
    image = truth + rng.normal(0.0, image_noise, truth.shape)
    feats = ndimage.gaussian_filter(truth.astype(np.float64), feature_blur)
    return CorruptedMap(LabelMask(truth.astype(np.uint8)), ProbabilityMap(prob),
                        Image2D(image), feats)
