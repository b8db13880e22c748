"""Gabor orientation field and its block histograms."""
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .grids import GRIDS, block_histograms

N_ORIENT = 16
SCALES = (0.2, 0.5, 0.7, 0.9)
SIGMA_UNIT = 10.0      # sigma_m = s * 10 px
WAVE_RATIO = 0.56      # lambda_mk = sigma_m / 0.56
ASPECT = 0.5
ZERO_RESPONSE = 1e-9


def gabor_kernel(sigma, theta, wavelength, aspect=ASPECT):
    """Complex Gabor filter with a zero-mean real part.

    ``theta`` is the direction of the carrier wave, measured from the
    column axis towards increasing row index.
    """
    r = int(np.ceil(3 * sigma))
    y, x = np.mgrid[-r:r + 1, -r:r + 1].astype(np.float64)
    xr = x * np.cos(theta) + y * np.sin(theta)
    yr = -x * np.sin(theta) + y * np.cos(theta)
    env = np.exp(-(xr ** 2 + (aspect * yr) ** 2) / (2 * sigma ** 2))
    re = env * np.cos(2 * np.pi * xr / wavelength)
    im = env * np.sin(2 * np.pi * xr / wavelength)
    re -= env * (re.sum() / env.sum())
    return re + 1j * im


@dataclass(frozen=True)
class GaborBank:
    thetas: tuple
    sigmas: tuple
    kernels: tuple   # kernels[k][m]

    @classmethod
    def default(cls):
        thetas = tuple(k * np.pi / N_ORIENT for k in range(N_ORIENT))
        sigmas = tuple(s * SIGMA_UNIT for s in SCALES)
        kernels = tuple(tuple(gabor_kernel(s, t, s / WAVE_RATIO) for s in sigmas) for t in thetas)
        return cls(thetas, sigmas, kernels)

    def __len__(self):
        return len(self.thetas) * len(self.sigmas)

    @property
    def radius(self):
        return max(k.shape[0] for row in self.kernels for k in row) // 2


_DEFAULT = None


def default_bank():
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = GaborBank.default()
    return _DEFAULT


def gabor_orientation_field(gray, bank=None):
    """Orientation index of the strongest of all filter responses at each pixel.

    Ties go to the lowest orientation index; pixels whose strongest
    response is below ``1e-9`` get orientation 0.
    """
    bank = bank or default_bank()
    gray = np.asarray(gray, dtype=np.float64)
    r = bank.radius
    pad = np.pad(gray, r, mode="reflect" if min(gray.shape) > r else "edge")
    h, w = gray.shape
    best = np.zeros((h, w))
    label = np.zeros((h, w), dtype=np.int64)
    for k, row in enumerate(bank.kernels):
        for ker in row:
            kr = ker.shape[0] // 2
            sub = pad[r - kr:r + h + kr, r - kr:r + w + kr]
            mag = np.abs(fftconvolve(sub, ker, mode="valid"))
            better = mag > best
            best[better] = mag[better]
            label[better] = k
    label[best <= ZERO_RESPONSE] = 0
    return label


def gabor_histograms(O, grids=GRIDS):
    """16-bin orientation histogram for every block of every grid, concatenated."""
    return np.concatenate([block_histograms(O, g, N_ORIENT).ravel() for g in grids])
