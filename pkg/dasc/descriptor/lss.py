"""Local self-similarity baseline: max-pooled SSD correlation surface over log-polar bins"""

import logging
import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from ..errors import ParameterError
from ..imaging.core import check_image, shift_image
from ..imaging.eaf import box_filter
from .dump import DescriptorField

logger = logging.getLogger(__name__)


@dataclass
class LssParams:
    n_rho: int = 3
    n_theta: int = 20
    patch: int = 5
    window: int = 41
    sigma_s: float = 1.0

    def validate(self) -> None:
        assert self.n_rho >= 1, "n_rho must be >= 1"
        assert self.n_theta >= 1, "n_theta must be >= 1"
        assert self.patch >= 3 and self.patch % 2 == 1, "patch must be odd and >= 3"
        assert self.window % 2 == 1, "window must be odd"
        assert self.window >= self.patch, "window must be >= patch"
        assert self.sigma_s > 0, "sigma_s must be > 0"


def lss_bin(dx: int, dy: int, n_rho: int, n_theta: int, reach: int) -> int:
    """Bin of an offset, or -1 when it falls outside every ring.

    Ring r covers rho_{r-1} < |d| <= rho_r with rho_r = reach^(r / n_rho) and rho_0 = 0;
    sector a covers theta_{a-1} < angle <= theta_a, angles taken in (0, 2pi].
    """
    length = math.hypot(dx, dy)
    if length == 0 or length > reach:
        return -1
    ring = 0
    while length > reach ** ((ring + 1) / n_rho) + 1e-12:
        ring += 1
    angle = math.atan2(dy, dx)
    if angle <= 0:
        angle += 2.0 * math.pi
    sector = min(int(math.ceil(angle / (2.0 * math.pi / n_theta) - 1e-12)) - 1, n_theta - 1)
    return ring * n_theta + max(sector, 0)


def compute_lss(
    img: npt.ArrayLike,
    n_rho: int = 3,
    n_theta: int = 20,
    patch: int = 5,
    window: int = 41,
    sigma_s: float = 1.0,
) -> DescriptorField:
    """Dense self-similarity descriptor of dimension n_rho * n_theta; empty bins hold 0"""
    LssParams(n_rho, n_theta, patch, window, sigma_s).validate()
    img = check_image(img)
    radius = patch // 2
    if radius >= min(img.shape):
        raise ParameterError(f"patch {patch} does not fit a {img.shape[1]}x{img.shape[0]} image")

    reach = window // 2
    n_pixels = patch * patch
    out = np.zeros(img.shape + (n_rho * n_theta,), dtype=np.float64)
    filled = np.zeros(n_rho * n_theta, dtype=bool)
    for dy in range(-reach, reach + 1):
        for dx in range(-reach, reach + 1):
            b = lss_bin(dx, dy, n_rho, n_theta, reach)
            if b < 0:
                continue
            diff = img - shift_image(img, (dx, dy))
            ssd = box_filter(diff * diff, radius) * n_pixels
            np.maximum(out[:, :, b], np.exp(-ssd / sigma_s), out=out[:, :, b])
            filled[b] = True

    if not filled.all():
        logger.debug("%d of %d self-similarity bins receive no offsets", int((~filled).sum()), filled.size)
    return DescriptorField(out)
