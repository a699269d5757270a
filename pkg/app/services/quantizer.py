"""
Fixed-point adapter between real-valued gradients and field residues.

Outside the protocol proper: the protocol only ever sees field elements and
integer ranking keys.
"""

from typing import Sequence

import numpy as np

from app.models.messages import LocalUpdate
from app.services.permutation_engine import all_ids
from app.utils.errors import DimensionMismatch, InvalidParams


class FixedPointQuantizer:
    """
    Signed fixed-point embedding into F_q.

    A real x maps to round(x * scale) taken mod q, so representable values
    lie in [-(q - 1) / 2, (q - 1) / 2] / scale.
    """

    def __init__(self, scale: float, q: int):
        if scale <= 0:
            raise InvalidParams(f"scale must be positive (got {scale})")
        self.scale = float(scale)
        self.q = int(q)
        self.half = (self.q - 1) // 2

    @property
    def max_magnitude(self) -> float:
        return self.half / self.scale

    def quantize(self, values) -> np.ndarray:
        """
        Residues of the scaled, rounded values.

        Raises:
            InvalidParams: If a value falls outside the representable range
        """
        scaled = np.rint(np.asarray(values, dtype=np.float64) * self.scale).astype(np.int64)
        if np.any(np.abs(scaled) > self.half):
            raise InvalidParams(
                f"values exceed the representable magnitude {self.max_magnitude:g}"
            )
        return np.mod(scaled, self.q)

    def dequantize(self, residues) -> np.ndarray:
        """Lift residues back to signed integers, then unscale."""
        residues = np.asarray(residues, dtype=np.int64) % self.q
        signed = np.where(residues > self.half, residues - self.q, residues)
        return signed / self.scale


def local_update_from_gradient(
    gradient: Sequence[Sequence[float]],
    num_segments: int,
    quantizer: FixedPointQuantizer,
) -> LocalUpdate:
    """
    LocalUpdate from a real (P, ell) gradient.

    Each subpacket's ranking key is the scaled L1 norm of its row, so top-r
    selection ranks by magnitude before quantization.
    """
    gradient = np.asarray(gradient, dtype=np.float64)
    if gradient.ndim != 2:
        raise DimensionMismatch(f"gradient must be (P, ell), got shape {gradient.shape}")
    num_subpackets = gradient.shape[0]
    if num_segments < 1 or num_subpackets % num_segments:
        raise DimensionMismatch(f"{num_segments} segments do not divide {num_subpackets} subpackets")

    residues = quantizer.quantize(gradient)
    keys = np.rint(np.abs(gradient).sum(axis=1) * quantizer.scale).astype(np.int64)
    ids = all_ids(num_segments, num_subpackets // num_segments)

    deltas = {sid: [int(v) for v in row] for sid, row in zip(ids, residues)}
    magnitude_key = {sid: int(k) for sid, k in zip(ids, keys)}
    return LocalUpdate(deltas=deltas, magnitude_key=magnitude_key)
