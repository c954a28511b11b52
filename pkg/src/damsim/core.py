"""Symbol-level primitives: seeded randomness, Gray-coded QAM mapping, detection."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Gray code for one 4-PAM axis: bit pair -> level in {-3,-1,+1,+3}.
# Adjacent levels differ in exactly one bit.
_GRAY2_TO_LEVEL = {(0, 0): -3, (0, 1): -1, (1, 1): 1, (1, 0): 3}

_MASK64 = 0xFFFFFFFFFFFFFFFF


def _build_16qam():
    # label b3 b2 b1 b0 (MSB first): b3 b2 -> I axis, b1 b0 -> Q axis
    pts = np.empty(16, dtype=np.complex128)
    for lab in range(16):
        b = [(lab >> k) & 1 for k in (3, 2, 1, 0)]
        i_lvl = _GRAY2_TO_LEVEL[(b[0], b[1])]
        q_lvl = _GRAY2_TO_LEVEL[(b[2], b[3])]
        pts[lab] = (i_lvl + 1j * q_lvl) / np.sqrt(10.0)
    return pts


CONSTELLATIONS = {"16qam": _build_16qam()}
BITS_PER_SYMBOL = {"16qam": 4}


def constellation(name: str) -> np.ndarray:
    """Return the unit-mean-power alphabet for a constellation id."""
    key = name.lower().replace("-", "")
    if key not in CONSTELLATIONS:
        raise ValueError(f"unknown constellation id: {name!r}")
    return CONSTELLATIONS[key]


def bits_per_symbol(name: str) -> int:
    key = name.lower().replace("-", "")
    if key not in BITS_PER_SYMBOL:
        raise ValueError(f"unknown constellation id: {name!r}")
    return BITS_PER_SYMBOL[key]


@dataclass(frozen=True)
class SymbolStream:
    """A sequence of constellation points plus the alphabet they came from."""

    symbols: np.ndarray
    constellation: str

    def __post_init__(self):
        self.symbols.setflags(write=False)

    def __len__(self):
        return self.symbols.size


def map_bits_to_symbols(bits, constellation_id: str = "16qam") -> SymbolStream:
    """Map a 0/1 sequence onto Gray-coded constellation points.

    Bit count must be divisible by the bits-per-symbol of the alphabet.
    """
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if bits.size and not np.isin(bits, (0, 1)).all():
        raise ValueError("bits must be 0/1")
    k = bits_per_symbol(constellation_id)
    if bits.size % k != 0:
        raise ValueError(f"bit count {bits.size} not divisible by {k}")
    alphabet = constellation(constellation_id)
    groups = bits.reshape(-1, k)
    labels = groups @ (1 << np.arange(k - 1, -1, -1))
    return SymbolStream(alphabet[labels], constellation_id)


def detect_symbols(received, constellation_id: str = "16qam", reference=None):
    """Minimum-distance detection onto the alphabet.

    Returns (detected SymbolStream, error count vs reference). The error
    count is None when no reference is given.
    """
    rx = np.asarray(getattr(received, "symbols", received), dtype=np.complex128).ravel()
    if rx.size == 0:
        raise ValueError("empty input")
    alphabet = constellation(constellation_id)
    idx = np.abs(rx[:, None] - alphabet[None, :]).argmin(axis=1)
    detected = alphabet[idx]
    errors = None
    if reference is not None:
        ref = np.asarray(getattr(reference, "symbols", reference)).ravel()
        if ref.size != rx.size:
            raise ValueError("reference length mismatch")
        errors = int(np.sum(~np.isclose(detected, ref, rtol=0, atol=1e-9)))
    return SymbolStream(detected, constellation_id), errors


def random_bits(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, 2, size=n, dtype=np.int64)


def ensure_finite(arr, name: str = "array") -> np.ndarray:
    """Reject NaN/Inf instead of letting them propagate silently."""
    arr = np.asarray(arr)
    if not np.all(np.isfinite(arr.view(np.float64) if arr.dtype == np.complex128 else arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def _splitmix64(x: int) -> int:
    """One SplitMix64 step; the documented seed-splitting primitive."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def trial_seed(master_seed: int, trial_index: int, stream: int = 0) -> int:
    """Derive a per-(trial, stream) sub-seed from the master seed.

    Rule: master XOR trial-index, hashed twice through SplitMix64 with the
    stream tag folded in. Identical inputs give identical sub-seeds, so
    trials are order-independent.
    """
    x = (master_seed & _MASK64) ^ ((trial_index & _MASK64) * 0xD1342543DE82EF95 & _MASK64)
    x = _splitmix64(x)
    x = _splitmix64(x ^ (stream & _MASK64))
    return x


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)
