"""Signal-processing front end.

Periodic orthonormal Daubechies transforms (1-D and 2-D), framing and
windowing, periodogram power spectra, Mel and HFCC triangular filter banks,
cepstral coefficients and the cepstral spectral envelope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, NamedTuple, Sequence

import numpy as np
import scipy.fft

from .errors import ArgumentError

__all__ = [
    "Signal",
    "WaveletFilter",
    "D4",
    "D6",
    "get_wavelet",
    "DwtCoefficients",
    "dwt1d",
    "idwt1d",
    "Quadrants",
    "dwt2d",
    "idwt2d",
    "hamming_window",
    "frame_signal",
    "power_spectrum",
    "mel_scale",
    "mel_to_hz",
    "erb_bandwidth",
    "FilterBank",
    "build_filterbank",
    "cepstral_coefficients",
    "spectral_envelope",
    "CepstralConfig",
    "denoise",
    "extract_cepstral_features",
]

LOG_FLOOR = 1e-10


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Signal:
    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self) -> None:
        samples = _readonly(np.ravel(self.samples))
        if samples.size == 0:
            raise ArgumentError("signal must be nonempty")
        if not np.all(np.isfinite(samples)):
            raise ArgumentError("signal samples must be finite")
        if not self.sample_rate_hz > 0:
            raise ArgumentError("sample rate must be positive")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    def __len__(self) -> int:
        return self.samples.size


# --------------------------------------------------------------------------
# Wavelets
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class WaveletFilter:
    """Orthonormal two-channel filter pair.

    The high-pass filter is the alternating flip of the low-pass one,
    ``g[n] = (-1)**n * h[L-1-n]``.
    """

    name: str
    low_pass: np.ndarray
    high_pass: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        h = _readonly(self.low_pass)
        if self.high_pass is None:
            n = np.arange(h.size)
            g = _readonly(((-1.0) ** n) * h[::-1])
        else:
            g = _readonly(self.high_pass)
        if h.size != g.size or h.size % 2:
            raise ArgumentError("filters must have equal, even lengths")
        tol = 1e-12
        if (
            abs(h @ h - 1.0) > tol
            or abs(g @ g - 1.0) > tol
            or abs(h @ g) > tol
        ):
            raise ArgumentError(f"filter {self.name} is not orthonormal")
        object.__setattr__(self, "low_pass", h)
        object.__setattr__(self, "high_pass", g)

    def __len__(self) -> int:
        return self.low_pass.size


def _d4() -> np.ndarray:
    s3 = math.sqrt(3.0)
    return np.array([1 + s3, 3 + s3, 3 - s3, 1 - s3]) / (4 * math.sqrt(2.0))


def _d6() -> np.ndarray:
    s10 = math.sqrt(10.0)
    r = math.sqrt(5 + 2 * s10)
    return np.array(
        [
            1 + s10 + r,
            5 + s10 + 3 * r,
            10 - 2 * s10 + 2 * r,
            10 - 2 * s10 - 2 * r,
            5 + s10 - 3 * r,
            1 + s10 - r,
        ]
    ) / (16 * math.sqrt(2.0))


D4 = WaveletFilter("D4", _d4())
D6 = WaveletFilter("D6", _d6())
_WAVELETS = {"D4": D4, "D6": D6}


def get_wavelet(name: "str | WaveletFilter") -> WaveletFilter:
    if isinstance(name, WaveletFilter):
        return name
    try:
        return _WAVELETS[str(name).upper()]
    except KeyError:
        raise ArgumentError(f"unknown wavelet {name!r}; expected D4 or D6") from None


def _analysis_index(n: int, flen: int) -> np.ndarray:
    # Row k reads x[2k - (L-2) + m] with periodic wrap; for D4 this starts
    # at x[-2], x[-1], x[0], x[1] like the padded sequence s6 s7 s0 s1.
    k = np.arange(n // 2)[:, None]
    m = np.arange(flen)[None, :]
    return (2 * k - (flen - 2) + m) % n


def _even(x: np.ndarray, axis: int) -> np.ndarray:
    if x.shape[axis] % 2 == 0:
        return x
    last = np.take(x, [-1], axis=axis)
    return np.concatenate([x, last], axis=axis)


def _split(x: np.ndarray, filt: WaveletFilter, axis: int = -1):
    x = np.moveaxis(x, axis, -1)
    idx = _analysis_index(x.shape[-1], len(filt))
    windows = x[..., idx]
    lo = windows @ filt.low_pass
    hi = windows @ filt.high_pass
    return np.moveaxis(lo, -1, axis), np.moveaxis(hi, -1, axis)


def _merge(lo: np.ndarray, hi: np.ndarray, filt: WaveletFilter, axis: int = -1):
    lo = np.moveaxis(lo, axis, -1)
    hi = np.moveaxis(hi, axis, -1)
    n = 2 * lo.shape[-1]
    idx = _analysis_index(n, len(filt))
    out = np.zeros(lo.shape[:-1] + (n,))
    # The synthesis operator is the transpose of the analysis one.  For a
    # fixed tap the target indices 2k + const are distinct, so plain
    # fancy-index accumulation is safe.
    for m in range(len(filt)):
        out[..., idx[:, m]] += lo * filt.low_pass[m] + hi * filt.high_pass[m]
    return np.moveaxis(out, -1, axis)


@dataclass(frozen=True)
class DwtCoefficients:
    """Multilevel decomposition.

    ``details`` runs coarsest first, finest (level 1) last.
    ``level_lengths[l]`` is the input length at level ``l + 1`` before any
    odd-length padding, so the inverse can trim it back.
    """

    approx: np.ndarray
    details: tuple[np.ndarray, ...]
    levels: int
    original_length: int
    level_lengths: tuple[int, ...]
    wavelet: str = "D4"

    def __post_init__(self) -> None:
        if self.levels < 1 or len(self.details) != self.levels:
            raise ArgumentError("level structure does not match the detail count")
        if len(self.level_lengths) != self.levels:
            raise ArgumentError("level lengths do not match the level count")

    def energy(self) -> float:
        return float(
            self.approx @ self.approx + sum(d @ d for d in self.details)
        )

    def with_zero_details(self) -> "DwtCoefficients":
        return DwtCoefficients(
            self.approx,
            tuple(np.zeros_like(d) for d in self.details),
            self.levels,
            self.original_length,
            self.level_lengths,
            self.wavelet,
        )


def dwt1d(signal, filt: "WaveletFilter | str" = D4, levels: int = 1) -> DwtCoefficients:
    """Periodic multilevel DWT.

    Odd-length inputs at any level get their last sample repeated; that
    keeps reconstruction exact but the transform is only energy-preserving
    when the length is divisible by ``2**levels``.
    """
    filt = get_wavelet(filt)
    x = signal.samples if isinstance(signal, Signal) else np.asarray(signal, float)
    x = np.ravel(x)
    if levels < 1:
        raise ArgumentError("levels must be >= 1")
    if x.size < len(filt):
        raise ArgumentError(
            f"signal length {x.size} is shorter than the {filt.name} filter"
        )
    details = []
    lengths = []
    approx = x
    for level in range(levels):
        if approx.size < len(filt):
            raise ArgumentError(
                f"{levels} levels too deep for length {x.size}: level "
                f"{level + 1} input has {approx.size} samples, below the "
                f"filter length {len(filt)}"
            )
        lengths.append(approx.size)
        approx, d = _split(_even(approx, -1), filt)
        details.append(d)
    return DwtCoefficients(
        approx=approx,
        details=tuple(reversed(details)),
        levels=levels,
        original_length=x.size,
        level_lengths=tuple(lengths),
        wavelet=filt.name,
    )


def idwt1d(coeffs: DwtCoefficients, filt: "WaveletFilter | str | None" = None) -> np.ndarray:
    filt = get_wavelet(coeffs.wavelet if filt is None else filt)
    a = np.asarray(coeffs.approx, float)
    for d, n in zip(coeffs.details, reversed(coeffs.level_lengths)):
        d = np.asarray(d, float)
        if d.shape != a.shape or (n + 1) // 2 != a.size:
            raise ArgumentError("coefficient lengths do not match the level structure")
        a = _merge(a, d, filt)[:n]
    return a


class Quadrants(NamedTuple):
    """One level of a 2-D transform.

    The first letter is the filter applied along each row (axis 1), the
    second the filter applied down each column (axis 0).  ``lh`` therefore
    responds to variation from row to row, i.e. horizontal structure.
    """

    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray


def dwt2d(matrix, filt: "WaveletFilter | str" = D4) -> Quadrants:
    """Single-level separable 2-D DWT: rows first, then columns.

    Odd dimensions are edge-replicated to even before transforming.
    """
    filt = get_wavelet(filt)
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2:
        raise ArgumentError("dwt2d expects a 2-D grid")
    if min(m.shape) < len(filt):
        raise ArgumentError(
            f"grid {m.shape} is smaller than the {filt.name} filter length"
        )
    m = _even(_even(m, 0), 1)
    lo_r, hi_r = _split(m, filt, axis=1)
    ll, lh = _split(lo_r, filt, axis=0)
    hl, hh = _split(hi_r, filt, axis=0)
    return Quadrants(ll, lh, hl, hh)


def idwt2d(q: Quadrants, filt: "WaveletFilter | str" = D4) -> np.ndarray:
    filt = get_wavelet(filt)
    lo_r = _merge(q.ll, q.lh, filt, axis=0)
    hi_r = _merge(q.hl, q.hh, filt, axis=0)
    return _merge(lo_r, hi_r, filt, axis=1)


# --------------------------------------------------------------------------
# Spectra and filter banks
# --------------------------------------------------------------------------


def hamming_window(n: int) -> np.ndarray:
    if n < 2:
        raise ArgumentError("Hamming window needs n >= 2")
    k = np.arange(n)
    # 0.54 - 0.46 cos(.) written so the endpoints come out as exactly 0.08.
    return 0.08 + 0.46 * (1.0 - np.cos(2 * np.pi * k / (n - 1)))


def frame_signal(x, frame_len: int, hop: int) -> np.ndarray:
    x = np.ravel(np.asarray(x, float))
    if frame_len < 2 or hop < 1:
        raise ArgumentError("frame length must be >= 2 and hop >= 1")
    if x.size < frame_len:
        raise ArgumentError(
            f"signal of {x.size} samples is shorter than one frame ({frame_len})"
        )
    count = 1 + (x.size - frame_len) // hop
    idx = np.arange(frame_len)[None, :] + hop * np.arange(count)[:, None]
    return x[idx]


def power_spectrum(frame, n_fft: int | None = None) -> np.ndarray:
    """One-sided periodogram ``|FFT(frame)[k]|**2 / N`` for ``k <= N/2``.

    ``N`` is ``n_fft`` when given (the frame is zero-padded), else the
    frame length.
    """
    frame = np.ravel(np.asarray(frame, float))
    if frame.size == 0:
        raise ArgumentError("frame must be nonempty")
    n = frame.size if n_fft is None else int(n_fft)
    if n < frame.size:
        raise ArgumentError("n_fft is shorter than the frame")
    spec = np.fft.rfft(frame, n)
    return (spec.real**2 + spec.imag**2) / n


def mel_scale(f_hz):
    f = np.asarray(f_hz, dtype=float)
    if np.any(f < 0) or np.any(np.isnan(f)):
        raise ArgumentError("frequency must be non-negative")
    out = 2595.0 * np.log10(1.0 + f / 700.0)
    return float(out) if out.ndim == 0 else out


def mel_to_hz(mel):
    m = np.asarray(mel, dtype=float)
    out = 700.0 * (10.0 ** (m / 2595.0) - 1.0)
    return float(out) if out.ndim == 0 else out


def erb_bandwidth(fc_khz):
    """Equivalent rectangular bandwidth in Hz for a centre given in kHz."""
    fc = np.asarray(fc_khz, dtype=float)
    if np.any(~(fc > 0)):
        raise ArgumentError("centre frequency must be positive (kHz)")
    out = 6.23 * fc**2 + 93.39 * fc + 28.52
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class FilterBank:
    kind: Literal["mel", "hfcc"]
    filters: np.ndarray  # (num_filters, fft_size // 2 + 1)
    center_freqs_hz: np.ndarray
    half_widths_hz: np.ndarray  # (left, right) per filter
    fft_size: int
    sample_rate_hz: float
    e_factor: float = 1.0

    @property
    def num_filters(self) -> int:
        return self.filters.shape[0]

    @property
    def num_bins(self) -> int:
        return self.filters.shape[1]

    @property
    def center_bins(self) -> np.ndarray:
        return np.argmax(self.filters, axis=1)


def _triangle(freqs: np.ndarray, apex: float, left: float, right: float) -> np.ndarray:
    w = np.zeros_like(freqs)
    rise = freqs <= apex
    w[rise] = 1.0 - (apex - freqs[rise]) / left
    w[~rise] = 1.0 - (freqs[~rise] - apex) / right
    return np.clip(w, 0.0, None)


def build_filterbank(
    kind: Literal["mel", "hfcc"] = "mel",
    num_filters: int = 26,
    f_low_hz: float = 0.0,
    f_high_hz: float | None = None,
    fft_size: int = 256,
    sample_rate_hz: float = 16000.0,
    e_factor: float = 1.0,
) -> FilterBank:
    """Triangular filter bank with centres equally spaced in mel.

    Mel triangles reach from the previous centre to the next one.  HFCC
    triangles are symmetric with half-width ``e_factor * ERB(fc)`` Hz, so
    their width does not depend on how many filters share the band.  Each
    apex is snapped to the nearest FFT bin, which therefore carries the
    row's unique maximum of 1.
    """
    kind = str(kind).lower()
    if kind not in ("mel", "hfcc"):
        raise ArgumentError(f"unknown filter bank kind {kind!r}")
    if f_high_hz is None:
        f_high_hz = sample_rate_hz / 2
    if num_filters < 1:
        raise ArgumentError("num_filters must be >= 1")
    if not (0 <= f_low_hz < f_high_hz <= sample_rate_hz / 2):
        raise ArgumentError(
            f"need 0 <= f_low < f_high <= fs/2, got {f_low_hz}, {f_high_hz}"
        )
    if not e_factor > 0:
        raise ArgumentError("e_factor must be positive")
    n_bins = fft_size // 2 + 1
    df = sample_rate_hz / fft_size
    freqs = np.arange(n_bins) * df
    edges = mel_to_hz(
        np.linspace(mel_scale(f_low_hz), mel_scale(f_high_hz), num_filters + 2)
    )
    centers = edges[1:-1]
    rows = np.zeros((num_filters, n_bins))
    widths = np.zeros((num_filters, 2))
    for b, fc in enumerate(centers):
        apex = round(fc / df) * df
        if kind == "mel":
            left = max(apex - edges[b], df)
            right = max(edges[b + 2] - apex, df)
        else:
            left = right = e_factor * erb_bandwidth(fc / 1000.0)
        rows[b] = _triangle(freqs, apex, left, right)
        widths[b] = left, right
    return FilterBank(
        kind=kind,
        filters=_readonly(rows),
        center_freqs_hz=_readonly(centers),
        half_widths_hz=_readonly(widths),
        fft_size=int(fft_size),
        sample_rate_hz=float(sample_rate_hz),
        e_factor=float(e_factor),
    )


def cepstral_coefficients(psd, bank: FilterBank, num_coeffs: int = 12) -> np.ndarray:
    """Orthonormal DCT-II of the log filter-bank energies, truncated."""
    psd = np.asarray(psd, dtype=float)
    if psd.shape[-1] != bank.num_bins:
        raise ArgumentError(
            f"PSD has {psd.shape[-1]} bins, filter bank expects {bank.num_bins}"
        )
    if not 1 <= num_coeffs <= bank.num_filters:
        raise ArgumentError(
            f"num_coeffs must be in [1, {bank.num_filters}], got {num_coeffs}"
        )
    energies = psd @ bank.filters.T
    logs = np.log(energies + LOG_FLOOR)
    return scipy.fft.dct(logs, type=2, norm="ortho", axis=-1)[..., :num_coeffs]


def spectral_envelope(cepstra, num_bins: int, sample_rate_hz: float) -> np.ndarray:
    """``exp(sum_i c_i cos(i w_t))`` on ``num_bins`` frequencies up to Nyquist.

    ``cepstra[0]`` is taken as the i = 1 coefficient.
    """
    if num_bins < 1:
        raise ArgumentError("num_bins must be >= 1")
    if not sample_rate_hz > 0:
        raise ArgumentError("sample rate must be positive")
    c = np.ravel(np.asarray(cepstra, dtype=float))
    f = np.arange(1, num_bins + 1) * (sample_rate_hz / 2) / num_bins
    w = f * 2 * np.pi / sample_rate_hz
    i = np.arange(1, c.size + 1)
    return np.exp(np.cos(np.outer(w, i)) @ c)


# --------------------------------------------------------------------------
# Pipeline
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CepstralConfig:
    denoise_levels: int = 3
    wavelet: str = "D4"
    frame_len: int = 256
    hop: int = 128
    bank_kind: Literal["mel", "hfcc"] = "hfcc"
    num_filters: int | None = None  # 26 for mel, 29 for hfcc
    num_coeffs: int = 12
    e_factor: float = 1.0
    f_low_hz: float = 0.0
    f_high_hz: float | None = None

    def __post_init__(self) -> None:
        if self.frame_len <= self.hop:
            raise ArgumentError("frame_len must exceed hop")
        if self.denoise_levels < 0:
            raise ArgumentError("denoise_levels must be >= 0")
        get_wavelet(self.wavelet)

    @property
    def filters(self) -> int:
        if self.num_filters is not None:
            return self.num_filters
        return 29 if self.bank_kind == "hfcc" else 26


def denoise(x, levels: int = 3, filt: "WaveletFilter | str" = D4) -> np.ndarray:
    """Rebuild a signal from its level-``levels`` approximation only."""
    coeffs = dwt1d(x, filt, levels)
    return idwt1d(coeffs.with_zero_details(), filt)


def extract_cepstral_features(signal: Signal, config: CepstralConfig | None = None) -> np.ndarray:
    """Frame-wise cepstra, shape ``(frames, num_coeffs)``."""
    config = config or CepstralConfig()
    x = signal.samples
    if x.size < config.frame_len:
        raise ArgumentError(
            f"signal of {x.size} samples is shorter than one frame ({config.frame_len})"
        )
    if config.denoise_levels > 0:
        x = denoise(x, config.denoise_levels, config.wavelet)
    frames = frame_signal(x, config.frame_len, config.hop)
    frames = frames * hamming_window(config.frame_len)
    spec = np.fft.rfft(frames, axis=1)
    psd = (spec.real**2 + spec.imag**2) / config.frame_len
    bank = build_filterbank(
        config.bank_kind,
        config.filters,
        config.f_low_hz,
        config.f_high_hz,
        config.frame_len,
        signal.sample_rate_hz,
        config.e_factor,
    )
    return cepstral_coefficients(psd, bank, config.num_coeffs)


def as_signal(x: "Signal | Sequence[float] | np.ndarray", sample_rate_hz: float = 16000.0) -> Signal:
    return x if isinstance(x, Signal) else Signal(np.asarray(x, float), sample_rate_hz)
