"""RGB colour-histogram shot features and instance assembly from frame files."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .instance import Instance, InstanceError, MetricKind, Shot


class FrameError(InstanceError):
    """A frame image is missing, unreadable or malformed."""


@dataclass(frozen=True, eq=False)
class FrameImage:
    width: int
    height: int
    pixels: np.ndarray  # (width * height, 3) uint8, row-major

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.uint8).reshape(-1, 3)
        object.__setattr__(self, "pixels", pixels)
        if self.width < 0 or self.height < 0:
            raise FrameError("frame dimensions must be non-negative")
        if pixels.shape[0] != self.width * self.height:
            raise FrameError(
                f"pixel count {pixels.shape[0]} does not match {self.width}x{self.height}"
            )

    @classmethod
    def from_array(cls, rgb) -> "FrameImage":
        arr = np.asarray(rgb)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise FrameError(f"expected an (H, W, 3) array, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise FrameError("channel values must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        return cls(arr.shape[1], arr.shape[0], arr.reshape(-1, 3))


@dataclass(frozen=True)
class HistogramConfig:
    bins_per_channel: int = 32
    normalize: bool = True

    def __post_init__(self):
        if not 1 <= self.bins_per_channel <= 256:
            raise ValueError(f"bins_per_channel must be in [1, 256], got {self.bins_per_channel}")

    @property
    def dim(self) -> int:
        return 3 * self.bins_per_channel


def compute_histogram(frame: FrameImage, cfg: HistogramConfig | None = None) -> np.ndarray:
    """Per-channel colour histogram laid out as ``[R bins | G bins | B bins]``.

    Channel value ``v`` falls in bin ``v * bins // 256``. With ``normalize``
    each channel's counts are divided by the pixel count.
    """
    cfg = cfg or HistogramConfig()
    npix = frame.pixels.shape[0]
    if npix == 0:
        raise FrameError("cannot compute a histogram of an empty image")
    bins = cfg.bins_per_channel
    idx = frame.pixels.astype(np.int64) * bins // 256
    counts = np.concatenate(
        [np.bincount(idx[:, c], minlength=bins) for c in range(3)]
    ).astype(np.float64)
    if cfg.normalize:
        counts /= npix
    return counts


# ---------------------------------------------------------------------------
# image decoding
# ---------------------------------------------------------------------------


def _pnm_tokens(data: bytes, count: int, start: int) -> tuple[list[bytes], int]:
    tokens, pos = [], start
    while len(tokens) < count:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        end = pos
        while end < len(data) and not data[end : end + 1].isspace() and data[end : end + 1] != b"#":
            end += 1
        if end == pos:
            raise FrameError("truncated PNM header")
        tokens.append(data[pos:end])
        pos = end
    return tokens, pos


def parse_ppm(data: bytes) -> FrameImage:
    """Decode a binary (P6) or plain (P3) portable pixmap with maxval <= 255."""
    magic = data[:2]
    if magic not in (b"P6", b"P3"):
        raise FrameError("not a portable pixmap (expected P6 or P3)")
    (w, h, maxval), pos = _pnm_tokens(data, 3, 2)
    try:
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise FrameError("malformed PNM header") from None
    if not 0 < maxval <= 255:
        raise FrameError(f"unsupported maxval {maxval} (only 8-bit pixmaps are supported)")
    n = width * height * 3
    if magic == b"P6":
        raw = data[pos + 1 : pos + 1 + n]
        if len(raw) != n:
            raise FrameError("truncated pixel data")
        values = np.frombuffer(raw, dtype=np.uint8)
    else:
        tokens, _ = _pnm_tokens(data, n, pos)
        values = np.array([int(t) for t in tokens])
        if values.size and values.max() > maxval:
            raise FrameError("sample value exceeds maxval")
    if maxval != 255:
        values = (values.astype(np.int64) * 255 // maxval).astype(np.uint8)
    return FrameImage(width, height, values.reshape(-1, 3))


def write_ppm(frame: FrameImage, path) -> None:
    header = f"P6\n{frame.width} {frame.height}\n255\n".encode()
    Path(path).write_bytes(header + frame.pixels.astype(np.uint8).tobytes())


def read_frame(path) -> FrameImage:
    path = Path(path)
    if not path.is_file():
        raise FrameError(f"missing frame file: {path}")
    data = path.read_bytes()
    if data[:2] in (b"P6", b"P3"):
        return parse_ppm(data)
    try:
        from PIL import Image, UnidentifiedImageError
    except ImportError:
        raise FrameError(f"{path}: only PPM frames can be read without Pillow") from None
    try:
        with Image.open(path) as img:
            return FrameImage.from_array(np.asarray(img.convert("RGB")))
    except (UnidentifiedImageError, OSError) as exc:
        raise FrameError(f"{path}: cannot decode image: {exc}") from None


# ---------------------------------------------------------------------------
# instance assembly
# ---------------------------------------------------------------------------


def read_manifest(path) -> list[tuple[str, float]]:
    """``frame_filename,duration_seconds`` rows in shot order (header optional)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InstanceError(f"cannot read manifest {path}: {exc.strerror}") from None
    rows = [r for r in csv.reader(text.splitlines()) if r and any(c.strip() for c in r)]
    entries = []
    for lineno, row in enumerate(rows, start=1):
        if len(row) != 2:
            raise InstanceError(f"manifest line {lineno}: expected frame_filename,duration_seconds")
        try:
            duration = float(row[1])
        except ValueError:
            if lineno == 1:
                continue
            raise InstanceError(f"manifest line {lineno}: bad duration {row[1]!r}") from None
        entries.append((row[0].strip(), duration))
    if not entries:
        raise InstanceError(f"manifest {path} lists no shots")
    return entries


def build_instance(
    frames_dir,
    manifest,
    budget_s: float,
    cfg: HistogramConfig | None = None,
    name: str | None = None,
    metric: MetricKind = MetricKind.EUCLIDEAN,
) -> Instance:
    cfg = cfg or HistogramConfig()
    frames_dir = Path(frames_dir)
    shots = []
    for filename, duration in read_manifest(manifest):
        hist = compute_histogram(read_frame(frames_dir / filename), cfg)
        shots.append(Shot(Path(filename).stem, duration, tuple(hist.tolist())))
    return Instance(name or Path(manifest).stem, tuple(shots), budget_s, metric)
