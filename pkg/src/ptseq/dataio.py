"""Reading sequences (CSV, WAV) and reading/writing model bundles."""

from __future__ import annotations

import csv
import json
import wave
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .dsp import Signal
from .errors import ArgumentError, FormatError

__all__ = [
    "SymbolData",
    "read_csv_sequence",
    "format_feature_csv",
    "write_feature_csv",
    "read_wav",
    "write_wav",
    "read_sequence",
    "load_dataset",
    "dump_json",
    "load_json",
    "ACCEPTED_RATES",
]

ACCEPTED_RATES = (8000, 12500, 16000)


@dataclass(frozen=True)
class SymbolData:
    """A sequence that is already quantized to integer symbols."""

    symbols: np.ndarray


Sequence_ = Union[np.ndarray, SymbolData, Signal]


def read_csv_sequence(path) -> Union[np.ndarray, SymbolData]:
    """Read ``t,f0,f1,...`` feature rows or a ``sym`` (optionally ``t,sym``) column.

    Feature files return a T x D float matrix; symbol files return
    :class:`SymbolData`.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        cols = [h for h in header if h != "t"]
        if "t" in header and header[0] != "t":
            raise FormatError(f"{path}: column 't' must come first")
        if cols == ["sym"]:
            kind = "sym"
        elif cols and cols == [f"f{i}" for i in range(len(cols))]:
            kind = "feat"
        else:
            raise FormatError(f"{path}: header must be 't,f0,...' or 'sym', got {','.join(header)!r}")
        keep = [i for i, h in enumerate(header) if h != "t"]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise FormatError(f"{path}: row {lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                if kind == "sym":
                    rows.append(int(row[keep[0]]))
                else:
                    vals = [float(row[i]) for i in keep]
                    if not all(np.isfinite(vals)):
                        raise ValueError("non-finite value")
                    rows.append(vals)
            except ValueError as exc:
                raise FormatError(f"{path}: row {lineno}: {exc}") from None
    if not rows:
        raise FormatError(f"{path}: no data rows")
    if kind == "sym":
        return SymbolData(np.array(rows, dtype=np.int64))
    return np.array(rows, dtype=float)


def format_feature_csv(features) -> str:
    x = np.atleast_2d(np.asarray(features, dtype=float))
    lines = [",".join(["t"] + [f"f{i}" for i in range(x.shape[1])])]
    lines += [",".join([str(t)] + [repr(float(v)) for v in row]) for t, row in enumerate(x)]
    return "\n".join(lines) + "\n"


def write_feature_csv(path, features) -> None:
    Path(path).write_text(format_feature_csv(features), encoding="utf-8")


def read_wav(path) -> Signal:
    """16-bit signed mono PCM at one of the accepted sample rates, scaled to [-1, 1)."""
    path = Path(path)
    try:
        with wave.open(str(path), "rb") as w:
            channels, width, rate, frames = w.getnchannels(), w.getsampwidth(), w.getframerate(), w.getnframes()
            raw = w.readframes(frames)
    except (wave.Error, EOFError) as exc:
        raise FormatError(f"{path}: not a PCM WAV file ({exc})") from None
    if channels != 1:
        raise FormatError(f"{path}: expected mono audio, got {channels} channels")
    if width != 2:
        raise FormatError(f"{path}: expected 16-bit samples, got {8 * width}-bit")
    if rate not in ACCEPTED_RATES:
        raise FormatError(f"{path}: sample rate {rate} Hz not in {ACCEPTED_RATES}")
    samples = np.frombuffer(raw, dtype="<i2").astype(float) / 32768.0
    if samples.size == 0:
        raise FormatError(f"{path}: no samples")
    return Signal(samples, float(rate))


def write_wav(path, samples, sample_rate_hz: int) -> None:
    x = np.clip(np.round(np.asarray(samples, float) * 32767.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(int(sample_rate_hz))
        w.writeframes(x.tobytes())


def read_sequence(path) -> Sequence_:
    path = Path(path)
    if not path.is_file():
        raise ArgumentError(f"no such file: {path}")
    suffix = path.suffix.lower()
    if suffix == ".csv":
        return read_csv_sequence(path)
    if suffix == ".wav":
        return read_wav(path)
    raise FormatError(f"{path}: unsupported file type {suffix!r} (expected .csv or .wav)")


def load_dataset(root) -> dict[str, list[tuple[Path, Sequence_]]]:
    """``root/<class>/*.csv|*.wav`` to ``{class: [(path, sequence), ...]}`` in sorted order."""
    root = Path(root)
    if not root.is_dir():
        raise ArgumentError(f"dataset directory not found: {root}")
    classes = sorted(p for p in root.iterdir() if p.is_dir())
    if not classes:
        raise ArgumentError(f"dataset {root} has no class directories")
    out = {}
    for cdir in classes:
        files = sorted(p for p in cdir.iterdir() if p.suffix.lower() in (".csv", ".wav"))
        if not files:
            raise ArgumentError(f"class {cdir.name!r} has no .csv or .wav sequences ({cdir})")
        out[cdir.name] = [(f, read_sequence(f)) for f in files]
    return out


def dump_json(obj, path) -> None:
    """Deterministic JSON; floats use the shortest exact round-trip form."""
    text = json.dumps(obj, sort_keys=True, indent=1, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_json(path):
    path = Path(path)
    if not path.is_file():
        raise ArgumentError(f"no such file: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
