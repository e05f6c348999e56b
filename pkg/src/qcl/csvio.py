"""CSV writers and readers for channels, ECDF tables and profile tables.

Every file starts with one ``#`` comment line (tool version, flags, seed) and
then a header row. Floats are written with 17 significant digits so that a
round trip through text is exact.
"""

from __future__ import annotations

import csv
import io
from typing import Iterable, TextIO

import numpy as np

from .channel import ChannelBatch, SpaceKind
from .stats import ConfidenceBand, ProfileRow

CHANNEL_COLUMNS = (
    "kind", "a", "f",
    "b_re", "b_im", "c_re", "c_im", "d_re", "d_im", "e_re", "e_im", "g_re", "g_im",
)
ECDF_COLUMNS = ("x", "F", "lo", "hi")
PROFILE_COLUMNS = ("a", "inf", "mode", "mean", "ci_lo", "ci_hi")


def fmt(x) -> str:
    return format(float(x), ".17g")


def comment_line(version: str, flags: dict) -> str:
    parts = [f"qcl {version}"] + [f"{k}={v}" for k, v in flags.items()]
    return "# " + " ".join(parts)


def _writer(out: TextIO, comment: str | None, header: Iterable[str]):
    if comment is not None:
        out.write(comment.rstrip("\n") + "\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    return w


def write_channels(out: TextIO, batch: ChannelBatch, eta=None, comment: str | None = None) -> None:
    header = CHANNEL_COLUMNS + (("eta",) if eta is not None else ())
    w = _writer(out, comment, header)
    cols = [batch.a, batch.f]
    for s in ("b", "c", "d", "e", "g"):
        v = getattr(batch, s)
        cols += [np.real(v), np.imag(v) if np.iscomplexobj(v) else np.zeros_like(v)]
    if eta is not None:
        cols.append(np.asarray(eta))
    for i in range(len(batch)):
        w.writerow([batch.kind.value] + [fmt(col[i]) for col in cols])


def read_channels(src: TextIO) -> tuple[ChannelBatch, np.ndarray | None]:
    rows = [line for line in src if not line.startswith("#")]
    reader = csv.DictReader(io.StringIO("".join(rows)))
    recs = list(reader)
    if not recs:
        raise ValueError("no channel rows")
    kind = SpaceKind(recs[0]["kind"])

    def col(name):
        return np.array([float(r[name]) for r in recs])

    def scal(s):
        re = col(s + "_re")
        return re + 1j * col(s + "_im") if kind.is_complex else re

    kw = {s: scal(s) for s in ("b", "c", "d", "e")}
    if kind.is_unital:
        batch = ChannelBatch.from_arrays(kind, col("a"), **kw)
    else:
        batch = ChannelBatch.from_arrays(kind, col("a"), col("f"), g=scal("g"), **kw)
    eta = col("eta") if "eta" in reader.fieldnames else None
    return batch, eta


def write_ecdf(out: TextIO, band: ConfidenceBand, comment: str | None = None) -> None:
    w = _writer(out, comment, ECDF_COLUMNS)
    for row in zip(band.x, band.F, band.lower, band.upper):
        w.writerow([fmt(v) for v in row])


def write_profile(out: TextIO, rows: Iterable[ProfileRow], comment: str | None = None) -> None:
    w = _writer(out, comment, PROFILE_COLUMNS)
    for r in rows:
        w.writerow([fmt(r.a), fmt(r.inf), fmt(r.mode), fmt(r.mean), fmt(r.ci_lo), fmt(r.ci_hi)])
