"""Denoising quality metrics: SNR, MSE and Chamfer distance.

SNR is defined as ``20 log10(sum ||q||^2 / sum ||p - q||^2)``
with ``q`` the reference cloud. Note the ratio is already one of squared
norms, so this is twice the usual power-ratio decibel figure.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .pointcloud import as_cloud, build_index, nearest_sq_distances

CSV_HEADER = ("name", "n_points", "snr_db", "mse", "chamfer")


def _aligned(denoised, reference) -> tuple[np.ndarray, np.ndarray]:
    p = as_cloud(denoised)
    q = as_cloud(reference)
    if p.shape != q.shape:
        raise ValueError(f"clouds are not index-aligned: {p.shape[0]} vs {q.shape[0]} points")
    return p, q


def _sq_error(p: np.ndarray, q: np.ndarray) -> float:
    d = p - q
    return float(np.einsum("ij,ij->", d, d))


def snr(denoised, reference) -> float:
    """SNR in dB of ``denoised`` against ``reference``; ``inf`` when they coincide."""
    p, q = _aligned(denoised, reference)
    err = _sq_error(p, q)
    if err == 0.0:
        return math.inf
    signal = float(np.einsum("ij,ij->", q, q))
    if signal == 0.0:
        return -math.inf
    return 20.0 * math.log10(signal / err)


def mse(denoised, reference) -> float:
    p, q = _aligned(denoised, reference)
    return _sq_error(p, q) / p.shape[0]


def chamfer(s1, s2) -> float:
    """Symmetric Chamfer distance on squared nearest-neighbor distances.

    For equal sizes this is ``(sum_p min_q + sum_q min_p) / N``. For unequal
    sizes each directional sum is divided by its own cloud's size.
    """
    a = as_cloud(s1)
    b = as_cloud(s2)
    ab = nearest_sq_distances(build_index(b), a)
    ba = nearest_sq_distances(build_index(a), b)
    if a.shape[0] == b.shape[0]:
        return float((ab.sum() + ba.sum()) / a.shape[0])
    return float(ab.mean() + ba.mean())


@dataclass(frozen=True)
class MetricReport:
    name: str
    n_points: int
    snr_db: float
    mse: float
    chamfer: float

    def csv_row(self) -> list[str]:
        return [self.name, str(self.n_points), _fmt(self.snr_db), _fmt(self.mse), _fmt(self.chamfer)]


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def evaluate(denoised, reference, name: str = "denoised") -> MetricReport:
    p, q = _aligned(denoised, reference)
    return MetricReport(name=name, n_points=p.shape[0], snr_db=snr(p, q), mse=mse(p, q), chamfer=chamfer(p, q))


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for report in reports:
        writer.writerow(report.csv_row())
    return buf.getvalue()


def reports_from_csv(text: str) -> list[MetricReport]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ValueError(f"unexpected metric CSV header {reader.fieldnames}")
    return [MetricReport(name=row["name"], n_points=int(row["n_points"]), snr_db=float(row["snr_db"]),
                         mse=float(row["mse"]), chamfer=float(row["chamfer"])) for row in reader]
