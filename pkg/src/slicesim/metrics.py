"""Per-slice quality metrics, campaign aggregation and export.

Packets are kept column-wise (one :class:`PacketLog` per traffic profile
and run) so that a multi-million packet eMBB run stays cheap; a scalar
:class:`PacketRecord` view exists for single-packet reasoning and tests.
Campaign aggregation reports the mean plus the upper and lower mean
absolute deviation, computed separately, matching the asymmetric whiskers
used for the random-access results.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import ConfigurationError
from .timebase import NS_PER_MS

CSV_HEADER = "plan,interval,profile,metric,mean,dev_lo,dev_hi,seeds"

DROP_REASONS = {0: None, 1: "harq", 2: "horizon", 3: "no_coverage"}
DROP_CODES = {v: k for k, v in DROP_REASONS.items()}


@dataclass(frozen=True)
class PacketRecord:
    profile: str
    device: int
    size_bytes: int
    created_ns: int
    delivered_ns: int | None
    dropped: bool
    interval: int
    drop_reason: str | None = None

    def __post_init__(self):
        if self.delivered_ns is not None and self.delivered_ns < self.created_ns:
            raise ConfigurationError("delivery precedes creation")
        if self.dropped == (self.delivered_ns is not None):
            raise ConfigurationError("a record is either delivered or dropped")

    @property
    def latency_ms(self) -> float | None:
        if self.delivered_ns is None:
            return None
        return (self.delivered_ns - self.created_ns) / NS_PER_MS


class PacketLog:
    """Column-wise packet ledger for one profile of one run."""

    def __init__(self, profile: str, n: int):
        self.profile = profile
        self.device = np.zeros(n, dtype=np.int16)
        self.size_bytes = np.zeros(n, dtype=np.int32)
        self.created_ns = np.zeros(n, dtype=np.int64)
        self.delivered_ns = np.full(n, -1, dtype=np.int64)
        self.drop_code = np.zeros(n, dtype=np.int8)
        self.interval = np.zeros(n, dtype=np.int8)

    def __len__(self):
        return self.device.size

    @property
    def delivered(self) -> np.ndarray:
        return self.delivered_ns >= 0

    def latency_ms(self) -> np.ndarray:
        """Latencies of delivered packets, in ms."""
        ok = self.delivered
        return (self.delivered_ns[ok] - self.created_ns[ok]) / NS_PER_MS

    def finalize(self):
        """Mark packets never delivered as horizon drops."""
        missing = (~self.delivered) & (self.drop_code == 0)
        self.drop_code[missing] = DROP_CODES["horizon"]
        assert (self.delivered ^ (self.drop_code != 0)).all(), "delivered xor dropped violated"

    def select(self, mask: np.ndarray) -> "PacketLog":
        out = PacketLog(self.profile, int(np.count_nonzero(mask)))
        for name in ("device", "size_bytes", "created_ns", "delivered_ns", "drop_code", "interval"):
            setattr(out, name, getattr(self, name)[mask])
        return out

    def records(self) -> Iterator[PacketRecord]:
        for i in range(len(self)):
            delivered = int(self.delivered_ns[i]) if self.delivered_ns[i] >= 0 else None
            yield PacketRecord(
                profile=self.profile, device=int(self.device[i]),
                size_bytes=int(self.size_bytes[i]), created_ns=int(self.created_ns[i]),
                delivered_ns=delivered, dropped=delivered is None,
                interval=int(self.interval[i]),
                drop_reason=DROP_REASONS[int(self.drop_code[i])],
            )

    def equals(self, other: "PacketLog") -> bool:
        return (self.profile == other.profile and len(self) == len(other)
                and all(np.array_equal(getattr(self, f), getattr(other, f))
                        for f in ("device", "size_bytes", "created_ns",
                                  "delivered_ns", "drop_code", "interval")))


def throughput_bps(log: PacketLog) -> float:
    """Received bits over the span from first transmission to last delivery."""
    ok = log.delivered
    if not ok.any():
        return 0.0
    span_ns = int(log.delivered_ns[ok].max()) - int(log.created_ns.min())
    if span_ns <= 0:
        return 0.0
    return 8.0 * float(log.size_bytes[ok].sum()) * 1e9 / span_ns


def per_device_throughput_bps(log: PacketLog) -> dict[int, float]:
    out = {}
    for dev in np.unique(log.device):
        out[int(dev)] = throughput_bps(log.select(log.device == dev))
    return out


def threshold_reliability(log: PacketLog, threshold_ms: float = 5.0) -> float:
    """Fraction of all transmitted packets delivered under the threshold.

    Dropped packets count in the denominator only.
    """
    if len(log) == 0:
        raise ConfigurationError("no packets transmitted")
    ok = log.delivered
    lat_ns = log.delivered_ns[ok] - log.created_ns[ok]
    good = int(np.count_nonzero(lat_ns < threshold_ms * NS_PER_MS))
    return good / len(log)


def run_metrics(logs: dict[str, PacketLog], n_intervals: int = 3,
                latency_threshold_ms: float = 5.0) -> dict:
    """Per-(interval, profile) metric rows for one run.

    eMBB reports the per-device mean throughput; URLLC reports threshold
    reliability and its complement (outage).  Interval 0 is the combined
    row computed over concatenated packets, not averaged averages.
    """
    rows = {}
    spans = [(i, None) for i in range(1, n_intervals + 1)] + [("combined", None)]
    for profile, log in logs.items():
        for key, _ in spans:
            sub = log if key == "combined" else log.select(log.interval == key)
            if len(sub) == 0:
                continue
            row = {}
            if profile == "eMBB":
                per_dev = per_device_throughput_bps(sub)
                row["throughput_bps"] = float(np.mean(list(per_dev.values())))
            elif profile == "URLLC":
                rel = threshold_reliability(sub, latency_threshold_ms)
                row["reliability"] = rel
                row["outage"] = 1.0 - rel
            else:
                row["delivered_fraction"] = float(np.count_nonzero(sub.delivered)) / len(sub)
            rows[(key, profile)] = row
    return rows


def aggregate_seeds(per_seed_rows: list[dict]) -> dict:
    """Mean and split mean-absolute-deviation over seeds, per metric.

    Input: one ``{(interval, profile): {metric: value}}`` dict per seed.
    Output: ``{(interval, profile, metric): (mean, dev_lo, dev_hi, n)}``.
    Aggregation is permutation invariant.
    """
    if not per_seed_rows:
        raise ConfigurationError("no seeds to aggregate")
    collected: dict[tuple, list[float]] = {}
    for rows in per_seed_rows:
        for (interval, profile), metrics in rows.items():
            for metric, value in metrics.items():
                collected.setdefault((interval, profile, metric), []).append(float(value))
    out = {}
    for key, values in collected.items():
        out[key] = mean_dev(values)
    return out


def mean_dev(values) -> tuple[float, float, float, int]:
    """(mean, lower MAD, upper MAD, count); deviations split around the mean."""
    arr = np.asarray([v for v in values if not np.isnan(v)], dtype=float)
    if arr.size == 0:
        return (float("nan"), 0.0, 0.0, 0)
    m = float(arr.mean())
    below = arr[arr < m]
    above = arr[arr > m]
    dev_lo = float(np.mean(m - below)) if below.size else 0.0
    dev_hi = float(np.mean(above - m)) if above.size else 0.0
    return (m, dev_lo, dev_hi, int(arr.size))


# ------------------------------------------------------------------ export

def format_number(x: float) -> str:
    return "%.9g" % float(x)


def export_csv(path, rows: list[dict], scenario_hash: str):
    """Write campaign rows; fixed schema, scenario hash on a comment line."""
    lines = [f"# scenario_hash={scenario_hash}", CSV_HEADER]
    for r in rows:
        lines.append(",".join([
            str(r["plan"]), str(r["interval"]), str(r["profile"]), str(r["metric"]),
            format_number(r["mean"]), format_number(r["dev_lo"]),
            format_number(r["dev_hi"]), str(r["seeds"]),
        ]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def parse_csv(path) -> tuple[list[dict], str | None]:
    rows = []
    scenario_hash = None
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "scenario_hash=" in line:
                    scenario_hash = line.split("scenario_hash=", 1)[1].strip()
                continue
            if line == CSV_HEADER:
                continue
            plan, interval, profile, metric, mean, lo, hi, seeds = line.split(",")
            rows.append({
                "plan": plan,
                "interval": interval if interval == "combined" else int(interval),
                "profile": profile, "metric": metric,
                "mean": float(mean), "dev_lo": float(lo), "dev_hi": float(hi),
                "seeds": int(seeds),
            })
    return rows, scenario_hash


METRIC_CHART_STYLE = {
    "throughput_bps": dict(title="eMBB per-worker throughput", ylabel="bit/s", log=False, scale=1.0),
    "outage": dict(title="URLLC outage at latency threshold", ylabel="outage ratio", log=True, scale=1.0),
    "blocking_probability": dict(title="mMTC blocking probability", ylabel="probability", log=False, scale=1.0),
    "avg_preamble_retx": dict(title="mMTC preamble retransmissions", ylabel="retransmissions", log=False, scale=1.0),
    "access_delay_ms": dict(title="mMTC access delay", ylabel="ms", log=False, scale=1.0),
}


def export_charts(out_dir, rows: list[dict], fmt: str = "svg") -> list[str]:
    """One grouped bar chart per metric family: interval groups x plan bars,
    asymmetric deviation whiskers.  Returns the written paths; empty
    families are skipped."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written = []
    intervals = [1, 2, 3, "combined"]
    plans = ("static", "dynamic")
    for metric, style in METRIC_CHART_STYLE.items():
        fam = [r for r in rows if r["metric"] == metric]
        if not fam:
            continue
        fig, ax = plt.subplots(figsize=(7, 4))
        x = np.arange(len(intervals))
        width = 0.35
        plotted = False
        for pi, plan in enumerate(plans):
            means, lo, hi = [], [], []
            for iv in intervals:
                match = [r for r in fam if r["plan"] == plan and r["interval"] == iv]
                means.append(match[0]["mean"] if match else np.nan)
                lo.append(match[0]["dev_lo"] if match else 0.0)
                hi.append(match[0]["dev_hi"] if match else 0.0)
            if not all(np.isnan(means)):
                plotted = True
            ax.bar(x + (pi - 0.5) * width, means, width, yerr=[lo, hi],
                   capsize=3, label=plan)
        if not plotted:
            plt.close(fig)
            continue
        if style["log"]:
            ax.set_yscale("log")
        ax.set_xticks(x)
        ax.set_xticklabels([str(i) for i in intervals])
        ax.set_xlabel("time interval")
        ax.set_ylabel(style["ylabel"])
        ax.set_title(style["title"])
        ax.legend()
        fig.tight_layout()
        path = f"{out_dir}/{metric}.{fmt}"
        fig.savefig(path)
        plt.close(fig)
        written.append(path)
    return written
