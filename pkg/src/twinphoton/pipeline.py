"""End-to-end runs: simulate -> dead time -> count -> correct -> estimate."""

import csv
import json
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import estimate as est
from .coinc import count_coincidences
from .config import coerce, read_kv
from .twinstream import IDLER, SIGNAL, SampleModel, SourceConfig, TimestampStream, simulate_counts, simulate_gates

LEVELS = ("events", "counts")
REFERENCE_STREAM, SAMPLE_STREAM = 0, 1

REPORT_FIELDS = (
    "label", "level", "n_gates", "seed", "true_transmittance", "reference", "sample",
    "Tcc", "dTcc", "Tsc", "dTsc", "G_T", "G_N", "SNR_cc_db", "SNR_sc_db", "valid", "invalid_term",
)


@dataclass(frozen=True)
class Corrections:
    dark1: float = 0.0
    dark2: float = 0.0
    tau_dead_ns: float = 0.0
    tau_cc_ns: float = 7.1
    gate_s: float = 0.3

    @classmethod
    def from_file(cls, path):
        return cls(**coerce({f.name: float for f in fields(cls)}, read_kv(path), str(path)))


@dataclass(frozen=True)
class RunConfig:
    source: SourceConfig = field(default_factory=SourceConfig)
    sample: SampleModel = field(default_factory=SampleModel)
    tau_cc_ns: float = 7.1
    level: str = "events"
    standard_error: bool = False
    literal_dead_time: bool = False
    output_dir: str | None = None
    label: str = "sample"

    def __post_init__(self):
        if self.level not in LEVELS:
            raise ValueError(f"level must be one of {LEVELS}")
        if self.output_dir is not None:
            out = Path(self.output_dir)
            probe = out if out.exists() else out.parent
            if probe.exists() and not probe.is_dir():
                raise ValueError(f"output_dir {self.output_dir} is not a directory")

    @property
    def corrections(self):
        s = self.source
        return Corrections(s.dark1, s.dark2, s.dead_time_ns, self.tau_cc_ns, s.gate_s)


_RUN_KEYS = {"tau_cc_ns": float, "level": str, "output_dir": str, "label": str,
             "true_transmittance": float, "standard_error": str, "literal_dead_time": str}


def _flag(value):
    return str(value).strip().lower() in ("1", "true", "yes", "on")


def load_run_config(path, **overrides):
    """Flat key-value file: SourceConfig field names plus the run keys above."""
    raw = read_kv(path)
    src_types = SourceConfig.field_types()
    values = coerce({**src_types, **_RUN_KEYS}, raw, str(path))
    values.update({k: v for k, v in overrides.items() if v is not None})
    source = SourceConfig(**{k: values[k] for k in src_types if k in values})
    run = {k: values[k] for k in ("tau_cc_ns", "level", "output_dir", "label") if k in values}
    for k in ("standard_error", "literal_dead_time"):
        if k in values:
            run[k] = _flag(values[k])
    sample = SampleModel(values.get("true_transmittance", 1.0))
    return RunConfig(source=source, sample=sample, **run)


# -- per-gate counting -----------------------------------------------------


def gate_counts(source, sample, tau_cc_ns, stream=0, level="events"):
    """Per-gate (N1, N2, Ncc) integer arrays for one run."""
    if level == "counts":
        return simulate_counts(source, sample, tau_cc_ns, stream)
    n1, n2, ncc = [], [], []
    for idler, signal in simulate_gates(source, sample, stream):
        res = count_coincidences(idler, signal, tau_cc_ns)
        n1.append(res.N1)
        n2.append(res.N2)
        ncc.append(res.Ncc)
    return np.array(n1), np.array(n2), np.array(ncc)


def summarize(n1, n2, ncc, corrections, standard_error=False, literal=False, label=""):
    """Correct each gate's rates, then reduce to mean and spread per quantity."""
    T = corrections.gate_s
    rates = {"N1": [], "N2": [], "Ncc": []}
    for a, b, c in zip(n1, n2, ncc):
        raw = est.ChannelCounts(
            Ncc=c / T, N1=a / T, N2=b / T,
            dark1=corrections.dark1, dark2=corrections.dark2,
            tau_cc_ns=corrections.tau_cc_ns, tau_dead_ns=corrections.tau_dead_ns,
            gate_s=T, label=label,
        )
        fixed = est.correct_counts(raw, literal=literal)
        if not fixed.valid:
            return fixed
        for k in rates:
            rates[k].append(getattr(fixed, k))
    stats = {k: est.batch_stats(v, standard_error) for k, v in rates.items()}
    return est.ChannelCounts(
        Ncc=stats["Ncc"][0], N1=stats["N1"][0], N2=stats["N2"][0],
        dNcc=stats["Ncc"][1], dN1=stats["N1"][1], dN2=stats["N2"][1],
        dark1=corrections.dark1, dark2=corrections.dark2,
        tau_cc_ns=corrections.tau_cc_ns, tau_dead_ns=corrections.tau_dead_ns,
        gate_s=T, label=label,
    )


def compare(sample, reference, label="sample"):
    """Report dict for corrected sample vs reference ChannelCounts."""
    out = {"label": label, "reference": _counts_dict(reference), "sample": _counts_dict(sample)}
    bad = next((c for c in (sample, reference) if not c.valid), None)
    if bad is not None:
        out.update({k: None for k in ("Tcc", "dTcc", "Tsc", "dTsc", "G_T", "G_N", "SNR_cc_db", "SNR_sc_db")})
        out.update(valid=False, invalid_term=f"{bad.label}: {bad.invalid_term}")
        return out
    cc, sc = est.estimate_pair(sample, reference)
    adv = est.advantage(sample, reference)
    out.update(
        Tcc=cc.mean, dTcc=cc.uncertainty, Tsc=sc.mean, dTsc=sc.uncertainty,
        G_T=adv.G_T, G_N=adv.G_N, SNR_cc_db=adv.SNR_cc, SNR_sc_db=adv.SNR_sc,
        valid=True, invalid_term="",
    )
    return out


def _counts_dict(c):
    return {k: getattr(c, k) for k in ("Ncc", "dNcc", "N1", "dN1", "N2", "dN2")}


class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, typ, exc, tb):
        if exc is None or getattr(exc, "_stage_tagged", False):
            return False
        try:
            tagged = typ(f"[{self.name}] {exc}")
        except Exception:
            return False
        tagged._stage_tagged = True
        raise tagged from exc


def run_pipeline(config):
    """Reference and sample runs under one seed; returns the report dict.

    With ``config.output_dir`` set, writes ``report.json`` plus
    ``reference_gates.csv`` and ``sample_gates.csv``.
    """
    src = config.source
    runs = {}
    for name, stream, sample in (
        ("reference", REFERENCE_STREAM, SampleModel(1.0)),
        ("sample", SAMPLE_STREAM, config.sample),
    ):
        with _Stage(f"simulate/count {name}"):
            runs[name] = gate_counts(src, sample, config.tau_cc_ns, stream, config.level)
    with _Stage("correct"):
        summaries = {
            name: summarize(*runs[name], config.corrections, config.standard_error,
                            config.literal_dead_time, name)
            for name in runs
        }
    with _Stage("estimate"):
        report = compare(summaries["sample"], summaries["reference"], config.label)
    report.update(
        level=config.level, n_gates=src.n_gates, seed=src.seed,
        true_transmittance=config.sample.true_transmittance,
    )
    report = {k: report[k] for k in REPORT_FIELDS}
    if config.output_dir is not None:
        with _Stage("write"):
            out = Path(config.output_dir)
            out.mkdir(parents=True, exist_ok=True)
            for name, arrays in runs.items():
                write_counts_csv(out / f"{name}_gates.csv", *arrays)
            (out / "report.json").write_text(dumps_report(report))
    return report


def dumps_report(report):
    return json.dumps(report, indent=2, sort_keys=False) + "\n"


# -- file formats ----------------------------------------------------------


def write_timestamps(path_or_fh, gates):
    """Write ``gate,channel,time_ps`` rows for an iterable of (idler, signal) pairs."""
    fh, close = _open(path_or_fh, "w")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["gate", "channel", "time_ps"])
        for idler, signal in sorted(gates, key=lambda pair: pair[0].gate_index):
            for stream in (idler, signal):
                g, ch = stream.gate_index, stream.channel
                w.writerows((g, ch, int(t)) for t in stream.times)
    finally:
        if close:
            fh.close()


def read_timestamps(path, gate_s):
    """Inverse of ``write_timestamps``: list of (idler, signal) ordered by gate."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    gates = []
    for g in np.unique(data[:, 0]) if data.size else []:
        rows = data[data[:, 0] == g]
        pair = tuple(
            TimestampStream(ch, np.sort(rows[rows[:, 1] == ch, 2]), int(g), gate_s)
            for ch in (IDLER, SIGNAL)
        )
        gates.append(pair)
    return gates


def write_counts_csv(path_or_fh, n1, n2, ncc):
    fh, close = _open(path_or_fh, "w")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["gate", "N1", "N2", "Ncc"])
        for g, row in enumerate(zip(n1, n2, ncc)):
            w.writerow([g, *map(int, row)])
        if len(n1):
            w.writerow(["mean", *(repr(float(np.mean(x))) for x in (n1, n2, ncc))])
    finally:
        if close:
            fh.close()


def read_counts_csv(path):
    """Per-gate (N1, N2, Ncc) arrays; summary rows are skipped."""
    n1, n2, ncc = [], [], []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            if not rec["gate"].strip().isdigit():
                continue
            n1.append(int(rec["N1"]))
            n2.append(int(rec["N2"]))
            ncc.append(int(rec["Ncc"]))
    return np.array(n1), np.array(n2), np.array(ncc)


def _open(path_or_fh, mode):
    if hasattr(path_or_fh, "write"):
        return path_or_fh, False
    return open(path_or_fh, mode, newline=""), True


