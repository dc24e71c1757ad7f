"""Bundled transcriptions of the three published data tables and their recomputation."""

import csv
from dataclasses import asdict, dataclass

from . import estimate as est
from .config import data_path

TABLE_IDS = (1, 2, 3)
KCPS = 1e3


@dataclass(frozen=True)
class TableRow:
    """One row as printed. Rates in Kcps, transmittances in percent."""

    row: int
    label: str
    concentration: float | None
    Ncc: float
    dNcc: float
    N2: float
    dN2: float
    Tcc: float | None = None
    dTcc: float | None = None
    Tsc: float | None = None
    dTsc: float | None = None
    G_T: float | None = None
    G_N: float | None = None

    def counts(self):
        """Rates in cps with the idler rate left at 1 (it cancels per table)."""
        return est.ChannelCounts(
            Ncc=self.Ncc * KCPS, N1=1.0, N2=self.N2 * KCPS,
            dNcc=self.dNcc * KCPS, dN2=self.dN2 * KCPS, label=self.label,
        )


def _opt(value):
    return float(value) if value.strip() else None


def load_table(table_id):
    if table_id not in TABLE_IDS:
        raise ValueError(f"table id must be one of {TABLE_IDS}")
    path = data_path(f"table{table_id}.csv")
    with path.open() as fh:
        lines = [line for line in fh if not line.startswith("#")]
    rows = []
    for rec in csv.DictReader(lines):
        rows.append(
            TableRow(
                row=int(rec["row"]),
                label=rec["label"],
                concentration=_opt(rec["concentration_ng_ul"]),
                Ncc=float(rec["Ncc_kcps"]),
                dNcc=float(rec["dNcc_kcps"]),
                N2=float(rec["N2_kcps"]),
                dN2=float(rec["dN2_kcps"]),
                Tcc=_opt(rec["Tcc_pct"]),
                dTcc=_opt(rec["dTcc_pct"]),
                Tsc=_opt(rec["Tsc_pct"]),
                dTsc=_opt(rec["dTsc_pct"]),
                G_T=_opt(rec["G_T"]),
                G_N=_opt(rec["G_N"]),
            )
        )
    return rows


def table_caption(table_id):
    path = data_path(f"table{table_id}.csv")
    with path.open() as fh:
        return [line[1:].strip() for line in fh if line.startswith("#")]


def _delta(new, printed):
    return None if new is None or printed is None else new - printed


def recompute_row(row, reference):
    """Derived columns for ``row`` against ``reference`` (both TableRow)."""
    sample, ref = row.counts(), reference.counts()
    adv = est.advantage(sample, None if row is reference else ref)
    out = {
        "row": row.row,
        "label": row.label,
        "concentration_ng_ul": row.concentration,
        "Ncc_kcps": row.Ncc,
        "dNcc_kcps": row.dNcc,
        "N2_kcps": row.N2,
        "dN2_kcps": row.dN2,
        "G_N": adv.G_N,
        "SNR_cc_db": adv.SNR_cc,
        "SNR_sc_db": adv.SNR_sc,
        "sensitivity_cc_db": adv.sensitivity_cc,
        "sensitivity_sc_db": adv.sensitivity_sc,
        "Tcc": None, "dTcc": None, "Tsc": None, "dTsc": None, "G_T": None,
    }
    if row is not reference:
        cc, sc = est.estimate_pair(sample, ref)
        out.update(Tcc=cc.mean, dTcc=cc.uncertainty, Tsc=sc.mean, dTsc=sc.uncertainty, G_T=adv.G_T)
    printed = {k: getattr(row, k) for k in ("Tcc", "dTcc", "Tsc", "dTsc", "G_T", "G_N")}
    out["printed"] = printed
    out["delta"] = {k: _delta(out[k], v) for k, v in printed.items()}
    return out


def reproduce_table(table_id, reference_label=None):
    """Recomputed and printed columns side by side, with deltas, for every row.

    The reference is the row labelled ``reference_label`` (default: first row).
    """
    rows = load_table(table_id)
    reference = rows[0]
    if reference_label is not None:
        matches = [r for r in rows if r.label == reference_label]
        if not matches:
            raise ValueError(f"no row labelled {reference_label!r} in table {table_id}")
        reference = matches[0]
    return [recompute_row(r, reference) for r in rows]


def as_records(rows):
    return [asdict(r) for r in rows]
