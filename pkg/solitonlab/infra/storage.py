import csv
from pathlib import Path
from typing import Any, Iterable, List, Sequence, Tuple

import numpy as np

SNAPSHOT_HEADER = ["t", "x", "re_psi", "im_psi", "density"]
COMPARE_SNAPSHOT_HEADER = [
    "t",
    "x",
    "re_psi_var",
    "im_psi_var",
    "density_var",
    "re_psi_grid",
    "im_psi_grid",
    "density_grid",
]
HAMILTONIAN_HEADER = ["q", "p", "T", "V", "H"]


def fmt(value: Any) -> str:
    """17 significant digits for floats, plain text for everything else."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def observables_header(n_solitons: int, *, compare: bool = False) -> List[str]:
    header = ["t", "norm", "energy", "regularized_count"]
    for i in range(1, n_solitons + 1):
        header += [f"x_{i}", f"p_{i}"]
    if compare:
        header += ["norm_grid", "energy_grid"]
        for i in range(1, n_solitons + 1):
            header += [f"x_{i}_grid", f"p_{i}_grid"]
        header += ["l2_mismatch", "sup_mismatch"]
    return header


def snapshot_rows(t: float, x: np.ndarray, *fields: np.ndarray) -> Iterable[List[Any]]:
    """One row per lattice point: t, x, then Re, Im and |.|^2 of every field."""
    columns = []
    for psi in fields:
        columns += [psi.real, psi.imag, np.abs(psi) ** 2]
    for j in range(x.size):
        yield [t, x[j]] + [col[j] for col in columns]


def ensure_dir(out_dir: Path) -> Path:
    """
    Reason:
    - Every command writes into one output directory that may not exist yet.

    Benefit:
    - Reruns into the same directory overwrite instead of failing.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
    """
    Reason:
    - Snapshots can hold millions of rows; they are streamed, never materialised.

    Benefit:
    - Returns the row count so callers can log what was written.
    """
    count = 0
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
            count += 1
    return count


def write_summary(path: Path, items: Sequence[Tuple[str, Any]]) -> None:
    """`key = value` lines in the given order."""
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for key, value in items:
            fh.write(f"{key} = {fmt(value)}\n")


def read_summary(path: Path) -> dict:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if " = " in line:
            key, value = line.split(" = ", 1)
            out[key] = value
    return out
