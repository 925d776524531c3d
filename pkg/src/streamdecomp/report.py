"""CSV serialization of run and sweep results and the text/gnuplot report."""

import csv
import io

from .bench import Cell
from .errors import InvalidInputError

RUN_COLUMNS = ["frame_index", "iterations", "converged", "rel_err_sparse", "rel_err_lowrank", "wall_time_ms"]
SWEEP_COLUMNS = ["s0", "m", "prob_sparse", "prob_lowrank", "trials"]


def run_csv(frames):
    out = io.StringIO()
    out.write(",".join(RUN_COLUMNS) + "\n")
    for f in frames:
        out.write(f"{f.frame_index},{f.iterations},{int(f.converged)},"
                  f"{f.rel_err_sparse:.9e},{f.rel_err_lowrank:.9e},{f.wall_time_ms:.3f}\n")
    return out.getvalue()


def sweep_csv(diagram):
    out = io.StringIO()
    out.write(",".join(SWEEP_COLUMNS) + "\n")
    for c in diagram.cells:
        out.write(f"{c.s0},{c.m},{c.prob_sparse:.6f},{c.prob_lowrank:.6f},{c.trials}\n")
    return out.getvalue()


def parse_sweep_csv(text):
    """Read cells from sweep CSV text; errors name the column or line number."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise InvalidInputError("line 1: empty file, expected a header") from None
    header = [h.strip() for h in header]
    for col in SWEEP_COLUMNS:
        if col not in header:
            raise InvalidInputError(f"missing column '{col}'")
    idx = {col: header.index(col) for col in SWEEP_COLUMNS}
    cells = []
    for row in reader:
        line = reader.line_num
        if not row or all(not v.strip() for v in row):
            continue
        if len(row) != len(header):
            raise InvalidInputError(f"line {line}: expected {len(header)} fields, got {len(row)}")
        try:
            s0 = int(row[idx["s0"]])
            m = int(row[idx["m"]])
            ps = float(row[idx["prob_sparse"]])
            pl = float(row[idx["prob_lowrank"]])
            trials = int(row[idx["trials"]])
        except ValueError as exc:
            raise InvalidInputError(f"line {line}: {exc}") from None
        if not (0 <= ps <= 1 and 0 <= pl <= 1):
            raise InvalidInputError(f"line {line}: probabilities must lie in [0, 1]")
        cells.append(Cell(s0, m, ps, pl, trials))
    if not cells:
        raise InvalidInputError("no data rows")
    return cells


def _axes(cells):
    return sorted({c.s0 for c in cells}), sorted({c.m for c in cells})


def _lookup(cells):
    return {(c.s0, c.m): c for c in cells}


def text_grid(cells, attr):
    """Aligned table, rows ``s0`` and columns ``m``, values to 2 decimals."""
    s0s, ms = _axes(cells)
    table = _lookup(cells)
    head = ["s0\\m"] + [str(m) for m in ms]
    rows = [head]
    for s0 in s0s:
        row = [str(s0)]
        for m in ms:
            c = table.get((s0, m))
            row.append(f"{getattr(c, attr):.2f}" if c is not None else "-")
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(head))]
    return "\n".join("  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in rows) + "\n"


def gnuplot_matrix(cells, attr):
    """``nonuniform matrix`` text: first row ``N m_1 .. m_N``, then ``s0 p_1 .. p_N``."""
    s0s, ms = _axes(cells)
    table = _lookup(cells)
    lines = [" ".join([str(len(ms))] + [str(m) for m in ms])]
    for s0 in s0s:
        vals = [f"{getattr(table[(s0, m)], attr):.6f}" if (s0, m) in table else "nan" for m in ms]
        lines.append(" ".join([str(s0)] + vals))
    return "\n".join(lines) + "\n"
