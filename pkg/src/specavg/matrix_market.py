"""Matrix Market readers and writers for the package matrix types.

Supports the coordinate and array formats with real or integer fields and
general or symmetric storage.  Symmetric storage keeps only entries on or
below the diagonal; the reader mirrors them back.
"""

import numpy as np

from .errors import ParseError
from .matrix_core import DenseSymmetric, SparseCSR

_HEADER = "%%MatrixMarket"


def write_matrix_market(path, A, comment=None):
    """Write a DenseSymmetric (array symmetric) or SparseCSR (coordinate
    general) matrix."""
    with open(path, "w") as fh:
        if isinstance(A, DenseSymmetric):
            fh.write(f"{_HEADER} matrix array real symmetric\n")
            if comment:
                fh.write(f"%{comment}\n")
            n = A.n
            fh.write(f"{n} {n}\n")
            # column-major, on or below the diagonal
            for j in range(n):
                for i in range(j, n):
                    fh.write(f"{float(A.a[i, j])!r}\n")
        elif isinstance(A, SparseCSR):
            fh.write(f"{_HEADER} matrix coordinate real general\n")
            if comment:
                fh.write(f"%{comment}\n")
            fh.write(f"{A.n_rows} {A.n_cols} {A.nnz}\n")
            rows = np.repeat(np.arange(A.n_rows), np.diff(A.row_ptr))
            for i, j, v in zip(rows, A.col_idx, A.values):
                fh.write(f"{i + 1} {j + 1} {float(v)!r}\n")
        else:
            raise TypeError("write_matrix_market expects DenseSymmetric or "
                            "SparseCSR")


def _parse_header(line):
    parts = line.strip().split()
    if len(parts) != 5 or parts[0] != _HEADER or parts[1] != "matrix":
        raise ParseError(f"bad MatrixMarket header: {line.strip()!r}", line=1)
    fmt, field, symmetry = (p.lower() for p in parts[2:])
    if fmt not in ("coordinate", "array"):
        raise ParseError(f"unsupported format {fmt!r}", line=1)
    if field not in ("real", "integer"):
        raise ParseError(f"unsupported field {field!r}", line=1)
    if symmetry not in ("general", "symmetric"):
        raise ParseError(f"unsupported symmetry {symmetry!r}", line=1)
    return fmt, symmetry


def _data_lines(lines):
    for lineno, raw in lines:
        body = raw.strip()
        if not body or body.startswith("%"):
            continue
        yield lineno, body


def read_matrix_market(path, want="auto"):
    """Read a Matrix Market file.

    want: "auto" returns SparseCSR for coordinate files and DenseSymmetric
    (or a plain ndarray when not square symmetric) for array files;
    "dense" and "sparse" force a conversion.
    """
    with open(path) as fh:
        raw_lines = list(enumerate(fh, start=1))
    if not raw_lines:
        raise ParseError("empty file", line=1)
    fmt, symmetry = _parse_header(raw_lines[0][1])
    lines = _data_lines(raw_lines[1:])

    try:
        lineno, size_line = next(lines)
    except StopIteration:
        raise ParseError("missing size line") from None

    if fmt == "coordinate":
        result = _read_coordinate(lineno, size_line, lines, symmetry)
    else:
        result = _read_array(lineno, size_line, lines, symmetry)

    if want == "auto":
        return result
    if want == "dense":
        a = result.to_dense() if isinstance(result, SparseCSR) else result
        a = a.a if isinstance(a, DenseSymmetric) else np.asarray(a)
        if a.shape[0] != a.shape[1]:
            raise ParseError("dense symmetric requested but matrix is "
                             "rectangular")
        return DenseSymmetric(a)
    if want == "sparse":
        if isinstance(result, SparseCSR):
            return result
        a = result.a if isinstance(result, DenseSymmetric) else result
        rows, cols = np.nonzero(a)
        return SparseCSR.from_coo(a.shape[0], a.shape[1], rows, cols,
                                  a[rows, cols])
    raise ValueError(f"unknown want={want!r}")


def _read_coordinate(size_lineno, size_line, lines, symmetry):
    parts = size_line.split()
    if len(parts) != 3:
        raise ParseError("coordinate size line needs 3 integers",
                         line=size_lineno)
    try:
        n_rows, n_cols, nnz = (int(p) for p in parts)
    except ValueError:
        raise ParseError("bad size line", line=size_lineno) from None
    rows, cols, vals = [], [], []
    stored = 0
    for lineno, body in lines:
        parts = body.split()
        if len(parts) != 3:
            raise ParseError("coordinate entry needs 'i j value'",
                             line=lineno)
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise ParseError("bad coordinate entry", line=lineno) from None
        if not (1 <= i <= n_rows and 1 <= j <= n_cols):
            raise ParseError(f"index ({i}, {j}) out of bounds", line=lineno)
        stored += 1
        rows.append(i - 1)
        cols.append(j - 1)
        vals.append(v)
        if symmetry == "symmetric" and i != j:
            rows.append(j - 1)
            cols.append(i - 1)
            vals.append(v)
    if stored != nnz:
        raise ParseError(f"expected {nnz} entries, found {stored}")
    return SparseCSR.from_coo(n_rows, n_cols, rows, cols, vals)


def _read_array(size_lineno, size_line, lines, symmetry):
    parts = size_line.split()
    if len(parts) != 2:
        raise ParseError("array size line needs 2 integers",
                         line=size_lineno)
    try:
        n_rows, n_cols = (int(p) for p in parts)
    except ValueError:
        raise ParseError("bad size line", line=size_lineno) from None
    a = np.zeros((n_rows, n_cols))
    if symmetry == "symmetric":
        if n_rows != n_cols:
            raise ParseError("symmetric array must be square",
                             line=size_lineno)
        coords = [(i, j) for j in range(n_cols) for i in range(j, n_rows)]
    else:
        coords = [(i, j) for j in range(n_cols) for i in range(n_rows)]
    filled = 0
    for lineno, body in lines:
        for token in body.split():
            if filled >= len(coords):
                raise ParseError("more entries than the size line declares",
                                 line=lineno)
            try:
                v = float(token)
            except ValueError:
                raise ParseError(f"bad value {token!r}", line=lineno) from None
            i, j = coords[filled]
            a[i, j] = v
            if symmetry == "symmetric":
                a[j, i] = v
            filled += 1
    if filled != len(coords):
        raise ParseError(f"expected {len(coords)} entries, found {filled}")
    if n_rows == n_cols and np.array_equal(a, a.T):
        return DenseSymmetric(a)
    return a
