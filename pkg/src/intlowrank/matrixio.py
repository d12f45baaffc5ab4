"""Plain-text matrix files: one row per line, whitespace or comma separated.

Lines starting with '#' (or trailing '# ...' fragments) are comments.
Integer grids load as int64, anything else as float64. Emitted text
round-trips exactly through the parser.
"""

import numpy as np

from .exceptions import MatrixParseError


def parse_matrix(text):
    rows = []
    width = None
    for lineno, raw in enumerate(str(text).splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.replace(",", " ").split()
        if width is None:
            width = len(tokens)
        elif len(tokens) != width:
            raise MatrixParseError(
                f"line {lineno}: expected {width} entries, found {len(tokens)}"
            )
        rows.append((lineno, tokens))
    if not rows:
        raise MatrixParseError("no matrix rows found")
    try:
        return np.array([[int(t) for t in toks] for _, toks in rows], dtype=np.int64)
    except ValueError:
        pass
    try:
        return np.array([[float(t) for t in toks] for _, toks in rows], dtype=float)
    except ValueError as exc:
        raise MatrixParseError(f"non-numeric entry: {exc}") from None


def load_matrix(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise MatrixParseError(f"cannot read {path}: {exc}") from None
    return parse_matrix(text)


def format_matrix(M):
    M = np.atleast_2d(np.asarray(M))
    if np.issubdtype(M.dtype, np.integer):
        lines = [" ".join(str(int(v)) for v in row) for row in M]
    else:
        lines = [" ".join(repr(float(v)) for v in row) for row in M]
    return "\n".join(lines) + "\n"


def save_matrix(path, M, comment=None):
    with open(path, "w", encoding="utf-8") as fh:
        if comment:
            for line in str(comment).splitlines():
                fh.write(f"# {line}\n")
        fh.write(format_matrix(M))


def as_vector(M, name="vector"):
    """Interpret a 1 x k or k x 1 (or flat) matrix as a vector."""
    M = np.asarray(M)
    if M.ndim == 1:
        return M
    if M.ndim == 2 and 1 in M.shape:
        return M.ravel()
    raise MatrixParseError(f"{name} must be a single row or column, got shape {M.shape}")
