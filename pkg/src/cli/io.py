"""Sequence files, count CSVs and atomic output writes."""
import csv
import io
import json
import logging
import os
import tempfile
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

import numpy as np

from ..chain import ChainPath, StateSpace, TupleCounts
from ..utils.errors import DataError, InvalidSpec, SequenceParseError

logger = logging.getLogger(__name__)

TOKENS_PER_LINE = 60


class Alphabet(str, Enum):
    INTEGERS = "integers"
    DNA = "dna"


def _tokens(text: str) -> Iterable[tuple[str, int, int]]:
    """(token, line, column) with 1-based positions; '#' lines are skipped."""
    for line_no, line in enumerate(text.splitlines(), start=1):
        if line.lstrip().startswith("#"):
            continue
        column = 0
        for piece in line.split():
            column = line.index(piece, column)
            yield piece, line_no, column + 1
            column += len(piece)


def parse_sequence(text: str, alphabet: Alphabet, n_states: Optional[int] = None) -> ChainPath:
    """Parse whitespace-separated tokens into a chain path.

    DNA tokens may be single letters or contiguous runs such as ``AGGCT``; the
    integer alphabet uses labels 1..S.
    """
    values: list[int] = []
    if alphabet == Alphabet.DNA:
        states = StateSpace.dna()
        lookup = {label: i for i, label in enumerate(states.labels)}
        for token, line, column in _tokens(text):
            for offset, char in enumerate(token):
                if char.upper() not in lookup:
                    raise SequenceParseError(f"Unknown nucleotide {char!r}", line, column + offset)
                values.append(lookup[char.upper()])
    else:
        for token, line, column in _tokens(text):
            try:
                label = int(token)
            except ValueError:
                message = f"Expected an integer state, got {token!r}"
                raise SequenceParseError(message, line, column) from None
            if label < 1 or (n_states is not None and label > n_states):
                limit = n_states if n_states is not None else "S"
                raise SequenceParseError(f"State {label} outside 1..{limit}", line, column)
            values.append(label - 1)
        if not values:
            raise DataError("Sequence contains no states")
        states = StateSpace.integers(n_states or max(2, max(values) + 1))

    if len(values) < 2:
        raise DataError(f"Sequence needs at least 2 states, got {len(values)}")
    return ChainPath(states, np.array(values, dtype=np.intp))


def read_sequence(
    path: str | Path, alphabet: Alphabet, n_states: Optional[int] = None
) -> ChainPath:
    with open(path, "r") as f:
        text = f.read()
    chain = parse_sequence(text, alphabet, n_states)
    logger.info(f"Read {chain.x.size} states from {path}")
    return chain


def read_header(path: str | Path) -> dict[str, str]:
    """'# key: value' comment lines at the top of a sequence file."""
    header: dict[str, str] = {}
    with open(path, "r") as f:
        for line in f:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].partition(":")
            header[key.strip()] = value.strip()
    return header


def format_sequence(chain: ChainPath, header: Optional[Mapping[str, Any]] = None) -> str:
    lines = [f"# {key}: {value}" for key, value in (header or {}).items()]
    labels = chain.labels()
    for start in range(0, len(labels), TOKENS_PER_LINE):
        lines.append(" ".join(labels[start : start + TOKENS_PER_LINE]))
    return "\n".join(lines) + "\n"


def write_atomic(path: str | Path, text: str) -> Path:
    """Write via a temporary file in the target directory and os.replace."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return target


def csv_text(rows: Sequence[Mapping[str, Any]], columns: Optional[Sequence[str]] = None) -> str:
    if columns is None:
        columns = []
        for row in rows:
            columns.extend(key for key in row if key not in columns)
    buffer = io.StringIO()
    writer = csv.DictWriter(
        buffer, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore"
    )
    writer.writeheader()
    for row in rows:
        writer.writerow({key: _cell(row.get(key, "")) for key in columns})
    return buffer.getvalue()


def _cell(value: Any) -> Any:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


def write_csv(
    path: str | Path, rows: Sequence[Mapping[str, Any]], columns: Optional[Sequence[str]] = None
) -> Path:
    return write_atomic(path, csv_text(rows, columns))


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with open(path, "r", newline="") as f:
        return list(csv.DictReader(f))


def write_json(path: str | Path, document: Mapping[str, Any]) -> Path:
    return write_atomic(path, json.dumps(document, indent=2, sort_keys=True) + "\n")


def read_counts_csv(path: str | Path) -> TupleCounts:
    """Square pair-count matrix; an optional first row and column of state labels."""
    with open(path, "r", newline="") as f:
        rows = [row for row in csv.reader(f) if row and not row[0].startswith("#")]
    if not rows:
        raise DataError(f"No counts in {path}")

    labels: Optional[list[str]] = None
    try:
        float(rows[0][-1])
    except ValueError:
        labels = [cell.strip() for cell in rows[0] if cell.strip()]
        rows = rows[1:]
    if labels is not None:
        rows = [row[1:] if len(row) == len(labels) + 1 else row for row in rows]

    try:
        matrix = np.array([[float(cell) for cell in row] for row in rows])
    except ValueError as e:
        raise DataError(f"Non-numeric count in {path}: {e}") from e
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DataError(f"Pair counts in {path} must form a square matrix, got {matrix.shape}")
    if np.any(matrix != np.round(matrix)):
        raise DataError(f"Pair counts in {path} must be integers")
    states = StateSpace(matrix.shape[0], tuple(labels)) if labels else None
    try:
        return TupleCounts.from_array(matrix, states)
    except InvalidSpec as e:
        raise DataError(str(e)) from e
