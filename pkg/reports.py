"""
CSV and JSON artifact rendering.
Every artifact starts from the same header: tool version, subcommand and
canonical config. Nothing time-dependent is written, so identical configs
give byte-identical files.
"""

import csv
import io
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

from config import TOOL_VERSION
from result_cache import canonical_json


def header_line(subcommand: str, canonical: Dict[str, Any]) -> str:
    return f"gapscope {TOOL_VERSION} {subcommand} config={canonical_json(canonical)}"


def _cell(value: Any) -> Any:
    # repr keeps floats round-trippable and platform independent
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value


def render_csv(header: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Comma-separated, LF line endings, '# header' comment then the column row."""
    buffer = io.StringIO()
    buffer.write(f"# {header}\n")
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def _plain(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def render_json(header: str, payload: Dict[str, Any]) -> str:
    """UTF-8 JSON with sorted keys; the header is stored under 'header'."""
    return json.dumps({'header': header, **payload}, sort_keys=True, indent=2,
                      ensure_ascii=False, default=_plain) + '\n'


def write_artifacts(output_dir: str, artifacts: Dict[str, str]) -> List[Path]:
    """Write name -> text artifacts under output_dir in sorted name order."""
    root = Path(output_dir)
    root.mkdir(parents=True, exist_ok=True)
    paths = []
    for name in sorted(artifacts):
        path = root / name
        with path.open('w', encoding='utf-8', newline='\n') as f:
            f.write(artifacts[name])
        paths.append(path)
    return paths
