import contextlib
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Union

import numpy as np
from pydantic import BaseModel

from hybridaml.exceptions import DatasetIOError


def jsonable_encoder(obj: Any) -> Any:
    """
    Convert pydantic models, numpy scalars/arrays, paths and containers into
    plain JSON-compatible Python objects.
    """
    if isinstance(obj, BaseModel):
        return obj.model_dump(mode="json")
    if isinstance(obj, dict):
        return {str(k): jsonable_encoder(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable_encoder(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable_encoder(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(jsonable_encoder(obj), indent=2, sort_keys=False) + "\n"


def write_text_atomic(path: Union[str, Path], text: str) -> Path:
    """Write `text` to a temp file in the target directory, then rename."""
    path = Path(path)
    tmp: Union[str, None] = None
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(
            prefix=f".{path.name}.", suffix=".tmp", dir=str(path.parent)
        )
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as e:
        if tmp is not None:
            with contextlib.suppress(OSError):
                os.unlink(tmp)
        raise DatasetIOError(f"cannot write {e.strerror}", path=path) from e
    return path


def write_json_atomic(path: Union[str, Path], obj: Any) -> Path:
    return write_text_atomic(path, dumps(obj))
