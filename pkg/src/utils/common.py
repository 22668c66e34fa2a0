import json
import os
from typing import Any, Dict, Union

import numpy as np
import yaml


def read_yaml(cfg: Union[str, Dict[str, Any]]) -> Dict[str, Any]:
    """Load a YAML (or JSON) mapping from a path, or pass a dict through."""
    if not isinstance(cfg, dict):
        with open(cfg) as f:
            config = yaml.safe_load(f)
    else:
        config = cfg
    return config or {}


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars and arrays for json.dump."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    return value


def write_json(data: Dict[str, Any], path: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as outfile:
        json.dump(to_jsonable(data), outfile, indent=4)
