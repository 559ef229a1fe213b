"""Loader for the versioned data files shipped with the package."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources


@lru_cache(maxsize=None)
def load_data(name: str) -> dict:
    ref = resources.files("cfdetect.text").joinpath("data").joinpath(name)
    with ref.open("r", encoding="utf-8") as fh:
        return json.load(fh)
