"""Service configuration from a JSON file and/or environment variables."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path


@dataclass
class ServiceConfig:
    data_dir: str = "./capt-data"
    port: int = 8000
    recognizer_url: str | None = None  # None -> built-in mock recognizer
    mock_fidelity: float = 1.0
    inventory_path: str | None = None  # None -> packaged default
    kb_path: str | None = None
    sentences_path: str | None = None
    locale: str = "en"
    static_dir: str | None = None  # optional UI bundle to serve at /
    mel: dict | None = None  # forwarded to recognizer front ends

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_env(cls) -> "ServiceConfig":
        cfg = cls()
        env = os.environ
        if env.get("CAPT_CONFIG"):
            cfg = cls.from_file(env["CAPT_CONFIG"])
        if env.get("CAPT_DATA_DIR"):
            cfg.data_dir = env["CAPT_DATA_DIR"]
        if env.get("CAPT_PORT"):
            cfg.port = int(env["CAPT_PORT"])
        if env.get("CAPT_RECOGNIZER_URL"):
            cfg.recognizer_url = env["CAPT_RECOGNIZER_URL"]
        if env.get("CAPT_MOCK_FIDELITY"):
            cfg.mock_fidelity = float(env["CAPT_MOCK_FIDELITY"])
        if env.get("CAPT_INVENTORY"):
            cfg.inventory_path = env["CAPT_INVENTORY"]
        if env.get("CAPT_KB"):
            cfg.kb_path = env["CAPT_KB"]
        if env.get("CAPT_SENTENCES"):
            cfg.sentences_path = env["CAPT_SENTENCES"]
        if env.get("CAPT_LOCALE"):
            cfg.locale = env["CAPT_LOCALE"]
        if env.get("CAPT_STATIC_DIR"):
            cfg.static_dir = env["CAPT_STATIC_DIR"]
        return cfg
