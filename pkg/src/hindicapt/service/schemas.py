"""Pydantic request models for the practice API."""

from __future__ import annotations

from pydantic import BaseModel, Field, field_validator

SESSION_ID_MAX = 64


class AttemptRequest(BaseModel):
    session_id: str = Field(min_length=1, max_length=SESSION_ID_MAX)
    sentence_id: str = Field(min_length=1, max_length=64)
    phonemes: list[str] | None = None
    audio: str | None = None  # base64 WAV, 8 kHz mono 16-bit

    @field_validator("session_id", "sentence_id")
    @classmethod
    def _safe_id(cls, v: str) -> str:
        if not all(c.isalnum() or c in "-_." for c in v):
            raise ValueError("ids may only contain alphanumerics, '-', '_' and '.'")
        return v


class RatingRequest(BaseModel):
    session_id: str = Field(min_length=1, max_length=SESSION_ID_MAX)
    phoneme: str = Field(min_length=1, max_length=8)
    pre: int = Field(ge=1, le=5)
    post: int = Field(ge=1, le=5)

    @field_validator("session_id")
    @classmethod
    def _safe_id(cls, v: str) -> str:
        if not all(c.isalnum() or c in "-_." for c in v):
            raise ValueError("ids may only contain alphanumerics, '-', '_' and '.'")
        return v
