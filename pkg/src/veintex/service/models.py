"""Request/response schemas for the annotation service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class ViewPayload(BaseModel):
    view: str
    parents: list[str] = Field(default_factory=list)
    payload: str = ""  # VXD text of the view's local additions/patches/tombstones


class OpenSessionRequest(BaseModel):
    hub: str  # VXD text, or plain text when plainText is set (or auto-detected)
    views: list[ViewPayload] = Field(default_factory=list)
    plainText: bool | None = None


class SessionCreated(BaseModel):
    sessionId: str
    version: int
    activeView: str


class SessionInfo(BaseModel):
    sessionId: str
    version: int
    activeView: str


class ViewResponse(BaseModel):
    sessionId: str
    version: int
    viewId: str
    document: str  # VXD text


class EditRequest(BaseModel):
    version: int
    edit: dict


class EditAccepted(BaseModel):
    version: int
    created: list[str] = Field(default_factory=list)
    modified: list[str] = Field(default_factory=list)
    deleted: list[str] = Field(default_factory=list)
    summary: str = ""


class Health(BaseModel):
    status: str
    sessions: int
