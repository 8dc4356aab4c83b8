"""Pydantic request/response models for the HTTP service."""

from pydantic import BaseModel, Field


class StatsRequest(BaseModel):
    input: str
    out: str


class StatsResponse(BaseModel):
    dim: int
    count: int
    out: str


class FdRequest(BaseModel):
    a: str
    b: str


class FdResponse(BaseModel):
    total: float
    mean_term: float
    trace_term: float


class PrRequest(BaseModel):
    real: str
    gen: str
    k: int = Field(default=3, ge=1)
    threads: int | None = None


class PrResponse(BaseModel):
    precision: float
    recall: float
    k: int


class SweepRequest(BaseModel):
    manifest: str
    size: int = Field(default=1000, ge=1)
    draws: int = Field(default=10, ge=1)
    seed: int = Field(default=0, ge=0)
    grid: list[float] | None = None
    out: str | None = None
    threads: int | None = None


class SweepPointModel(BaseModel):
    d: float
    fd_mean: float
    fd_std: float
    mean_term_mean: float
    trace_term_mean: float


class SweepResponse(BaseModel):
    attribute: str
    set_size: int
    draws: int
    seed: int
    points: list[SweepPointModel]
    out: str | None


class BlurRequest(BaseModel):
    images: str
    masks: str
    regions: str
    out: str
    kernel_size: int = Field(default=111, ge=3)
    sigma: float = Field(default=100.0, gt=0)
    threads: int | None = None


class BlurResponse(BaseModel):
    images: int
    out: str
    written: dict[str, int]
    skipped: dict[str, int]


class RegionReportRequest(BaseModel):
    pairs: str
    out: str | None = None


class RegionEntryModel(BaseModel):
    region: str
    raw_fd: float
    normalized_fd: float
    image_count: int


class RegionReportResponse(BaseModel):
    all_fd: float
    entries: list[RegionEntryModel]
    out: str | None


class LeaderboardRequest(BaseModel):
    entries: str
    k: int = Field(default=3, ge=1)
    out: str | None = None
    threads: int | None = None


class LeaderboardCellModel(BaseModel):
    generator: str
    feature_space: str
    fd: float | None
    precision: float | None
    recall: float | None
    error: str | None


class LeaderboardRankModel(BaseModel):
    feature_space: str
    metric: str
    top: list[str]


class LeaderboardResponse(BaseModel):
    k: int
    generators: list[str]
    feature_spaces: list[str]
    cells: list[LeaderboardCellModel]
    ranks: list[LeaderboardRankModel]
    out: str | None


class RenderRequest(BaseModel):
    input: str
    out: str
    title: str = ""


class RenderResponse(BaseModel):
    out: str
    bytes: int
