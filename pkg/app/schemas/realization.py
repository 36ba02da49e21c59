"""Serialized form of one sampled realization."""

from typing import List, Optional

from pydantic import BaseModel, Field

from app.models.realization import BallRealization
from app.models.topology import slot_neighbours
from app.schemas.common import format_time
from app.utils.validators import format_address


class EdgeRecord(BaseModel):
    """Y(site -> target)."""

    target: str
    y: float


class SiteRecord(BaseModel):
    """Activation time, freeze time and outgoing edge values of one site."""

    site: str
    depth: int
    u: float
    z: float
    outgoing: List[EdgeRecord]


class RealizationDump(BaseModel):
    """Full realization on a ball, sites in breadth-first order."""

    schema_version: str
    radius: Optional[int] = None
    seed: int
    sites: List[SiteRecord] = Field(default_factory=list)

    @classmethod
    def from_realization(
        cls, realization: BallRealization, seed: int, schema_version: str
    ) -> "RealizationDump":
        records = []
        for site in realization.topology.addresses:
            records.append(SiteRecord(
                site=format_address(site) or "O",
                depth=len(site),
                u=realization.activation(site),
                z=realization.freeze(site),
                outgoing=[
                    EdgeRecord(target=format_address(nb) or "O", y=y)
                    for nb, y in zip(slot_neighbours(site), realization.outgoing(site))
                ],
            ))
        return cls(schema_version=schema_version, radius=realization.radius, seed=seed, sites=records)

    def csv_rows(self) -> List[List[str]]:
        """One row per directed edge: site, depth, u, z, target, y."""
        rows = []
        for record in self.sites:
            for edge in record.outgoing:
                rows.append([
                    record.site,
                    str(record.depth),
                    format_time(record.u),
                    format_time(record.z),
                    edge.target,
                    format_time(edge.y),
                ])
        return rows
