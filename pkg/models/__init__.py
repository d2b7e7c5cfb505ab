"""
Data models and schemas for the anisotropic walk verification engine
"""

from .schemas import (
    UniformProfileSpec,
    PeriodicProfileSpec,
    TableProfileSpec,
    ProfileSpec,
    parse_profile_spec,
    load_profile_spec,
    parse_grid,
    parse_sites,
    RunConfig,
    Verdict,
    Provenance,
    VerificationReport,
    BatchManifest,
    RunManifest,
    report_list_json,
)

__all__ = [
    # Profile files
    "UniformProfileSpec",
    "PeriodicProfileSpec",
    "TableProfileSpec",
    "ProfileSpec",
    "parse_profile_spec",
    "load_profile_spec",
    # Run configuration
    "parse_grid",
    "parse_sites",
    "RunConfig",
    # Reports
    "Verdict",
    "Provenance",
    "VerificationReport",
    "BatchManifest",
    "RunManifest",
    "report_list_json",
]
