"""Canonical JSON evidence: the traceable record handed to reasoning.

The evidence document joins the face track (coordinates) with the
integrity metrics. Serialization is canonical so byte equality follows
from value equality: object keys are sorted, reals carry exactly six
decimal places, there is no insignificant whitespace, and the encoding
is UTF-8. Real values are quantized to six decimals when the document
is assembled, which makes parse(serialize(x)) == x hold exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

from .errors import SerializationError
from .facetrack import FaceTrack
from .metrics import IntegrityMetrics

SCHEMA_VERSION = "1.0"


@dataclass
class FacialEvidence:
    coordinates: dict[str, Any] = field(default_factory=dict)
    integrity: dict[str, Any] = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def as_dict(self) -> dict[str, Any]:
        return {
            "schema_version": self.schema_version,
            "coordinates": self.coordinates,
            "integrity": self.integrity,
        }

    def is_empty(self) -> bool:
        return not self.coordinates.get("entries") and not self.integrity.get("per_frame")


def serialize_evidence(track: FaceTrack, metrics: IntegrityMetrics) -> tuple[FacialEvidence, bytes]:
    """Assemble the evidence document and its canonical JSON bytes."""
    coordinates = {
        "entries": [
            {
                "frame_index": e.frame_index,
                "box": e.refined_box.as_list(),
                "confidence": _real(e.confidence, "confidence"),
                "points": {
                    name: [_real(x, f"points.{name}"), _real(y, f"points.{name}")]
                    for name, (x, y) in sorted(e.landmarks.items())
                },
            }
            for e in track.entries
        ],
        "gaps": list(track.gaps),
    }
    integrity = {
        "per_frame": [
            {
                "frame_index": m.frame_index,
                "blur_sigma": _real(m.blur_sigma, "blur_sigma"),
                "lab_mu": _real(m.lab_mu, "lab_mu"),
                "lab_sigma": _real(m.lab_sigma, "lab_sigma"),
                "glcm_contrast": _real(m.glcm_contrast, "glcm_contrast"),
                "gradient_mean": _real(m.gradient_mean, "gradient_mean"),
                "edge_density": _real(m.edge_density, "edge_density"),
                "freq_ratio": _real(m.freq_ratio, "freq_ratio"),
            }
            for m in metrics.per_frame
        ],
        "per_pair": [
            {
                "pair": list(p.pair),
                "delta_blur": _real(p.delta_blur, "delta_blur"),
                "delta_color": _real(p.delta_color, "delta_color"),
                "delta_texture": _real(p.delta_texture, "delta_texture"),
                "delta_boundary": _real(p.delta_boundary, "delta_boundary"),
            }
            for p in metrics.per_pair
        ],
        "summary": {
            name: {"mean": _real(s["mean"], name), "max": _real(s["max"], name)}
            for name, s in sorted(metrics.summary.items())
        },
    }
    evidence = FacialEvidence(coordinates=coordinates, integrity=integrity)
    return evidence, canonical_json(evidence.as_dict())


def _real(value: float, where: str) -> float:
    if not math.isfinite(value):
        raise SerializationError(f"non-finite value in field '{where}': {value!r}")
    quantized = round(float(value), 6)
    return 0.0 if quantized == 0.0 else quantized


def canonical_json(value: Any) -> bytes:
    """Encode with sorted keys, 6-decimal reals, and no extra whitespace."""
    parts: list[str] = []
    _encode(value, parts)
    return "".join(parts).encode("utf-8")


def _encode(value: Any, out: list[str]) -> None:
    if value is None:
        out.append("null")
    elif isinstance(value, bool):
        out.append("true" if value else "false")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        if not math.isfinite(value):
            raise SerializationError(f"non-finite real: {value!r}")
        out.append(f"{value + 0.0:.6f}" if value != 0.0 else "0.000000")
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=False))
    elif isinstance(value, dict):
        out.append("{")
        for i, key in enumerate(sorted(value)):
            if not isinstance(key, str):
                raise SerializationError(f"object keys must be strings, got {key!r}")
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(":")
            _encode(value[key], out)
        out.append("}")
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _encode(item, out)
        out.append("]")
    else:
        raise SerializationError(f"unsupported type {type(value).__name__}")


def evidence_from_json(data: bytes | str) -> FacialEvidence:
    """Parse canonical evidence bytes back into a FacialEvidence value."""
    raw = json.loads(data if isinstance(data, str) else data.decode("utf-8"))
    if not isinstance(raw, dict):
        raise SerializationError("evidence JSON must be an object")
    return FacialEvidence(
        coordinates=raw.get("coordinates", {}),
        integrity=raw.get("integrity", {}),
        schema_version=raw.get("schema_version", SCHEMA_VERSION),
    )


def integrity_from_evidence(evidence: FacialEvidence) -> IntegrityMetrics:
    """Rebuild pair deltas (and frame metrics) from a parsed evidence doc."""
    from .metrics import FrameMetrics, PairDeltas  # local import avoids a cycle at module load

    per_frame = [
        FrameMetrics(
            frame_index=row["frame_index"],
            blur_sigma=row["blur_sigma"],
            lab_mu=row["lab_mu"],
            lab_sigma=row["lab_sigma"],
            glcm_contrast=row["glcm_contrast"],
            gradient_mean=row["gradient_mean"],
            edge_density=row["edge_density"],
            freq_ratio=row["freq_ratio"],
        )
        for row in evidence.integrity.get("per_frame", [])
    ]
    per_pair = [
        PairDeltas(
            pair=(row["pair"][0], row["pair"][1]),
            delta_blur=row["delta_blur"],
            delta_color=row["delta_color"],
            delta_texture=row["delta_texture"],
            delta_boundary=row["delta_boundary"],
        )
        for row in evidence.integrity.get("per_pair", [])
    ]
    summary = {
        name: dict(stats) for name, stats in evidence.integrity.get("summary", {}).items()
    }
    return IntegrityMetrics(per_frame=per_frame, per_pair=per_pair, summary=summary)


def evidence_field_names(evidence: FacialEvidence) -> list[str]:
    """Sorted unique key names anywhere in the evidence document."""
    names: set[str] = set()

    def walk(node: Any) -> None:
        if isinstance(node, dict):
            for key, child in node.items():
                names.add(key)
                walk(child)
        elif isinstance(node, list):
            for child in node:
                walk(child)

    walk(evidence.as_dict())
    return sorted(names)
