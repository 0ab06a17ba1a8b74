"""Command-line surface: extract, detect, build-dataset, evaluate.

Configuration comes from an optional JSON file plus flags; flags win.
Exit codes: 0 success, 2 input/config error, 3 endpoint error. All file
outputs are written atomically (temp file + rename) so reruns either
fully replace an artifact or leave it untouched.
"""

from __future__ import annotations

import functools
import json
import os
import sys
from pathlib import Path

import click

from .dataset import (
    DEFAULT_TEMPLATES,
    ForgeryType,
    StructuredLabel,
    assemble_quadruple,
    build_rationale,
    corpus_row,
    corpus_stats,
    load_templates,
    score_video_regions,
    zero_region_score,
)
from .errors import EndpointError, FefError
from .evalmetrics import evaluate_rows, read_eval_jsonl
from .evidence import evidence_from_json, integrity_from_evidence
from .facetrack import build_face_track, ingest_landmarks
from .frames import compose_grid, load_frames, sample_clips, write_png
from .heuristic import default_profile, load_profile
from .pipeline import extract_evidence, heuristic_detect
from .reasoning import EndpointConfig, two_stage_detect

EXIT_INPUT = 2
EXIT_ENDPOINT = 3

AUTH_TOKEN_ENV = "FEF_AUTH_TOKEN"


def _fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except EndpointError as exc:
            _fail(str(exc), EXIT_ENDPOINT)
        except (FefError, OSError, ValueError, KeyError) as exc:
            _fail(str(exc), EXIT_INPUT)

    return wrapper


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"config file not found: {p}")
    return json.loads(p.read_text(encoding="utf-8"))


def _pick(flag_value, config: dict, key: str, default=None):
    if flag_value is not None:
        return flag_value
    return config.get(key, default)


def _require(value, name: str):
    if value is None:
        raise ValueError(f"missing required input: {name} (flag or config)")
    return value


def _require_path(value, name: str) -> Path:
    path = Path(_require(value, name))
    if not path.exists():
        raise FileNotFoundError(f"{name} path does not exist: {path}")
    return path


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _atomic_write_json(path: Path, obj) -> None:
    _atomic_write(path, (json.dumps(obj, sort_keys=True, indent=2) + "\n").encode("utf-8"))


@click.group()
def main() -> None:
    """Facial evidence forensics toolkit."""


@main.command("extract")
@click.option("--frames", default=None, help="Frame directory or video file.")
@click.option("--landmarks", default=None, help="Landmark JSON file.")
@click.option("--out", default=None, help="Output directory for evidence and grids.")
@click.option("--config", "config_path", default=None, help="JSON config file.")
@click.option("--n-clips", type=int, default=None)
@click.option("--frames-per-clip", type=int, default=None)
@_guarded
def cmd_extract(frames, landmarks, out, config_path, n_clips, frames_per_clip) -> None:
    """Sample clips, compose grids, and write the canonical evidence JSON."""
    config = _load_config(config_path)
    frames_path = _require_path(_pick(frames, config, "frames"), "frames")
    landmarks_path = _require_path(_pick(landmarks, config, "landmarks"), "landmarks")
    out_dir = Path(_require(_pick(out, config, "out"), "out"))

    result = extract_evidence(
        frames_path,
        landmarks_path,
        n_clips=_pick(n_clips, config, "n_clips", 8),
        frames_per_clip=_pick(frames_per_clip, config, "frames_per_clip", 9),
        cell_size=(config.get("cell_height", 224), config.get("cell_width", 224)),
        expand_factor=config.get("expand_factor", 0.30),
        decode_config=config.get("decoder"),
        max_workers=config.get("workers", 1),
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    _atomic_write(out_dir / "evidence.json", result.evidence_bytes)
    for grid in result.grids:
        tmp = out_dir / f"grid_{grid.clip_index:02d}.png.tmp"
        write_png(grid.image, tmp)
        os.replace(tmp, out_dir / f"grid_{grid.clip_index:02d}.png")
    click.echo(
        f"wrote {out_dir / 'evidence.json'} and {len(result.grids)} grid images "
        f"({len(result.metrics.per_pair)} pair deltas)"
    )


@main.command("detect")
@click.option("--frames", default=None, help="Frame directory (needed with an endpoint).")
@click.option("--out", default=None, help="Directory holding evidence.json; verdict.json lands here.")
@click.option("--config", "config_path", default=None)
@click.option("--endpoint-url", default=None)
@click.option("--model", default=None)
@click.option("--threshold", type=float, default=None)
@click.option("--n-clips", type=int, default=None)
@click.option("--frames-per-clip", type=int, default=None)
@click.option("--profile", "profile_path", default=None, help="Threshold profile JSON.")
@_guarded
def cmd_detect(
    frames, out, config_path, endpoint_url, model, threshold, n_clips, frames_per_clip, profile_path
) -> None:
    """Label previously extracted evidence, via endpoint or threshold profile."""
    config = _load_config(config_path)
    out_dir = Path(_require(_pick(out, config, "out"), "out"))
    evidence_path = out_dir / "evidence.json"
    if not evidence_path.exists():
        raise FileNotFoundError(f"evidence file does not exist: {evidence_path}")
    evidence = evidence_from_json(evidence_path.read_bytes())
    threshold = _pick(threshold, config, "threshold", 0.5)

    url = _pick(endpoint_url, config, "endpoint_url")
    if url:
        frames_path = _require_path(_pick(frames, config, "frames"), "frames")
        seq = load_frames(frames_path, config.get("decoder"))
        clips = sample_clips(
            seq,
            n_clips=_pick(n_clips, config, "n_clips", 8),
            frames_per_clip=_pick(frames_per_clip, config, "frames_per_clip", 9),
        )
        cell = (config.get("cell_height", 224), config.get("cell_width", 224))
        grids = [compose_grid(seq, c, cell, clip_index=i) for i, c in enumerate(clips.clips)]
        endpoint = EndpointConfig(
            base_url=url,
            model_name=_require(_pick(model, config, "model"), "model"),
            supports_images=config.get("supports_images", True),
            timeout=config.get("timeout", 60.0),
            max_inflight=config.get("max_inflight", 1),
            auth_token=os.environ.get(AUTH_TOKEN_ENV),
            temperature=config.get("temperature", 0.0),
        )
        verdict = two_stage_detect(
            grids,
            evidence,
            endpoint,
            threshold=threshold,
            sample_count=config.get("sample_count", 1),
            include_evidence_in_stage2=config.get("evidence_in_stage2", False),
        )
        payload = {"label": verdict.label, "think": verdict.think, "answer": verdict.answer}
    else:
        profile = load_profile(profile_path) if profile_path else (
            load_profile(config["profile"]) if config.get("profile") else default_profile()
        )
        metrics = integrity_from_evidence(evidence)
        heuristic = heuristic_detect(metrics, profile, threshold)
        payload = {
            "label": heuristic.label,
            "think": heuristic.explanation,
            "answer": heuristic.label,
        }

    _atomic_write_json(out_dir / "verdict.json", payload)
    click.echo(f"label: {payload['label']} -> {out_dir / 'verdict.json'}")


@main.command("build-dataset")
@click.option("--manifest", default=None, help="Sample manifest JSON.")
@click.option("--out", default=None, help="Output corpus JSONL path.")
@click.option("--config", "config_path", default=None)
@click.option("--templates", "templates_dir", default=None, help="Per-type template directory.")
@_guarded
def cmd_build_dataset(manifest, out, config_path, templates_dir) -> None:
    """Build reasoning quadruples from real/forged frame pairs."""
    config = _load_config(config_path)
    manifest_path = _require_path(_pick(manifest, config, "manifest"), "manifest")
    out_path = Path(_require(_pick(out, config, "out"), "out"))
    templates_dir = _pick(templates_dir, config, "templates")
    templates = dict(DEFAULT_TEMPLATES)
    if templates_dir:
        templates = load_templates(_require_path(templates_dir, "templates"))
    tau = config.get("tau", 25.0)
    expand_factor = config.get("expand_factor", 0.30)

    spec = json.loads(manifest_path.read_text(encoding="utf-8"))
    rows = []
    for sample in spec.get("samples", []):
        forgery = ForgeryType.parse(sample["forgery_type"])
        seq = load_frames(_require_path(sample["frames"], "sample frames"))
        landmark_frames = ingest_landmarks(_require_path(sample["landmarks"], "sample landmarks"))
        track = build_face_track(landmark_frames, seq.dims, factor=expand_factor)
        if forgery is ForgeryType.REAL:
            scores = zero_region_score()
        else:
            pristine = load_frames(_require_path(sample["pristine_frames"], "pristine frames"))
            scores = score_video_regions(pristine, seq, track, tau=tau)
        label = StructuredLabel(
            forgery_type=forgery,
            region_scores=scores,
            evidence_summary={"frames": len(seq), "tracked": len(track.entries)},
        )
        quad = assemble_quadruple(sample["video_ref"], label, templates, build_rationale(label))
        rows.append(corpus_row(quad, label))

    lines = "".join(
        json.dumps(row, sort_keys=True, separators=(",", ":")) + "\n" for row in rows
    )
    _atomic_write(out_path, lines.encode("utf-8"))
    click.echo(json.dumps(corpus_stats(rows), sort_keys=True))


@main.command("evaluate")
@click.option("--input", "input_path", default=None, help="Eval JSONL file.")
@click.option("--out", default=None, help="Report JSON path.")
@click.option("--config", "config_path", default=None)
@click.option("--threshold", type=float, default=None)
@_guarded
def cmd_evaluate(input_path, out, config_path, threshold) -> None:
    """Compute detection and rationale-quality metrics over a JSONL file."""
    config = _load_config(config_path)
    rows = read_eval_jsonl(_require_path(_pick(input_path, config, "eval_input"), "input"))
    report = evaluate_rows(rows, threshold=_pick(threshold, config, "threshold", 0.5))
    out_value = _pick(out, config, "out")
    if out_value:
        _atomic_write_json(Path(out_value), report.as_dict())
    click.echo(json.dumps(report.as_dict(), sort_keys=True))


if __name__ == "__main__":
    main()
