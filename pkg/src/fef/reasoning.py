"""Two-stage reasoning orchestration against a chat-style endpoint.

Stage 1 sends the temporal grids plus the canonical evidence JSON and
asks for an analysis wrapped in <think> tags; stage 2 feeds that
rationale back verbatim together with the detection question and parses
the <answer> label. The endpoint is any HTTP server speaking the
chat-completions wire format; the transport is injectable so tests can
script it without a network.
"""

from __future__ import annotations

import base64
import io
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import requests
from PIL import Image

from .errors import (
    EndpointError,
    LabelParseError,
    MissingTagError,
    PreconditionError,
)
from .evidence import FacialEvidence, canonical_json, evidence_field_names
from .frames import FrameGrid

Transport = Callable[[str, dict, dict, float], dict]

DEFAULT_THOUGHT_TEMPLATE = (
    "You are a multimedia forensics analyst. Review the temporal frame grids "
    "{frames} and the structured facial evidence JSON {evidence}. Reason step "
    "by step about blur, color, texture, and boundary consistency across "
    "consecutive frames, citing by name every evidence field you rely on. "
    "Wrap the complete reasoning in <think></think> tags."
)
DEFAULT_QUESTION_TEMPLATE = (
    "Is the analysed video real or a deepfake? Reply with a short <think> "
    "justification followed by <answer>real</answer> or <answer>fake</answer>."
)
STAGE2_SYSTEM_INSTRUCTION = (
    "You are a multimedia forensics adjudicator. Ground your decision in the "
    "analyst reasoning provided by the user, produce your own <think> trace, "
    "and finish with exactly one <answer>real</answer> or <answer>fake</answer>."
)


@dataclass
class ThoughtPrompt:
    template_id: str
    text: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("thought prompt must be nonempty")
        if "{evidence}" not in self.text:
            raise ValueError("thought prompt must contain an {evidence} placeholder")


@dataclass
class QuestionPrompt:
    template_id: str
    text: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("question prompt must be nonempty")


@dataclass
class Rationale:
    text: str
    cited_evidence_keys: list[str]
    raw_response: str


@dataclass
class Verdict:
    label: str
    confidence: float | None
    think: str
    answer: str
    raw_response: str


@dataclass
class EndpointConfig:
    base_url: str
    model_name: str
    supports_images: bool = True
    timeout: float = 60.0
    max_inflight: int = 1
    auth_token: str | None = None
    temperature: float = 0.0
    retries: int = 1

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_inflight < 1:
            raise ValueError("max_inflight must be >= 1")


@dataclass
class InferenceRequest:
    """Wire body plus the evidence keys used for citation tracking."""

    body: dict[str, Any]
    evidence_keys: tuple[str, ...] = field(default_factory=tuple)


def default_thought_prompt() -> ThoughtPrompt:
    return ThoughtPrompt(template_id="thought-default", text=DEFAULT_THOUGHT_TEMPLATE)


def default_question_prompt() -> QuestionPrompt:
    return QuestionPrompt(template_id="question-default", text=DEFAULT_QUESTION_TEMPLATE)


def parse_tagged(text: str, tag: str) -> str | None:
    """Contents of the first well-formed <tag>...</tag> span, else None."""
    match = re.search(rf"<{re.escape(tag)}>(.*?)</{re.escape(tag)}>", text, re.DOTALL)
    return match.group(1) if match else None


def build_stage1_request(
    grids: Sequence[FrameGrid],
    evidence: FacialEvidence,
    prompt: ThoughtPrompt,
    config: EndpointConfig,
) -> InferenceRequest:
    """System message carries the instruction; the user message embeds the
    canonical evidence bytes and, in image mode, one attachment per grid in
    clip order."""
    if evidence.is_empty():
        raise PreconditionError("evidence document is empty")
    evidence_text = canonical_json(evidence.as_dict()).decode("utf-8")
    if config.supports_images:
        frames_note = f"({len(grids)} grid images attached, one per clip, in clip order)"
    else:
        frames_note = "(frame images unavailable; rely on the evidence JSON)"
    instruction = prompt.text.format(evidence="(in the user message)", frames=frames_note)
    body = {
        "model": config.model_name,
        "messages": [
            {"role": "system", "content": instruction},
            {"role": "user", "content": _user_content(evidence_text, grids, config)},
        ],
        "temperature": config.temperature,
    }
    return InferenceRequest(body=body, evidence_keys=tuple(evidence_field_names(evidence)))


def build_stage2_request(
    grids: Sequence[FrameGrid],
    rationale: Rationale,
    question: QuestionPrompt,
    config: EndpointConfig,
    evidence: FacialEvidence | None = None,
) -> InferenceRequest:
    """Stage-2 request: question plus the stage-1 rationale, verbatim."""
    text = f"{question.text}\n\nAnalyst reasoning:\n{rationale.text}"
    keys: tuple[str, ...] = ()
    if evidence is not None:
        text += "\n\nEvidence:\n" + canonical_json(evidence.as_dict()).decode("utf-8")
        keys = tuple(evidence_field_names(evidence))
    body = {
        "model": config.model_name,
        "messages": [
            {"role": "system", "content": STAGE2_SYSTEM_INSTRUCTION},
            {"role": "user", "content": _user_content(text, grids, config)},
        ],
        "temperature": config.temperature,
    }
    return InferenceRequest(body=body, evidence_keys=keys)


def _user_content(text: str, grids: Sequence[FrameGrid], config: EndpointConfig):
    if not config.supports_images:
        return text
    parts: list[dict[str, Any]] = [{"type": "text", "text": text}]
    for grid in grids:
        parts.append(
            {
                "type": "image_url",
                "image_url": {"url": "data:image/png;base64," + _png_base64(grid)},
            }
        )
    return parts


def _png_base64(grid: FrameGrid) -> str:
    buf = io.BytesIO()
    Image.fromarray(grid.image, mode="RGB").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def http_transport(url: str, body: dict, headers: dict, timeout: float) -> dict:
    """Default transport: POST the body as JSON, return the parsed response."""
    try:
        resp = requests.post(url, json=body, headers=headers, timeout=timeout)
    except requests.RequestException as exc:
        raise EndpointError(f"transport failure: {exc}") from exc
    if resp.status_code >= 400:
        raise EndpointError(f"endpoint returned HTTP {resp.status_code}")
    try:
        return resp.json()
    except ValueError as exc:
        raise EndpointError("endpoint returned non-JSON body") from exc


def call_endpoint(
    request: InferenceRequest,
    config: EndpointConfig,
    transport: Transport | None = None,
) -> str:
    """Send a request (one retry on transport failure) and return the text."""
    transport = transport or http_transport
    url = config.base_url.rstrip("/") + "/chat/completions"
    headers = {}
    if config.auth_token:
        headers["Authorization"] = f"Bearer {config.auth_token}"
    last_error: EndpointError | None = None
    for _ in range(1 + max(0, config.retries)):
        try:
            data = transport(url, request.body, headers, config.timeout)
            break
        except EndpointError as exc:
            last_error = exc
    else:
        raise last_error  # type: ignore[misc]
    try:
        content = data["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise EndpointError(f"malformed endpoint response: {exc}") from exc
    if not isinstance(content, str):
        raise EndpointError("endpoint message content is not text")
    return content


def generate_rationale(
    request: InferenceRequest,
    config: EndpointConfig,
    transport: Transport | None = None,
) -> Rationale:
    """Run stage 1 and extract the first <think> span plus cited field names."""
    content = call_endpoint(request, config, transport)
    span = parse_tagged(content, "think")
    if span is None or not span.strip():
        raise MissingTagError("think", content)
    cited = [key for key in request.evidence_keys if key in span]
    return Rationale(text=span, cited_evidence_keys=cited, raw_response=content)


def generate_verdict(
    grids: Sequence[FrameGrid],
    rationale: Rationale,
    question: QuestionPrompt,
    config: EndpointConfig,
    transport: Transport | None = None,
    threshold: float = 0.5,
    evidence: FacialEvidence | None = None,
) -> Verdict:
    """Run stage 2 and map the <answer> span to a real/fake label."""
    request = build_stage2_request(grids, rationale, question, config, evidence=evidence)
    content = call_endpoint(request, config, transport)
    answer = parse_tagged(content, "answer")
    if answer is None:
        raise MissingTagError("answer", content)
    label, confidence = parse_answer_label(answer, threshold)
    return Verdict(
        label=label,
        confidence=confidence,
        think=parse_tagged(content, "think") or "",
        answer=answer,
        raw_response=content,
    )


def parse_answer_label(answer: str, threshold: float = 0.5) -> tuple[str, float | None]:
    """Interpret an answer span.

    A numeric fake-probability in [0, 1] decides the label against the
    threshold (fake iff confidence >= threshold); otherwise exactly one of
    the case-insensitive tokens real/fake must be present.
    """
    confidence = None
    for token in re.findall(r"\d+(?:\.\d+)?|\.\d+", answer):
        value = float(token)
        if 0.0 <= value <= 1.0:
            confidence = value
            break
    if confidence is not None:
        return ("fake" if confidence >= threshold else "real"), confidence
    lowered = answer.lower()
    has_real = re.search(r"\breal\b", lowered) is not None
    has_fake = re.search(r"\bfake\b", lowered) is not None
    if has_real == has_fake:
        raise LabelParseError(f"cannot map answer span to a label: {answer!r}", answer)
    return ("fake" if has_fake else "real"), None


def map_concurrent(fn: Callable, items: Iterable, max_inflight: int) -> list:
    """Apply ``fn`` with at most ``max_inflight`` outstanding calls.

    Results come back in input order regardless of completion order.
    """
    items = list(items)
    if max_inflight <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=max_inflight) as pool:
        return list(pool.map(fn, items))


def two_stage_detect(
    grids: Sequence[FrameGrid],
    evidence: FacialEvidence,
    config: EndpointConfig,
    thought_prompt: ThoughtPrompt | None = None,
    question_prompt: QuestionPrompt | None = None,
    transport: Transport | None = None,
    threshold: float = 0.5,
    sample_count: int = 1,
    include_evidence_in_stage2: bool = False,
) -> Verdict:
    """Full stage-1 + stage-2 protocol with optional rationale sampling.

    With sample_count > 1 the label is a majority vote over the sampled
    verdicts (ties resolve to fake) and the reported confidence is the
    fake-vote fraction.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    thought = thought_prompt or default_thought_prompt()
    question = question_prompt or default_question_prompt()
    stage1 = build_stage1_request(grids, evidence, thought, config)
    stage2_evidence = evidence if include_evidence_in_stage2 else None

    def one_sample(_: int) -> Verdict:
        rationale = generate_rationale(stage1, config, transport)
        return generate_verdict(
            grids, rationale, question, config, transport,
            threshold=threshold, evidence=stage2_evidence,
        )

    verdicts = map_concurrent(one_sample, range(sample_count), config.max_inflight)
    if sample_count == 1:
        return verdicts[0]
    fake_votes = sum(1 for v in verdicts if v.label == "fake")
    label = "fake" if fake_votes * 2 >= sample_count else "real"
    chosen = next(v for v in verdicts if v.label == label)
    return Verdict(
        label=label,
        confidence=fake_votes / sample_count,
        think=chosen.think,
        answer=chosen.answer,
        raw_response=chosen.raw_response,
    )
