"""Prompt rendering, completion clients, and completion parsing.

A completion must contain four `### ` sections, in any order, found by
name: Instruction, Refined Code, Answer Type, Test Case Inputs. The
parser is total: any structural defect raises a typed ParseError, never
a partial bundle and never an untyped exception.

Two clients are provided. The replay client serves completions from a
content-addressed fixture directory keyed by the SHA-256 of the prompt,
which makes pipeline runs deterministic and offline. The live client
POSTs to a chat-completion endpoint with exponential backoff and
requires the SEMIFORGE_API_KEY environment variable (checked before any
network traffic).
"""

from __future__ import annotations

import hashlib
import logging
import os
import re
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Protocol

from .errors import SemiforgeError

logger = logging.getLogger(__name__)

DEFAULT_INPUT_COUNT = 8
SECTION_NAMES = ("Instruction", "Refined Code", "Answer Type", "Test Case Inputs")
API_KEY_ENV = "SEMIFORGE_API_KEY"
TEMPLATE_VERSION = "semiforge-template-v1"

CALL_BASED = "call_based"
STANDARD_INPUT = "standard_input"


class EmptyCode(SemiforgeError):
    pass


class ParseError(SemiforgeError):
    pass


class MissingSection(ParseError):
    def __init__(self, section: str):
        super().__init__(f"completion is missing the {section!r} section")
        self.section = section


class UnknownAnswerType(ParseError):
    def __init__(self, text: str):
        super().__init__(f"unrecognized answer type: {text!r}")
        self.text = text


class NoInputs(ParseError):
    def __init__(self):
        super().__init__("completion contains no test case input blocks")


class MissingFunctionName(ParseError):
    def __init__(self):
        super().__init__("call-based answer without a usable Function Name line")


class AuthMissing(SemiforgeError):
    pass


class ReplayMiss(SemiforgeError):
    def __init__(self, digest: str):
        super().__init__(f"no recorded completion for prompt {digest[:16]}")
        self.digest = digest


class EndpointUnreachable(SemiforgeError):
    pass


@dataclass(frozen=True)
class AnswerType:
    """Either call-based (with a function name) or standard input."""

    kind: str
    function_name: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in (CALL_BASED, STANDARD_INPUT):
            raise ValueError(f"unknown answer type kind: {self.kind!r}")
        if self.kind == CALL_BASED:
            if not self.function_name or not self.function_name.isidentifier():
                raise ValueError("call-based answers need an identifier function name")

    @classmethod
    def call_based(cls, function_name: str) -> "AnswerType":
        return cls(kind=CALL_BASED, function_name=function_name)

    @classmethod
    def standard_input(cls) -> "AnswerType":
        return cls(kind=STANDARD_INPUT)


@dataclass(frozen=True)
class GenerationBundle:
    instruction: str
    refined_code: str
    answer_type: AnswerType
    raw_inputs: tuple[str, ...]
    raw_completion: str


@dataclass(frozen=True)
class PromptTemplate:
    """Template text plus the number of inputs to request.

    ``preamble`` holds the template body with three placeholders:
    ``{{original_code}}`` (exactly once), ``{{input_count}}`` and an
    optional ``{{exemplars}}`` slot for extra few-shot blocks.
    """

    preamble: str
    exemplars: tuple[str, ...] = ()
    input_count: int = DEFAULT_INPUT_COUNT
    version: str = TEMPLATE_VERSION

    def __post_init__(self) -> None:
        if self.input_count < 1:
            raise ValueError("input_count must be >= 1")
        if self.preamble.count("{{original_code}}") != 1:
            raise ValueError("template must contain exactly one {{original_code}} slot")

    @classmethod
    def default(cls, input_count: int = DEFAULT_INPUT_COUNT) -> "PromptTemplate":
        text = resources.files("semiforge.assets").joinpath("prompt_template.txt").read_text("utf-8")
        return cls(preamble=text, input_count=input_count)

    @classmethod
    def from_file(cls, path: str | Path, input_count: int = DEFAULT_INPUT_COUNT) -> "PromptTemplate":
        return cls(preamble=Path(path).read_text(encoding="utf-8"), input_count=input_count)


def build_generation_prompt(original_code: str, template: PromptTemplate | None = None) -> str:
    """Render the full generation prompt for one original program."""
    if not original_code.strip():
        raise EmptyCode("refusing to build a prompt for empty code")
    template = template or PromptTemplate.default()
    text = template.preamble
    text = text.replace("{{input_count}}", str(template.input_count))
    text = text.replace("{{exemplars}}", "\n\n".join(template.exemplars))
    text = text.replace("{{original_code}}", original_code.rstrip("\n"))
    return re.sub(r"\n{3,}", "\n\n", text)


def prompt_digest(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    temperature: float = 0.7
    top_p: float = 0.95
    max_tokens: int = 2048
    model_id: str = "default"

    def __post_init__(self) -> None:
        if not self.prompt:
            raise ValueError("prompt must be non-empty")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if not 0 < self.top_p <= 1:
            raise ValueError("top_p must be in (0, 1]")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")


@dataclass(frozen=True)
class Completion:
    text: str
    finish_reason: str = "stop"
    usage: Mapping[str, int] = field(default_factory=dict)


class CompletionClient(Protocol):
    def complete(self, request: CompletionRequest) -> Completion: ...


class ReplayClient:
    """Serve completions from fixtures/completions/<sha256(prompt)>.txt."""

    def __init__(self, store: str | Path):
        self.store = Path(store)

    def complete(self, request: CompletionRequest) -> Completion:
        digest = prompt_digest(request.prompt)
        path = self.store / f"{digest}.txt"
        if not path.is_file():
            raise ReplayMiss(digest)
        return Completion(text=path.read_text(encoding="utf-8"), finish_reason="replay")


class RecordingClient:
    """Wrap a live client and persist every completion as a replay fixture."""

    def __init__(self, inner: CompletionClient, store: str | Path):
        self.inner = inner
        self.store = Path(store)

    def complete(self, request: CompletionRequest) -> Completion:
        completion = self.inner.complete(request)
        self.store.mkdir(parents=True, exist_ok=True)
        path = self.store / f"{prompt_digest(request.prompt)}.txt"
        path.write_text(completion.text, encoding="utf-8")
        return completion


class LiveClient:
    """POST to a chat-completion endpoint with retry and backoff.

    Rate-limit (429) and server (5xx) responses are retried with
    exponential backoff, honoring a Retry-After header when present.
    """

    RETRYABLE = frozenset({429, 500, 502, 503, 504})

    def __init__(
        self,
        endpoint: str,
        api_key: str | None = None,
        max_attempts: int = 4,
        backoff_base: float = 0.5,
        request_timeout: float = 120.0,
    ):
        if max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        self.endpoint = endpoint
        self._api_key = api_key
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.request_timeout = request_timeout

    def _credential(self) -> str:
        key = self._api_key or os.environ.get(API_KEY_ENV)
        if not key:
            raise AuthMissing(f"set {API_KEY_ENV} (or pass api_key) before using the live client")
        return key

    def complete(self, request: CompletionRequest) -> Completion:
        import requests

        key = self._credential()
        payload = {
            "model": request.model_id,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "top_p": request.top_p,
            "max_tokens": request.max_tokens,
        }
        headers = {"Authorization": f"Bearer {key}"}
        last_error = "no attempts made"
        for attempt in range(1, self.max_attempts + 1):
            wait = self.backoff_base * (2 ** (attempt - 1))
            try:
                response = requests.post(
                    self.endpoint, json=payload, headers=headers, timeout=self.request_timeout
                )
            except requests.RequestException as exc:
                last_error = str(exc)
                logger.warning("completion attempt %d failed: %s", attempt, exc)
            else:
                if response.status_code == 200:
                    return _completion_from_response(response)
                if response.status_code not in self.RETRYABLE:
                    raise EndpointUnreachable(f"endpoint returned HTTP {response.status_code}")
                last_error = f"HTTP {response.status_code}"
                retry_after = _parse_retry_after(response.headers.get("Retry-After"))
                if retry_after is not None:
                    wait = retry_after
                logger.warning("completion attempt %d got %s", attempt, last_error)
            if attempt < self.max_attempts:
                time.sleep(wait)
        raise EndpointUnreachable(
            f"giving up after {self.max_attempts} attempts ({last_error})"
        )


def _parse_retry_after(value: str | None) -> float | None:
    if value is None:
        return None
    try:
        return max(0.0, float(value))
    except ValueError:
        return None


def _completion_from_response(response) -> Completion:
    try:
        data = response.json()
        choice = data["choices"][0]
        return Completion(
            text=choice["message"]["content"],
            finish_reason=choice.get("finish_reason", "stop"),
            usage=data.get("usage", {}),
        )
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise EndpointUnreachable(f"malformed completion response: {exc}") from exc


def complete(client: CompletionClient, request: CompletionRequest) -> Completion:
    return client.complete(request)


_HEADER = re.compile(r"^###\s+(?P<name>[^#].*?)\s*:?\s*$")
_INPUT_HEADER = re.compile(r"^####\s+Input\b.*$", re.IGNORECASE)
_FUNCTION_NAME = re.compile(r"^function\s+name\s*:\s*(?P<name>.+?)\s*$", re.IGNORECASE)


def _split_sections(raw: str) -> dict[str, str]:
    """Map canonical section names to body text, first occurrence wins."""
    canonical = {name.lower(): name for name in SECTION_NAMES}
    sections: dict[str, list[str]] = {}
    current: list[str] | None = None
    for line in raw.splitlines():
        match = _HEADER.match(line)
        if match:
            name = canonical.get(match.group("name").strip().lower())
            if name is not None and name not in sections:
                sections[name] = []
                current = sections[name]
            else:
                current = None
            continue
        if current is not None:
            current.append(line)
    return {name: "\n".join(body) for name, body in sections.items()}


def _strip_code_fence(body: str) -> str:
    lines = body.splitlines()
    fence_idx = [i for i, line in enumerate(lines) if line.lstrip().startswith("```")]
    if len(fence_idx) >= 2:
        lines = lines[fence_idx[0] + 1 : fence_idx[-1]]
    elif len(fence_idx) == 1:
        lines = lines[fence_idx[0] + 1 :]
    return "\n".join(lines).strip("\n")


def _parse_answer_type(body: str) -> AnswerType:
    first = next((line.strip() for line in body.splitlines() if line.strip()), "")
    label = first.strip("`'\". ").lower()
    if label in ("standard input", "standard-input", "stdin"):
        return AnswerType.standard_input()
    if label in ("call-based", "call based", "callbased"):
        for line in body.splitlines():
            match = _FUNCTION_NAME.match(line.strip())
            if match:
                name = match.group("name").strip("`'\"")
                if name.isidentifier():
                    return AnswerType.call_based(name)
        raise MissingFunctionName()
    raise UnknownAnswerType(first)


def _parse_inputs(body: str) -> tuple[str, ...]:
    blocks: list[list[str]] = []
    current: list[str] | None = None
    for line in body.splitlines():
        if _INPUT_HEADER.match(line):
            current = []
            blocks.append(current)
        elif current is not None:
            current.append(line)
    if not blocks:
        raise NoInputs()
    return tuple("\n".join(block).strip("\n") for block in blocks)


def parse_components(raw: str) -> GenerationBundle:
    """Parse a completion into its four components or raise a ParseError."""
    sections = _split_sections(raw)
    for name in SECTION_NAMES:
        if name not in sections:
            raise MissingSection(name)

    instruction = sections["Instruction"].strip()
    if not instruction:
        raise MissingSection("Instruction")

    refined_code = _strip_code_fence(sections["Refined Code"])
    if not refined_code.strip():
        raise MissingSection("Refined Code")

    answer_body = sections["Answer Type"]
    if not answer_body.strip():
        raise MissingSection("Answer Type")
    answer_type = _parse_answer_type(answer_body)

    raw_inputs = _parse_inputs(sections["Test Case Inputs"])

    return GenerationBundle(
        instruction=instruction,
        refined_code=refined_code,
        answer_type=answer_type,
        raw_inputs=raw_inputs,
        raw_completion=raw,
    )
