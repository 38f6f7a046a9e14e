"""Edit-instruction parsing: classify insert/replace/delete and pull out the
"what" (primary) and "where" (grounding) entities.

Two backends: a language-model HTTP client constrained to a strict JSON
schema, and a deterministic rule-based grammar that keeps the whole pipeline
usable offline. The grammar is intentionally small: verb lexicons pick the
task kind, placement prepositions bind the grounding entity, with/by binds a
replacement substitute, and conjunctions split multiple primaries.
"""

from __future__ import annotations

import json
import logging
import os
import re
from dataclasses import dataclass, field

import requests

from sceneedit.errors import AmbiguousPrompt, BackendError, InvalidTask, SchemaViolation

logger = logging.getLogger(__name__)

INSERT_VERBS = {"place", "put", "insert", "add", "set"}
REPLACE_VERBS = {"replace", "swap", "substitute"}
DELETE_VERBS = {"delete", "remove"}
GROUNDING_PREPS = {"on", "onto", "over", "atop", "upon"}
SUBSTITUTE_PREPS = {"with", "by"}
ARTICLES = {"a", "an", "the", "some", "this", "that", "my"}
_TRAILING_PREPS = {"from", "in", "at", "of", "off"}


@dataclass(frozen=True)
class EditTask:
    """Parsed edit intent.

    For replacements, ``grounding_entity`` names the object being replaced;
    empty ``primary_entities`` means "replace with a similar object".
    """

    kind: str                                 # insert | replace | delete
    primary_entities: tuple[str, ...] = ()
    grounding_entity: str = ""
    raw_prompt: str = ""
    rationale: str = ""                       # free text, never interpreted

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "primary": list(self.primary_entities),
            "grounding": self.grounding_entity,
            "rationale": self.rationale,
        }

    @classmethod
    def from_json(cls, doc: dict, raw_prompt: str = "") -> "EditTask":
        if not isinstance(doc, dict):
            raise SchemaViolation(f"task payload must be an object, got {type(doc).__name__}")
        kind = doc.get("kind")
        if kind not in ("insert", "replace", "delete"):
            raise SchemaViolation(f"kind must be insert|replace|delete, got {kind!r}")
        primary = doc.get("primary", [])
        if not isinstance(primary, list) or not all(isinstance(p, str) for p in primary):
            raise SchemaViolation("primary must be a list of strings")
        grounding = doc.get("grounding", "")
        if not isinstance(grounding, str):
            raise SchemaViolation("grounding must be a string")
        return cls(
            kind=kind,
            primary_entities=tuple(p.strip() for p in primary if p.strip()),
            grounding_entity=grounding.strip(),
            raw_prompt=raw_prompt,
            rationale=str(doc.get("rationale", "") or ""),
        )


def validate_task(task: EditTask) -> EditTask:
    """Return the task unchanged iff its invariants hold."""
    if task.kind not in ("insert", "replace", "delete"):
        raise InvalidTask(f"unknown task kind {task.kind!r}")
    if task.kind == "insert":
        if not task.grounding_entity:
            raise InvalidTask("insert requires a grounding entity")
        if not task.primary_entities:
            raise InvalidTask("insert requires at least one primary entity")
    elif task.kind == "replace":
        if not task.grounding_entity:
            raise InvalidTask("replace requires a grounding entity")
        # empty primary is legal: a similar object replaces the existing one
    else:
        if task.primary_entities:
            raise InvalidTask("delete must not carry primary entities")
        if not task.grounding_entity:
            raise InvalidTask("delete requires a grounding entity")
    return task


# --- rule-based fallback ------------------------------------------------------


def _tokenize(prompt: str) -> list[str]:
    return re.sub(r"[^\w\s-]", " ", prompt.lower()).split()


def _noun_phrase(tokens: list[str]) -> str:
    return " ".join(t for t in tokens if t not in ARTICLES).strip()


def _split_conjunction(tokens: list[str]) -> list[str]:
    phrases = []
    current: list[str] = []
    for tok in tokens:
        if tok in ("and", "plus"):
            if current:
                phrases.append(_noun_phrase(current))
                current = []
        else:
            current.append(tok)
    if current:
        phrases.append(_noun_phrase(current))
    return [p for p in phrases if p]


def parse_fallback(prompt: str) -> EditTask:
    """Deterministic grammar: same prompt, same task, every run."""
    tokens = _tokenize(prompt)
    verb_idx = next(
        (i for i, t in enumerate(tokens) if t in INSERT_VERBS | REPLACE_VERBS | DELETE_VERBS),
        None,
    )
    if verb_idx is None:
        raise AmbiguousPrompt(f"no edit verb found in {prompt!r}")
    verb = tokens[verb_idx]
    rest = tokens[verb_idx + 1:]

    if verb in DELETE_VERBS:
        cut = next((i for i, t in enumerate(rest) if t in _TRAILING_PREPS | GROUNDING_PREPS), len(rest))
        grounding = _noun_phrase(rest[:cut])
        if not grounding:
            raise AmbiguousPrompt(f"nothing to delete in {prompt!r}")
        return EditTask(kind="delete", grounding_entity=grounding, raw_prompt=prompt)

    if verb in REPLACE_VERBS:
        sub_idx = next((i for i, t in enumerate(rest) if t in SUBSTITUTE_PREPS), None)
        if sub_idx is None:
            grounding = _noun_phrase(rest)
            if not grounding:
                raise AmbiguousPrompt(f"nothing to replace in {prompt!r}")
            return EditTask(kind="replace", grounding_entity=grounding, raw_prompt=prompt)
        grounding = _noun_phrase(rest[:sub_idx])
        primary = _split_conjunction(rest[sub_idx + 1:])
        if not grounding or not primary:
            raise AmbiguousPrompt(f"could not split replace prompt {prompt!r}")
        return EditTask(
            kind="replace",
            primary_entities=tuple(primary[:1]),
            grounding_entity=grounding,
            raw_prompt=prompt,
        )

    prep_idx = next((i for i, t in enumerate(rest) if t in GROUNDING_PREPS), None)
    if prep_idx is None:
        raise AmbiguousPrompt(f"insert prompt lacks a placement preposition: {prompt!r}")
    primary = _split_conjunction(rest[:prep_idx])
    grounding = _noun_phrase(rest[prep_idx + 1:])
    if not primary or not grounding:
        raise AmbiguousPrompt(f"could not extract entities from {prompt!r}")
    return EditTask(
        kind="insert",
        primary_entities=tuple(primary),
        grounding_entity=grounding,
        raw_prompt=prompt,
    )


# --- language-model client ----------------------------------------------------

# Original template for this package; instructs strict JSON so responses
# deserialize directly into the task schema.
PROMPT_TEMPLATE = (
    "You classify one 3D-scene edit instruction. Respond with ONLY a JSON "
    'object, no prose: {{"kind": "insert"|"replace"|"delete", '
    '"primary": [<objects to add; substitute for replace; empty for delete>], '
    '"grounding": <surface/object the edit anchors to; for replace/delete the '
    'existing object>, "rationale": <one short sentence>}}. '
    "Instruction: {prompt}"
)

_RETRY_SUFFIX = " Return ONLY the JSON object."


@dataclass
class LanguageModelClient:
    """Minimal HTTP JSON client for an instruction-following model."""

    endpoint: str
    model: str = "default"
    timeout: float = 30.0
    api_key_env: str = "SCENEEDIT_LLM_API_KEY"
    headers: dict = field(default_factory=dict)

    def _headers(self) -> dict:
        headers = dict(self.headers)
        key = os.environ.get(self.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _request(self, text: str) -> str:
        try:
            resp = requests.post(
                self.endpoint,
                json={"model": self.model, "input": text},
                headers=self._headers(),
                timeout=self.timeout,
            )
            resp.raise_for_status()
            payload = resp.json()
        except requests.RequestException as exc:
            raise BackendError(f"language model request failed: {exc}") from exc
        except ValueError as exc:
            raise BackendError(f"language model returned non-JSON body: {exc}") from exc
        if "output" not in payload:
            raise BackendError("language model response lacks 'output'")
        return str(payload["output"])

    def classify(self, prompt: str) -> EditTask:
        text = PROMPT_TEMPLATE.format(prompt=prompt)
        output = self._request(text)
        try:
            return EditTask.from_json(_extract_json(output), raw_prompt=prompt)
        except (SchemaViolation, json.JSONDecodeError) as first:
            logger.info("reparse retry after malformed model output: %s", first)
        output = self._request(text + _RETRY_SUFFIX)
        try:
            return EditTask.from_json(_extract_json(output), raw_prompt=prompt)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"model output is not JSON after retry: {exc}") from exc


def _extract_json(text: str) -> dict:
    match = re.search(r"\{.*\}", text, flags=re.DOTALL)
    if match is None:
        raise json.JSONDecodeError("no JSON object in output", text, 0)
    return json.loads(match.group(0))


def classify_and_extract(
    prompt: str, backend: str = "fallback", client: LanguageModelClient | None = None
) -> EditTask:
    """Parse a prompt into a validated EditTask via the chosen backend."""
    if not prompt or not prompt.strip():
        raise ValueError("prompt must be nonempty")
    if backend == "fallback":
        task = parse_fallback(prompt)
    elif backend == "client":
        if client is None:
            raise BackendError("nlp backend 'client' needs a configured client")
        task = client.classify(prompt)
    else:
        raise ValueError(f"unknown nlp backend {backend!r}")
    return validate_task(task)
