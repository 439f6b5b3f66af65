"""Story export: a versioned JSON record and a self-contained HTML page.

Both renderings are deterministic byte-for-byte for a given story (the
JSON's generated_at is caller-supplied precisely so repeated runs can be
identical). Events carry 1-based contiguous positions and stay in
chronological order.
"""

from __future__ import annotations

import html
import json
from datetime import datetime, timezone

from .model import Collection, EnvironmentTag, Memento
from .stories import Story, bucket_of

EXPORT_SCHEMA_VERSION = 1

#: Published schema for the JSON export (JSON Schema draft 2020-12).
STORY_EXPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "memstory story export",
    "type": "object",
    "required": [
        "schema_version", "story_type", "collection_id", "policy",
        "generated_at", "achieved_k", "complete", "events", "notes",
    ],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": EXPORT_SCHEMA_VERSION},
        "story_type": {"enum": ["fpft", "spst", "fpst", "spft"]},
        "collection_id": {"type": "string"},
        "policy": {
            "type": "object",
            "required": ["k", "bucket_granularity_seconds", "spft_window_seconds", "tie_break"],
            "additionalProperties": False,
            "properties": {
                "k": {"type": "integer", "minimum": 1},
                "bucket_granularity_seconds": {"type": "integer", "minimum": 1},
                "spft_window_seconds": {"type": "integer", "minimum": 1},
                "tie_break": {"type": "string"},
            },
        },
        "generated_at": {"type": "string", "pattern": r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z$"},
        "anchor": {"type": ["string", "null"]},
        "subject_uri_r": {"type": ["string", "null"]},
        "achieved_k": {"type": "integer", "minimum": 0},
        "complete": {"type": "boolean"},
        "notes": {"type": "string"},
        "events": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["position", "uri_m", "uri_r", "memento_datetime", "bucket"],
                "additionalProperties": False,
                "properties": {
                    "position": {"type": "integer", "minimum": 1},
                    "uri_m": {"type": "string"},
                    "uri_r": {"type": "string"},
                    "memento_datetime": {"type": "string"},
                    "bucket": {"type": "integer"},
                    "environment": {
                        "type": "object",
                        "required": ["device_class", "geo_region", "user_agent_label"],
                        "additionalProperties": False,
                        "properties": {
                            "device_class": {"enum": ["desktop", "mobile", "other"]},
                            "geo_region": {"type": ["string", "null"]},
                            "user_agent_label": {"type": ["string", "null"]},
                        },
                    },
                    "distance_to_anchor": {"type": "integer", "minimum": 0},
                },
            },
        },
    },
}


def _iso(instant: datetime) -> str:
    return instant.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _environment_dict(tag: EnvironmentTag) -> dict:
    return {
        "device_class": tag.device_class.value,
        "geo_region": tag.geo_region,
        "user_agent_label": tag.user_agent_label,
    }


def _event_dict(story: Story, position: int, memento: Memento) -> dict:
    event = {
        "position": position,
        "uri_m": memento.uri_m,
        "uri_r": memento.uri_r.uri,
        "memento_datetime": _iso(memento.memento_datetime),
        "bucket": bucket_of(memento.memento_datetime, story.policy.bucket_granularity),
    }
    if memento.environment is not None:
        event["environment"] = _environment_dict(memento.environment)
    if story.anchor is not None:
        event["distance_to_anchor"] = abs(int((memento.memento_datetime - story.anchor).total_seconds()))
    return event


def story_export_dict(story: Story, generated_at: datetime) -> dict:
    return {
        "schema_version": EXPORT_SCHEMA_VERSION,
        "story_type": story.story_type.value,
        "collection_id": story.collection_id,
        "policy": {
            "k": story.policy.k,
            "bucket_granularity_seconds": int(story.policy.bucket_granularity.total_seconds()),
            "spft_window_seconds": int(story.policy.spft_window.total_seconds()),
            "tie_break": story.policy.tie_break,
        },
        "generated_at": _iso(generated_at),
        "anchor": _iso(story.anchor) if story.anchor is not None else None,
        "subject_uri_r": story.subject.uri if story.subject is not None else None,
        "achieved_k": story.achieved_k,
        "complete": story.complete,
        "notes": "",
        "events": [_event_dict(story, i, m) for i, m in enumerate(story.events, start=1)],
    }


def export_json(story: Story, generated_at: datetime) -> bytes:
    payload = story_export_dict(story, generated_at)
    return (json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


_PAGE_STYLE = """
body { font-family: sans-serif; margin: 2rem auto; max-width: 46rem; color: #222; }
h1 { font-size: 1.4rem; }
p.summary { color: #555; }
ol.events { list-style: none; padding: 0; }
ol.events li { border: 1px solid #ccc; border-radius: 6px; padding: 0.8rem 1rem; margin: 0.6rem 0; }
.position { font-weight: bold; margin-right: 0.6rem; }
.when { font-family: monospace; }
.page { display: block; color: #555; margin-top: 0.2rem; }
.env { display: block; color: #777; font-size: 0.85rem; margin-top: 0.2rem; }
""".strip()

_STORY_TITLES = {
    "spst": "Collection overview over time",
    "fpst": "One page through time",
    "spft": "Different pages at one time",
    "fpft": "One page, one time, different environments",
}


def export_html(story: Story, collection: Collection) -> bytes:
    """Self-contained static page: one card per event, chronological.

    Shows identifiers and datetimes only; no external resources, no
    scripts, deterministic bytes.
    """
    esc = html.escape
    title = f"{story.story_type.value.upper()} story · {collection.name}"
    cards = []
    for position, m in enumerate(story.events, start=1):
        env = ""
        if m.environment is not None:
            parts = [m.environment.device_class.value]
            if m.environment.geo_region:
                parts.append(m.environment.geo_region)
            if m.environment.user_agent_label:
                parts.append(m.environment.user_agent_label)
            env = f'<span class="env">{esc(" / ".join(parts))}</span>'
        cards.append(
            "<li>"
            f'<span class="position">{position}</span>'
            f'<time class="when">{esc(_iso(m.memento_datetime))}</time>'
            f'<span class="page">{esc(m.uri_r.uri)}</span>'
            f'<a href="{esc(m.uri_m, quote=True)}">{esc(m.uri_m)}</a>'
            f"{env}"
            "</li>"
        )
    summary_bits = [
        f"{_STORY_TITLES[story.story_type.value]}",
        f"{story.achieved_k} event(s)",
        "complete" if story.complete else "incomplete",
    ]
    if story.subject is not None:
        summary_bits.append(f"page {story.subject.uri}")
    if story.anchor is not None:
        summary_bits.append(f"anchored {_iso(story.anchor)}")
    document = (
        "<!DOCTYPE html>\n"
        '<html lang="en">\n<head>\n<meta charset="utf-8">\n'
        f"<title>{esc(title)}</title>\n"
        f"<style>\n{_PAGE_STYLE}\n</style>\n"
        "</head>\n<body>\n"
        f"<h1>{esc(title)}</h1>\n"
        f'<p class="summary">{esc(" · ".join(summary_bits))}</p>\n'
        '<ol class="events">\n' + "\n".join(cards) + "\n</ol>\n"
        "</body>\n</html>\n"
    )
    return document.encode("utf-8")
