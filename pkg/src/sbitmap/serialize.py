"""JSON envelope round-trips for every sketch kind."""

from __future__ import annotations

import json

from sbitmap.baselines import LinearCounter, LogRegisterSketch
from sbitmap.errors import InvalidInput
from sbitmap.sketch import SBitmap

_LOADERS = {
    "sbitmap": SBitmap.from_envelope,
    "linear": LinearCounter.from_envelope,
    "loglog": LogRegisterSketch.from_envelope,
    "hyperloglog": LogRegisterSketch.from_envelope,
}


def dumps(sketch) -> str:
    """Serialize any sketch to its self-describing JSON envelope."""
    return json.dumps(sketch.to_envelope())


def loads(text: str):
    """Rebuild a sketch from dumps() output, revalidating its invariants."""
    try:
        env = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"not a sketch envelope: {exc}") from exc
    if not isinstance(env, dict):
        raise InvalidInput("envelope must be a JSON object")
    loader = _LOADERS.get(env.get("kind"))
    if loader is None:
        raise InvalidInput(f"unknown sketch kind {env.get('kind')!r}")
    try:
        return loader(env)
    except InvalidInput:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        # Missing fields, unparseable numbers, bad base64 and the like
        # all mean the same thing to the caller: not a valid envelope.
        raise InvalidInput(f"malformed {env['kind']} envelope: {exc}") from exc
