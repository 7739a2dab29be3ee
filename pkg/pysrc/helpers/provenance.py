import hashlib
import json
from typing import Any, Dict, Optional

HASH_LENGTH_SHORT = 12


def _hash_id(value: str) -> str:
    return hashlib.sha256(value.encode("utf-8")).hexdigest()


def canonical_json(data: Dict[str, Any]) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def config_hash(config: Dict[str, Any]) -> str:
    """SHA-256 of the canonical JSON form; key order does not matter."""
    return _hash_id(canonical_json(config))


def short_hash(digest: Optional[str], length: int = HASH_LENGTH_SHORT) -> str:
    if not digest:
        return "-"
    return digest[:length]
