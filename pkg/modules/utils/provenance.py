"""
provenance.py - Run provenance for reports

Canonical config echo hashing and the provenance block embedded in every report.

Changes:
- Initial implementation with SHA-256 config hashes
"""

import hashlib
import json

TOOL_NAME = "mtppower"
TOOL_VERSION = "0.1.0"


def canonical_json(data):
    """Serialize with sorted keys and no insignificant whitespace."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def config_hash(echo):
    """
    Hash a config echo.

    Args:
        echo (dict): JSON-serializable config echo

    Returns:
        str: Hex SHA-256 digest of the canonical JSON form
    """
    return hashlib.sha256(canonical_json(echo).encode("utf-8")).hexdigest()


def build_provenance(echo, seed):
    """
    Provenance block for a report.

    Args:
        echo (dict): Config echo (thread counts excluded)
        seed (int): Root seed

    Returns:
        dict: config, config_hash, seed, tool and tool_version
    """
    return {
        "config": echo,
        "config_hash": config_hash(echo),
        "seed": int(seed),
        "tool": TOOL_NAME,
        "tool_version": TOOL_VERSION,
    }
