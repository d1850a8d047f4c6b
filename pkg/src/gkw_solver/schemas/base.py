# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.


import hashlib
import json

from pydantic import BaseModel, ConfigDict


class GKWBaseModel(BaseModel):
    """
    Base model for every configuration and report object.
    Provides canonical hashing so identical runs can be compared byte for byte.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    def canonical_json(self) -> str:
        """
        Serializes the model with sorted keys and no insignificant whitespace.
        """
        data = self.model_dump(mode="json")
        return json.dumps(data, sort_keys=True, ensure_ascii=False, separators=(",", ":"))

    def canonical_hash(self) -> str:
        """
        Computes a SHA-256 hash of the canonically serialized model.
        1. Converts to a JSON-compatible dict (floats, tuples, enums).
        2. Sorts keys alphabetically.
        3. Removes non-semantic whitespace.
        4. Returns the SHA-256 hex digest.
        """
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()
