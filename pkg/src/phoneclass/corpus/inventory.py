"""Phone inventory: 31 French phones plus silence, with archi-phone merges.

The inventory is shipped as data (``data/french_inventory.json``) rather
than hard-coded. Class indices are contiguous: phones take indices 0..30
in file order, silence is always the last class (index 31).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from phoneclass.errors import InventoryError, MappingError, ParseError

N_PHONES = 31
N_CLASSES = 32


def default_inventory_path() -> Path:
    return Path(resources.files("phoneclass.corpus") / "data" / "french_inventory.json")


@dataclass(frozen=True)
class PhoneInventory:
    """Validated phone label set.

    ``archi_map`` maps every accepted raw symbol (inventory symbols plus
    merge-group members) to its inventory symbol.
    """

    phones: tuple[str, ...]
    silence_symbol: str
    archi_map: dict[str, str] = field(repr=False)

    @property
    def n_classes(self) -> int:
        return len(self.phones) + 1

    @property
    def class_symbols(self) -> tuple[str, ...]:
        """All class symbols in index order, silence last."""
        return self.phones + (self.silence_symbol,)

    @property
    def silence_label(self) -> int:
        return len(self.phones)

    def lookup(self, raw_symbol: str) -> str:
        """Resolve a raw symbol to its inventory symbol (archi merge applied)."""
        try:
            return self.archi_map[raw_symbol]
        except KeyError:
            raise MappingError(f"unknown phone symbol: {raw_symbol!r}") from None

    def index_of(self, raw_symbol: str) -> int:
        """Class index of a raw symbol after archi merging."""
        merged = self.lookup(raw_symbol)
        if merged == self.silence_symbol:
            return self.silence_label
        return self.phones.index(merged)

    def symbol_of(self, label: int) -> str:
        if not 0 <= label < self.n_classes:
            raise MappingError(f"label {label} outside [0, {self.n_classes - 1}]")
        return self.class_symbols[label]

    def sha256(self) -> str:
        """Stable digest of the inventory contents, used to stamp checkpoints."""
        payload = json.dumps(
            {
                "phones": list(self.phones),
                "silence": self.silence_symbol,
                "archi_map": dict(sorted(self.archi_map.items())),
            },
            ensure_ascii=False,
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def load_inventory(path: str | Path | None = None) -> PhoneInventory:
    """Load and validate a phone inventory file.

    The file is JSON with keys ``phones`` (exactly 31 symbols), ``silence``
    and ``merges`` (raw symbol -> inventory symbol).

    Raises:
        ParseError: malformed JSON (message names the line).
        InventoryError: wrong phone count, duplicates, or bad merge rules.
    """
    path = Path(path) if path is not None else default_inventory_path()
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read inventory file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed inventory file {path}, line {exc.lineno}: {exc.msg}") from exc

    if not isinstance(data, dict) or not {"phones", "silence", "merges"} <= set(data):
        raise ParseError(f"inventory file {path} must define phones, silence and merges")

    phones = [str(p) for p in data["phones"]]
    silence = str(data["silence"])
    merges = {str(k): str(v) for k, v in data["merges"].items()}

    if len(phones) != N_PHONES:
        raise InventoryError(f"expected {N_PHONES} phones, found {len(phones)} in {path}")
    if len(set(phones)) != len(phones):
        dupes = sorted({p for p in phones if phones.count(p) > 1})
        raise InventoryError(f"duplicate phone symbols: {dupes}")
    if silence in phones:
        raise InventoryError(f"silence symbol {silence!r} duplicates a phone")

    archi_map = {p: p for p in phones}
    archi_map[silence] = silence
    for raw, target in merges.items():
        if target not in phones:
            raise InventoryError(f"merge target {target!r} is not an inventory phone")
        if raw in archi_map:
            raise InventoryError(f"merge source {raw!r} collides with an existing symbol")
        archi_map[raw] = target

    return PhoneInventory(phones=tuple(phones), silence_symbol=silence, archi_map=archi_map)
