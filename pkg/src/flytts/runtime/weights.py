"""Weight container with explicit storage sharing, plus its binary format.

A *storage* is a named parameter set (a dict of tensors). A *slot* is a
place in the network that needs a parameter set, e.g. ``enc.layer3``. The
alias table maps slots onto storages, so one storage can back many slots;
a slot with no alias entry resolves to the storage of the same name.

File layout (all integers little-endian)::

    magic   b"FLYW"
    version u32
    hlen    u32            length of the JSON header in bytes
    header  JSON           {"meta", "aliases", "entries": [{storage, name, dtype, shape, offset}]}
    payload float32 LE     tensors back to back, in header order
    digest  32 bytes       SHA-256 over everything above
"""

from __future__ import annotations

import hashlib
import json
import struct
import zlib
from types import MappingProxyType
from typing import Dict, Iterable, Mapping, Optional

import numpy as np

from ..errors import MissingWeightError, WeightFormatError
from ..layout import Aliases, Specs

MAGIC = b"FLYW"
VERSION = 1
_DIGEST = 32


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float32, copy=True, order="C")
    arr.setflags(write=False)
    return arr


class WeightStore:
    """Immutable mapping of storages plus a slot alias table."""

    def __init__(self, storages: Mapping[str, Mapping[str, np.ndarray]],
                 aliases: Optional[Mapping[str, str]] = None,
                 meta: Optional[dict] = None):
        self._storages = {
            s: MappingProxyType({n: _frozen(t) for n, t in group.items()})
            for s, group in storages.items()
        }
        self._aliases = dict(aliases or {})
        self.meta = dict(meta or {})

    @property
    def storages(self) -> Mapping[str, Mapping[str, np.ndarray]]:
        return MappingProxyType(self._storages)

    @property
    def aliases(self) -> Mapping[str, str]:
        return MappingProxyType(self._aliases)

    def resolve(self, slot: str) -> str:
        name = self._aliases.get(slot, slot)
        if name not in self._storages:
            if slot in self._aliases:
                raise MissingWeightError(f"slot {slot!r} aliases missing storage {name!r}")
            raise MissingWeightError(f"no storage or alias named {slot!r}")
        return name

    def params(self, slot: str) -> Mapping[str, np.ndarray]:
        return self._storages[self.resolve(slot)]

    def tensor(self, slot: str, name: str) -> np.ndarray:
        group = self.params(slot)
        if name not in group:
            raise MissingWeightError(f"storage {self.resolve(slot)!r} has no tensor {name!r}")
        return group[name]

    def distinct_storages(self, slots: Iterable[str]) -> int:
        return len({self.resolve(s) for s in slots})

    def slots(self, prefix: str = "") -> list:
        return sorted(s for s in self._aliases if s.startswith(prefix))

    def __contains__(self, slot: str) -> bool:
        return self._aliases.get(slot, slot) in self._storages

    def replace(self, storage: str, tensors: Mapping[str, np.ndarray]) -> "WeightStore":
        """Copy of this store with one storage's tensors swapped out."""
        groups = dict(self._storages)
        groups[storage] = tensors
        return WeightStore(groups, self._aliases, self.meta)

    def merge(self, other: "WeightStore") -> "WeightStore":
        groups = dict(self._storages)
        groups.update(other._storages)
        aliases = dict(self._aliases)
        aliases.update(other._aliases)
        return WeightStore(groups, aliases, {**self.meta, **other.meta})

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightStore):
            return NotImplemented
        if self._aliases != other._aliases or self.meta != other.meta:
            return False
        if self._storages.keys() != other._storages.keys():
            return False
        for s, group in self._storages.items():
            og = other._storages[s]
            if group.keys() != og.keys():
                return False
            for n, t in group.items():
                if t.shape != og[n].shape or t.tobytes() != og[n].tobytes():
                    return False
        return True

    __hash__ = None

    def __repr__(self):
        return (f"WeightStore({len(self._storages)} storages, {len(self._aliases)} aliases, "
                f"{count_parameters(self)} params)")


def count_parameters(store: WeightStore, prefix: str = "") -> int:
    """Element count over distinct storages; each storage is counted once."""
    for slot, target in store.aliases.items():
        if target not in store.storages:
            raise MissingWeightError(f"dangling alias {slot!r} -> {target!r}")
    return sum(
        int(t.size)
        for s, group in store.storages.items() if s.startswith(prefix)
        for t in group.values()
    )


def materialize(specs: Specs, aliases: Aliases, seed: int, meta: Optional[dict] = None) -> WeightStore:
    """Fill a layout with deterministic pseudo-random values.

    Every tensor draws from its own PCG64 stream seeded by
    ``(seed, crc32("storage/tensor"))``, so values do not depend on the order
    in which tensors are declared. ``uniform`` tensors use
    ``U(-1/sqrt(fan_in), 1/sqrt(fan_in))``.
    """
    groups: Dict[str, Dict[str, np.ndarray]] = {}
    for storage, tensors in specs.items():
        group = {}
        for name, spec in tensors.items():
            key = zlib.crc32(f"{storage}/{name}".encode())
            rng = np.random.default_rng([seed, key])
            if spec.init == "uniform":
                bound = 1.0 / np.sqrt(spec.fan_in)
                arr = rng.uniform(-bound, bound, spec.shape)
            elif spec.init == "normal":
                arr = rng.standard_normal(spec.shape) * spec.value
            elif spec.init == "ones":
                arr = np.ones(spec.shape)
            elif spec.init == "zeros":
                arr = np.zeros(spec.shape)
            elif spec.init == "const":
                arr = np.full(spec.shape, spec.value)
            else:
                raise ValueError(f"unknown init kind {spec.init!r}")
            group[name] = arr.astype(np.float32)
        groups[storage] = group
    for slot, target in aliases.items():
        if target not in groups:
            raise MissingWeightError(f"layout alias {slot!r} -> unknown storage {target!r}")
    return WeightStore(groups, aliases, meta)


def save_weights(store: WeightStore) -> bytes:
    entries = []
    chunks = []
    offset = 0
    for s in sorted(store.storages):
        group = store.storages[s]
        for name in sorted(group):
            t = group[name]
            raw = t.astype("<f4").tobytes()
            entries.append({"storage": s, "name": name, "dtype": "float32",
                            "shape": list(t.shape), "offset": offset})
            chunks.append(raw)
            offset += len(raw)
    header = json.dumps(
        {"meta": store.meta, "aliases": dict(sorted(store.aliases.items())), "entries": entries},
        sort_keys=True, separators=(",", ":"),
    ).encode()
    body = MAGIC + struct.pack("<II", VERSION, len(header)) + header + b"".join(chunks)
    return body + hashlib.sha256(body).digest()


def load_weights(data: bytes) -> WeightStore:
    if len(data) < 12 + _DIGEST:
        raise WeightFormatError("weight file truncated")
    if data[:4] != MAGIC:
        raise WeightFormatError(f"bad magic {data[:4]!r}")
    version, hlen = struct.unpack("<II", data[4:12])
    if version != VERSION:
        raise WeightFormatError(f"unsupported weight format version {version}")
    body, digest = data[:-_DIGEST], data[-_DIGEST:]
    if hashlib.sha256(body).digest() != digest:
        raise WeightFormatError("checksum mismatch")
    if 12 + hlen > len(body):
        raise WeightFormatError("header runs past end of file")
    try:
        header = json.loads(body[12:12 + hlen])
    except ValueError as exc:
        raise WeightFormatError(f"unreadable header: {exc}") from None
    payload = body[12 + hlen:]
    groups: Dict[str, Dict[str, np.ndarray]] = {}
    end = 0
    for e in header["entries"]:
        if e["dtype"] != "float32":
            raise WeightFormatError(f"unsupported dtype {e['dtype']!r}")
        shape = tuple(e["shape"])
        n = int(np.prod(shape, dtype=np.int64)) * 4
        start = e["offset"]
        if start + n > len(payload):
            raise WeightFormatError(f"tensor {e['storage']}/{e['name']} truncated")
        arr = np.frombuffer(payload, dtype="<f4", count=n // 4, offset=start).reshape(shape)
        groups.setdefault(e["storage"], {})[e["name"]] = arr
        end = max(end, start + n)
    if end != len(payload):
        raise WeightFormatError("trailing bytes in payload")
    store = WeightStore(groups, header["aliases"], header["meta"])
    for slot, target in store.aliases.items():
        if target not in store.storages:
            raise WeightFormatError(f"dangling alias {slot!r} -> {target!r}")
    return store
