"""On-disk interchange formats (format_version 1).

Every dataset is a pair of files: a UTF-8 JSON manifest at the given path and
a raw binary payload referenced by the manifest (same stem, ``.bin``).
Complex numbers are little-endian IEEE-754 double pairs (re, im), row-major;
outcomes are one byte per bit. Declared payload extents must match the
payload byte length exactly, or loading fails as corrupt.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import (
    ComputationalBasisSetting,
    LocalUnitarySetting,
    MeasurementData,
    MeasurementGroup,
    ShallowCircuitSetting,
)
from .errors import CorruptFile
from .shallow import DenseChannel, InverseChannel

FORMAT_VERSION = 1

_COMPLEX = np.dtype("<c16")
_BYTE = np.dtype("<u1")
_FLOAT = np.dtype("<f8")


def _payload_path(manifest_path: Path) -> Path:
    if manifest_path.suffix == ".json":
        return manifest_path.with_suffix(".bin")
    return manifest_path.with_name(manifest_path.name + ".bin")


def _write(manifest_path, manifest: dict, payload: bytes) -> None:
    manifest_path = Path(manifest_path)
    payload_path = _payload_path(manifest_path)
    manifest = dict(manifest)
    manifest["format_version"] = FORMAT_VERSION
    manifest["endianness"] = "little"
    manifest["payload"] = payload_path.name
    payload_path.write_bytes(payload)
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _read(manifest_path, expected_kind: str):
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise CorruptFile(f"{manifest_path}: manifest is not valid JSON") from exc
    if not isinstance(manifest, dict):
        raise CorruptFile(f"{manifest_path}: manifest must be a JSON object")
    if manifest.get("format_version") != FORMAT_VERSION:
        raise CorruptFile(
            f"{manifest_path}: unsupported format_version {manifest.get('format_version')}"
        )
    if manifest.get("kind") != expected_kind:
        raise CorruptFile(
            f"{manifest_path}: expected kind {expected_kind!r}, found {manifest.get('kind')!r}"
        )
    if manifest.get("endianness") != "little":
        raise CorruptFile(f"{manifest_path}: unsupported endianness tag")
    payload_path = manifest_path.parent / manifest.get("payload", "")
    if not payload_path.is_file():
        raise CorruptFile(f"{manifest_path}: payload {payload_path.name} is missing")
    payload = payload_path.read_bytes()
    offsets = manifest.get("payload_offsets", {})
    declared = 0
    for name, extent in offsets.items():
        off, nbytes = int(extent["offset"]), int(extent["nbytes"])
        if off < 0 or nbytes < 0 or off + nbytes > len(payload):
            raise CorruptFile(f"{manifest_path}: extent {name!r} exceeds payload")
        declared += nbytes
    if declared != len(payload):
        raise CorruptFile(
            f"{manifest_path}: payload has {len(payload)} bytes, manifest declares {declared}"
        )
    return manifest, payload


def _slice(payload: bytes, offsets: dict, name: str, dtype) -> np.ndarray:
    extent = offsets[name]
    off, nbytes = int(extent["offset"]), int(extent["nbytes"])
    return np.frombuffer(payload[off : off + nbytes], dtype=dtype)


# ---------------------------------------------------------------------------
# settings and groups


def _settings_block(settings):
    """Manifest fields and payload bytes describing a homogeneous settings list."""
    kinds = {type(s) for s in settings}
    n = settings[0].n_qubits
    if any(s.n_qubits != n for s in settings):
        raise ValueError("settings must share one qubit count")
    fields = {"n_qubits": int(n), "n_settings": len(settings)}
    if kinds == {LocalUnitarySetting}:
        fields["setting_kind"] = "local"
        payload = np.stack([s.unitaries for s in settings]).astype(_COMPLEX).tobytes()
    elif kinds == {ComputationalBasisSetting}:
        fields["setting_kind"] = "computational"
        payload = b""
    elif kinds == {ShallowCircuitSetting}:
        depth = settings[0].depth
        layout = [list(sites) for sites, _ in settings[0].gates]
        for s in settings:
            if s.depth != depth or [list(g) for g, _ in s.gates] != layout:
                raise ValueError("shallow settings must share one gate layout")
        fields["setting_kind"] = "shallow"
        fields["depth"] = int(depth)
        fields["gate_sites"] = layout
        flat = [
            np.concatenate([m.ravel() for _, m in s.gates])
            if s.gates
            else np.zeros(0, dtype=complex)
            for s in settings
        ]
        payload = np.stack(flat).astype(_COMPLEX).tobytes() if layout else b""
    else:
        raise ValueError("settings must be homogeneous in kind")
    return fields, payload


def _settings_from_block(manifest: dict, raw: np.ndarray):
    n = int(manifest["n_qubits"])
    count = int(manifest["n_settings"])
    kind = manifest.get("setting_kind")
    try:
        if kind == "local":
            mats = raw.astype(complex).reshape(count, n, 2, 2)
            return [LocalUnitarySetting(m) for m in mats]
        if kind == "computational":
            return [ComputationalBasisSetting(n) for _ in range(count)]
        if kind == "shallow":
            depth = int(manifest["depth"])
            layout = [tuple(int(x) for x in sites) for sites in manifest["gate_sites"]]
            per_setting = sum(4 ** len(sites) for sites in layout)
            mats = raw.astype(complex).reshape(count, per_setting) if per_setting else None
            settings = []
            for i in range(count):
                gates, cursor = [], 0
                for sites in layout:
                    dim = 2 ** len(sites)
                    block = mats[i, cursor : cursor + dim * dim].reshape(dim, dim)
                    cursor += dim * dim
                    gates.append((sites, block))
                settings.append(
                    ShallowCircuitSetting(n_qubits=n, depth=depth, gates=tuple(gates))
                )
            return settings
    except (ValueError, KeyError, TypeError) as exc:
        raise CorruptFile(f"settings payload failed validation: {exc}") from exc
    raise CorruptFile(f"unknown setting_kind {kind!r}")


def save_settings(path, settings) -> None:
    settings = list(settings)
    if not settings:
        raise ValueError("cannot save an empty settings list")
    fields, payload = _settings_block(settings)
    manifest = {
        "kind": "settings",
        "n_shots": 0,
        "payload_offsets": {},
        **fields,
    }
    if payload:
        manifest["payload_offsets"] = {
            "unitaries" if fields["setting_kind"] == "local" else "gates": {
                "offset": 0,
                "nbytes": len(payload),
            }
        }
    _write(path, manifest, payload)


def load_settings(path) -> list:
    manifest, payload = _read(path, "settings")
    offsets = manifest.get("payload_offsets", {})
    name = "unitaries" if manifest.get("setting_kind") == "local" else "gates"
    raw = (
        _slice(payload, offsets, name, _COMPLEX)
        if name in offsets
        else np.zeros(0, dtype=complex)
    )
    return _settings_from_block(manifest, raw)


def save_group(path, group: MeasurementGroup) -> None:
    settings = [d.setting for d in group]
    fields, settings_payload = _settings_block(settings)
    n_shots = group.n_shots  # raises for ragged groups, which this format rejects
    outcomes = np.stack([d.outcomes for d in group]).astype(_BYTE).tobytes()
    offsets = {}
    if settings_payload:
        name = "unitaries" if fields["setting_kind"] == "local" else "gates"
        offsets[name] = {"offset": 0, "nbytes": len(settings_payload)}
    offsets["outcomes"] = {"offset": len(settings_payload), "nbytes": len(outcomes)}
    manifest = {
        "kind": "group",
        "n_shots": int(n_shots),
        "payload_offsets": offsets,
        **fields,
    }
    _write(path, manifest, settings_payload + outcomes)


def load_group(path) -> MeasurementGroup:
    manifest, payload = _read(path, "group")
    offsets = manifest.get("payload_offsets", {})
    name = "unitaries" if manifest.get("setting_kind") == "local" else "gates"
    raw = (
        _slice(payload, offsets, name, _COMPLEX)
        if name in offsets
        else np.zeros(0, dtype=complex)
    )
    settings = _settings_from_block(manifest, raw)
    n = int(manifest["n_qubits"])
    count = int(manifest["n_settings"])
    n_shots = int(manifest["n_shots"])
    bits = _slice(payload, offsets, "outcomes", _BYTE)
    try:
        bits = bits.reshape(count, n_shots, n)
        entries = tuple(
            MeasurementData(setting, bits[i]) for i, setting in enumerate(settings)
        )
        return MeasurementGroup(entries)
    except ValueError as exc:
        raise CorruptFile(f"group payload failed validation: {exc}") from exc


# ---------------------------------------------------------------------------
# channels and results


def save_channel(path, channel) -> None:
    if isinstance(channel, DenseChannel):
        role = "forward"
        extra = {}
    elif isinstance(channel, InverseChannel):
        role = "inverse"
        extra = {
            "condition_number": float(channel.condition_number),
            "residual": float(channel.residual),
        }
    else:
        raise TypeError("expected a DenseChannel or InverseChannel")
    payload = channel.superoperator.astype(_COMPLEX).tobytes()
    manifest = {
        "kind": "channel",
        "role": role,
        "n_qubits": int(channel.n_qubits),
        "depth": int(channel.depth),
        "payload_offsets": {"superoperator": {"offset": 0, "nbytes": len(payload)}},
        **extra,
    }
    _write(path, manifest, payload)


def load_channel(path):
    manifest, payload = _read(path, "channel")
    n = int(manifest["n_qubits"])
    depth = int(manifest["depth"])
    d2 = 4**n
    raw = _slice(payload, manifest["payload_offsets"], "superoperator", _COMPLEX)
    try:
        superop = raw.astype(complex).reshape(d2, d2)
        if manifest.get("role") == "inverse":
            return InverseChannel(
                n,
                depth,
                superop,
                float(manifest["condition_number"]),
                float(manifest["residual"]),
            )
        return DenseChannel(n, depth, superop)
    except (ValueError, KeyError) as exc:
        raise CorruptFile(f"channel payload failed validation: {exc}") from exc


def save_results(path, rows) -> None:
    """Rows are dicts with name, value, optional two_sigma, and n_u/n_m/n_b counts."""
    rows = list(rows)
    table = np.full((len(rows), 2), np.nan, dtype=_FLOAT)
    meta = []
    for i, row in enumerate(rows):
        table[i, 0] = float(row["value"])
        if row.get("two_sigma") is not None:
            table[i, 1] = float(row["two_sigma"])
        meta.append(
            {
                "name": str(row["name"]),
                "n_u": int(row.get("n_u", 0)),
                "n_m": int(row.get("n_m", 0)),
                "n_b": int(row.get("n_b", 0)),
            }
        )
    payload = table.tobytes()
    manifest = {
        "kind": "results",
        "columns": ["value", "two_sigma"],
        "rows": meta,
        "payload_offsets": {"table": {"offset": 0, "nbytes": len(payload)}},
    }
    _write(path, manifest, payload)


def load_results(path) -> list:
    manifest, payload = _read(path, "results")
    meta = manifest.get("rows", [])
    raw = _slice(payload, manifest["payload_offsets"], "table", _FLOAT)
    try:
        table = raw.reshape(len(meta), 2)
    except ValueError as exc:
        raise CorruptFile(f"results payload failed validation: {exc}") from exc
    out = []
    for row, (value, two_sigma) in zip(meta, table):
        out.append(
            {
                "name": row["name"],
                "value": float(value),
                "two_sigma": None if np.isnan(two_sigma) else float(two_sigma),
                "n_u": int(row.get("n_u", 0)),
                "n_m": int(row.get("n_m", 0)),
                "n_b": int(row.get("n_b", 0)),
            }
        )
    return out
