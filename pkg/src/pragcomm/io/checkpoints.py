"""Versioned binary checkpoints.

Layout (all little-endian): magic, format version, config fingerprint,
split cursor, serialized generator state, then named sections each holding
ordered (name, rows, cols, float64 data) parameter blocks. Round-trips are
bit-exact; a version or fingerprint mismatch is rejected before any state
is touched.
"""

import json
import struct

import numpy as np

from ..errors import DataError

MAGIC = b"PRGC"
VERSION = 1


def _write_str(fh, s):
    raw = s.encode("utf-8")
    fh.write(struct.pack("<I", len(raw)))
    fh.write(raw)


def _read_str(fh):
    (n,) = struct.unpack("<I", _read_exact(fh, 4))
    return _read_exact(fh, n).decode("utf-8")


def _read_exact(fh, n):
    raw = fh.read(n)
    if len(raw) != n:
        raise DataError("truncated checkpoint")
    return raw


def save_checkpoint(path, fingerprint, split_index, rng_state, sections):
    """sections: list of (section_name, list of (param_name, 2-D float64 array))."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        _write_str(fh, fingerprint)
        fh.write(struct.pack("<I", split_index))
        _write_str(fh, json.dumps(rng_state, sort_keys=True))
        fh.write(struct.pack("<I", len(sections)))
        for name, params in sections:
            _write_str(fh, name)
            fh.write(struct.pack("<I", len(params)))
            for pname, values in params:
                arr = np.ascontiguousarray(values, dtype="<f8")
                if arr.ndim != 2:
                    raise DataError(f"parameter {pname!r} is not a matrix")
                _write_str(fh, pname)
                fh.write(struct.pack("<II", arr.shape[0], arr.shape[1]))
                fh.write(arr.tobytes())


def load_checkpoint(path):
    try:
        fh = open(path, "rb")
    except OSError as exc:
        raise DataError(f"cannot read checkpoint {path}: {exc}") from exc
    with fh:
        if _read_exact(fh, 4) != MAGIC:
            raise DataError(f"{path}: not a checkpoint file")
        (version,) = struct.unpack("<I", _read_exact(fh, 4))
        if version != VERSION:
            raise DataError(f"{path}: unsupported checkpoint version {version}")
        fingerprint = _read_str(fh)
        (split_index,) = struct.unpack("<I", _read_exact(fh, 4))
        rng_state = json.loads(_read_str(fh))
        (n_sections,) = struct.unpack("<I", _read_exact(fh, 4))
        sections = {}
        order = []
        for _ in range(n_sections):
            name = _read_str(fh)
            (n_params,) = struct.unpack("<I", _read_exact(fh, 4))
            params = []
            for _ in range(n_params):
                pname = _read_str(fh)
                rows, cols = struct.unpack("<II", _read_exact(fh, 8))
                data = np.frombuffer(_read_exact(fh, rows * cols * 8),
                                     dtype="<f8").reshape(rows, cols).copy()
                params.append((pname, data))
            sections[name] = params
            order.append(name)
    return {
        "fingerprint": fingerprint,
        "split_index": split_index,
        "rng_state": rng_state,
        "sections": sections,
        "section_order": order,
    }


def _store_params(store):
    return [(name, values) for name, _shape, values in store.items()]


def pair_sections(pair):
    """Serializable view of a neural pair, target net and momentum included."""
    teacher, student = pair.teacher, pair.student
    return [
        ("teacher", _store_params(teacher.store)),
        ("teacher_target", sorted(teacher.target_params.items())),
        ("teacher_velocity", sorted(teacher.store.velocity_snapshot().items())),
        ("student", _store_params(student.store)),
        ("student_velocity", sorted(student.store.velocity_snapshot().items())),
    ]


def save_pair(path, fingerprint, split_index, pair, rng):
    state = rng.bit_generator.state if rng is not None else {}
    save_checkpoint(path, fingerprint, split_index, state, pair_sections(pair))


def restore_pair(path, fingerprint, pair):
    """Load a checkpoint into an already-built pair; returns (split_index, rng).

    The caller's fingerprint must match the one the checkpoint was written
    with, so a resumed run can never silently change configuration.
    """
    snap = load_checkpoint(path)
    if fingerprint is not None and snap["fingerprint"] != fingerprint:
        raise DataError(
            "checkpoint was written under a different configuration "
            f"(fingerprint {snap['fingerprint'][:12]}.. != {fingerprint[:12]}..)")
    sections = snap["sections"]
    required = {"teacher", "teacher_target", "student"}
    missing = required - set(sections)
    if missing:
        raise DataError(f"checkpoint missing sections: {sorted(missing)}")
    pair.teacher.store.load(dict(sections["teacher"]))
    pair.teacher.target_params = {n: v.copy() for n, v in sections["teacher_target"]}
    pair.student.store.load(dict(sections["student"]))
    if "teacher_velocity" in sections:
        pair.teacher.store.load_velocity(dict(sections["teacher_velocity"]))
    if "student_velocity" in sections:
        pair.student.store.load_velocity(dict(sections["student_velocity"]))
    rng = None
    if snap["rng_state"]:
        rng = np.random.default_rng()
        rng.bit_generator.state = snap["rng_state"]
    return snap["split_index"], rng
