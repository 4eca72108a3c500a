"""JSON file formats: groups, cocycles, representations, state snapshots, Majorana models.

Complex matrices are nested lists with each entry written as ``[re, im]``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .cohomology import ZnCocycle2
from .errors import GroupMismatch
from .groups import FiniteGroup, from_matrix_generators, from_table
from .projective import UnitaryRep
from .spinchain import ChainLayout, PureState

PathLike = Union[str, Path]


def encode_matrix(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(data) -> np.ndarray:
    a = np.asarray(data, dtype=float)
    if a.ndim != 3 or a.shape[2] != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("complex matrix must be a square array of [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


@dataclass(frozen=True)
class GroupSpec:
    """A loaded group file: the group, and a representation when the file has one.

    ``rep`` comes from ``"matrices"`` (one matrix per element, possibly
    projective) or from ``"generators"`` (the linear representation of the
    matrix group they generate).
    """

    name: str
    group: FiniteGroup
    rep: Optional[UnitaryRep] = None


def builtin_group_path(name: str) -> Path:
    """Path of a bundled group file, e.g. ``"z2z2"``."""
    ref = resources.files("sptunwind") / "data" / "groups" / f"{name}.json"
    return Path(str(ref))


def _resolve(path: PathLike) -> Path:
    p = Path(path)
    if p.exists():
        return p
    stem = p.name[:-5] if p.name.endswith(".json") else p.name
    builtin = builtin_group_path(stem)
    if builtin.exists():
        return builtin
    raise FileNotFoundError(f"no group file {path}")


def parse_group(data: dict) -> GroupSpec:
    name = str(data.get("name", ""))
    if "table" in data:
        table = np.asarray(data["table"], dtype=np.int64)
        if "order" in data and int(data["order"]) != len(table):
            raise ValueError(f"order {data['order']} does not match table size {len(table)}")
        group = from_table(table, label=name)
        rep = None
        if "matrices" in data:
            rep = UnitaryRep(group, np.array([decode_matrix(m) for m in data["matrices"]]))
        return GroupSpec(name, group, rep)
    if "generators" in data:
        gens = [decode_matrix(m) for m in data["generators"]]
        group, rep = from_matrix_generators(gens, label=name)
        if "order" in data and int(data["order"]) != group.order:
            raise ValueError(f"generators produce order {group.order}, file says {data['order']}")
        return GroupSpec(name, group, rep)
    raise ValueError("group file needs a 'table' or 'generators' entry")


def load_group(path: PathLike) -> GroupSpec:
    """Read a group file; bare names such as ``z2z2.json`` fall back to the bundled files."""
    with open(_resolve(path)) as fh:
        return parse_group(json.load(fh))


def group_to_dict(group: FiniteGroup, name: str = "", rep: Optional[UnitaryRep] = None) -> dict:
    out = {"name": name or group.label, "order": group.order, "table": group.table.tolist()}
    if rep is not None:
        out["matrices"] = [encode_matrix(m) for m in rep.matrices]
    return out


def save_group(path: PathLike, group: FiniteGroup, name: str = "",
               rep: Optional[UnitaryRep] = None):
    Path(path).write_text(json.dumps(group_to_dict(group, name, rep)) + "\n")


def cocycle_to_dict(c: ZnCocycle2, group_name: str) -> dict:
    return {"group": group_name, "modulus": c.modulus, "values": c.values.tolist()}


def parse_cocycle(data: dict, group: FiniteGroup, group_name: Optional[str] = None) -> ZnCocycle2:
    if group_name is not None and data.get("group") not in (None, group_name):
        raise GroupMismatch(f"cocycle belongs to {data.get('group')!r}, not {group_name!r}")
    return ZnCocycle2(group, int(data["modulus"]), np.asarray(data["values"], dtype=np.int64))


def save_cocycle(path: PathLike, c: ZnCocycle2, group_name: str):
    Path(path).write_text(json.dumps(cocycle_to_dict(c, group_name)) + "\n")


def load_cocycle(path: PathLike, group: FiniteGroup, group_name: Optional[str] = None) -> ZnCocycle2:
    with open(path) as fh:
        return parse_cocycle(json.load(fh), group, group_name)


def dump_state(path: PathLike, psi: PureState) -> tuple:
    """Write ``<stem>.json`` (layout and array metadata) next to ``<stem>.npy`` (amplitudes)."""
    p = Path(path)
    meta, arr = p.with_suffix(".json"), p.with_suffix(".npy")
    np.save(arr, psi.amplitudes)
    meta.write_text(json.dumps({
        "layout": psi.layout.describe(),
        "amplitudes": {"file": arr.name, "dtype": "complex128", "length": int(psi.amplitudes.size)},
    }, indent=2) + "\n")
    return meta, arr


def load_state(path: PathLike) -> PureState:
    meta_path = Path(path).with_suffix(".json")
    meta = json.loads(meta_path.read_text())
    lay = meta["layout"]
    layout = ChainLayout(lay["sites"], tuple((s, l, d) for s, l, d in lay["slots"]), lay["boundary"])
    amps = np.load(meta_path.parent / meta["amplitudes"]["file"])
    return PureState(layout, amps)


def dump_model(path: PathLike, H) -> Path:
    p = Path(path)
    p.write_text(json.dumps(H.to_dict(), indent=2) + "\n")
    return p
