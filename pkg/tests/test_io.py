import json

import numpy as np
import pytest

from sptunwind.circuits import build_extension_plan
from sptunwind.cohomology import compute_h2
from sptunwind.errors import GroupMismatch
from sptunwind.fermion import build_model
from sptunwind.groups import dihedral_group, is_isomorphic_small
from sptunwind.io import (
    decode_matrix,
    dump_model,
    dump_state,
    encode_matrix,
    load_cocycle,
    load_group,
    load_state,
    parse_group,
    save_cocycle,
    save_group,
)
from sptunwind.projective import UnitaryRep


@pytest.mark.parametrize("name,order", [("z2", 2), ("z4", 4), ("z2z2", 4), ("d8", 8), ("z3z3", 9),
                                        ("pauli", 4), ("clock_shift3", 9)])
def test_bundled_groups_load(name, order):
    spec = load_group(f"{name}.json")
    assert spec.group.order == order


def test_matrix_roundtrip():
    m = np.array([[1, 1j], [-1j, 2]])
    assert np.array_equal(decode_matrix(encode_matrix(m)), m)
    with pytest.raises(ValueError):
        decode_matrix([[1, 2], [3, 4]])


def test_group_file_roundtrip(tmp_path):
    spec = load_group("pauli")
    path = tmp_path / "g.json"
    save_group(path, spec.group, "P", spec.rep)
    back = load_group(path)
    assert np.array_equal(back.group.table, spec.group.table)
    assert np.allclose(back.rep.matrices, spec.rep.matrices)


def test_generator_file_closes_to_dihedral():
    spec = load_group("pauli_generators")
    assert is_isomorphic_small(spec.group, dihedral_group(8))


def test_order_mismatch_and_missing_entries():
    with pytest.raises(ValueError):
        parse_group({"order": 3, "table": [[0, 1], [1, 0]]})
    with pytest.raises(ValueError):
        parse_group({"name": "x"})
    with pytest.raises(FileNotFoundError):
        load_group("no_such_group.json")


def test_cocycle_roundtrip_and_group_check(tmp_path):
    g = load_group("z2z2").group
    c = compute_h2(g).representatives[0]
    path = tmp_path / "c.json"
    save_cocycle(path, c, "Z2xZ2")
    assert load_cocycle(path, g, "Z2xZ2") == c
    with pytest.raises(GroupMismatch):
        load_cocycle(path, g, "D8")


def test_state_snapshot_roundtrip(tmp_path):
    psi = build_extension_plan("cluster").input_state
    meta, arr = dump_state(tmp_path / "psi", psi)
    data = json.loads(meta.read_text())
    assert data["amplitudes"]["file"] == arr.name
    back = load_state(meta)
    assert back.layout == psi.layout and np.array_equal(back.amplitudes, psi.amplitudes)


def test_model_dump(tmp_path):
    H = build_model("CII", 4, extended=True)
    data = json.loads(dump_model(tmp_path / "m.json", H).read_text())
    A = np.zeros_like(H.A)
    for m, n, v in data["A"]:
        A[m, n], A[n, m] = v, -v
    assert np.array_equal(A, H.A)
    assert data["layout"]["layers"] == 2


def test_projective_rep_needs_identity_first():
    with pytest.raises(ValueError):
        UnitaryRep(load_group("z2").group, [np.diag([1, -1]), np.eye(2)])
