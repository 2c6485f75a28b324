import json

import numpy as np
import pytest

from coevent.errors import ValidationError
from coevent.systems import (
    SystemSpec,
    build,
    dump_matrices,
    load_system,
    spec_from_dict,
    spec_to_dict,
)

ROOT = __import__("pathlib").Path(__file__).resolve().parents[1]


def test_hopper_amplitudes(hopper2):
    d1 = hopper2.matrices[1].matrix
    assert np.allclose(np.diag(d1).real, [0.5, 0.5, 0, 0])
    assert np.allclose(d1, np.diag(np.diag(d1)))


def test_consistency_of_built_measures(hopper2, hopper3, walker):
    for system in (hopper2, hopper3, walker):
        diag = system.validate()
        assert diag.ok
        assert all(v < 1e-9 for v in diag.violations().values())
    assert walker.validate().classical and not hopper2.validate().classical


def test_mu_agrees_across_stages(hopper2):
    for t in range(1, 4):
        st, fine, coarse = hopper2.seq[t], hopper2.matrices[t], hopper2.matrices[t - 1]
        for h in range(hopper2.seq[t - 1].n):
            assert fine.mu_mask(st.extend_mask(1 << h)) == pytest.approx(coarse.mu_mask(1 << h), abs=1e-12)


def test_walker_probabilities(walker):
    s2 = walker.seq[2]
    assert walker.matrices[2].matrix[s2.index("0→0→1"), s2.index("0→0→1")] == pytest.approx(1 / 12)


def test_rejects_bad_inputs():
    with pytest.raises(ValidationError):
        build(SystemSpec.hopper(2, U=np.array([[1, 1], [0, 1]])), 1)
    with pytest.raises(ValidationError):
        build(SystemSpec.hopper(2, psi0=np.array([1, 1])), 1)
    with pytest.raises(ValidationError):
        build(SystemSpec.walker([0.5, 0.5, 0.5]), 1)
    with pytest.raises(ValueError):
        SystemSpec.hopper(3)


def test_custom_amplitudes_reproduce_hopper(hopper2):
    entries = []
    for st, d in zip(hopper2.seq, hopper2.matrices):
        paths = [lab.split("→") for lab in st.labels]
        amps = np.zeros(st.n, dtype=complex)
        for i, p in enumerate(paths):
            a = 1.0 if p[0] == "0" else 0.0
            for x, y in zip(p, p[1:]):
                a *= hopper2.spec.U[int(y), int(x)]
            amps[i] = a
        entry = {"labels": list(st.labels), "amplitudes": amps, "classes": [p[-1] for p in paths]}
        if st.parents is not None:
            entry["parents"] = list(st.parents)
        entries.append(entry)
    custom = build(SystemSpec("custom", stages=entries), 3)
    for a, b in zip(custom.matrices, hopper2.matrices):
        assert np.array_equal(a.matrix, b.matrix)


def test_perturbed_custom_matrix_is_rejected(hopper2):
    data = dump_matrices(hopper2.truncate(2))
    data["stages"][2]["matrix"][0][0][0] += 1e-3
    with pytest.raises(ValidationError, match="consistency"):
        build(spec_from_dict(data), 2)


def test_json_round_trip(tmp_path, hopper3):
    text = json.dumps(spec_to_dict(hopper3.spec))
    spec = spec_from_dict(json.loads(text))
    assert np.array_equal(spec.U, hopper3.spec.U)
    dumped = dump_matrices(hopper3)
    path = tmp_path / "dump.json"
    path.write_text(json.dumps(dumped))
    again = build(load_system(path), 1)
    for a, b in zip(again.matrices, hopper3.matrices):
        assert np.array_equal(a.matrix, b.matrix)


def test_shipped_presets():
    for name, T in (("hopper2.json", 2), ("walker.json", 2), ("hopper3_dft.json", 1)):
        system = build(load_system(ROOT / "systems" / name), T)
        assert system.validate().ok


def test_copied_stage_labels(hopper2):
    copied = hopper2.truncate(1).with_copied_stage(1)
    assert copied.seq[2].labels == ("0→0'", "0→1'", "1→0'", "1→1'")
    assert copied.validate().ok
