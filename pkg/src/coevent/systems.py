"""Example systems and user-defined finite amplitude systems.

Every builder returns a :class:`System`: a validated stage sequence and one
decoherence matrix per stage. Paths are listed in lexicographic order, so
for a uniform branching factor ``b`` the parent of history ``i`` is ``i // b``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .errors import ValidationError
from .measure import DEFAULT_MAX_ENUM, DEFAULT_TOL, DecoherenceMatrix, MeasureDiagnostics, validate_measure
from .stages import Stage, StageSequence

ARROW = "→"

HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)

# walker[i][j]: probability of stepping from site i to site j
WALKER_STEPS = np.array([[0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5]])


def dft_matrix(n: int) -> np.ndarray:
    k = np.arange(n)
    return np.exp(2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


@dataclass
class SystemSpec:
    kind: str
    n: int | None = None
    U: np.ndarray | None = None
    psi0: np.ndarray | None = None
    p0: np.ndarray | None = None
    stages: list[dict] = field(default_factory=list)
    tolerance: float = DEFAULT_TOL

    @classmethod
    def hopper(cls, n: int = 2, U=None, psi0=None, preset: str = "hadamard") -> "SystemSpec":
        if U is None:
            if preset == "hadamard":
                if n != 2:
                    raise ValueError("the Hadamard preset is a 2-site hopper")
                U = HADAMARD
            elif preset == "dft":
                U = dft_matrix(n)
            else:
                raise ValueError(f"unknown hopper preset {preset!r}")
        if psi0 is None:
            psi0 = np.eye(n)[0]
        return cls("hopper", n=n, U=np.asarray(U, dtype=np.complex128), psi0=np.asarray(psi0, dtype=np.complex128))

    @classmethod
    def walker(cls, p0=None) -> "SystemSpec":
        p = np.full(3, 1 / 3) if p0 is None else np.asarray(p0, dtype=float)
        return cls("walker", p0=p)


@dataclass
class System:
    seq: StageSequence
    matrices: list[DecoherenceMatrix]
    spec: SystemSpec | None = None

    @property
    def T(self) -> int:
        return self.seq.final

    def stage(self, t: int) -> Stage:
        return self.seq[t]

    def truncate(self, T: int) -> "System":
        return System(self.seq.truncated(T), self.matrices[: T + 1], self.spec)

    def validate(self) -> MeasureDiagnostics:
        return validate_measure(list(self.seq), self.matrices, self.matrices[0].tol)

    def with_copied_stage(self, after: int) -> "System":
        """Insert a duplicate of stage ``after`` right behind it, one child per history."""
        stages = list(self.seq)
        mats = list(self.matrices)
        src = stages[after]
        out_stages = stages[: after + 1]
        out_mats = mats[: after + 1]
        out_stages.append(Stage(after + 1, [f"{lab}'" for lab in src.labels], list(range(src.n))))
        m = mats[after]
        out_mats.append(DecoherenceMatrix(after + 1, m.matrix, m.tol, m.max_enum))
        for s, d in zip(stages[after + 1 :], mats[after + 1 :]):
            out_stages.append(Stage(s.t + 1, s.labels, s.parents))
            out_mats.append(DecoherenceMatrix(d.t + 1, d.matrix, d.tol, d.max_enum))
        return System(StageSequence(out_stages), out_mats, self.spec)


def _path_label(path: Sequence[int]) -> str:
    return ARROW.join(str(x) for x in path)


def _path_stages(sites: int, T: int) -> tuple[list[Stage], list[list[tuple[int, ...]]]]:
    stages, paths = [], []
    for t in range(T + 1):
        ps = list(itertools.product(range(sites), repeat=t + 1))
        parents = None if t == 0 else [i // sites for i in range(len(ps))]
        stages.append(Stage(t, [_path_label(p) for p in ps], parents))
        paths.append(ps)
    return stages, paths


def _check(system: System, tol: float) -> System:
    diag = validate_measure(list(system.seq), system.matrices, tol)
    if not diag.ok:
        failed = "; ".join(f"stage {t} {check} (violation {value:.3g})" for t, check, value in diag.failures())
        raise ValidationError(f"measure validation failed: {failed}", diag)
    return system


def build_hopper(spec: SystemSpec, T: int, tol: float = DEFAULT_TOL, max_enum: int = DEFAULT_MAX_ENUM) -> System:
    """n-site hopper: a[path] = psi[start] * prod U[next, current]."""
    U = np.asarray(spec.U, dtype=np.complex128)
    psi = np.asarray(spec.psi0, dtype=np.complex128)
    n = U.shape[0]
    if U.shape != (n, n):
        raise ValidationError("U must be square")
    unit = float(np.max(np.abs(U.conj().T @ U - np.eye(n))))
    if unit > 1e-9:
        raise ValidationError(f"U is not unitary (violation {unit:.3g})")
    if psi.shape != (n,) or abs(np.vdot(psi, psi).real - 1) > 1e-9:
        raise ValidationError("psi0 must be a normalised vector with one entry per site")
    stages, paths = _path_stages(n, T)
    mats = []
    for t, ps in enumerate(paths):
        amps = np.array([psi[p[0]] * np.prod([U[b, a] for a, b in zip(p, p[1:])]) for p in ps])
        ends = [p[-1] for p in ps]
        mats.append(DecoherenceMatrix(t, _amplitude_matrix(amps, ends), tol, max_enum))
    return _check(System(StageSequence(stages), mats, spec), tol)


def _amplitude_matrix(amps: np.ndarray, classes: Sequence) -> np.ndarray:
    same = np.equal.outer(np.asarray(classes), np.asarray(classes))
    return np.outer(amps, amps.conj()) * same


def build_walker(spec: SystemSpec, T: int, tol: float = DEFAULT_TOL, max_enum: int = DEFAULT_MAX_ENUM) -> System:
    """Three-site walker; forbidden paths are kept with probability zero."""
    p0 = np.asarray(spec.p0 if spec.p0 is not None else np.full(3, 1 / 3), dtype=float)
    if p0.shape != (3,) or np.any(p0 < 0) or abs(p0.sum() - 1) > 1e-9:
        raise ValidationError("walker p0 must be three non-negative probabilities summing to 1")
    stages, paths = _path_stages(3, T)
    mats = []
    for t, ps in enumerate(paths):
        probs = [p0[p[0]] * np.prod([WALKER_STEPS[a, b] for a, b in zip(p, p[1:])]) for p in ps]
        mats.append(DecoherenceMatrix(t, np.diag(probs).astype(np.complex128), tol, max_enum))
    return _check(System(StageSequence(stages), mats, spec), tol)


def build_custom(spec: SystemSpec, T: int | None = None, tol: float = DEFAULT_TOL, max_enum: int = DEFAULT_MAX_ENUM) -> System:
    """Per-stage labels and parents with either amplitudes and classes or a matrix."""
    entries = spec.stages if T is None else spec.stages[: T + 1]
    if not entries:
        raise ValidationError("custom system has no stages")
    stages, mats = [], []
    for t, entry in enumerate(entries):
        labels = entry["labels"]
        stages.append(Stage(t, labels, entry.get("parents") if t > 0 else None))
        if "matrix" in entry:
            m = np.asarray(entry["matrix"], dtype=np.complex128)
        elif "amplitudes" in entry:
            amps = np.asarray(entry["amplitudes"], dtype=np.complex128)
            classes = entry.get("classes", list(range(len(labels))))
            m = _amplitude_matrix(amps, classes)
        else:
            raise ValidationError(f"custom stage {t} needs 'matrix' or 'amplitudes'")
        if m.shape != (len(labels), len(labels)):
            raise ValidationError(f"custom stage {t} matrix has shape {m.shape} for {len(labels)} histories")
        mats.append(DecoherenceMatrix(t, m, tol, max_enum))
    return _check(System(StageSequence(stages), mats, spec), tol)


def build(spec: SystemSpec, T: int, tol: float | None = None, max_enum: int = DEFAULT_MAX_ENUM) -> System:
    tol = spec.tolerance if tol is None else tol
    if spec.kind == "hopper":
        return build_hopper(spec, T, tol, max_enum)
    if spec.kind == "walker":
        return build_walker(spec, T, tol, max_enum)
    if spec.kind == "custom":
        if T > len(spec.stages) - 1:
            raise ValidationError(f"custom system defines {len(spec.stages)} stages, {T + 1} requested")
        return build_custom(spec, T, tol, max_enum)
    raise ValidationError(f"unknown system kind {spec.kind!r}")


# ---- JSON ------------------------------------------------------------------


def _scalar(x: Any) -> complex:
    if isinstance(x, (int, float)):
        return complex(x)
    re, im = x
    return complex(re, im)


def _cvec(x: Any) -> list[complex]:
    """A vector of [re, im] pairs; bare reals are accepted as real entries."""
    return [_scalar(v) for v in x]


def _cmat(x: Any) -> list[list[complex]]:
    return [_cvec(row) for row in x]


def _pairs(x: Any) -> Any:
    arr = np.asarray(x, dtype=np.complex128)
    if arr.ndim == 0:
        return [float(arr.real), float(arr.imag)]
    return [_pairs(v) for v in arr]


def spec_from_dict(data: dict) -> SystemSpec:
    kind = data.get("kind")
    tol = float(data.get("tolerance", DEFAULT_TOL))
    if kind == "hopper":
        n = int(data.get("n", 2))
        U = np.array(_cmat(data["U"])) if "U" in data else None
        psi = np.array(_cvec(data["psi0"])) if "psi0" in data else None
        spec = SystemSpec.hopper(n, U, psi, data.get("preset", "hadamard"))
    elif kind == "walker":
        spec = SystemSpec.walker(data.get("p0"))
    elif kind == "custom":
        stages = []
        for entry in data["stages"]:
            e = dict(entry)
            if "matrix" in e:
                e["matrix"] = _cmat(e["matrix"])
            if "amplitudes" in e:
                e["amplitudes"] = _cvec(e["amplitudes"])
            stages.append(e)
        spec = SystemSpec("custom", stages=stages)
    else:
        raise ValidationError(f"unknown system kind {kind!r}")
    spec.tolerance = tol
    return spec


def spec_to_dict(spec: SystemSpec) -> dict:
    if spec.kind == "hopper":
        out = {"kind": "hopper", "n": int(spec.U.shape[0]), "U": _pairs(spec.U), "psi0": _pairs(spec.psi0)}
    elif spec.kind == "walker":
        out = {"kind": "walker", "p0": [float(x) for x in spec.p0]}
    else:
        stages = []
        for e in spec.stages:
            d = {k: v for k, v in e.items() if k not in ("matrix", "amplitudes")}
            if "matrix" in e:
                d["matrix"] = _pairs(e["matrix"])
            if "amplitudes" in e:
                d["amplitudes"] = _pairs(e["amplitudes"])
            stages.append(d)
        out = {"kind": "custom", "stages": stages}
    if spec.tolerance != DEFAULT_TOL:
        out["tolerance"] = spec.tolerance
    return out


def load_system(path: str | Path) -> SystemSpec:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return spec_from_dict(data)


def dump_matrices(system: System) -> dict:
    """A custom spec carrying the built stages and explicit matrices."""
    stages = []
    for st, d in zip(system.seq, system.matrices):
        entry: dict = {"labels": list(st.labels)}
        if st.parents is not None:
            entry["parents"] = list(st.parents)
        entry["matrix"] = _pairs(d.matrix)
        stages.append(entry)
    return {"kind": "custom", "tolerance": system.matrices[0].tol, "stages": stages}
