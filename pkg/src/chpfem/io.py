"""Run configuration (flat key=value files) and output writers (CSV, legacy VTK)."""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import ParameterError


@dataclass
class RunConfig:
    # domain
    domain: str = "rect"          # segment | rect | mesh
    length: float = 1.0           # segment length or rectangle side in x
    height: float = 1.0           # rectangle side in y
    mesh_file: str = ""
    nx: int = 12                  # elements along x (segment: element count)
    ny: int = 12
    degree: int = 1
    # model
    model: str = "taylor"         # logarithmic | scaled_quartic | taylor
    taylor_n: int = 2
    T: float = 1.0
    Tc: float = 2.0
    # solver
    eps2: float = 0.07
    tau: float = 1e-2
    t_end: float = 1.0
    newton_tol: float = 0.0       # 0 -> 1e-10 sqrt(n_dofs)
    newton_max: int = 25
    krylov_tol: float = 1e-12
    krylov_method: str = "bicgstab"
    preconditioner: str = "lu"
    steady_tol: float = 1e-8
    mass_lumping: bool = False
    # initial condition
    initial: str = "random"       # random | mode | cross | tanh | file
    amplitude: float = 0.05
    seed: int = 1
    modes: str = "1"              # mode coefficients, e.g. "1,1"
    initial_file: str = ""
    # output
    out: str = "out"
    snapshot_every: int = 0       # 0 -> initial and final only
    # eigen / sweep / convergence / critical
    count: int = 3
    offsets: str = "0.02,0.05,0.1,0.2,0.3"
    degrees: str = "1,2,3,4,5"
    complexities: str = "240,360,480,600"
    eps: float = 0.03
    n_min: int = 2
    n_max: int = 8

    def validate(self) -> "RunConfig":
        if self.domain not in ("segment", "rect", "mesh"):
            raise ParameterError(f"domain must be segment, rect or mesh, not {self.domain!r}")
        if self.domain == "mesh" and not self.mesh_file:
            raise ParameterError("domain=mesh needs mesh_file")
        if self.model not in ("logarithmic", "scaled_quartic", "taylor"):
            raise ParameterError(f"unknown model {self.model!r}")
        if self.model == "taylor" and self.taylor_n < 2:
            raise ParameterError("taylor models need taylor_n >= 2")
        if not 1 <= self.degree <= 10:
            raise ParameterError("degree must lie in 1..10")
        if self.nx < 1 or self.ny < 1:
            raise ParameterError("element counts must be positive")
        if self.length <= 0 or self.height <= 0:
            raise ParameterError("domain sides must be positive")
        if self.eps2 <= 0 or self.tau <= 0:
            raise ParameterError("eps2 and tau must be positive")
        if self.t_end < 0:
            raise ParameterError("t_end must be non-negative")
        if self.initial not in ("random", "mode", "cross", "tanh", "file"):
            raise ParameterError(f"unknown initial condition {self.initial!r}")
        if self.initial == "file" and not self.initial_file:
            raise ParameterError("initial=file needs initial_file")
        if self.model == "logarithmic" and self.initial in ("random", "mode") and self.amplitude >= 1:
            raise ParameterError("the logarithmic model needs |u0| < 1 (amplitude < 1)")
        return self


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _coerce(name: str, kind, text: str):
    text = text.strip()
    try:
        if kind is bool or kind == "bool":
            low = text.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(text)
        if kind is int or kind == "int":
            return int(text)
        if kind is float or kind == "float":
            return float(text)
        return text
    except ValueError:
        raise ParameterError(f"{name}: cannot read {text!r} as {getattr(kind, '__name__', kind)}") from None


def _field_types():
    return {f.name: f.type for f in fields(RunConfig)}


def apply_overrides(cfg: RunConfig, pairs) -> RunConfig:
    """Apply ``key=value`` strings (or (key, value) tuples) to ``cfg`` in place."""
    types = _field_types()
    for item in pairs:
        if isinstance(item, str):
            if "=" not in item:
                raise ParameterError(f"expected key=value, got {item!r}")
            key, value = item.split("=", 1)
        else:
            key, value = item
        key = key.strip()
        if key not in types:
            raise ParameterError(f"unknown configuration key {key!r}")
        setattr(cfg, key, _coerce(key, types[key], str(value)))
    return cfg


def read_config(path) -> RunConfig:
    """Parse a key=value file; ``#`` starts a comment, blank lines are ignored."""
    cfg = RunConfig()
    pairs = []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParameterError(f"cannot read config {path}: {exc.strerror}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        pairs.append((key.strip(), value.strip()))
    try:
        return apply_overrides(cfg, pairs)
    except ParameterError as exc:
        raise ParameterError(f"{path}: {exc}") from None


def dump_config(cfg: RunConfig) -> str:
    lines = []
    for f in fields(RunConfig):
        v = getattr(cfg, f.name)
        if isinstance(v, bool):
            v = "true" if v else "false"
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


def parse_list(text: str, kind=float) -> list:
    items = [t for t in (s.strip() for s in text.split(",")) if t]
    try:
        return [kind(t) for t in items]
    except ValueError:
        raise ParameterError(f"cannot parse list {text!r}") from None


# -- writers ------------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows) -> None:
    """Write rows with full float precision, so reruns produce identical bytes."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            if isinstance(row, dict):
                row = [row[h] for h in header]
            w.writerow([_fmt(v) for v in row])


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _structured_shape(ops):
    """(nxp, nyp) grid dimensions when the DoFs of ``ops`` form a tensor grid, else None."""
    xy = ops.dofs.dof_coords
    if xy.shape[1] == 1:
        return None
    xs = np.unique(np.round(xy[:, 0], 12))
    ys = np.unique(np.round(xy[:, 1], 12))
    if len(xs) * len(ys) != len(xy):
        return None
    return len(xs), len(ys)


def write_snapshot(path_stem, ops, u, w=None, t: float = 0.0) -> str:
    """Write a field snapshot and return the file name.

    Axis-aligned rectangles give a legacy-VTK ASCII STRUCTURED_GRID (``.vtk``);
    anything else a point-cloud CSV with columns x, y, u, w.
    """
    u = np.asarray(u, dtype=float)
    w = np.zeros_like(u) if w is None else np.asarray(w, dtype=float)
    xy = ops.dofs.dof_coords
    shape = _structured_shape(ops)
    if shape is None:
        path = f"{path_stem}.csv"
        y = xy[:, 1] if xy.shape[1] > 1 else np.zeros(len(u))
        order = np.lexsort((y, xy[:, 0]))
        write_csv(path, ["x", "y", "u", "w"],
                  [(xy[i, 0], y[i], u[i], w[i]) for i in order])
        return path
    nxp, nyp = shape
    order = np.lexsort((np.round(xy[:, 0], 12), np.round(xy[:, 1], 12)))  # x fastest
    path = f"{path_stem}.vtk"
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(f"Cahn-Hilliard field t={float(t)!r}\nASCII\nDATASET STRUCTURED_GRID\n")
        fh.write(f"DIMENSIONS {nxp} {nyp} 1\nPOINTS {nxp * nyp} double\n")
        for i in order:
            fh.write(f"{float(xy[i, 0])!r} {float(xy[i, 1])!r} 0.0\n")
        fh.write(f"POINT_DATA {nxp * nyp}\n")
        for name, arr in (("u", u), ("w", w)):
            fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            for i in order:
                fh.write(f"{float(arr[i])!r}\n")
    return path


def read_vtk_scalars(path) -> dict[str, np.ndarray]:
    """Point scalars of a file written by :func:`write_snapshot` (round-trip helper)."""
    out, lines = {}, Path(path).read_text(encoding="utf-8").splitlines()
    n = None
    i = 0
    while i < len(lines):
        parts = lines[i].split()
        if parts and parts[0] == "POINT_DATA":
            n = int(parts[1])
        if parts and parts[0] == "SCALARS":
            out[parts[1]] = np.array([float(v) for v in lines[i + 2:i + 2 + n]])
            i += 2 + n
            continue
        i += 1
    return out


def read_field_csv(path) -> np.ndarray:
    """Column ``u`` of a point-cloud CSV, in file order."""
    return np.array([float(r["u"]) for r in read_csv(path)])
