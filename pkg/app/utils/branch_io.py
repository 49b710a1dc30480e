"""Branch and profile files.

A branch file is CSV text framed by `#` lines:

    # schema_version=1
    # label=C1+
    # r=0.5
    # s=1.5
    # termination=left_domain
    # modes=128
    # k=1                      (k=none for branches not seeded at a bifurcation)
    # sigma=1.0
    # ddot_omega=-0.35355339059327373
    # phi_coeff=-0.7071067811865475
    eps,arclength,l2,jac_min_sv,zero_count,det_sign,a_1,...,a_M
    ...
    # end points=N

Floats are written with repr so reading back is bit-exact.
"""
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union
import logging

import numpy as np

from ..exceptions import BranchSchemaError, BranchVersionError
from ..models.bifurcation import BifurcationPoint
from ..models.branch import Branch, BranchPoint, Termination
from ..models.field import SpectralField
from . import spectral

logger = logging.getLogger(__name__)

BRANCH_SCHEMA_VERSION = 1
FIXED_COLUMNS = ["eps", "arclength", "l2", "jac_min_sv", "zero_count", "det_sign"]

PathLike = Union[str, Path]


def _fmt(value: float) -> str:
    return repr(float(value))


def _header(branch: Branch) -> List[str]:
    seed = branch.seed
    fields = {
        "schema_version": str(BRANCH_SCHEMA_VERSION),
        "label": branch.label,
        "r": _fmt(branch.r),
        "s": _fmt(branch.s),
        "termination": branch.termination.value,
        "modes": str(branch.modes),
        "k": str(seed.k) if seed else "none",
        "sigma": _fmt(seed.sigma) if seed else "none",
        "ddot_omega": _fmt(seed.ddot_omega) if seed else "none",
        "phi_coeff": _fmt(seed.phi.coeffs[2 * seed.k - 1]) if seed else "none",
    }
    return [f"# {key}={value}" for key, value in fields.items()]


def write_branch(branch: Branch, path: PathLike) -> Path:
    """Write one branch; the parent directory is created if needed"""
    path = Path(path)
    if len(branch) == 0:
        raise ValueError("cannot write an empty branch")
    modes = branch.modes
    lines = _header(branch)
    lines.append(",".join(FIXED_COLUMNS + [f"a_{k}" for k in range(1, modes + 1)]))
    for pt in branch.points:
        row = [_fmt(pt.eps), _fmt(pt.arclength), _fmt(pt.l2), _fmt(pt.jac_min_sv),
               str(int(pt.zero_count)), str(int(pt.det_sign))]
        row.extend(_fmt(a) for a in pt.u.coeffs)
        lines.append(",".join(row))
    lines.append(f"# end points={len(branch)}")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n")
    except OSError as e:
        logger.error(f"Failed to write branch {branch.label} to {path}: {e}")
        raise
    logger.info(f"Wrote branch {branch.label} ({len(branch)} points) to {path}")
    return path


def _parse_header(lines: List[str], path: Path) -> Dict[str, str]:
    header = {}
    for line in lines:
        body = line[1:].strip()
        if "=" not in body:
            raise BranchSchemaError(f"{path}: malformed header line {line!r}")
        key, value = body.split("=", 1)
        header[key.strip()] = value.strip()
    if "schema_version" not in header:
        raise BranchSchemaError(f"{path}: missing schema_version")
    try:
        version = int(header["schema_version"])
    except ValueError:
        raise BranchSchemaError(f"{path}: schema_version is not an integer")
    if version != BRANCH_SCHEMA_VERSION:
        raise BranchVersionError(
            f"{path}: schema_version {version} is not supported (expected {BRANCH_SCHEMA_VERSION})"
        )
    missing = {"label", "r", "s", "termination", "modes", "k", "sigma", "ddot_omega", "phi_coeff"} - header.keys()
    if missing:
        raise BranchSchemaError(f"{path}: missing header fields {sorted(missing)}")
    return header


def _seed(header: Dict[str, str], r: float, s: float, modes: int) -> Optional[BifurcationPoint]:
    if header["k"] == "none":
        return None
    k = int(header["k"])
    return BifurcationPoint(
        k=k,
        r=r,
        s=s,
        sigma=float(header["sigma"]),
        eigenfunction=SpectralField.mode(k, modes),
        ddot_omega=float(header["ddot_omega"]),
        phi=SpectralField.mode(2 * k, modes, float(header["phi_coeff"])),
    )


def read_branch(path: PathLike) -> Branch:
    """Read a branch file written by write_branch.

    OSError is left to the caller; malformed or truncated content raises
    BranchSchemaError and an unknown version BranchVersionError.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise BranchSchemaError(f"{path}: not a text branch file ({e.reason})")
    lines = [line for line in text.splitlines() if line.strip()]

    split = next((i for i, line in enumerate(lines) if not line.startswith("#")), None)
    if split is None:
        raise BranchSchemaError(f"{path}: no column header")
    header = _parse_header(lines[:split], path)

    footer = lines[-1]
    if not footer.startswith("# end points="):
        raise BranchSchemaError(f"{path}: missing end marker (truncated file?)")
    rows = lines[split + 1 : -1]

    try:
        expected = int(footer.split("=", 1)[1])
        modes = int(header["modes"])
        r, s = float(header["r"]), float(header["s"])
        termination = Termination(header["termination"])
        seed = _seed(header, r, s, modes)
    except ValueError as e:
        raise BranchSchemaError(f"{path}: invalid header value: {e}")

    columns = lines[split].split(",")
    if columns[: len(FIXED_COLUMNS)] != FIXED_COLUMNS or len(columns) != len(FIXED_COLUMNS) + modes:
        raise BranchSchemaError(f"{path}: column header does not match modes={modes}")
    if len(rows) != expected:
        raise BranchSchemaError(f"{path}: expected {expected} points, found {len(rows)}")

    points = []
    for number, row in enumerate(rows, start=1):
        cells = row.split(",")
        if len(cells) != len(columns):
            raise BranchSchemaError(f"{path}: row {number} has {len(cells)} cells, expected {len(columns)}")
        try:
            points.append(BranchPoint(
                eps=float(cells[0]),
                arclength=float(cells[1]),
                l2=float(cells[2]),
                jac_min_sv=float(cells[3]),
                zero_count=int(cells[4]),
                det_sign=int(cells[5]),
                u=SpectralField([float(c) for c in cells[len(FIXED_COLUMNS):]]),
            ))
        except ValueError as e:
            raise BranchSchemaError(f"{path}: row {number}: {e}")

    try:
        return Branch(points=tuple(points), r=r, s=s, termination=termination, seed=seed, label=header["label"])
    except ValueError as e:
        raise BranchSchemaError(f"{path}: {e}")


def profile_indices(count: int, available: int) -> List[int]:
    """Up to `count` evenly spaced point indices, first and last included"""
    if available == 0:
        return []
    return sorted({int(round(i)) for i in np.linspace(0, available - 1, min(count, available))})


def write_profiles(branch: Branch, path: PathLike, count: int = 8, points_per_mode: int = 4) -> Path:
    """Sample selected branch profiles on [−π, π], endpoint included"""
    path = Path(path)
    indices = profile_indices(count, len(branch))
    n_points = points_per_mode * branch.modes
    x = np.append(spectral.physical_grid(n_points), np.pi)
    columns = [x]
    for i in indices:
        samples = spectral.to_physical(branch.points[i].u, n_points)
        columns.append(np.append(samples, samples[0]))
    header = "x," + ",".join(f"eps={_fmt(branch.points[i].eps)}" for i in indices)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savetxt(path, np.column_stack(columns), delimiter=",", header=header, comments="", fmt="%.17g")
    except OSError as e:
        logger.error(f"Failed to write profiles for {branch.label} to {path}: {e}")
        raise
    return path


def write_table(path: PathLike, header: Sequence[str], rows: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, np.atleast_2d(rows), delimiter=",", header=",".join(header), comments="", fmt="%.17g")
    return path
