"""
Immutable solution trajectories and their on-disk layout.

A trajectory directory holds:
    metadata.yaml        run metadata
    times.csv            index,t
    snapshot_NNNN.csv    cell,value for snapshot NNNN
    norms.csv            t,L1,L2,Linf,TV
    scenario.cfg         copy of the scenario text (when known)
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np
import yaml

from errors import TrajectoryMismatchError
from fluxes.families import FluxFamily
from geometry.mesh import ManifoldMesh, ScalarField, lp_norm, total_variation
from solvers.models import RunMetadata

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


@dataclass(frozen=True, eq=False)
class SolutionTrajectory:
    """Snapshots u(t_n) on one mesh, produced by one solver run."""

    mesh: ManifoldMesh
    times: np.ndarray
    snapshots: Tuple[np.ndarray, ...]
    metadata: RunMetadata
    flux: Optional[FluxFamily] = None

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        if times.ndim != 1 or len(times) != len(self.snapshots):
            raise ValueError(f"{len(times)} times for {len(self.snapshots)} snapshots")
        if np.any(np.diff(times) <= 0.0):
            raise ValueError("Snapshot times must be strictly increasing")
        frozen = []
        for snap in self.snapshots:
            arr = np.array(snap, dtype=float)
            if arr.shape != (self.mesh.n_cells,):
                raise ValueError(f"Snapshot shape {arr.shape} does not match mesh with {self.mesh.n_cells} cells")
            arr.setflags(write=False)
            frozen.append(arr)
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "snapshots", tuple(frozen))

    def __len__(self) -> int:
        return len(self.snapshots)

    @property
    def initial(self) -> np.ndarray:
        return self.snapshots[0]

    @property
    def final(self) -> np.ndarray:
        return self.snapshots[-1]

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def epsilon(self) -> float:
        return float(self.metadata.epsilon)

    @property
    def snapshot_spacing(self) -> float:
        """Largest gap between consecutive snapshots (the Delta t of weak-form tolerances)."""
        return float(np.max(np.diff(self.times))) if len(self.times) > 1 else 0.0

    def field(self, index: int) -> ScalarField:
        return ScalarField(self.mesh, self.snapshots[index])

    def norm_series(self) -> np.ndarray:
        """Rows (t, L1, L2, Linf, TV) per snapshot."""
        rows = []
        for t, u in zip(self.times, self.snapshots):
            rows.append([
                t,
                lp_norm(u, 1, self.mesh),
                lp_norm(u, 2, self.mesh),
                lp_norm(u, np.inf, self.mesh),
                total_variation(u, self.mesh),
            ])
        return np.array(rows)


def ensure_comparable(a: SolutionTrajectory, b: SolutionTrajectory) -> None:
    """Raise TrajectoryMismatchError unless a and b share mesh, scheme, flux and times."""
    if a.mesh.key != b.mesh.key:
        raise TrajectoryMismatchError(f"meshes differ: {a.mesh.key} vs {b.mesh.key}")
    if not a.metadata.matches(b.metadata):
        raise TrajectoryMismatchError(
            f"runs differ: {a.metadata.scheme}/{a.metadata.flux_name}/dt={a.metadata.dt} vs "
            f"{b.metadata.scheme}/{b.metadata.flux_name}/dt={b.metadata.dt}"
        )
    if a.times.shape != b.times.shape or not np.array_equal(a.times, b.times):
        raise TrajectoryMismatchError("snapshot times differ")


def distance_series(a: SolutionTrajectory, b: SolutionTrajectory, p: float = 1.0) -> np.ndarray:
    """Rows (t, ||u_a(t) - u_b(t)||_p) for two trajectories on the same mesh and times."""
    if a.mesh.key != b.mesh.key:
        raise TrajectoryMismatchError(f"meshes differ: {a.mesh.key} vs {b.mesh.key}")
    if a.times.shape != b.times.shape or not np.allclose(a.times, b.times, rtol=1e-12, atol=0.0):
        raise TrajectoryMismatchError("snapshot times differ")
    return np.array([
        [t, lp_norm(ua - ub, p, a.mesh)] for t, ua, ub in zip(a.times, a.snapshots, b.snapshots)
    ])


def _save_columns(path: Path, header: str, columns: Sequence[np.ndarray], fmt) -> None:
    np.savetxt(path, np.column_stack(columns), fmt=fmt, delimiter=",", header=header, comments="")


def write_trajectory(trajectory: SolutionTrajectory, directory: Path, scenario_text: Optional[str] = None) -> Path:
    """
    Write a trajectory directory.

    Args:
        trajectory: Trajectory to store
        directory: Target directory (created if needed)
        scenario_text: Scenario file contents copied next to the data

    Returns:
        The directory path
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    cells = np.arange(trajectory.mesh.n_cells)
    for i, snap in enumerate(trajectory.snapshots):
        _save_columns(directory / f"snapshot_{i:04d}.csv", "cell,value", [cells, snap], ["%d", FLOAT_FORMAT])
    _save_columns(directory / "times.csv", "index,t", [np.arange(len(trajectory)), trajectory.times],
                  ["%d", FLOAT_FORMAT])
    np.savetxt(directory / "norms.csv", trajectory.norm_series(), fmt=FLOAT_FORMAT, delimiter=",",
               header="t,L1,L2,Linf,TV", comments="")
    with open(directory / "metadata.yaml", "w") as f:
        yaml.dump(trajectory.metadata.model_dump(mode="json"), f, width=100, sort_keys=False)
    if scenario_text is not None:
        (directory / "scenario.cfg").write_text(scenario_text)
    logger.info(f"Wrote {len(trajectory)} snapshots to {directory}")
    return directory


def read_metadata(directory: Path) -> RunMetadata:
    with open(Path(directory) / "metadata.yaml") as f:
        return RunMetadata(**yaml.safe_load(f))


def read_trajectory(directory: Path, mesh: ManifoldMesh, flux: Optional[FluxFamily] = None) -> SolutionTrajectory:
    """
    Load a trajectory directory written by write_trajectory.

    The mesh (and optionally the flux) must be rebuilt by the caller, usually
    from the scenario.cfg stored alongside.
    """
    directory = Path(directory)
    metadata = read_metadata(directory)
    times = np.loadtxt(directory / "times.csv", delimiter=",", skiprows=1, ndmin=2)[:, 1]
    files = sorted(directory.glob("snapshot_*.csv"))
    if len(files) != len(times):
        raise TrajectoryMismatchError(f"{directory}: {len(files)} snapshot files for {len(times)} times")
    snapshots = [np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)[:, 1] for path in files]
    return SolutionTrajectory(mesh=mesh, times=times, snapshots=tuple(snapshots), metadata=metadata, flux=flux)
