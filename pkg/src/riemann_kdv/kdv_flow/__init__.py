"""KdV evolution: real pseudo-spectral runs and complex short-time Taylor flows."""
from .detect import Detection, detect_algebro_geometric
from .integrate import ShiffmanIntegration, integrate_shiffman
from .poles import (PoleLocation, PoleTrack, cauchy_riemann_residual, cross_times, locate_pole,
                    track_pole)
from .real import (RealTrajectory, SolitonRun, evolve_real, invariants3, peak_position, soliton,
                   soliton_run, spectral_tail)
from .schrodinger import PoleBehaviour, SchrodingerSolution, pole_behaviour, schrodinger_solve, winding
from .sources import RiemannSource, elliptic_potential, local_solutions
from .spectral import DEFAULT_DPS, ContourField
from .taylor import (TaylorResult, g_time_derivatives, taylor_flow, taylor_flow_g, taylor_flow_recursive,
                     time_derivatives, y_flow_rhs)

__all__ = [
    "Detection", "detect_algebro_geometric", "ShiffmanIntegration", "integrate_shiffman",
    "PoleLocation", "PoleTrack", "cauchy_riemann_residual", "cross_times", "locate_pole", "track_pole",
    "RealTrajectory", "SolitonRun", "evolve_real", "invariants3", "peak_position", "soliton",
    "soliton_run", "spectral_tail", "PoleBehaviour", "SchrodingerSolution", "pole_behaviour",
    "schrodinger_solve", "winding", "RiemannSource", "elliptic_potential", "local_solutions",
    "DEFAULT_DPS", "ContourField", "TaylorResult", "g_time_derivatives", "taylor_flow",
    "taylor_flow_g", "taylor_flow_recursive", "time_derivatives", "y_flow_rhs",
]
