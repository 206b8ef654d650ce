"""Discrete-event model of fault-aware communicator creation in MPI sessions."""

from .core import (
    SELF,
    WORLD,
    CommStatus,
    Communicator,
    Group,
    PsetRegistry,
    group,
    group_includes,
    group_intersects,
    is_superset_member,
    pset_resolve,
)
from .errors import (
    DoubleInit,
    EmptyAliveGroup,
    InvalidScenario,
    NotQuiescent,
    ParseError,
    Revoked,
    SessionClosed,
    UnknownPset,
)
from .horizon import HorizonSet, horizon_covering, horizon_evict, horizon_insert, horizon_oracle_minimal
from .lda import LivenessVerdict, discover_alive
from .report import emit_report
from .scenario import ScenarioPlan, gen_dt_like, gen_ep_like, parse_scenario, run_scenario
from .session import FtMode, Mpi, Session
from .simulator import RunReport, Simulator, Verdict, detect_deadlock

__version__ = "0.1.0"
