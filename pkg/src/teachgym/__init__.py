"""teachgym: a workbench for measuring and improving teaching in
learning-from-demonstration, with benchmark tasks, a task-parameterized
mixture learner, teaching metrics, simulated teachers, a session engine,
rendering, a CLI, and an HTTP session service."""

__version__ = "0.1.0"

from .geometry import Box3, Rect
from .metrics import (DemoClassification, EfficacyReport, MetricsConfig, MetricsReport,
                      RealizationRecord, classify_demo, efficacy, efficiency,
                      generalisation_set, similarity, undemonstrated_states)
from .session import (Condition, LearnerConfig, SessionLog, TeachingSession,
                      replay, run_session)
from .tasks import (MazeTask, MembershipResult, PickPlaceTask, TestSet, Trajectory,
                    admissible, build_test_set, check_maze_membership,
                    check_pickplace_membership, compute_grab_thresholds,
                    default_maze, default_pickplace)
from .teachers import (BeliefState, Demonstration, TeacherConfig, TeacherPolicy,
                       interpret, scripted_maze_path, scripted_pick_path)
from .tpgmm import (Frame, FrameInstance, GaussianComponent, TpGmmModel,
                    fit, fuse, gmr, realize)
