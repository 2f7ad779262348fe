"""Exception types shared across the engine."""


class GatehubError(Exception):
    """Base class for all engine errors."""


class CycleError(GatehubError):
    """Topological ordering requested for a cyclic graph."""


class UnboundNode(GatehubError):
    """A graph node has no binding."""

    def __init__(self, node_id: str):
        super().__init__(f"node '{node_id}' has no binding")
        self.node_id = node_id


class UnknownPlaceholder(GatehubError):
    """A template references a parameter that no axis or constant declares."""

    def __init__(self, name: str, where: str = ""):
        detail = f" in {where}" if where else ""
        super().__init__(f"placeholder '${{{name}}}' is not a declared axis or constant{detail}")
        self.name = name


class EmptyAxis(GatehubError):
    """A sweep axis has no values."""

    def __init__(self, axis: str):
        super().__init__(f"sweep axis '{axis}' is empty")
        self.axis = axis


class MissingArtifact(GatehubError):
    """Expected output file does not exist."""


class NonPositiveScale(GatehubError):
    """Estimate requested at a scale <= 0."""


class NoObservations(GatehubError):
    """Calibration called with no data points."""


class ParseError(GatehubError):
    """A config file could not be parsed; carries location context."""

    def __init__(self, message: str, path: str = "", field: str = "", line: int = 0):
        where = path
        if line:
            where += f":{line}"
        if field:
            where += f" (field {field})"
        super().__init__(f"{message} [{where}]" if where else message)
        self.path = path
        self.field = field
        self.line = line


class InvariantViolation(GatehubError):
    """Parsed data breaks a model invariant."""


class Unschedulable(GatehubError):
    """No queue can host the job, even with segmentation."""

    def __init__(self, job_id: str, reason: str):
        super().__init__(f"job '{job_id}' is unschedulable: {reason}")
        self.job_id = job_id
        self.reason = reason


class NotCheckpointable(GatehubError):
    """Segmentation requested for a component without checkpoint support."""


class IllegalTransition(GatehubError):
    """A job event is not legal in the job's current state."""

    def __init__(self, state: str, event: str):
        super().__init__(f"event '{event}' is illegal in state '{state}'")
        self.state = state
        self.event = event


class UnknownQueue(GatehubError):
    """Assignment names a queue the target site does not have."""


class UnknownRun(GatehubError):
    """No run record with the given id."""


class SpawnError(GatehubError):
    """Local executable could not be launched."""


class StagingError(GatehubError):
    """Input artifacts could not be staged into the job workdir."""


class MissingCheckpoint(GatehubError):
    """A follow-up segment started without its checkpoint file."""


class PermissionDenied(GatehubError):
    """Caller's role does not allow the action."""


class ValidationFailed(GatehubError):
    """Workflow validation reported violations."""

    def __init__(self, violations):
        super().__init__("; ".join(str(v) for v in violations) or "validation failed")
        self.violations = list(violations)


class VersionConflict(GatehubError):
    """A template with this (name, version) already exists."""


class AuthenticationFailed(GatehubError):
    """Missing, unknown, or expired credentials."""
