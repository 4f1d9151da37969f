"""Exception types shared across the pipeline."""


class GatewayError(Exception):
    """Base class for model gateway failures."""


class BackendTimeout(GatewayError):
    """Backend did not answer in time; batch calls may retry this."""


class DecodeError(GatewayError):
    """Backend produced output we cannot interpret (or a strict mock
    was asked for an unfixtured request)."""


class PlanValidationError(ValueError):
    """A coach plan (or model output destined for one) violates the schema."""


class EmptyPlanError(PlanValidationError):
    """No instructional content survived filtering."""


class CompileError(RuntimeError):
    """A pipeline stage failed permanently (after its repair retry)."""
