"""Exception roots shared across the pipeline.

Input problems (malformed programs, bad config, unusable layouts) derive from
``ValueError`` via :class:`InputError`; cost-model and precondition failures
derive from :class:`ModelError`.
"""


class InputError(ValueError):
    pass


class ModelError(ArithmeticError):
    pass
