class ValidationError(ValueError):
    """Raised when an input violates a documented contract.

    ``problems`` holds one human-readable message per violation so callers
    (the CLI in particular) can report all of them at once.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
