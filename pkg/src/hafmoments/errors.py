class CapExceededError(ValueError):
    """A computation was requested above its configured enumeration cap."""
