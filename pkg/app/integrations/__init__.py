"""Output integrations."""
