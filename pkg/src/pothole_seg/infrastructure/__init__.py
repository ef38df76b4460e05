"""Infrastructure layer - files, configuration and logging."""
