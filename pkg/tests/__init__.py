"""Test package for povmlab."""
