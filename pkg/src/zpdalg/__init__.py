"""Exact deciders for zero product determined algebras."""
