"""Neuroevolved tilemap level generators, solvers, and level metrics."""
