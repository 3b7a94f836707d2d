"""HTTP service exposing the batch commands."""
