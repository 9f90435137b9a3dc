"""One-sample maximum likelihood estimation for Brownian motion tree models."""
