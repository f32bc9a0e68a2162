"""Data generation, Monte-Carlo experiments, audits and the ``dploc`` command line."""
