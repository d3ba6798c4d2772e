"""Photon creation by a semiconductor plasma mirror and its detection with Rydberg atoms.

Modules
-------
cavity_modes
    Slab-cavity mode model and the time-dependent coupling schedules.
squeezing
    Bogoliubov integration, rotating-wave closed forms and thresholds.
detection
    Rydberg-atom excitation and the detection feasibility conditions.
planner
    From a photon target and laser budget to a detection verdict.
cli
    ``plasmadce`` command line.
"""

__version__ = "0.1.0"
