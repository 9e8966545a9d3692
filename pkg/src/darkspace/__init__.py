"""darkspace: ground-to-satellite spectrum coexistence toolkit.

Computes real-time geofencing (dark/white-space) schedules that protect
passive microwave radiometers from terrestrial mm-wave transmitters,
evaluates ground-to-satellite link budgets, plans ON/OFF flashlight
measurement campaigns, and runs LOS / two-ray interference compliance
simulations.
"""

__version__ = "0.1.0"
