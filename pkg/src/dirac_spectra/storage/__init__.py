"""Flat-file storage: plan documents and curves."""

from dirac_spectra.storage.curves import format_csv, read_potential, write_curve
from dirac_spectra.storage.plans import PlanDocument, load_plan, plan_echo

__all__ = ["PlanDocument", "load_plan", "plan_echo", "format_csv", "read_potential", "write_curve"]
