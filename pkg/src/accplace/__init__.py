"""Electrostatic global placement with a precorrected coarse-grid field solver."""

from .accfft import AccFFTSolver, acc_field, build_projection, build_window_plan, coarsen
from .density import build_grid, compute_density, compute_overflow, insert_fillers, to_charges
from .field import FineFFTSolver, direct_field, fft_field_fine
from .netlist import Netlist, gen_synthetic, parse_bookshelf, write_pl
from .placer import RunConfig, RunReport, run_global_placement
from .wirelength import WAParams, hpwl, wa_gradient, wa_wirelength

__version__ = "0.1.0"

__all__ = ["AccFFTSolver", "acc_field", "build_projection", "build_window_plan", "coarsen", "build_grid",
           "compute_density", "compute_overflow", "insert_fillers", "to_charges", "FineFFTSolver",
           "direct_field", "fft_field_fine", "Netlist", "gen_synthetic", "parse_bookshelf", "write_pl",
           "RunConfig", "RunReport", "run_global_placement", "WAParams", "hpwl", "wa_gradient",
           "wa_wirelength"]
