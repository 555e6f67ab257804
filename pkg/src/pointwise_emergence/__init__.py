"""Pointwise emergence of coded orbits.

Full-shift points and periodic families, exact W1 transport, code
construction over base orders, realized orbits, and covering-number
estimates of their accumulation sets.
"""
from .coded_orbit import (NewhouseRealization, SimpleRealization, SyntheticOrbit, SyntheticSpace,
                          checkpoint_bound, realize_shift_point, realize_synthetic_orbit,
                          verify_code_conditions)
from .emergence import (AccumulationSample, EmergenceCurve, EmergenceEstimator, SampleSpace,
                        accumulation_samples, covering_number_greedy, dyadic_grid, emergence_curve,
                        emergence_exponent, historic_lower_bound, packing_number_greedy, rho_L,
                        theory_lower_bound, verify_simplex_in_accumulation)
from .measures import (DiscreteMeasure, PeriodicFamily, Mbar, Tbar, empirical_measure, eta_inverse, eta_map,
                       iota_inverse, iota_map, lattice_grid, mbar, partial_empirical, periodic_measure,
                       simplex_grid, simplex_measure, tbar)
from .metric import HedgehogMetric, ShiftMetric, TableMetric
from .scheduling import (ConstantOrder, GeometricOrder, MasterCode, NewhouseOrder, PolynomialOrder,
                         SequenceOrder, ShiftCode, build_master_code, build_shift_code, find_k_for_T,
                         find_k_for_t, select_n_for_t)
from .shift import (CodedPoint, PaddedPoint, PeriodicPoint, ShiftPoint, apply_shift, periodic_point,
                    shift_metric)
from .transport import (CostMatrix, MeasureBatch, TransportError, TransportResult, brute_force_w1, cost_matrix,
                        w1, w1_dual_lower_bound, w1_exact)

__version__ = "0.1.0"
