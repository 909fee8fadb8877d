"""Exact Schubert calculus on Chow rings of projective homogeneous varieties G/P."""

from .rootdata import DynkinSpec, Root, RootSystem, build_root_system, coroot_pairing, reflect_weight
from .weyl import CosetTree, ParabolicSubset, WeylElement, WeylGroup, compose
from .polyops import Polynomial, c_map, divided_difference, weyl_generator_action
from .preimage import preimage_of
from .invariants import fundamental_invariants, invariant_ideal_basis
from .chowring import ChowClass, ChowRing
from .cache import Cache

__version__ = "0.1.0"
