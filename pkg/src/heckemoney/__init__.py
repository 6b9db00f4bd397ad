"""Quantum money from Hecke operators on quaternion ideal classes, simulated at desk scale."""

from .quaternion import AlgebraParams, MaximalOrder, ParameterError, Quaternion, maximal_order
from .lattice import Lattice, reduce, shortest_vectors
from .ideals import ClassGroupTable, IdealClassRep, LeftIdeal, TripleCode, canonical_rep, enumerate_classes
from .hecke import BrandtMatrix, EigenSystem, HeckeOperator, brandt_matrix, joint_eigensystem, restrict_and_symmetrize
from .money import Bill, ProtocolContext, Serial, StateVector, build_context, mint, verify
from .signing import MintKeys, generate_keys
from .wallet import Wallet

__version__ = "0.1.0"
