"""Exact computation of universal ordinary distributions over Z and F_q[T],
their sign-homology by several independent routes, and the associated rank
theorems, all in integer arithmetic."""

__version__ = "0.1.0"

from .znf import AbGroupInvariants, IntMatrix, SnfResult, cokernel, kernel_basis, snf
from .chainkit import (
    ActionModule,
    ChainComplex,
    ChainMap,
    DoubleComplex,
    HomologyTable,
    PresentedComplex,
    build_kt,
    companion,
    homology,
    make_complex,
    mapping_cone,
    twist,
)
from .arith import backend, gf_group, sign_group, xi_classes, y_fiber, y_map
from .distmod import build_af, lemma411_check, partition_tag, u_module, u_tower, xi0_basis
from .signh import sign_homology_U, tate_homology, verify_rank_theorem, functoriality_report
from .ftate import AlmostFreeSpec, ftate_closed_form, ftate_via_kt, thm442_lhs
from .skcx import build_sk, sk_inclusion_check, sk_quotients_homology
from .iwasawa import characters, u_values, uprime_compare, uprime_lattice

__all__ = [
    "AbGroupInvariants",
    "ActionModule",
    "AlmostFreeSpec",
    "ChainComplex",
    "ChainMap",
    "DoubleComplex",
    "HomologyTable",
    "IntMatrix",
    "PresentedComplex",
    "SnfResult",
    "backend",
    "build_af",
    "build_kt",
    "build_sk",
    "characters",
    "cokernel",
    "companion",
    "ftate_closed_form",
    "ftate_via_kt",
    "functoriality_report",
    "gf_group",
    "homology",
    "kernel_basis",
    "lemma411_check",
    "make_complex",
    "mapping_cone",
    "partition_tag",
    "sign_group",
    "sign_homology_U",
    "sk_inclusion_check",
    "sk_quotients_homology",
    "snf",
    "tate_homology",
    "thm442_lhs",
    "twist",
    "u_module",
    "u_tower",
    "u_values",
    "uprime_compare",
    "uprime_lattice",
    "verify_rank_theorem",
    "xi0_basis",
    "xi_classes",
    "y_fiber",
    "y_map",
]
