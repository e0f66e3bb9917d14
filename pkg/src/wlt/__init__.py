"""Weak-linear types: checker, store machine, memory profiler and meta-theory harness."""
from .kernels import BACKEND
from .surface import ParseError, parse_expr, parse_program, parse_signature, parse_type
from .syntax import HI, LI, UN, QualifiedSignature, Type, TypeContext
from .typecheck import TypeCheckError, split_check, pseudosplit_check, type_of
from .machine import Configuration, Machine, PrimitiveTable, Store, Value

__all__ = [
    "BACKEND", "ParseError", "parse_expr", "parse_program", "parse_signature", "parse_type",
    "HI", "LI", "UN", "QualifiedSignature", "Type", "TypeContext", "TypeCheckError",
    "split_check", "pseudosplit_check", "type_of", "Configuration", "Machine", "PrimitiveTable",
    "Store", "Value",
]
__version__ = "0.1.0"
