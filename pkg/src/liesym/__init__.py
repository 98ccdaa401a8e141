"""liesym: exact Lie-symmetry analysis and auditing for second-order ODEs.

Pipeline: point symmetries by polynomial ansatz (detsolve), Lie algebra
structure and classification (liealg), optimal system (optimal), invariant
solutions (invariant), Jacobi Last Multiplier / Noether machinery (noether),
all over an exact rational expression kernel (exprcore) with deterministic
numeric audits (numeric).
"""

from importlib import resources

__version__ = "0.1.0"


def fixture_path(name: str):
    """Filesystem path of a bundled fixture JSON (e.g. 'ode_plus.json')."""
    return resources.files(__name__) / "fixtures" / name
