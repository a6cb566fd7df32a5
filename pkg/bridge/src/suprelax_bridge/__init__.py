from .api import BindingError, BoundExpr, Workspace, bind_eval, bind_range, bind_range_report
from .plotting import SchemaError, plot_sweep, read_sweep_csv

__all__ = [
    "BindingError",
    "BoundExpr",
    "Workspace",
    "bind_eval",
    "bind_range",
    "bind_range_report",
    "SchemaError",
    "plot_sweep",
    "read_sweep_csv",
]
