"""Benchmark catalog, error norms, runners, exports and the fpm CLI."""

from .norms import ErrorReport, error_norms

__all__ = ["ErrorReport", "error_norms"]


def __getattr__(name):
    # catalog/runner/vtkio are imported lazily so the light modules (meshes,
    # norms) stay importable while the package is built up
    if name in ("CASES", "BenchmarkCase", "get_case"):
        from . import catalog
        return getattr(catalog, name)
    if name in ("run_case", "sweep_penalties", "write_results_csv"):
        from . import runner
        return getattr(runner, name)
    if name in ("export_field",):
        from . import vtkio
        return getattr(vtkio, name)
    raise AttributeError(name)
