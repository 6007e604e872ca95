from .render import PlotJob, RenderResult, SchemaError, render

__all__ = ["PlotJob", "RenderResult", "SchemaError", "render"]
