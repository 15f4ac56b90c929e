from .render import (PanelSpec, PlotError, PlotSpec, RenderInfo,
                     load_plot_spec, load_spectrum, render)

__version__ = "0.1.0"
