from .config import CompareConfig, ConfigError, ScanConfig, load_config
from .emit import emit, emit_comparison
from .presets import list_presets, preset_configs
from .scan import (ComparisonRecord, Spectrum, find_dips, fit_dip_fwhm,
                   run_compare, run_scan, scan_window)
