from .file_utils import load_json, load_yaml, save_json, dump_json, write_text_file
from .numeric_utils import normal_cdf, binomial_pmf, format_float, make_rng

__all__ = [
    'load_json', 'load_yaml', 'save_json', 'dump_json', 'write_text_file',
    'normal_cdf', 'binomial_pmf', 'format_float', 'make_rng',
]
