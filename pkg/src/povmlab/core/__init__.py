from .catalog import (
    CatalogError, OverlapMatrix, NumberOperator, ObservableSpec,
    unsharp_number, phase_povm, canonical_phase, e1_phase, covariance_check,
    bounded_unsharp_position, gaussian_unsharp_position, halfline_localization,
    parse_observable, build_observable, observable_builder,
)

__all__ = [
    'CatalogError', 'OverlapMatrix', 'NumberOperator', 'ObservableSpec',
    'unsharp_number', 'phase_povm', 'canonical_phase', 'e1_phase', 'covariance_check',
    'bounded_unsharp_position', 'gaussian_unsharp_position', 'halfline_localization',
    'parse_observable', 'build_observable', 'observable_builder',
]
