from .sets import (
    SetKind, NatMode, MeasureKind, SetError,
    LineSet, CircleSet, NatSet, ReferenceMeasure,
    canonicalize, union, intersection, difference, complement, is_subset,
    measure, shift_circle, shrinking_family, growing_family, random_family,
)
from .operators import (
    OperatorError, OperatorClass, HermitianOperator, Effect, Projection, State,
    operator_norm, commutator_norm, classify, expectation,
)
from .kernels import (
    KernelError, KernelDomain, MarkovKernel, KernelWeight,
    GaussianKernel, BinomialKernel, ConvolutionKernel, PointKernel, MixtureKernel,
    gaussian_kernel, binomial_kernel, convolution_kernel, point_kernel, mixture_kernel,
    continuity_modulus, kernel_axiom_report,
)
from .povm import POVMError, Provenance, SpectralMeasure, POVM, smear, diagonal_povm
from .reports import (
    Verdict, ProbeMode, ContinuityReport, ScalingReport, Norm1Report,
    AbsoluteContinuityFit, OutcomeHistogram, AnalyzerReport, ClaimsTable,
)
from .config import AnalyzerName, RunConfig

__all__ = [
    'SetKind', 'NatMode', 'MeasureKind', 'SetError',
    'LineSet', 'CircleSet', 'NatSet', 'ReferenceMeasure',
    'canonicalize', 'union', 'intersection', 'difference', 'complement', 'is_subset',
    'measure', 'shift_circle', 'shrinking_family', 'growing_family', 'random_family',
    'OperatorError', 'OperatorClass', 'HermitianOperator', 'Effect', 'Projection', 'State',
    'operator_norm', 'commutator_norm', 'classify', 'expectation',
    'KernelError', 'KernelDomain', 'MarkovKernel', 'KernelWeight',
    'GaussianKernel', 'BinomialKernel', 'ConvolutionKernel', 'PointKernel', 'MixtureKernel',
    'gaussian_kernel', 'binomial_kernel', 'convolution_kernel', 'point_kernel', 'mixture_kernel',
    'continuity_modulus', 'kernel_axiom_report',
    'POVMError', 'Provenance', 'SpectralMeasure', 'POVM', 'smear', 'diagonal_povm',
    'Verdict', 'ProbeMode', 'ContinuityReport', 'ScalingReport', 'Norm1Report',
    'AbsoluteContinuityFit', 'OutcomeHistogram', 'AnalyzerReport', 'ClaimsTable',
    'AnalyzerName', 'RunConfig',
]
