from .errors import (
    DomainError,
    QuadratureError,
    SequenceFileError,
    MissingSequenceFile,
    MalformedSequenceRow,
    NonIncreasingColumn,
)
from .torus import NormKind, TorusPoint, TorusPointSet, intdist, dilate_frac, translate, uniform_points
from .sequences import (
    Family,
    SequenceMeta,
    SequenceMatrix,
    SpacingCertificate,
    gen_power,
    gen_nlog,
    load_sequence,
    save_sequence,
    check_spacing,
    build_sequence,
)
from .paircorr import CountMethod, PairCorrCurve, pair_count, r2_count, r2_curve, mean_curve
from .energy import (
    DyadicBlock,
    EnergyReport,
    WattDiagnostic,
    energy_1d,
    joint_energy,
    block_energy,
    brute_energy,
    fit_exponent,
    energy_report,
    dilated_pair_count,
    watt_ratio,
)
from .harmonic import Sign, TrigPolynomial, MeasureSpec, KernelParams, selberg_poly, mu_sample, mu_hat
from .variance import VarianceEstimate, DecayReport, pair_statistic, variance_estimate, variance_decay
