"""Signal processing toolbox for brain-computer interfacing.

The central type is :class:`Data`, an immutable labeled tensor. All
operations are plain functions returning new objects; see the submodules
for details:

``bcikit.data``       container and helpers
``bcikit.buffers``    ring and block buffers for streaming
``bcikit.sigproc``    filtering, resampling, epoching, spectra
``bcikit.features``   class averages, jumping means, r-squared, CSP, SPoC
``bcikit.ml``         shrinkage covariance and LDA
``bcikit.formats``    on-disk container, marker and layout files
``bcikit.viz``        scalp maps and time-course plots (imported lazily)
``bcikit.online``     replay source and the online pipeline
"""

__version__ = "0.1.0"

from ._kernels import BACKEND  # noqa: E402
from .buffers import (  # noqa: E402
    BlockBuffer,
    RingBuffer,
    block_append_drain,
    block_flush,
    ring_append,
    ring_get,
)
from .data import (  # noqa: E402
    Data,
    MarkerList,
    axis_index,
    data_equal,
    make_data,
    sampling_rate,
    with_replaced,
)
from .errors import BciError  # noqa: E402
from .features import (  # noqa: E402
    CspModel,
    FeatureVectors,
    SpocModel,
    apply_csp,
    apply_spoc,
    classwise_average,
    create_feature_vectors,
    jumping_means,
    log_variance,
    signed_r_squared,
    train_csp,
    train_spoc,
)
from .formats import (  # noqa: E402
    ElectrodeLayout,
    default_layout,
    import_ascii_matrix,
    load_data,
    read_markers,
    save_data,
    write_markers,
)
from .ml import LdaModel, ShrinkageEstimate, apply_lda, predict, shrinkage_covariance, train_lda  # noqa: E402
from .online import (  # noqa: E402
    Decision,
    PipelineConfig,
    ReplaySource,
    csp_config,
    erp_config,
    pipeline_csp,
    pipeline_erp,
    replay_chunks,
    run_offline,
    run_online,
    speller_decision,
    train_csp_pipeline,
    train_erp,
)
from .sigproc import (  # noqa: E402
    FilterState,
    IirCoefficients,
    apply_filter,
    design_bandpass,
    filtfilt,
    remove_baseline,
    segment,
    select_channels,
    spectrogram,
    spectrum,
    subsample,
)
