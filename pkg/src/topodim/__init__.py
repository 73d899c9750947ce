"""Persistent-homology descriptors and intrinsic dimension of point clouds."""

from .descriptors import (
    DescriptorSpec,
    DescriptorValue,
    averaged_e_alpha,
    class_averaged_descriptor,
    e_alpha,
)
from .dimension import (
    IdEstimate,
    PhDimEstimate,
    SampleSchedule,
    correlation_dimension,
    fit_power_law,
    mle_id,
    ph_dim,
    twonn,
)
from .errors import (
    DegenerateFitError,
    DegenerateInputError,
    InvalidArgumentError,
    InvalidInputError,
    LoadError,
    NonEstimableError,
    ResourceLimitError,
    TopoDimError,
)
from .geometry import (
    DistanceMatrix,
    PointCloud,
    enclosing_radius,
    knn,
    pairwise_distances,
    subsample,
)
from .io import read_embedding_file, write_cloud
from .persistence import (
    PersistenceConfig,
    PersistenceDiagram,
    PersistenceInterval,
    betti_at,
    h0_persistence,
    mst_total_length,
    rips_persistence,
)
from .pipeline import (
    EmbeddingSource,
    LayerProfile,
    ModelRecord,
    ProfileConfig,
    generalization_report,
    global_average_pool,
    layer_profile,
    pearson_r,
)

__version__ = "0.1.0"
