"""White blood cell differential counting on stained blood-smear images."""

from .binarize import ThresholdParams, hue_highpass, isodata_threshold, to_binary
from .classify import (
    CellClass,
    ClassifyParams,
    ShapeFeatures,
    classify_cell,
    classify_granulocyte,
    cytoplasm_mask,
    cytoplasm_stats,
    shape_features,
)
from .colorspace import (
    DEFAULT_BLUE_SET,
    DEFAULT_RED_SET,
    HsiImage,
    HsiPixel,
    MembershipDataSet,
    classify_color,
    convert_image,
    membership,
    rgb_to_hsi,
)
from .enhance import (
    EIGHT_NEIGHBOR_KERNEL,
    FOUR_NEIGHBOR_KERNEL,
    LaplacianKernel,
    laplacian,
    sharpen,
)
from .pipeline import (
    BatchSummary,
    CellRecord,
    DifferentialReport,
    PipelineConfig,
    count_field,
    render_overlay,
    run_batch,
)
from .raster import (
    BinaryMask,
    GrayImage,
    ImageReadError,
    LabelMatrix,
    Region,
    RgbImage,
    pixelwise_multiply,
    read_image,
    region_stats,
    subtract_mask,
    write_png,
)
from .regions import (
    StructuringElement,
    ValidityParams,
    dilate,
    fill_holes,
    label,
    ring_mask,
    separate_overlap,
    valid_contours,
)
from .synth import (
    DEFAULT_MIX,
    BackgroundParams,
    CellSpec,
    FieldSpec,
    GroundTruth,
    generate,
    generate_suite,
)

__version__ = "0.1.0"
